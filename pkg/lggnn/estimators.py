import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from graphons.graphs import PairSet
from lggnn_lab.exceptions import ParameterError

from .embedding import EmbeddingTable

logger = logging.getLogger(__name__)


@dataclass
class MomentEstimates:
    """q-hat^(k) for k = 2..L+2, stored as values[k - 2] (an n x n matrix).

    Diagonal entries are not estimates and are never read.
    """

    values: np.ndarray
    symmetric: bool = True

    @property
    def L(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def num_features(self) -> int:
        return self.values.shape[0]

    def order(self, k: int) -> np.ndarray:
        if not 2 <= k <= self.L + 2:
            raise ParameterError(f"moment order {k} outside 2..{self.L + 2}")
        return self.values[k - 2]

    def pair_features(self, rows, cols) -> np.ndarray:
        """(m, L+1) design rows q-hat_ij^(2..L+2), read at (min, max) of each pair."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
        return self.values[:, lo, hi].T

    def features_for(self, pairs: PairSet) -> np.ndarray:
        return self.pair_features(pairs.rows, pairs.cols)

    def scaled(self, factor: float) -> "MomentEstimates":
        return MomentEstimates(values=self.values * factor, symmetric=self.symmetric)


def binomial_recursion(dot_products: np.ndarray) -> np.ndarray:
    """Invert <lambda_i^(k-2), lambda_j^0> = sum_r C(k-2, r) q^(r+2) for the q's."""
    estimates = np.empty_like(dot_products)
    for m in range(dot_products.shape[0]):
        current = dot_products[m].copy()
        for r in range(m):
            current -= comb(m, r, exact=True) * estimates[r]
        estimates[m] = current
    return estimates


def moment_estimates(emb: EmbeddingTable, symmetrize: bool = True) -> MomentEstimates:
    """q-hat_ij^(k) from the dot products <lambda_i^(k-2), lambda_j^0>.

    With symmetrize, each matrix is replaced by (Q + Q^T) / 2; otherwise the
    stored (i, j), i < j, entry is the raw evaluation.
    """
    base = emb.layer(0)
    dot_products = np.empty((emb.L + 1, emb.n, emb.n))
    for m in range(emb.L + 1):
        dot_products[m] = emb.layer(m) @ base.T

    estimates = binomial_recursion(dot_products)
    if symmetrize:
        estimates = (estimates + estimates.transpose(0, 2, 1)) / 2.0
    logger.info(f"Computed moment estimates n={emb.n} orders 2..{emb.L + 2}")
    return MomentEstimates(values=estimates, symmetric=symmetrize)


def reconstruct_dot_products(moments: MomentEstimates) -> np.ndarray:
    """Apply the binomial identity forwards: sum_r C(m, r) q^(r+2)."""
    values = moments.values
    out = np.zeros_like(values)
    for m in range(values.shape[0]):
        for r in range(m + 1):
            out[m] += comb(m, r, exact=True) * values[r]
    return out

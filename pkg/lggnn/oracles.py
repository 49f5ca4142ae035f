"""Brute-force references built from adjacency matrix powers.

W-hat^(k)_ij = (A^k)_ij / (n - 1)^(k - 1) counts length-k walks between i and j.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from scipy.special import comb, factorial

from graphons.families import BlockGraphon
from graphons.graphs import SampledGraph
from lggnn_lab.exceptions import ParameterError, UnsupportedModelError, UnsupportedOrderError

from .estimators import MomentEstimates

logger = logging.getLogger(__name__)

MAX_ORDER = 8
# Walk counts stay exact in int64 below this magnitude
INT64_SAFE = 2 ** 62


@dataclass
class EmpiricalMoments:
    n: int
    values: Dict[int, np.ndarray] = field(default_factory=dict)
    exact: bool = True

    @property
    def orders(self):
        return sorted(self.values)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.values[k]


def walk_count_matrices(graph: SampledGraph, k_max: int) -> Dict[int, np.ndarray]:
    """A^k for k = 1..k_max by repeated sparse-dense multiplication.

    Integer accumulation while d_max^(k-1) stays below 2^62, float64 beyond.
    """
    degrees = graph.degrees
    d_max = int(degrees.max()) if degrees.size else 0
    exact = d_max <= 1 or (k_max - 1) * math.log2(d_max) < math.log2(INT64_SAFE)
    dtype = np.int64 if exact else np.float64
    if not exact:
        logger.warning(
            f"Walk counts up to order {k_max} may exceed int64 (max degree {d_max}); "
            f"accumulating in float64"
        )

    A = graph.adjacency.astype(dtype)
    counts = {1: A.toarray()}
    for k in range(2, k_max + 1):
        counts[k] = np.asarray(A @ counts[k - 1])
    return counts


def walk_moments(graph: SampledGraph, k_max: int, k_min: int = 1) -> EmpiricalMoments:
    n = graph.n
    counts = walk_count_matrices(graph, k_max)
    exact = counts[1].dtype == np.int64
    values = {}
    for k in range(k_min, k_max + 1):
        values[k] = counts[k] / float((n - 1) ** (k - 1))
    return EmpiricalMoments(n=n, values=values, exact=exact)


def empirical_moments(graph: SampledGraph, k_max: int) -> EmpiricalMoments:
    """Empirical moments of orders 2..k_max."""
    if k_max > MAX_ORDER:
        raise UnsupportedOrderError(f"empirical moments are limited to order {MAX_ORDER}, got {k_max}")
    if k_max < 2:
        raise ParameterError(f"k_max must be >= 2, got {k_max}")
    return walk_moments(graph, k_max, k_min=2)


def expected_dotproduct_oracle(graph: SampledGraph, k1: int, k2: int) -> np.ndarray:
    """E[<lambda_i^k1, lambda_j^k2> | A] for identity-weight LG-GNN layers.

    Equals sum_{q1 <= k1, q2 <= k2} C(k1, q1) C(k2, q2) W-hat^(q1 + q2 + 2).
    """
    if k1 < 0 or k2 < 0:
        raise ParameterError("layer indices must be >= 0")
    moments = walk_moments(graph, k1 + k2 + 2, k_min=2)
    out = np.zeros((graph.n, graph.n))
    for q1 in range(k1 + 1):
        for q2 in range(k2 + 1):
            weight = comb(k1, q1, exact=True) * comb(k2, q2, exact=True)
            out += weight * moments[q1 + q2 + 2]
    return out


def embedding_expansion(graph: SampledGraph, features: np.ndarray, k: int) -> np.ndarray:
    """lambda^k = (1 / sqrt(n - 1)) sum_q C(k, q) W-hat^(q+1) Z, computed from matrix powers."""
    moments = walk_moments(graph, k + 1, k_min=1)
    mixing = np.zeros((graph.n, graph.n))
    for q in range(k + 1):
        mixing += comb(k, q, exact=True) * moments[q + 1]
    return mixing @ features / math.sqrt(graph.n - 1)


def _a(k: int) -> float:
    return (8 * (k + 2)) ** k * k ** (k + 1) * math.sqrt(factorial(k, exact=True))


@dataclass
class RateDiagnostic:
    """Rate quantity with the unknown absolute constant set to 1."""

    value: float
    argmax_order: int
    diagnostic_only: bool = True

    def to_dict(self):
        return {
            "value": self.value,
            "argmax_order": self.argmax_order,
            "diagnostic_only": self.diagnostic_only,
        }


def rate_r(n: int, d: int, m: int, rho: float) -> RateDiagnostic:
    """max_{2 <= k <= m+1} (log n)^k / sqrt(n-1) * [3 a_k sqrt(rho) + 96 a_(k-1) / sqrt(d)]."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    best_value, best_k = -math.inf, 2
    for k in range(2, m + 2):
        value = math.log(n) ** k / math.sqrt(n - 1) * (
            3 * _a(k) * math.sqrt(rho) + 96 * _a(k - 1) / math.sqrt(d)
        )
        if value > best_value:
            best_value, best_k = value, k
    return RateDiagnostic(value=best_value, argmax_order=best_k)


def population_moments(graph: SampledGraph, L: int) -> MomentEstimates:
    """W_n^(k)(omega_i, omega_j) = rho^k W^(k) for k = 2..L+2, in estimator layout.

    Only block graphs qualify: their moments are exact block values.
    """
    if not isinstance(graph.model, BlockGraphon) or graph.communities is None:
        raise UnsupportedModelError("population moments need a sampled block-model graph")
    labels = graph.communities
    values = np.empty((L + 1, graph.n, graph.n))
    for k in range(2, L + 3):
        blocks = graph.rho ** k * graph.model.block_moment_matrix(k)
        values[k - 2] = blocks[labels[:, None], labels[None, :]]
    return MomentEstimates(values=values, symmetric=True)

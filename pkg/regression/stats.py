import logging
from dataclasses import dataclass
from typing import Callable, Iterator, Tuple, Union

import numpy as np

from graphons.graphs import PairSet, SampledGraph
from lggnn.estimators import MomentEstimates
from lggnn_lab.exceptions import EmptyDataError, ParameterError

logger = logging.getLogger(__name__)

PairFilter = Union[None, PairSet, np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]]

# Pairs per streamed block
BLOCK_PAIRS = 1 << 18


@dataclass
class SufficientStats:
    """Normal-equation totals over a set of training pairs.

    gram = sum q q^T, cross = sum a q, target_ss = sum a^2.
    """

    gram: np.ndarray
    cross: np.ndarray
    target_ss: float
    pair_count: int

    @classmethod
    def zeros(cls, num_features: int) -> "SufficientStats":
        return cls(
            gram=np.zeros((num_features, num_features)),
            cross=np.zeros(num_features),
            target_ss=0.0,
            pair_count=0,
        )

    @property
    def num_features(self) -> int:
        return self.cross.size

    def add_block(self, features: np.ndarray, targets: np.ndarray) -> None:
        self.gram += features.T @ features
        self.cross += features.T @ targets
        self.target_ss += float(targets @ targets)
        self.pair_count += int(targets.size)

    def merge(self, other: "SufficientStats") -> "SufficientStats":
        if other.num_features != self.num_features:
            raise ParameterError(
                f"cannot merge statistics over {self.num_features} and {other.num_features} features"
            )
        return SufficientStats(
            gram=self.gram + other.gram,
            cross=self.cross + other.cross,
            target_ss=self.target_ss + other.target_ss,
            pair_count=self.pair_count + other.pair_count,
        )

    def objective(self, beta: np.ndarray) -> float:
        """(beta^T G beta - 2 beta^T c + s) / N."""
        beta = np.asarray(beta, dtype=float)
        total = beta @ self.gram @ beta - 2.0 * beta @ self.cross + self.target_ss
        return float(total / self.pair_count)


def _upper_block(n: int, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
    rows = np.arange(start, stop)
    cols = np.arange(n)
    mask = cols[None, :] > rows[:, None]
    local_rows, local_cols = np.nonzero(mask)
    return rows[local_rows], cols[local_cols]


def iter_pair_blocks(n: int, pair_filter: PairFilter = None,
                     block_pairs: int = BLOCK_PAIRS) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (rows, cols) blocks of accepted pairs i < j in a fixed order.

    pair_filter may be a PairSet, an n x n boolean mask (upper triangle is
    read), a callable (rows, cols) -> bool array, or None for every pair.
    """
    if isinstance(pair_filter, PairSet):
        if pair_filter.n != n:
            raise ParameterError(f"pair set over {pair_filter.n} vertices, graph has {n}")
        for start in range(0, len(pair_filter), block_pairs):
            stop = start + block_pairs
            yield pair_filter.rows[start:stop], pair_filter.cols[start:stop]
        return

    if isinstance(pair_filter, np.ndarray) and pair_filter.shape != (n, n):
        raise ParameterError(f"pair mask has shape {pair_filter.shape}, expected {(n, n)}")

    rows_per_block = max(1, block_pairs // max(n, 1))
    for start in range(0, n, rows_per_block):
        rows, cols = _upper_block(n, start, min(n, start + rows_per_block))
        if pair_filter is None:
            keep = None
        elif isinstance(pair_filter, np.ndarray):
            keep = pair_filter[rows, cols].astype(bool)
        else:
            keep = np.asarray(pair_filter(rows, cols), dtype=bool)
        if keep is not None:
            rows, cols = rows[keep], cols[keep]
        if rows.size:
            yield rows, cols


def _check_shapes(moments: MomentEstimates, graph: SampledGraph) -> None:
    if moments.n != graph.n:
        raise ParameterError(f"moments cover {moments.n} vertices, graph has {graph.n}")


def accumulate_stats(moments: MomentEstimates, graph: SampledGraph,
                     pair_filter: PairFilter = None,
                     block_pairs: int = BLOCK_PAIRS) -> SufficientStats:
    """Stream the design rows q-hat_ij and labels a_ij over accepted pairs."""
    _check_shapes(moments, graph)
    stats = SufficientStats.zeros(moments.num_features)
    for rows, cols in iter_pair_blocks(graph.n, pair_filter, block_pairs):
        features = moments.pair_features(rows, cols)
        targets = graph.has_edge(rows, cols).astype(float)
        stats.add_block(features, targets)

    if stats.pair_count == 0:
        raise EmptyDataError("pair filter accepted no pairs")
    logger.info(
        f"Accumulated regression statistics over {stats.pair_count} pairs "
        f"({int(stats.target_ss)} positive)"
    )
    return stats


def design_matrix(moments: MomentEstimates, graph: SampledGraph,
                  pair_filter: PairFilter = None) -> Tuple[np.ndarray, np.ndarray]:
    """Materialized (X, y) over accepted pairs, rows in iteration order."""
    _check_shapes(moments, graph)
    features, targets = [], []
    for rows, cols in iter_pair_blocks(graph.n, pair_filter):
        features.append(moments.pair_features(rows, cols))
        targets.append(graph.has_edge(rows, cols).astype(float))
    if not targets:
        raise EmptyDataError("pair filter accepted no pairs")
    return np.concatenate(features), np.concatenate(targets)


def pair_scores(beta: np.ndarray, moments: MomentEstimates, rows, cols,
                intercept: float = 0.0) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.size != moments.num_features:
        raise ParameterError(
            f"beta has {beta.size} coefficients, moments provide {moments.num_features} orders"
        )
    return moments.pair_features(rows, cols) @ beta + intercept


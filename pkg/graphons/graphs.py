import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional

import numpy as np
import scipy.sparse as sp

from lggnn_lab.exceptions import MetricError, ParameterError

logger = logging.getLogger(__name__)


class PairSet:
    """Unordered vertex pairs stored canonically as (rows < cols), sorted."""

    def __init__(self, rows, cols, n: int):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            raise ParameterError("pair rows and cols must have equal length")
        if np.any(rows == cols):
            raise ParameterError("pairs must join distinct vertices")
        if rows.size and (min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= n):
            raise ParameterError(f"pair index outside [0, {n})")
        lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
        keys = np.unique(lo * n + hi)
        self.n = int(n)
        self.keys = keys
        self.rows = keys // n
        self.cols = keys % n

    @classmethod
    def from_keys(cls, keys, n: int) -> "PairSet":
        keys = np.asarray(keys, dtype=np.int64)
        return cls(keys // n, keys % n, n)

    @classmethod
    def all_pairs(cls, n: int) -> "PairSet":
        rows, cols = np.triu_indices(n, k=1)
        return cls(rows, cols, n)

    @classmethod
    def empty(cls, n: int) -> "PairSet":
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), n)

    def __len__(self):
        return int(self.keys.size)

    def __iter__(self):
        return iter(zip(self.rows.tolist(), self.cols.tolist()))

    def __repr__(self):
        return f"PairSet(n={self.n}, size={len(self)})"

    def _check_compatible(self, other: "PairSet"):
        if other.n != self.n:
            raise ParameterError(f"pair sets over different vertex counts: {self.n} vs {other.n}")

    def union(self, other: "PairSet") -> "PairSet":
        self._check_compatible(other)
        return PairSet.from_keys(np.union1d(self.keys, other.keys), self.n)

    def difference(self, other: "PairSet") -> "PairSet":
        self._check_compatible(other)
        return PairSet.from_keys(np.setdiff1d(self.keys, other.keys, assume_unique=True), self.n)

    def intersection(self, other: "PairSet") -> "PairSet":
        self._check_compatible(other)
        return PairSet.from_keys(np.intersect1d(self.keys, other.keys, assume_unique=True), self.n)

    def isdisjoint(self, other: "PairSet") -> bool:
        return len(self.intersection(other)) == 0

    def contains(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        keys = np.minimum(rows, cols) * self.n + np.maximum(rows, cols)
        return np.isin(keys, self.keys)

    def select(self, mask) -> "PairSet":
        return PairSet.from_keys(self.keys[np.asarray(mask, dtype=bool)], self.n)

    def take(self, indices) -> "PairSet":
        return PairSet.from_keys(self.keys[np.asarray(indices, dtype=np.int64)], self.n)

    def subsample(self, size: int, rng: np.random.Generator) -> "PairSet":
        if size >= len(self):
            return self
        return self.take(np.sort(rng.choice(len(self), size=size, replace=False)))

    def relabel(self, mapping: np.ndarray, n: int) -> "PairSet":
        """Map vertex ids through mapping (old id -> new id) into an n-vertex universe."""
        return PairSet(mapping[self.rows], mapping[self.cols], n)


@dataclass
class SampledGraph:
    """Undirected simple graph with optional latent description.

    Synthetic graphs carry their generating model and latents; loaded graphs
    carry neither and report the empirical density as rho.
    """

    adjacency: sp.csr_matrix
    rho: float
    seed: Optional[int] = None
    latents: Optional[np.ndarray] = None
    model: Any = None
    communities: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        adjacency = sp.csr_matrix(self.adjacency, dtype=np.float64, copy=True)
        if adjacency.shape[0] != adjacency.shape[1]:
            raise ParameterError(f"adjacency must be square, got {adjacency.shape}")
        adjacency.sum_duplicates()
        adjacency.eliminate_zeros()
        adjacency.sort_indices()
        self.adjacency = adjacency
        if not 0.0 < float(self.rho) <= 1.0:
            raise ParameterError(f"rho must lie in (0, 1], got {self.rho}")
        self.rho = float(self.rho)

    @classmethod
    def from_edges(cls, n: int, edges, rho: Optional[float] = None, **kwargs) -> "SampledGraph":
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        edges = edges[edges[:, 0] != edges[:, 1]]
        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        data = np.ones(rows.size, dtype=np.float64)
        adjacency = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        adjacency.sum_duplicates()
        # Duplicate edges are merged, not counted twice
        adjacency.data[:] = 1.0
        if rho is None:
            rho = empirical_density(n, adjacency.nnz // 2)
            rho = rho if rho > 0 else 1.0
        return cls(adjacency=adjacency, rho=rho, **kwargs)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.nnz // 2)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    @property
    def density(self) -> float:
        return empirical_density(self.n, self.num_edges)

    @property
    def has_latents(self) -> bool:
        return self.latents is not None and self.model is not None

    def edges(self) -> PairSet:
        upper = sp.triu(self.adjacency, k=1).tocoo()
        return PairSet(upper.row, upper.col, self.n)

    @cached_property
    def edge_keys(self) -> np.ndarray:
        return self.edges().keys

    def has_edge(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        keys = np.minimum(rows, cols) * self.n + np.maximum(rows, cols)
        return np.isin(keys, self.edge_keys)

    def edge_probabilities(self, rows, cols) -> np.ndarray:
        """True connection probabilities rho * W(omega_i, omega_j)."""
        if not self.has_latents:
            raise MetricError("true edge probabilities need a synthetic graph with latents")
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if self.latents.ndim == 1:
            values = self.model.kernel(self.latents[rows], self.latents[cols])
        else:
            inner = np.einsum("ij,ij->i", self.latents[rows], self.latents[cols])
            values = (inner >= self.model.t).astype(float)
        return self.rho * np.asarray(values, dtype=float)

    def with_edges(self, edges: PairSet, **overrides) -> "SampledGraph":
        """Same vertices and latents, different edge set."""
        adjacency = sp.csr_matrix(
            (np.ones(2 * len(edges)), (np.concatenate([edges.rows, edges.cols]),
                                       np.concatenate([edges.cols, edges.rows]))),
            shape=(self.n, self.n),
        )
        params = dict(
            rho=self.rho, seed=self.seed, latents=self.latents, model=self.model,
            communities=self.communities, metadata=dict(self.metadata),
        )
        params.update(overrides)
        return SampledGraph(adjacency=adjacency, **params)

    def subgraph(self, vertices) -> "SampledGraph":
        """Induced subgraph, vertices relabelled 0..len(vertices)-1 in the given order."""
        vertices = np.asarray(vertices, dtype=np.int64)
        adjacency = self.adjacency[vertices][:, vertices]
        return SampledGraph(
            adjacency=adjacency,
            rho=self.rho,
            seed=self.seed,
            latents=None if self.latents is None else self.latents[vertices],
            model=self.model,
            communities=None if self.communities is None else self.communities[vertices],
            metadata=dict(self.metadata, parent_vertices=len(vertices)),
        )

    def describe(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "edges": self.num_edges,
            "rho": self.rho,
            "density": self.density,
            "seed": self.seed,
            "model": None if self.model is None else self.model.to_spec(),
            "has_latents": self.has_latents,
        }


def empirical_density(n: int, num_edges: int) -> float:
    """rho-hat = 2|E| / (n (n - 1))."""
    if n < 2:
        return 0.0
    return 2.0 * num_edges / (n * (n - 1))

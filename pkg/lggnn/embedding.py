import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from graphons.graphs import SampledGraph
from graphons.sampling import make_generator
from lggnn_lab.exceptions import ParameterError

logger = logging.getLogger(__name__)


def default_dimension(rho: float) -> int:
    """d_n = max(64, ceil(4 / rho_n))."""
    return max(64, math.ceil(4.0 / rho))


def resolve_dimension(policy, n: int, rho: float) -> int:
    if policy in (None, "auto"):
        return default_dimension(rho)
    if policy == "n":
        return n
    d = int(policy)
    if d < 1:
        raise ParameterError(f"embedding dimension must be >= 1, got {d}")
    return d


def init_features(n: int, d: int, seed: int) -> np.ndarray:
    """n x d matrix of i.i.d. Normal(0, 1/d) entries."""
    if d < 1:
        raise ParameterError(f"embedding dimension must be >= 1, got {d}")
    if n < 1:
        raise ParameterError(f"vertex count must be >= 1, got {n}")
    rng = make_generator(np.random.SeedSequence(seed))
    return rng.normal(0.0, 1.0 / math.sqrt(d), size=(n, d))


@dataclass
class EmbeddingTable:
    """Layered vertex embeddings; layers[k, i] is lambda_i^k."""

    layers: np.ndarray
    feature_seed: Optional[int] = None
    method: str = "lggnn"
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def L(self) -> int:
        return self.layers.shape[0] - 1

    @property
    def n(self) -> int:
        return self.layers.shape[1]

    @property
    def d(self) -> int:
        return self.layers.shape[2]

    def layer(self, k: int) -> np.ndarray:
        return self.layers[k]

    def to_frame(self) -> pd.DataFrame:
        """One row per vertex, one column block per layer."""
        flat = np.concatenate(list(self.layers), axis=1)
        columns = [f"layer{k}_{c}" for k in range(self.L + 1) for c in range(self.d)]
        frame = pd.DataFrame(flat, columns=columns)
        frame.index.name = "vertex"
        return frame

    def export(self, path) -> Path:
        """Write .npy (shape (L+1, n, d)) or .csv depending on the suffix."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix == ".npy":
            np.save(path, self.layers)
        elif path.suffix == ".csv":
            self.to_frame().to_csv(path)
        else:
            raise ParameterError(f"Unsupported embedding export format: {path.suffix}")
        logger.info(f"Exported {self.method} embeddings n={self.n} L={self.L} d={self.d} to {path}")
        return path


def propagate(adjacency, features: np.ndarray, L: int) -> np.ndarray:
    """Two-phase LG-GNN message passing with identity weights.

    lambda^0 = A Z / sqrt(n - 1); lambda^k = lambda^(k-1) + A lambda^(k-1) / (n - 1).
    """
    if L < 0:
        raise ParameterError(f"layer count must be >= 0, got {L}")
    n, d = features.shape
    scale = float(n - 1) if n > 1 else 1.0
    layers = np.empty((L + 1, n, d))
    layers[0] = adjacency @ features / math.sqrt(scale)
    for k in range(1, L + 1):
        layers[k] = layers[k - 1] + adjacency @ layers[k - 1] / scale
    return layers


def embed(
    graph: SampledGraph,
    L: int,
    d: Optional[int] = None,
    seed: int = 0,
    features: Optional[np.ndarray] = None,
) -> EmbeddingTable:
    if d is None:
        d = default_dimension(graph.rho)
    if features is None:
        features = init_features(graph.n, d, seed)
    elif features.shape[0] != graph.n:
        raise ParameterError(f"features have {features.shape[0]} rows for {graph.n} vertices")

    layers = propagate(graph.adjacency, features, L)
    logger.info(f"Embedded graph n={graph.n} with L={L} d={features.shape[1]} seed={seed}")
    return EmbeddingTable(layers=layers, feature_seed=seed, method="lggnn")

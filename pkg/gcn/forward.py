import logging
import math
from dataclasses import asdict, dataclass
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from graphons.graphs import PairSet, SampledGraph
from graphons.sampling import make_generator
from lggnn.embedding import EmbeddingTable
from lggnn_lab.exceptions import ParameterError

logger = logging.getLogger(__name__)

ACTIVATIONS = {
    "identity": lambda x: x,
    "relu": lambda x: np.maximum(x, 0.0),
}
WEIGHT_MODES = ("identity", "fixed_random")


@dataclass
class GcnConfig:
    """Untrained GCN: lambda_i^k = sigma(M_k0 lambda_i^(k-1) + M_k1 sum_j lambda_j^(k-1) / sqrt(|N(i)| |N(j)|)).

    With self_loop off the M_k0 term is dropped.
    """

    L: int = 2
    d: int = 64
    activation: str = "identity"
    weight_mode: str = "identity"
    weight_seed: int = 0
    op_norm_cap: float = 1.0
    init_scale: float = 1.0
    self_loop: bool = True

    def __post_init__(self):
        if self.L < 0:
            raise ParameterError(f"layer count must be >= 0, got {self.L}")
        if self.d < 1:
            raise ParameterError(f"embedding dimension must be >= 1, got {self.d}")
        if self.activation not in ACTIVATIONS:
            raise ParameterError(
                f"Unknown activation: {self.activation}. Available: {', '.join(ACTIVATIONS)}"
            )
        if self.weight_mode not in WEIGHT_MODES:
            raise ParameterError(
                f"Unknown weight mode: {self.weight_mode}. Available: {', '.join(WEIGHT_MODES)}"
            )
        if self.op_norm_cap <= 0:
            raise ParameterError(f"operator norm cap must be positive, got {self.op_norm_cap}")
        if self.init_scale <= 0:
            raise ParameterError(f"init scale must be positive, got {self.init_scale}")

    def to_dict(self):
        return asdict(self)


def gcn_weights(cfg: GcnConfig) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(M_k0, M_k1) for k = 1..L, each with operator norm at most the cap."""
    if cfg.weight_mode == "identity":
        eye = min(1.0, cfg.op_norm_cap) * np.eye(cfg.d)
        return [(eye, eye) for _ in range(cfg.L)]

    weights = []
    streams = np.random.SeedSequence(cfg.weight_seed).spawn(2 * cfg.L)
    for k in range(cfg.L):
        pair = []
        for stream in streams[2 * k: 2 * k + 2]:
            matrix = make_generator(stream).normal(size=(cfg.d, cfg.d))
            norm = np.linalg.norm(matrix, 2)
            if norm > cfg.op_norm_cap:
                matrix *= cfg.op_norm_cap / norm
            pair.append(matrix)
        weights.append(tuple(pair))
    return weights


def normalized_adjacency(graph: SampledGraph) -> sp.csr_matrix:
    """D^(-1/2) A D^(-1/2); isolated vertices get an all-zero row."""
    degrees = graph.degrees.astype(float)
    inv_sqrt = np.zeros_like(degrees)
    nonzero = degrees > 0
    inv_sqrt[nonzero] = 1.0 / np.sqrt(degrees[nonzero])
    scaling = sp.diags(inv_sqrt)
    return sp.csr_matrix(scaling @ graph.adjacency @ scaling)


def gcn_forward(graph: SampledGraph, cfg: GcnConfig, seed: int = 0) -> EmbeddingTable:
    rng = make_generator(np.random.SeedSequence(seed))
    layers = np.empty((cfg.L + 1, graph.n, cfg.d))
    layers[0] = rng.normal(0.0, cfg.init_scale / math.sqrt(cfg.d), size=(graph.n, cfg.d))

    sigma = ACTIVATIONS[cfg.activation]
    aggregate = normalized_adjacency(graph)
    for k, (self_weight, neighbour_weight) in enumerate(gcn_weights(cfg), start=1):
        previous = layers[k - 1]
        update = aggregate @ previous @ neighbour_weight.T
        if cfg.self_loop:
            update = update + previous @ self_weight.T
        layers[k] = sigma(update)

    logger.info(
        f"GCN forward n={graph.n} L={cfg.L} d={cfg.d} activation={cfg.activation} "
        f"weights={cfg.weight_mode} seed={seed}"
    )
    return EmbeddingTable(layers=layers, feature_seed=seed, method="gcn", metadata=cfg.to_dict())


def gcn_scores(emb: EmbeddingTable, pairs: PairSet) -> np.ndarray:
    """Dot-product decoder sigmoid(<lambda_i^L, lambda_j^L>)."""
    final = emb.layer(emb.L)
    inner = np.einsum("ij,ij->i", final[pairs.rows], final[pairs.cols])
    return expit(inner)

import logging
import math

import numpy as np
import scipy.sparse as sp

from lggnn_lab.exceptions import ParameterError

from .families import BaseGraphon, GeometricGraphon
from .graphs import SampledGraph

logger = logging.getLogger(__name__)

RHO_MODES = ("one", "inv_sqrt_n", "log_n_over_n")


def make_generator(seed_sequence: np.random.SeedSequence) -> np.random.Generator:
    """Counter-based generator for one sub-stream."""
    return np.random.Generator(np.random.Philox(seed_sequence))


def resolve_rho(mode: str, n: int) -> float:
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if mode == "one":
        return 1.0
    if mode == "inv_sqrt_n":
        return 1.0 / math.sqrt(n)
    if mode == "log_n_over_n":
        return math.log(n) / n
    raise ParameterError(f"Unknown rho mode: {mode}. Available: {', '.join(RHO_MODES)}")


def sample_graph(model: BaseGraphon, n: int, rho: float = 1.0, seed: int = 0) -> SampledGraph:
    """Sample G_n from rho * W.

    The root seed is split into a latent stream and an edge stream; the edge
    stream is split once more into one sub-stream per row, so the draw for
    pair (i, j), i < j, depends only on the seed and i.
    """
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not 0.0 < rho <= 1.0:
        raise ParameterError(f"rho must lie in (0, 1], got {rho}")

    root = np.random.SeedSequence(seed)
    latent_seq, edge_seq = root.spawn(2)
    latents = model.sample_latents(n, make_generator(latent_seq))

    row_parts, col_parts = [], []
    for i, row_seq in enumerate(edge_seq.spawn(n - 1)):
        probs = rho * model.kernel_row(latents, i)
        draws = make_generator(row_seq).random(probs.size)
        hits = np.flatnonzero(draws < probs)
        if hits.size:
            row_parts.append(np.full(hits.size, i, dtype=np.int64))
            col_parts.append(hits + i + 1)

    rows = np.concatenate(row_parts) if row_parts else np.empty(0, dtype=np.int64)
    cols = np.concatenate(col_parts) if col_parts else np.empty(0, dtype=np.int64)
    adjacency = sp.csr_matrix(
        (np.ones(2 * rows.size), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(n, n),
    )

    graph = SampledGraph(
        adjacency=adjacency,
        rho=rho,
        seed=seed,
        latents=latents,
        model=model,
        communities=model.communities(latents),
        metadata={"generator": "philox", "kind": model.kind},
    )
    if isinstance(model, GeometricGraphon):
        graph.metadata["expected_density"] = rho * model.connection_probability
    logger.info(
        f"Sampled {model.kind} graph n={n} rho={rho:.4g} seed={seed}: {graph.num_edges} edges"
    )
    return graph

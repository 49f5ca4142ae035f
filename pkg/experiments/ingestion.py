import logging
from pathlib import Path

import numpy as np

from graphons.graphs import SampledGraph
from lggnn_lab.exceptions import ConfigError, EdgeListParseError, EmptyDataError

logger = logging.getLogger(__name__)


def _parse_line(line: str, line_number: int):
    fields = line.split()
    if len(fields) != 2:
        raise EdgeListParseError(f"expected two vertex ids, got {len(fields)} fields", line_number)
    try:
        u, v = int(fields[0]), int(fields[1])
    except ValueError:
        raise EdgeListParseError(f"vertex ids must be integers: {line.strip()!r}", line_number)
    if u < 0 or v < 0:
        raise EdgeListParseError(f"vertex ids must be nonnegative: {line.strip()!r}", line_number)
    return u, v


def load_edge_list(path) -> SampledGraph:
    """Read whitespace-separated integer pairs into an undirected simple graph.

    Blank lines and '#' comments are skipped, duplicate edges merged and
    self-loops dropped. Ids that do not cover 0..max are compacted in
    increasing order. rho is the empirical density; latents are absent.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Edge list not found: {path}. Place the file there or set LGGNN_CORA_EDGE_LIST.")

    pairs = []
    with open(path) as fh:
        for line_number, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                pairs.append(_parse_line(line, line_number))
    if not pairs:
        raise EmptyDataError(f"edge list {path} contains no edges")

    edges = np.asarray(pairs, dtype=np.int64)
    ids, inverse = np.unique(edges, return_inverse=True)
    relabelled = ids.size != int(ids[-1]) + 1
    if relabelled:
        edges = inverse.reshape(edges.shape)
        n = ids.size
    else:
        n = int(ids[-1]) + 1

    self_loops = int(np.count_nonzero(edges[:, 0] == edges[:, 1]))
    if self_loops:
        logger.warning(f"Dropped {self_loops} self-loops from {path}")

    graph = SampledGraph.from_edges(
        n, edges,
        metadata={
            "source": str(path),
            "self_loops_dropped": self_loops,
            "relabelled": relabelled,
            "latents": "absent",
        },
    )
    loops_free = len(edges) - self_loops
    graph.metadata["duplicates_merged"] = loops_free - graph.num_edges
    logger.info(f"Loaded {path}: n={graph.n} edges={graph.num_edges} rho_hat={graph.rho:.6f}")
    return graph

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import networkx as nx
import numpy as np

from graphons.graphs import PairSet, SampledGraph
from graphons.sampling import make_generator
from lggnn_lab.exceptions import EmptyDataError, ParameterError

logger = logging.getLogger(__name__)

IN_SAMPLE = "in_sample"
OUT_SAMPLE = "out_sample"
NEGATIVE_MODES = ("all", "balanced")


@dataclass
class SplitSpec:
    """Train / validation / test pair sets, all indexed on the full vertex set.

    Out-sample splits also carry the held-out vertices V2 and the
    message-passing edges (positive edges touching V2 that are not tested).
    """

    protocol: str
    p: float
    seed: int
    n: int
    train_pos: PairSet
    train_neg: PairSet
    val_pos: PairSet
    val_neg: PairSet
    test_pos: PairSet
    test_neg: PairSet
    message_passing: PairSet
    train_vertices: Optional[np.ndarray] = None
    test_vertices: Optional[np.ndarray] = None
    flags: List[str] = field(default_factory=list)

    @property
    def train_pairs(self) -> PairSet:
        return self.train_pos.union(self.train_neg)

    @property
    def test_pairs(self) -> PairSet:
        """Test positives and negatives merged; a pair drawn into both appears once."""
        return self.test_pos.union(self.test_neg)

    @property
    def retained_fraction(self) -> float:
        """Share of the training-side edges kept for message passing, about 1 - p."""
        kept = len(self.train_pos)
        total = kept + len(self.val_pos) + (len(self.test_pos) if self.protocol == IN_SAMPLE else 0)
        return kept / total if total else 0.0

    def training_view(self, graph: SampledGraph) -> Tuple[SampledGraph, PairSet]:
        """Graph to embed and fit on, and the training pairs in its own indexing."""
        thinned = graph.with_edges(self.train_pos)
        if self.protocol == IN_SAMPLE:
            return thinned, self.train_pairs
        mapping = np.full(self.n, -1, dtype=np.int64)
        mapping[self.train_vertices] = np.arange(self.train_vertices.size)
        local = thinned.subgraph(self.train_vertices)
        return local, self.train_pairs.relabel(mapping, self.train_vertices.size)

    def inference_graph(self, graph: SampledGraph) -> SampledGraph:
        """Graph whose embeddings score the test pairs."""
        return graph.with_edges(self.train_pos.union(self.message_passing))

    def counts(self):
        return {
            "train_pos": len(self.train_pos),
            "train_neg": len(self.train_neg),
            "val_pos": len(self.val_pos),
            "val_neg": len(self.val_neg),
            "test_pos": len(self.test_pos),
            "test_neg": len(self.test_neg),
            "message_passing": len(self.message_passing),
        }


def _check_fraction(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ParameterError(f"holdout fraction must lie in (0, 1), got {p}")


def _split_in_three(pairs: PairSet, p: float, rng: np.random.Generator) -> Tuple[PairSet, PairSet, PairSet]:
    """Partition into (1 - p, p/2, p/2) shares after a random permutation."""
    order = rng.permutation(len(pairs))
    n_holdout = int(round(p * len(pairs)))
    n_val = n_holdout // 2
    n_train = len(pairs) - n_holdout
    return (
        pairs.take(order[:n_train]),
        pairs.take(order[n_train:n_train + n_val]),
        pairs.take(order[n_train + n_val:]),
    )


def _connected_removal(edges: PairSet, p: float, rng: np.random.Generator,
                       flags: List[str]) -> np.ndarray:
    """Remove round(p |E|) edges in random order, skipping any whose removal disconnects its endpoints."""
    graph = nx.Graph()
    graph.add_edges_from(zip(edges.rows.tolist(), edges.cols.tolist()))
    target = int(round(p * len(edges)))
    removed = np.zeros(len(edges), dtype=bool)
    count = 0
    for index in rng.permutation(len(edges)):
        if count >= target:
            break
        u, v = int(edges.rows[index]), int(edges.cols[index])
        graph.remove_edge(u, v)
        if nx.has_path(graph, u, v):
            removed[index] = True
            count += 1
        else:
            graph.add_edge(u, v)
    if count < target:
        flags.append(f"connectivity_shortfall:{target - count}")
        logger.warning(f"Connectivity-preserving split removed {count} of {target} requested edges")
    return removed


def in_sample_split(graph: SampledGraph, p: float = 0.2, seed: int = 0, negatives: str = "all",
                    preserve_connectivity: bool = False) -> SplitSpec:
    """Hold out edges of a graph whose vertices are all seen during training.

    Each edge is removed independently with probability p (or, with
    preserve_connectivity, round(p |E|) non-bridge edges are removed); removed
    edges split evenly into validation and test. With negatives="all" the pool
    N u E_test is partitioned (1 - p, p/2, p/2); "balanced" instead samples as
    many non-edges as there are positives in each part.
    """
    _check_fraction(p)
    if negatives not in NEGATIVE_MODES:
        raise ParameterError(f"Unknown negative mode: {negatives}. Available: {', '.join(NEGATIVE_MODES)}")
    edges = graph.edges()
    if len(edges) == 0:
        raise EmptyDataError("cannot split a graph without edges")

    flags: List[str] = []
    rng = make_generator(np.random.SeedSequence(seed))
    if preserve_connectivity:
        removed = _connected_removal(edges, p, rng, flags)
    else:
        removed = rng.random(len(edges)) < p
    train_pos = edges.select(~removed)
    held_out = edges.select(removed)
    order = rng.permutation(len(held_out))
    n_val = len(held_out) // 2
    val_pos = held_out.take(np.sort(order[:n_val]))
    test_pos = held_out.take(np.sort(order[n_val:]))

    non_edges = PairSet.all_pairs(graph.n).difference(edges)
    if negatives == "all":
        train_neg, val_neg, test_neg = _split_in_three(non_edges.union(test_pos), p, rng)
    else:
        sizes = np.array([len(train_pos), len(val_pos), len(test_pos)])
        if sizes.sum() > len(non_edges):
            raise EmptyDataError(f"{sizes.sum()} negatives requested but only {len(non_edges)} non-edges exist")
        picked = rng.choice(len(non_edges), size=int(sizes.sum()), replace=False)
        bounds = np.cumsum(sizes)
        train_neg = non_edges.take(picked[:bounds[0]])
        val_neg = non_edges.take(picked[bounds[0]:bounds[1]])
        test_neg = non_edges.take(picked[bounds[1]:])

    split = SplitSpec(
        protocol=IN_SAMPLE, p=p, seed=seed, n=graph.n,
        train_pos=train_pos, train_neg=train_neg, val_pos=val_pos, val_neg=val_neg,
        test_pos=test_pos, test_neg=test_neg, message_passing=PairSet.empty(graph.n), flags=flags,
    )
    logger.info(f"In-sample split seed={seed} p={p}: {split.counts()}")
    return split


def out_sample_split(graph: SampledGraph, p: float = 0.2, seed: int = 0) -> SplitSpec:
    """Hold out round(p n) vertices V2; test pairs touch V2.

    G1 (induced on V1) splits (1 - p) / p into train and validation, for
    positives and negatives alike. A p share of the edges E2 and of the
    non-edges N2 touching V2 is tested; the rest of E2 passes messages.
    """
    _check_fraction(p)
    n_held = int(round(p * graph.n))
    if n_held == 0:
        raise EmptyDataError(f"p={p} leaves no held-out vertices for n={graph.n}")
    if n_held >= graph.n:
        raise EmptyDataError(f"p={p} leaves no training vertices for n={graph.n}")

    rng = make_generator(np.random.SeedSequence(seed))
    permutation = rng.permutation(graph.n)
    test_vertices = np.sort(permutation[:n_held])
    train_vertices = np.sort(permutation[n_held:])
    in_v2 = np.zeros(graph.n, dtype=bool)
    in_v2[test_vertices] = True

    edges = graph.edges()
    everything = PairSet.all_pairs(graph.n)
    touches_v2 = in_v2[everything.rows] | in_v2[everything.cols]
    inner_pairs = everything.select(~touches_v2)
    outer_pairs = everything.select(touches_v2)

    def split_share(pairs: PairSet, share: float) -> Tuple[PairSet, PairSet]:
        order = rng.permutation(len(pairs))
        cut = int(round(share * len(pairs)))
        return pairs.take(np.sort(order[:cut])), pairs.take(np.sort(order[cut:]))

    inner_edges = inner_pairs.intersection(edges)
    val_pos, train_pos = split_share(inner_edges, p)
    val_neg, train_neg = split_share(inner_pairs.difference(edges), p)
    outer_edges = outer_pairs.intersection(edges)
    test_pos, message_passing = split_share(outer_edges, p)
    test_neg, _ = split_share(outer_pairs.difference(edges), p)

    split = SplitSpec(
        protocol=OUT_SAMPLE, p=p, seed=seed, n=graph.n,
        train_pos=train_pos, train_neg=train_neg, val_pos=val_pos, val_neg=val_neg,
        test_pos=test_pos, test_neg=test_neg, message_passing=message_passing,
        train_vertices=train_vertices, test_vertices=test_vertices,
    )
    logger.info(f"Out-sample split seed={seed} p={p} |V2|={n_held}: {split.counts()}")
    return split


def make_split(graph: SampledGraph, protocol: str, p: float = 0.2, seed: int = 0, **options) -> SplitSpec:
    if protocol == IN_SAMPLE:
        return in_sample_split(graph, p=p, seed=seed, **options)
    if protocol == OUT_SAMPLE:
        return out_sample_split(graph, p=p, seed=seed)
    raise ParameterError(f"Unknown split protocol: {protocol}")

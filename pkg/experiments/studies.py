"""Statistical checks of the estimator, each returning one DataFrame row per (n, seed)."""

import logging
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from evaluation.metrics import auc_roc, e_rank_check, same_community
from gcn.diagnostics import collapse_diagnostic, pair_type_variance
from gcn.forward import GcnConfig, gcn_forward
from graphons.families import BaseGraphon, SymmetricSBM, load_graphon
from graphons.graphs import PairSet
from graphons.sampling import make_generator, sample_graph
from graphons.spectrum import graphon_moment, sbm_spectrum
from lggnn.embedding import embed, resolve_dimension
from lggnn.estimators import moment_estimates
from lggnn.oracles import population_moments, walk_moments
from lggnn_lab.exceptions import ParameterError
from regression.solvers import fit_box_constrained, predict
from regression.space import SearchSpace
from regression.stats import accumulate_stats

logger = logging.getLogger(__name__)

STUDIES = ("concentration", "consistency", "ranking", "collapse", "identifiability")
DEFAULT_SIZES = (400, 1600)
DEFAULT_STUDY_SEEDS = tuple(range(10))


def default_model() -> BaseGraphon:
    return SymmetricSBM(6, 0.8, 0.2)


def _upper(matrix: np.ndarray) -> np.ndarray:
    rows, cols = np.triu_indices(matrix.shape[0], k=1)
    return matrix[rows, cols]


def concentration_study(model: Optional[BaseGraphon] = None, ns: Sequence[int] = DEFAULT_SIZES,
                        seeds: Iterable[int] = DEFAULT_STUDY_SEEDS, rho: float = 1.0,
                        d_policy="n") -> pd.DataFrame:
    """Worst-pair error of q-hat^(2) and of the walk moment A^2 / (n - 1) against rho^2 W^(2)."""
    model = model or default_model()
    rows = []
    for n in ns:
        for seed in seeds:
            graph = sample_graph(model, n, rho=rho, seed=seed)
            d = resolve_dimension(d_policy, n, rho)
            estimate = moment_estimates(embed(graph, L=0, d=d, seed=seed)).order(2)
            truth = population_moments(graph, 0).order(2)
            walk = walk_moments(graph, 2, k_min=2)[2]
            rows.append({
                "n": n,
                "seed": seed,
                "d": d,
                "max_error": float(np.max(np.abs(_upper(estimate - truth)))),
                "walk_max_error": float(np.max(np.abs(_upper(walk - truth)))),
            })
        logger.info(f"Concentration study n={n} done")
    return pd.DataFrame(rows)


def consistency_study(model: Optional[BaseGraphon] = None, ns: Sequence[int] = DEFAULT_SIZES,
                      seeds: Iterable[int] = DEFAULT_STUDY_SEEDS, rho: float = 1.0, L: int = 1,
                      bounds: Sequence[float] = (15.0, 40.0), fresh_fraction: float = 0.25,
                      test_pairs: int = 2000, d_policy="n") -> pd.DataFrame:
    """Box fit on the first n vertices; R_T = mean (p-hat - rho W)^2 over pairs of fresh vertices.

    Fresh vertices are sampled with the graph and embedded with it, but no
    pair touching them enters the fit.
    """
    model = model or default_model()
    if len(bounds) != L + 1:
        raise ParameterError(f"expected {L + 1} box bounds, got {len(bounds)}")
    rows = []
    for n in ns:
        fresh = max(2, int(round(fresh_fraction * n)))
        total = n + fresh
        for seed in seeds:
            graph = sample_graph(model, total, rho=rho, seed=seed)
            moments = moment_estimates(embed(graph, L=L, d=resolve_dimension(d_policy, total, rho), seed=seed))
            stats = accumulate_stats(moments, graph, pair_filter=lambda r, c: c < n)
            fit = fit_box_constrained(stats, SearchSpace.box(L + 1, rho=rho, b=list(bounds)))

            local_rows, local_cols = np.triu_indices(fresh, k=1)
            held = PairSet(local_rows + n, local_cols + n, total)
            held = held.subsample(test_pairs, make_generator(np.random.SeedSequence([seed, n])))
            p_hat = predict(fit, moments, held)
            truth = graph.edge_probabilities(held.rows, held.cols)
            rows.append({
                "n": n,
                "seed": seed,
                "test_risk": float(np.mean((p_hat - truth) ** 2)),
                "empirical_risk": fit.objective,
                "beta": fit.beta.tolist(),
                "converged": fit.converged,
            })
        logger.info(f"Consistency study n={n} done")
    return pd.DataFrame(rows)


def ranking_study(model: Optional[BaseGraphon] = None, n: int = 600,
                  seeds: Iterable[int] = DEFAULT_STUDY_SEEDS, rho: float = 1.0, L: int = 1,
                  sample: int = 2000, radius: Optional[float] = None, d_policy="n") -> pd.DataFrame:
    """l1-ball fit on all pairs but a held-out sample; E_rank and community AUC on the sample."""
    model = model or default_model()
    spectrum = sbm_spectrum(model)
    rows = []
    for seed in seeds:
        graph = sample_graph(model, n, rho=rho, seed=seed)
        moments = moment_estimates(embed(graph, L=L, d=resolve_dimension(d_policy, n, rho), seed=seed))
        held = PairSet.all_pairs(n).subsample(sample, make_generator(np.random.SeedSequence([seed, n])))
        stats = accumulate_stats(moments, graph, pair_filter=lambda r, c: ~held.contains(r, c))
        space = SearchSpace.l1_ball(L + 1, rho=rho, radius=radius, spectrum=spectrum)
        fit = fit_box_constrained(stats, space)

        scores = predict(fit, moments, held)
        inside = same_community(held, graph.communities)
        rows.append({
            "n": n,
            "seed": seed,
            "e_rank": e_rank_check(scores, inside),
            "community_auc": auc_roc(scores, inside),
            "beta": fit.beta.tolist(),
        })
    logger.info(f"Ranking study n={n}: E_rank held in {sum(r['e_rank'] for r in rows)} of {len(rows)} seeds")
    return pd.DataFrame(rows)


def collapse_study(model: Optional[BaseGraphon] = None, ns: Sequence[int] = DEFAULT_SIZES,
                   seeds: Iterable[int] = DEFAULT_STUDY_SEEDS, L: int = 1, d: int = 64) -> pd.DataFrame:
    """Untrained GCN spread per layer next to the LG-GNN q-hat^(2) pair-type variance."""
    model = model or default_model()
    frames = []
    cfg = GcnConfig(L=L, d=d, self_loop=False)
    for n in ns:
        for seed in seeds:
            graph = sample_graph(model, n, seed=seed)
            frame = collapse_diagnostic(gcn_forward(graph, cfg, seed=seed))
            moments = moment_estimates(embed(graph, L=1, seed=seed))
            frame["lggnn_variance"] = pair_type_variance(moments.order(2), graph.communities)
            frame["n"] = n
            frame["seed"] = seed
            frames.append(frame)
        logger.info(f"Collapse study n={n} done")
    return pd.concat(frames, ignore_index=True)


def spread_ratios(collapse: pd.DataFrame, layer: int = 1) -> pd.Series:
    """Per seed, spread at the smallest n over spread at the largest n."""
    spreads = collapse[collapse["layer"] == layer].pivot(index="seed", columns="n", values="spread")
    return spreads[spreads.columns.min()] / spreads[spreads.columns.max()]


def identifiability_check(n: int = 200, seed: int = 3) -> pd.DataFrame:
    """Second moments, true probabilities and single-feature predictions per pair type.

    On the bundled two-block counterexample the (1,1) and (1,2) pair types
    share their second moment, so a fit on q^(2) alone scores them alike.
    """
    model = load_graphon("identifiability_2sbm")
    anchors = (0.25, 0.75)
    graph = sample_graph(model, n, seed=seed)
    moments = population_moments(graph, L=0)
    fit = fit_box_constrained(accumulate_stats(moments, graph), SearchSpace.box(1, b=[10.0]))

    pairs = PairSet.all_pairs(n)
    scores = predict(fit, moments, pairs)
    labels = graph.communities
    rows = []
    for a, b in ((0, 0), (0, 1), (1, 1)):
        mask = (np.minimum(labels[pairs.rows], labels[pairs.cols]) == a) & (
            np.maximum(labels[pairs.rows], labels[pairs.cols]) == b)
        rows.append({
            "pair_type": f"({a + 1},{b + 1})",
            "probability": model.evaluate(anchors[a], anchors[b]),
            "second_moment": graphon_moment(model, 2, anchors[a], anchors[b]).value,
            "prediction": float(scores[mask][0]),
        })
    return pd.DataFrame(rows)


def run_study(name: str, **options) -> pd.DataFrame:
    studies = {
        "concentration": concentration_study,
        "consistency": consistency_study,
        "ranking": ranking_study,
        "collapse": collapse_study,
        "identifiability": identifiability_check,
    }
    if name not in studies:
        raise ParameterError(f"Unknown study: {name}. Available: {', '.join(STUDIES)}")
    return studies[name](**options)

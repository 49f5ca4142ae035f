import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from celery import group
from django.conf import settings

from evaluation.metrics import evaluate_scores, jsonable, same_community, write_json_atomic
from evaluation.splits import IN_SAMPLE, SplitSpec, make_split
from gcn.forward import GcnConfig, gcn_forward, gcn_scores
from graphons.families import BlockGraphon
from graphons.graphs import PairSet, SampledGraph
from graphons.sampling import make_generator, sample_graph
from graphons.spectrum import sbm_spectrum
from lggnn.embedding import embed, resolve_dimension
from lggnn.estimators import moment_estimates
from lggnn.oracles import rate_r
from lggnn_lab.exceptions import ConfigError, LabError
from regression.risk import gen_error_bound, population_risk_sbm
from regression.solvers import BOX_PG, RegressionFit, fit_box_constrained, fit_pls, predict
from regression.space import L1_BALL, SearchSpace
from regression.stats import accumulate_stats

from .config import ExperimentConfig
from .ingestion import load_edge_list
from .models import ExperimentRun, SeedResult

logger = logging.getLogger(__name__)

STREAMS = ("graph", "split", "features", "subsample")
CORA_METHODS = ("lggnn_box", "lggnn_pls")


def seed_streams(seed: int) -> Dict[str, int]:
    """One integer seed per pipeline stage, derived from the run seed."""
    state = np.random.SeedSequence(seed).generate_state(len(STREAMS))
    return {name: int(value) for name, value in zip(STREAMS, state)}


def build_graph(cfg: ExperimentConfig, seed: int) -> SampledGraph:
    if not cfg.is_synthetic:
        return load_edge_list(cfg.edge_list)
    return sample_graph(cfg.graphon(), cfg.n, rho=cfg.rho(), seed=seed)


def search_space(cfg: ExperimentConfig, rho: float, model=None) -> SearchSpace:
    """Feasible set for the box or l1 fit; block models size it from their spectrum."""
    spectrum = sbm_spectrum(model) if isinstance(model, BlockGraphon) else None
    coefficients = cfg.L + 1
    if cfg.space == L1_BALL:
        if cfg.l1_radius is None and spectrum is None:
            raise ConfigError("l1_ball fits on graphs without a block spectrum need l1_radius")
        return SearchSpace.l1_ball(coefficients, rho=rho, radius=cfg.l1_radius, spectrum=spectrum)
    return SearchSpace.box(coefficients, rho=rho, b=cfg.box_bounds, spectrum=spectrum)


def cap_test_pairs(pairs: PairSet, n: int, seed: int, record: Dict[str, Any]) -> PairSet:
    limit = settings.LGGNN_SETTINGS["MAX_TEST_PAIRS"]
    if n <= settings.LGGNN_SETTINGS["SUBSAMPLE_ABOVE_N"] or len(pairs) <= limit:
        return pairs
    record["test_subsample"] = {"from": len(pairs), "size": limit, "seed": seed}
    logger.info(f"Subsampling {len(pairs)} test pairs to {limit} (seed {seed})")
    return pairs.subsample(limit, make_generator(np.random.SeedSequence(seed)))


def score_pairs(cfg: ExperimentConfig, graph: SampledGraph, split: SplitSpec, pairs: PairSet,
                feature_seed: int):
    """Scores for the test pairs, the fit behind them (None for the GCN) and the embedding dimension."""
    if cfg.method == "gcn_untrained":
        gcn_cfg = GcnConfig(**{"L": cfg.L, **cfg.gcn})
        emb = gcn_forward(split.inference_graph(graph), gcn_cfg, seed=feature_seed)
        return gcn_scores(emb, pairs), None, gcn_cfg.d

    train_graph, train_pairs = split.training_view(graph)
    d = resolve_dimension(cfg.d_policy, train_graph.n, train_graph.rho)
    moments = moment_estimates(embed(train_graph, cfg.L, d, seed=feature_seed))
    if cfg.method == "lggnn_pls":
        fit = fit_pls(moments, train_graph, cfg.pls_components, pair_filter=train_pairs)
    else:
        space = search_space(cfg, split.retained_fraction * graph.rho, graph.model)
        fit = fit_box_constrained(accumulate_stats(moments, train_graph, pair_filter=train_pairs), space)

    if split.protocol != IN_SAMPLE:
        moments = moment_estimates(embed(split.inference_graph(graph), cfg.L, d, seed=feature_seed))
    return predict(fit, moments, pairs), fit, d


def risk_diagnostics(cfg: ExperimentConfig, graph: SampledGraph, split: SplitSpec,
                     fit: Optional[RegressionFit], d: int) -> Dict[str, Any]:
    diagnostics: Dict[str, Any] = {}
    if fit is None:
        return diagnostics
    try:
        diagnostics["rate_r"] = rate_r(graph.n, d, cfg.L + 1, graph.rho).to_dict()
        if isinstance(graph.model, BlockGraphon):
            spectrum = sbm_spectrum(graph.model)
            if fit.method == BOX_PG:
                rho = split.retained_fraction * graph.rho
                diagnostics["population_risk"] = population_risk_sbm(spectrum, fit.beta, rho=rho)
            diagnostics["gen_error_bound"] = {
                "value": gen_error_bound(spectrum, cfg.L),
                "diagnostic_only": True,
            }
    except LabError as exc:
        logger.warning(f"Risk diagnostics unavailable: {exc}")
        diagnostics["unavailable"] = str(exc)
    return diagnostics


def run_seed(cfg: ExperimentConfig, seed: int, graph: Optional[SampledGraph] = None) -> Dict[str, Any]:
    """sample (or reuse) graph -> split -> embed -> fit -> predict -> metrics for one seed.

    Any failure is recorded in the returned record instead of raised.
    """
    streams = seed_streams(seed)
    record: Dict[str, Any] = {"seed": seed, "status": "completed", "config": cfg.echo(), "streams": streams}
    try:
        if graph is None:
            graph = build_graph(cfg, streams["graph"])
        record["graph"] = graph.describe()

        options = {}
        if cfg.protocol == IN_SAMPLE:
            options = {"negatives": cfg.negatives, "preserve_connectivity": cfg.preserve_connectivity}
        split = make_split(graph, cfg.protocol, p=cfg.p, seed=streams["split"], **options)
        record["split"] = dict(split.counts(), retained_fraction=split.retained_fraction, flags=split.flags)

        pairs = cap_test_pairs(split.test_pairs, graph.n, streams["subsample"], record)
        scores, fit, d = score_pairs(cfg, graph, split, pairs, streams["features"])

        labels = graph.has_edge(pairs.rows, pairs.cols)
        true_probs = graph.edge_probabilities(pairs.rows, pairs.cols) if graph.has_latents else None
        in_community = None if graph.communities is None else same_community(pairs, graph.communities)
        report = evaluate_scores(scores, labels, ks=cfg.ks, true_probs=true_probs,
                                 in_community=in_community, config=cfg.echo())
        report.flags.extend(split.flags)

        record["metrics"] = report.to_dict()
        record["row"] = report.metrics()
        record["fit"] = None if fit is None else fit.to_record()
        record["diagnostics"] = risk_diagnostics(cfg, graph, split, fit, d)
        if "population_risk" in record["diagnostics"]:
            record["row"]["population_risk"] = record["diagnostics"]["population_risk"]
        logger.info(f"Seed {seed} of {cfg.name} completed: {record['row']}")
    except Exception as exc:
        logger.error(f"Seed {seed} of {cfg.name} failed: {exc}")
        record["status"] = "failed"
        record["error"] = f"{type(exc).__name__}: {exc}"
    return jsonable(record)


@dataclass
class ResultRow:
    """Per-seed metrics and their mean and sample standard deviation."""

    config: Dict[str, Any]
    per_seed: pd.DataFrame
    aggregate: Dict[str, Optional[float]]
    records: List[Dict[str, Any]] = field(default_factory=list)
    output_dir: Optional[Path] = None

    @property
    def failures(self) -> List[Dict[str, Any]]:
        return [r for r in self.records if r["status"] == "failed"]

    @property
    def metric_names(self) -> List[str]:
        return [c for c in self.per_seed.columns if c != "seed"]

    def mean(self, metric: str) -> Optional[float]:
        return self.aggregate.get(f"{metric}_mean")

    def sd(self, metric: str) -> Optional[float]:
        return self.aggregate.get(f"{metric}_sd")

    def to_frame(self) -> pd.DataFrame:
        """One CSV row: config columns, then metric_mean, metric_sd per metric."""
        row = dict(self.config)
        row.update(self.aggregate)
        row["seeds_completed"] = len(self.records) - len(self.failures)
        row["seeds_failed"] = len(self.failures)
        row["sd_convention"] = "sample"
        return pd.DataFrame([row])


def _finite_or_none(value) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def aggregate_records(cfg: ExperimentConfig, records: Sequence[Dict[str, Any]]) -> ResultRow:
    completed = [r for r in records if r["status"] == "completed"]
    per_seed = pd.DataFrame([{"seed": r["seed"], **r["row"]} for r in completed])
    aggregate: Dict[str, Optional[float]] = {}
    for name in per_seed.columns:
        if name == "seed":
            continue
        values = per_seed[name].astype(float).dropna()
        aggregate[f"{name}_mean"] = _finite_or_none(values.mean()) if len(values) else None
        aggregate[f"{name}_sd"] = _finite_or_none(values.std(ddof=1)) if len(values) > 1 else None
    return ResultRow(config=cfg.echo(), per_seed=per_seed, aggregate=aggregate, records=list(records))


def write_csv_atomic(path, frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", newline="") as stream:
            frame.to_csv(stream, index=False)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return path


def _dispatch_seeds(cfg: ExperimentConfig, graph: Optional[SampledGraph], parallel: bool) -> List[Dict[str, Any]]:
    if not parallel:
        return [run_seed(cfg, seed, graph=graph) for seed in cfg.seeds]
    from .tasks import run_seed_task

    job = group(run_seed_task.s(cfg.to_dict(), seed) for seed in cfg.seeds)
    return list(job.apply_async().get())


def run_experiment(cfg: ExperimentConfig, parallel: Optional[bool] = None, persist: bool = True,
                   graph: Optional[SampledGraph] = None) -> ResultRow:
    """Run every seed, write one JSON per seed and the aggregate CSV row.

    With persist the run and its seeds are also stored as ExperimentRun and
    SeedResult rows. A loaded graph may be passed in to skip re-reading it.
    """
    if parallel is None:
        parallel = settings.LGGNN_SETTINGS["PARALLEL_SEEDS"]
    out_dir = cfg.results_dir()
    run = None
    if persist:
        run = ExperimentRun.objects.create(
            name=cfg.name, method=cfg.method, config=jsonable(cfg.to_dict()), output_dir=str(out_dir),
        )
        run.mark_running()
    logger.info(f"Running experiment {cfg.name} ({cfg.method}) over seeds {cfg.seeds}")

    records = _dispatch_seeds(cfg, graph, parallel)
    for record in records:
        write_json_atomic(out_dir / f"seed_{record['seed']}.json", record)
        if run is not None:
            SeedResult.objects.create(
                run=run,
                seed=record["seed"],
                status=record["status"],
                metrics=record.get("metrics", {}),
                fit=record.get("fit"),
                diagnostics=record.get("diagnostics", {}),
                error=record.get("error", ""),
            )

    result = aggregate_records(cfg, records)
    result.output_dir = out_dir
    write_csv_atomic(out_dir / "aggregate.csv", result.to_frame())
    if run is not None:
        run.mark_finished(result.aggregate)
    if result.failures:
        logger.error(f"Experiment {cfg.name}: {len(result.failures)} of {len(records)} seeds failed")
    logger.info(f"Experiment {cfg.name} finished: {result.aggregate}")
    return result


def run_cora(cfg: Optional[ExperimentConfig] = None, methods: Sequence[str] = CORA_METHODS,
             parallel: Optional[bool] = None, persist: bool = True) -> Dict[str, ResultRow]:
    """Topology-only Cora runs: balanced negatives and a connectivity-preserving in-sample split."""
    if cfg is None:
        cfg = ExperimentConfig.from_document({
            "name": "cora",
            "edge_list": str(settings.LGGNN_SETTINGS["CORA_EDGE_LIST"]),
        })
    path = Path(cfg.edge_list or settings.LGGNN_SETTINGS["CORA_EDGE_LIST"])
    if not path.exists():
        raise ConfigError(
            f"Cora edge list not found at {path}. Download the Cora citation edges there "
            f"or point LGGNN_CORA_EDGE_LIST at a local copy."
        )
    graph = load_edge_list(path)
    base = cfg.replace(edge_list=str(path), protocol=IN_SAMPLE, negatives="balanced", preserve_connectivity=True)

    results = {}
    for method in methods:
        run_cfg = base.replace(method=method, name=f"{base.name}_{method}")
        results[method] = run_experiment(run_cfg, parallel=parallel, persist=persist, graph=graph)
    return results

import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from sklearn.metrics import log_loss, roc_auc_score

from graphons.graphs import PairSet
from lggnn_lab.exceptions import MetricError, ParameterError

logger = logging.getLogger(__name__)

CLAMP_EPS = 1e-7


def _as_arrays(scores, labels):
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).astype(bool).ravel()
    if scores.shape != labels.shape:
        raise ParameterError(f"{scores.size} scores for {labels.size} labels")
    return scores, labels


def auc_roc(scores, labels) -> float:
    """Probability that a random positive outranks a random negative, ties counted 1/2."""
    scores, labels = _as_arrays(scores, labels)
    if labels.all() or not labels.any():
        raise MetricError("AUC-ROC needs both positive and negative labels")
    return float(roc_auc_score(labels, scores))


def hits_at_k(scores, labels, k: int) -> float:
    """Share of positives scoring strictly above the k-th highest negative.

    With fewer than k negatives the lowest negative score is the threshold.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    scores, labels = _as_arrays(scores, labels)
    positives, negatives = scores[labels], scores[~labels]
    if positives.size == 0:
        raise MetricError("Hits@k needs at least one positive")
    if negatives.size == 0:
        raise MetricError("Hits@k needs at least one negative")
    if negatives.size < k:
        logger.warning(f"Hits@{k} has only {negatives.size} negatives; thresholding at the lowest")
        threshold = negatives.min()
    else:
        threshold = np.sort(negatives)[::-1][k - 1]
    return float(np.mean(positives > threshold))


def probability_ratio_at_k(scores, true_probs, k: int) -> float:
    """Sum of true probabilities of the k top-scored pairs over the best achievable sum."""
    if true_probs is None:
        raise MetricError("Probability Ratio@k needs true edge probabilities")
    scores = np.asarray(scores, dtype=float).ravel()
    true_probs = np.asarray(true_probs, dtype=float).ravel()
    if scores.shape != true_probs.shape:
        raise ParameterError(f"{scores.size} scores for {true_probs.size} probabilities")
    if not 1 <= k <= scores.size:
        raise MetricError(f"k={k} outside 1..{scores.size} scored pairs")
    ranked = np.argsort(-scores, kind="stable")[:k]
    best = np.sort(true_probs)[::-1][:k].sum()
    if best == 0.0:
        return 1.0
    return float(true_probs[ranked].sum() / best)


def same_community(pairs: PairSet, communities: np.ndarray) -> np.ndarray:
    return communities[pairs.rows] == communities[pairs.cols]


def e_rank_check(scores, in_community) -> bool:
    """min over in-community pairs > max over cross-community pairs (strict)."""
    scores, in_community = _as_arrays(scores, in_community)
    if in_community.all() or not in_community.any():
        raise MetricError("E_rank needs both in-community and cross-community pairs")
    return bool(scores[in_community].min() > scores[~in_community].max())


def cross_entropy(scores, labels, eps: float = CLAMP_EPS) -> float:
    """Mean binary cross-entropy of scores clamped to [eps, 1 - eps]."""
    scores, labels = _as_arrays(scores, labels)
    clipped = np.clip(scores, eps, 1.0 - eps)
    return float(log_loss(labels.astype(int), clipped, labels=[0, 1]))


@dataclass
class EvalReport:
    auc_roc: Optional[float]
    hits: Dict[int, float]
    prob_ratio: Dict[int, float]
    cross_entropy: float
    e_rank: Optional[bool] = None
    counts: Dict[str, int] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)

    def metrics(self) -> Dict[str, Any]:
        """Flat metric columns in a fixed order."""
        row = {"auc_roc": self.auc_roc}
        row.update({f"hits@{k}": v for k, v in sorted(self.hits.items())})
        row.update({f"prob_ratio@{k}": v for k, v in sorted(self.prob_ratio.items())})
        row["cross_entropy"] = self.cross_entropy
        if self.e_rank is not None:
            row["e_rank"] = float(self.e_rank)
        return row

    def to_dict(self) -> Dict[str, Any]:
        record = asdict(self)
        record["hits"] = {str(k): v for k, v in self.hits.items()}
        record["prob_ratio"] = {str(k): v for k, v in self.prob_ratio.items()}
        return record

    def to_row(self) -> Dict[str, Any]:
        row = {f"config_{key}": value for key, value in self.config.items() if not isinstance(value, (dict, list))}
        row.update(self.metrics())
        row.update({f"n_{key}": value for key, value in self.counts.items()})
        return row

    def write_json(self, path) -> Path:
        return write_json_atomic(path, self.to_dict())


def write_json_atomic(path, payload) -> Path:
    """Write JSON through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "w") as stream:
            json.dump(payload, stream, indent=2, sort_keys=True, default=_json_default)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return path


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def jsonable(payload):
    """Plain-Python copy of a payload holding numpy scalars, arrays or paths."""
    return json.loads(json.dumps(payload, default=_json_default))


def evaluate_scores(scores, labels, ks: Sequence[int] = (50, 100), true_probs=None,
                    prob_ratio_ks: Optional[Sequence[int]] = None, in_community=None,
                    config: Optional[Dict[str, Any]] = None) -> EvalReport:
    """Every metric the pair scores support; unavailable ones are left out and flagged."""
    scores, labels = _as_arrays(scores, labels)
    flags: List[str] = []
    negatives = int((~labels).sum())

    hits = {}
    for k in ks:
        if negatives < k:
            flags.append(f"hits@{k}_truncated")
        hits[int(k)] = hits_at_k(scores, labels, k)

    prob_ratio = {}
    if true_probs is not None:
        for k in (ks if prob_ratio_ks is None else prob_ratio_ks):
            if k > scores.size:
                flags.append(f"prob_ratio@{k}_skipped")
                continue
            prob_ratio[int(k)] = probability_ratio_at_k(scores, true_probs, k)

    e_rank = None
    if in_community is not None:
        in_community = np.asarray(in_community, dtype=bool)
        if in_community.any() and not in_community.all():
            e_rank = e_rank_check(scores, in_community)
        else:
            flags.append("e_rank_undefined")

    report = EvalReport(
        auc_roc=auc_roc(scores, labels),
        hits=hits,
        prob_ratio=prob_ratio,
        cross_entropy=cross_entropy(scores, labels),
        e_rank=e_rank,
        counts={"test_pos": int(labels.sum()), "test_neg": negatives},
        config=dict(config or {}),
        flags=flags,
    )
    logger.info(f"Evaluated {scores.size} pairs: {report.metrics()}")
    return report

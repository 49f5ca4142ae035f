import logging

import numpy as np
import pandas as pd

from lggnn.embedding import EmbeddingTable
from lggnn_lab.exceptions import ParameterError

logger = logging.getLogger(__name__)


def collapse_diagnostic(emb: EmbeddingTable) -> pd.DataFrame:
    """Per layer: spread sup_i |lambda_i^k - mean_i lambda_i^k| and the sd of |lambda_i^k|."""
    rows = []
    for k in range(emb.L + 1):
        layer = emb.layer(k)
        centred = layer - layer.mean(axis=0)
        norms = np.linalg.norm(layer, axis=1)
        rows.append({
            "layer": k,
            "spread": float(np.max(np.linalg.norm(centred, axis=1))),
            "norm_sd": float(norms.std()),
            "mean_norm": float(norms.mean()),
        })
    return pd.DataFrame(rows)


def pair_type_variance(values: np.ndarray, communities: np.ndarray) -> float:
    """Between-type variance of a pairwise statistic grouped by unordered community pair.

    Each pair i < j is weighted equally.
    """
    n = values.shape[0]
    if communities is None or len(communities) != n:
        raise ParameterError("pair type variance needs one community label per vertex")
    rows, cols = np.triu_indices(n, k=1)
    lo = np.minimum(communities[rows], communities[cols])
    hi = np.maximum(communities[rows], communities[cols])
    frame = pd.DataFrame({"lo": lo, "hi": hi, "value": values[rows, cols]})
    grouped = frame.groupby(["lo", "hi"])["value"].agg(["mean", "size"])
    overall = frame["value"].mean()
    return float((grouped["size"] * (grouped["mean"] - overall) ** 2).sum() / len(frame))

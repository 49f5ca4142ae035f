import logging
from pathlib import Path
from typing import Sequence, Union

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from lggnn_lab.exceptions import EmptyDataError, ParameterError

logger = logging.getLogger(__name__)

PLOT_KINDS = ("metric_vs_n", "spread_vs_n", "histogram")
HISTOGRAM_BINS = 50
# Config columns allowed to differ between the rows of one sweep
SWEEP_FREE = ("name",)


def _aggregate_frame(reports) -> pd.DataFrame:
    if isinstance(reports, pd.DataFrame):
        return reports.reset_index(drop=True)
    frames = [report.to_frame() if hasattr(report, "to_frame") else pd.DataFrame([report]) for report in reports]
    if not frames:
        raise EmptyDataError("no reports to plot")
    return pd.concat(frames, ignore_index=True)


def metric_vs_n_table(reports, metric: str = "auc_roc", x: str = "n") -> pd.DataFrame:
    """x, metric_mean, metric_sd; rows must differ only along the x axis."""
    frame = _aggregate_frame(reports)
    mean_col, sd_col = f"{metric}_mean", f"{metric}_sd"
    if mean_col not in frame.columns:
        raise ParameterError(f"reports have no {metric} column")
    if x not in frame.columns or frame[x].isna().any():
        raise ParameterError(f"every report needs a value for the sweep axis {x}")
    if frame[x].duplicated().any():
        raise ParameterError(f"sweep axis {x} repeats values {sorted(frame[x][frame[x].duplicated()].tolist())}")
    config_columns = [c for c in ("graph", "rho_mode", "L", "d_policy", "method", "protocol", "p")
                      if c in frame.columns and c != x and c not in SWEEP_FREE]
    varying = [c for c in config_columns if frame[c].nunique(dropna=False) > 1]
    if varying:
        raise ParameterError(f"reports differ outside the sweep axis {x}: {', '.join(varying)}")

    table = frame[[x, mean_col]].copy()
    table[sd_col] = frame[sd_col] if sd_col in frame.columns else np.nan
    return table.sort_values(x).reset_index(drop=True)


def spread_vs_n_table(collapse: pd.DataFrame) -> pd.DataFrame:
    """Median spread per layer and n, plus the shrink factor of the last layer against the smallest n."""
    required = {"n", "seed", "layer", "spread"}
    if not required.issubset(collapse.columns):
        raise ParameterError(f"collapse frame needs columns {sorted(required)}")
    medians = collapse.groupby(["n", "layer"])["spread"].median().unstack("layer").sort_index()
    medians.columns = [f"layer_{layer}_spread" for layer in medians.columns]
    last = medians.columns[-1]
    medians["shrink_factor"] = medians[last].iloc[0] / medians[last]
    return medians.reset_index()


def histogram_table(values, bins: int = HISTOGRAM_BINS) -> pd.DataFrame:
    """Counts over uniform bins spanning the observed range."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise EmptyDataError("no predictions to bin")
    counts, edges = np.histogram(values, bins=bins, range=(values.min(), values.max()))
    return pd.DataFrame({"bin_left": edges[:-1], "bin_right": edges[1:], "count": counts})


def _render(table: pd.DataFrame, kind: str, path: Path) -> Path:
    plt.switch_backend("Agg")
    fig, ax = plt.subplots(figsize=(6, 4))
    if kind == "histogram":
        ax.bar(table["bin_left"], table["count"], width=table["bin_right"] - table["bin_left"], align="edge")
        ax.set_xlabel("predicted probability")
        ax.set_ylabel("pairs")
    else:
        x = table.columns[0]
        for column in table.columns[1:]:
            if column.endswith("_sd") or column == "shrink_factor":
                continue
            sd_column = column.replace("_mean", "_sd")
            errors = table[sd_column] if sd_column != column and sd_column in table.columns else None
            ax.errorbar(table[x], table[column], yerr=errors, marker="o", label=column)
        ax.set_xlabel(x)
        ax.legend()
    png = path.with_suffix(".png")
    fig.tight_layout()
    fig.savefig(png, dpi=120)
    plt.close(fig)
    return png


def emit_plot_data(data: Union[Sequence, pd.DataFrame, np.ndarray], kind: str, path,
                   metric: str = "auc_roc", x: str = "n", render: bool = False) -> Path:
    """Write a tab-separated table for external plotting, and a PNG when render is set.

    data is a list of result rows (or their aggregate frame) for metric_vs_n,
    a collapse study frame for spread_vs_n, and predicted scores for histogram.
    """
    if kind == "metric_vs_n":
        table = metric_vs_n_table(data, metric=metric, x=x)
    elif kind == "spread_vs_n":
        table = spread_vs_n_table(data)
    elif kind == "histogram":
        table = histogram_table(data)
    else:
        raise ParameterError(f"Unknown plot kind: {kind}. Available: {', '.join(PLOT_KINDS)}")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, sep="\t", index=False)
    logger.info(f"Wrote {kind} plot data ({len(table)} rows) to {path}")
    if render:
        logger.info(f"Rendered {_render(table, kind, path)}")
    return path

from pathlib import Path

import numpy as np
import pandas as pd

from experiments.management.base import LabCommand
from experiments.plot_data import PLOT_KINDS, emit_plot_data
from lggnn_lab.exceptions import ConfigError


def _read_table(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise ConfigError(f"Plot input not found: {path}")
    return pd.read_csv(path)


class Command(LabCommand):
    help = "Write tab-separated plot data from aggregate rows, collapse frames or scores"

    def add_arguments(self, parser):
        parser.add_argument("--kind", type=str, required=True, choices=PLOT_KINDS)
        parser.add_argument("--input", type=str, nargs="+", required=True,
                            help="aggregate.csv files, a collapse study CSV, or scores (.csv or .npy)")
        parser.add_argument("--output", type=str, required=True, help="Tab-separated output path")
        parser.add_argument("--metric", type=str, default="auc_roc", help="Metric for metric_vs_n")
        parser.add_argument("--x", type=str, default="n", help="Sweep axis for metric_vs_n")
        parser.add_argument("--render", action="store_true", help="Also save a PNG next to the output")

    def handle(self, *args, **options):
        paths = [Path(p) for p in options["input"]]
        kind = options["kind"]
        if kind == "metric_vs_n":
            data = pd.concat([_read_table(p) for p in paths], ignore_index=True)
        elif kind == "spread_vs_n":
            data = _read_table(paths[0])
        else:
            path = paths[0]
            if path.suffix == ".npy":
                if not path.exists():
                    raise ConfigError(f"Plot input not found: {path}")
                data = np.load(path)
            else:
                table = _read_table(path)
                data = table["score"].to_numpy() if "score" in table.columns else table.iloc[:, 0].to_numpy()

        written = emit_plot_data(data, kind, options["output"], metric=options["metric"], x=options["x"],
                                 render=options["render"])
        self.stdout.write(self.style.SUCCESS(f"Wrote {kind} data to {written}"))

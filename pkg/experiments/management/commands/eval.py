import pandas as pd

from evaluation.metrics import evaluate_scores, jsonable
from experiments.management.base import LabCommand
from lggnn_lab.exceptions import ConfigError


class Command(LabCommand):
    help = "Score a CSV of pair predictions (columns score, label and optionally true_prob)"

    def add_arguments(self, parser):
        parser.add_argument("--input", type=str, required=True, help="CSV with score and label columns")
        parser.add_argument("--ks", type=int, nargs="+", default=[50, 100], help="Hits@k cutoffs")
        parser.add_argument("--output", type=str, help="Write the report as JSON instead of printing it")

    def handle(self, *args, **options):
        try:
            frame = pd.read_csv(options["input"])
        except FileNotFoundError as exc:
            raise ConfigError(f"Score file not found: {options['input']}") from exc
        missing = {"score", "label"} - set(frame.columns)
        if missing:
            raise ConfigError(f"{options['input']} lacks columns {sorted(missing)}")

        true_probs = frame["true_prob"].to_numpy() if "true_prob" in frame.columns else None
        report = evaluate_scores(
            frame["score"].to_numpy(),
            frame["label"].to_numpy(),
            ks=options["ks"],
            true_probs=true_probs,
            config={"source": options["input"]},
        )
        if options["output"]:
            path = report.write_json(options["output"])
            self.stdout.write(self.style.SUCCESS(f"AUC-ROC {report.auc_roc:.4f}; report written to {path}"))
        else:
            self.write_json(jsonable(report.to_dict()))

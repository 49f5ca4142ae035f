from pathlib import Path

from django.conf import settings

from experiments.config import available_presets, resolve_config
from experiments.management.base import LabCommand
from experiments.runner import run_experiment
from experiments.studies import STUDIES, run_study
from lggnn_lab.exceptions import ConfigError


class Command(LabCommand):
    help = "Run an experiment config over its seeds, or one of the statistical studies"

    def add_arguments(self, parser):
        parser.add_argument("--config", type=str, help=f"Config file or preset ({', '.join(available_presets())})")
        parser.add_argument("--study", type=str, choices=STUDIES, help="Run a statistical study instead")
        parser.add_argument("--seeds", type=int, nargs="+", help="Override the config seeds")
        parser.add_argument("--n", type=int, help="Override the config vertex count")
        parser.add_argument("--output-dir", type=str, help="Override the results directory")
        parser.add_argument("--parallel", action="store_true", help="Dispatch seeds as celery tasks")
        parser.add_argument("--no-persist", action="store_true", help="Skip storing the run in the database")

    def handle(self, *args, **options):
        if options["study"]:
            return self._run_study(options)
        if not options["config"]:
            raise ConfigError("pass --config or --study")

        cfg = resolve_config(options["config"])
        overrides = {}
        if options["seeds"]:
            overrides["seeds"] = options["seeds"]
        if options["n"]:
            overrides["n"] = options["n"]
        if options["output_dir"]:
            overrides["output_dir"] = options["output_dir"]
        if overrides:
            cfg = cfg.replace(**overrides)

        self.stdout.write(f"Running {cfg.name}: {cfg.method} on {cfg.echo()['graph']} over seeds {cfg.seeds}")
        result = run_experiment(cfg, parallel=options["parallel"] or None, persist=not options["no_persist"])
        self.stdout.write(result.to_frame().to_string(index=False))
        for failure in result.failures:
            self.stdout.write(self.style.WARNING(f"Seed {failure['seed']} failed: {failure['error']}"))
        self.stdout.write(self.style.SUCCESS(f"Results written to {result.output_dir}"))

    def _run_study(self, options):
        study_options = {}
        if options["seeds"] and options["study"] != "identifiability":
            study_options["seeds"] = options["seeds"]
        frame = run_study(options["study"], **study_options)
        out_dir = Path(options["output_dir"] or settings.LGGNN_SETTINGS["OUTPUT_DIR"]) / "studies"
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{options['study']}.csv"
        frame.to_csv(path, index=False)
        self.stdout.write(frame.to_string(index=False))
        self.stdout.write(self.style.SUCCESS(f"Study {options['study']} written to {path}"))

from django.conf import settings

from experiments.config import resolve_config
from experiments.management.base import LabCommand
from experiments.runner import CORA_METHODS, run_cora


class Command(LabCommand):
    help = "Topology-only link prediction on the Cora citation graph"

    def add_arguments(self, parser):
        parser.add_argument("--edges", type=str, help="Cora edge list (defaults to LGGNN_CORA_EDGE_LIST)")
        parser.add_argument("--seeds", type=int, nargs="+", help="Seeds to average over")
        parser.add_argument("--L", type=int, help="Number of message passing layers")
        parser.add_argument("--methods", type=str, nargs="+", default=list(CORA_METHODS), choices=CORA_METHODS)
        parser.add_argument("--parallel", action="store_true", help="Dispatch seeds as celery tasks")

    def handle(self, *args, **options):
        overrides = {"edge_list": options["edges"] or str(settings.LGGNN_SETTINGS["CORA_EDGE_LIST"])}
        if options["seeds"]:
            overrides["seeds"] = options["seeds"]
        if options["L"] is not None:
            overrides["L"] = options["L"]
        cfg = resolve_config("cora").replace(**overrides)

        results = run_cora(cfg, methods=options["methods"], parallel=options["parallel"] or None)
        for method, result in results.items():
            self.stdout.write(f"{method}:")
            self.stdout.write(result.to_frame().to_string(index=False))
        self.stdout.write(self.style.SUCCESS(f"Cora results written for {', '.join(results)}"))

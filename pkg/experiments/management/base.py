import json

from django.core.management.base import BaseCommand, CommandError

from graphons.families import load_graphon
from graphons.sampling import RHO_MODES, resolve_rho, sample_graph
from lggnn_lab.exceptions import ConfigError, LabError

from ..ingestion import load_edge_list

CONFIG_ERROR_CODE = 2
RUNTIME_ERROR_CODE = 3


class LabCommand(BaseCommand):
    """Maps config problems to exit code 2 and other lab failures to exit code 3."""

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR_CODE) from exc
        except FileNotFoundError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR_CODE) from exc
        except LabError as exc:
            raise CommandError(str(exc), returncode=RUNTIME_ERROR_CODE) from exc

    def write_json(self, payload):
        self.stdout.write(json.dumps(payload, indent=2, sort_keys=True, default=str))


def add_graph_arguments(parser):
    parser.add_argument("--edges", type=str, help="Edge list to load instead of sampling a graph")
    parser.add_argument("--model", type=str, default="ssbm_80_20", help="Graphon preset name or spec file")
    parser.add_argument("--n", type=int, default=1000, help="Number of vertices to sample")
    parser.add_argument("--rho-mode", type=str, default="one", choices=RHO_MODES, help="Sparsity regime")
    parser.add_argument("--seed", type=int, default=1, help="Random seed")


def graph_from_options(options):
    if options.get("edges"):
        return load_edge_list(options["edges"])
    try:
        model = load_graphon(options["model"])
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc
    n = options["n"]
    return sample_graph(model, n, rho=resolve_rho(options["rho_mode"], n), seed=options["seed"])

import json
from pathlib import Path

from graphons.families import BlockGraphon
from graphons.spectrum import sbm_spectrum
from lggnn.embedding import embed, resolve_dimension
from lggnn.estimators import moment_estimates
from experiments.management.base import LabCommand, add_graph_arguments, graph_from_options
from evaluation.metrics import jsonable
from regression.solvers import fit_box_constrained, fit_pls
from regression.space import SearchSpace
from regression.stats import accumulate_stats


class Command(LabCommand):
    help = "Fit edge regression coefficients on all pairs of a graph"

    def add_arguments(self, parser):
        add_graph_arguments(parser)
        parser.add_argument("--L", type=int, default=2, help="Number of message passing layers")
        parser.add_argument("--d", type=str, default="auto", help="Embedding dimension: auto, n or an integer")
        parser.add_argument("--method", type=str, default="box", choices=("box", "l1", "pls"))
        parser.add_argument("--bounds", type=float, nargs="+", help="Box half widths b_1..b_{L+1}")
        parser.add_argument("--radius", type=float, help="l1 ball radius")
        parser.add_argument("--components", type=int, help="PLS components")
        parser.add_argument("--output", type=str, help="Write the fit record as JSON instead of printing it")

    def handle(self, *args, **options):
        graph = graph_from_options(options)
        rho = graph.rho
        d = resolve_dimension(options["d"], graph.n, rho)
        moments = moment_estimates(embed(graph, L=options["L"], d=d, seed=graph.seed or 0))

        if options["method"] == "pls":
            fit = fit_pls(moments, graph, components=options["components"])
        else:
            spectrum = sbm_spectrum(graph.model) if isinstance(graph.model, BlockGraphon) else None
            coefficients = options["L"] + 1
            if options["method"] == "l1":
                space = SearchSpace.l1_ball(coefficients, rho=rho, radius=options["radius"], spectrum=spectrum)
            else:
                space = SearchSpace.box(coefficients, rho=rho, b=options["bounds"], spectrum=spectrum)
            fit = fit_box_constrained(accumulate_stats(moments, graph), space)

        record = jsonable(fit.to_record())
        if options["output"]:
            path = Path(options["output"])
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w") as fh:
                json.dump(record, fh, indent=2)
            self.stdout.write(self.style.SUCCESS(f"Wrote {fit.method} fit to {path}"))
        else:
            self.write_json(record)

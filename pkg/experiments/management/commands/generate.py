import json
from pathlib import Path

import numpy as np

from evaluation.metrics import jsonable
from experiments.management.base import LabCommand, add_graph_arguments, graph_from_options


class Command(LabCommand):
    help = "Sample a graph from a graphon and write its edge list with a JSON sidecar"

    def add_arguments(self, parser):
        add_graph_arguments(parser)
        parser.add_argument("--output", type=str, required=True, help="Edge list path to write")

    def handle(self, *args, **options):
        graph = graph_from_options(options)
        output = Path(options["output"])
        output.parent.mkdir(parents=True, exist_ok=True)

        edges = graph.edges()
        np.savetxt(output, np.column_stack([edges.rows, edges.cols]), fmt="%d",
                   header=f"n={graph.n} rho={graph.rho} seed={graph.seed}")
        sidecar = dict(graph.describe())
        if graph.latents is not None:
            sidecar["latents"] = graph.latents
        if graph.communities is not None:
            sidecar["communities"] = graph.communities
        sidecar_path = output.with_suffix(".json")
        with open(sidecar_path, "w") as fh:
            json.dump(jsonable(sidecar), fh, indent=2)

        self.stdout.write(
            self.style.SUCCESS(f"Wrote {graph.num_edges} edges on {graph.n} vertices to {output} ({sidecar_path.name})")
        )

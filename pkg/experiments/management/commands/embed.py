from experiments.management.base import LabCommand, add_graph_arguments, graph_from_options
from lggnn.embedding import embed, resolve_dimension


class Command(LabCommand):
    help = "Compute LG-GNN embeddings and export them as .npy or .csv"

    def add_arguments(self, parser):
        add_graph_arguments(parser)
        parser.add_argument("--L", type=int, default=2, help="Number of message passing layers")
        parser.add_argument("--d", type=str, default="auto", help="Embedding dimension: auto, n or an integer")
        parser.add_argument("--feature-seed", type=int, default=0, help="Seed of the random vertex features")
        parser.add_argument("--output", type=str, required=True, help="Output path (.npy or .csv)")

    def handle(self, *args, **options):
        graph = graph_from_options(options)
        d = resolve_dimension(options["d"], graph.n, graph.rho)
        emb = embed(graph, L=options["L"], d=d, seed=options["feature_seed"])
        path = emb.export(options["output"])
        self.stdout.write(self.style.SUCCESS(f"Exported embeddings n={emb.n} L={emb.L} d={emb.d} to {path}"))

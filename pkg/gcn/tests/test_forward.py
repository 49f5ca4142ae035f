# gcn/tests/test_forward.py
import numpy as np
from django.test import SimpleTestCase, tag

from graphons.families import ConstantGraphon, SymmetricSBM
from graphons.graphs import PairSet, SampledGraph
from graphons.sampling import sample_graph
from lggnn.embedding import EmbeddingTable, embed
from lggnn.estimators import moment_estimates
from lggnn_lab.exceptions import ParameterError
from ..diagnostics import collapse_diagnostic, pair_type_variance
from ..forward import GcnConfig, gcn_forward, gcn_scores, gcn_weights


class GcnForwardTests(SimpleTestCase):
    def test_two_vertices(self):
        """Test lambda^1 = (a + b, b + a) for one edge with identity weights"""
        graph = SampledGraph.from_edges(2, [(0, 1)])
        emb = gcn_forward(graph, GcnConfig(L=1, d=1), seed=3)
        a, b = emb.layer(0)[:, 0]
        np.testing.assert_allclose(emb.layer(1)[:, 0], [a + b, b + a], rtol=1e-15)
        self.assertEqual(emb.method, "gcn")

    def test_empty_graph_keeps_self_term(self):
        """Test isolated vertices only see M_k0 applied to their own embedding"""
        graph = sample_graph(ConstantGraphon(0.0), 6, seed=0)
        cfg = GcnConfig(L=2, d=4, weight_mode="fixed_random", weight_seed=9)
        emb = gcn_forward(graph, cfg, seed=1)
        (m10, _), (m20, _) = gcn_weights(cfg)
        np.testing.assert_allclose(emb.layer(1), emb.layer(0) @ m10.T, rtol=1e-12)
        np.testing.assert_allclose(emb.layer(2), emb.layer(0) @ m10.T @ m20.T, rtol=1e-12, atol=1e-15)

    def test_relu_is_nonnegative(self):
        graph = sample_graph(SymmetricSBM(3, 0.7, 0.2), 50, seed=2)
        emb = gcn_forward(graph, GcnConfig(L=3, d=8, activation="relu", weight_mode="fixed_random"), seed=4)
        self.assertTrue(np.all(emb.layers[1:] >= 0.0))

    def test_regular_graph_normalization(self):
        """Test the aggregation on a 2-regular cycle is the neighbour mean"""
        n = 10
        graph = SampledGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
        emb = gcn_forward(graph, GcnConfig(L=1, d=3, self_loop=False), seed=0)
        expected = graph.adjacency @ emb.layer(0) / 2.0
        np.testing.assert_allclose(emb.layer(1), expected, rtol=1e-14)

    def test_weights_respect_norm_cap(self):
        cfg = GcnConfig(L=3, d=16, weight_mode="fixed_random", op_norm_cap=0.5, weight_seed=2)
        for pair in gcn_weights(cfg):
            for matrix in pair:
                self.assertLessEqual(np.linalg.norm(matrix, 2), 0.5 + 1e-12)

    def test_init_scale(self):
        graph = sample_graph(ConstantGraphon(0.0), 2000, seed=0)
        emb = gcn_forward(graph, GcnConfig(L=0, d=10, init_scale=2.0), seed=5)
        self.assertAlmostEqual(np.std(emb.layer(0)) * np.sqrt(10), 2.0, delta=0.05)

    def test_config_validation(self):
        with self.assertRaises(ParameterError):
            GcnConfig(activation="tanh")
        with self.assertRaises(ParameterError):
            GcnConfig(init_scale=0.0)
        with self.assertRaises(ParameterError):
            GcnConfig(weight_mode="trained")

    def test_collapsed_scores_near_half(self):
        """Test sigmoid scores of near-zero embeddings are close to 1/2"""
        graph = sample_graph(SymmetricSBM(6, 0.8, 0.2), 400, seed=1)
        emb = gcn_forward(graph, GcnConfig(L=2, d=64, self_loop=False), seed=1)
        scores = gcn_scores(emb, PairSet.all_pairs(400))
        self.assertLess(np.max(np.abs(scores - 0.5)), 0.05)


class CollapseDiagnosticTests(SimpleTestCase):
    def test_identical_embeddings(self):
        frame = collapse_diagnostic(EmbeddingTable(layers=np.ones((2, 5, 3))))
        self.assertEqual(list(frame["spread"]), [0.0, 0.0])
        self.assertEqual(list(frame["norm_sd"]), [0.0, 0.0])

    def test_initial_layer_does_not_collapse(self):
        graph = sample_graph(SymmetricSBM(6, 0.8, 0.2), 400, seed=3)
        frame = collapse_diagnostic(gcn_forward(graph, GcnConfig(L=1, d=64, self_loop=False), seed=3))
        self.assertGreater(frame.loc[0, "spread"], 0.5)
        self.assertLess(frame.loc[1, "spread"], frame.loc[0, "spread"])

    def test_self_term_carries_initial_spread(self):
        """Test the full layer update keeps most of the layer-0 spread, so collapse runs drop M_k0"""
        graph = sample_graph(SymmetricSBM(6, 0.8, 0.2), 400, seed=3)
        with_self = collapse_diagnostic(gcn_forward(graph, GcnConfig(L=1, d=64), seed=3))
        without_self = collapse_diagnostic(gcn_forward(graph, GcnConfig(L=1, d=64, self_loop=False), seed=3))
        self.assertGreater(with_self.loc[1, "spread"], 0.8 * with_self.loc[0, "spread"])
        self.assertLess(without_self.loc[1, "spread"], 0.5 * with_self.loc[1, "spread"])

    def test_pair_type_variance(self):
        values = np.array([
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
        ])
        # pair (0, 1) is the only in-community pair: types {1.0} and {0.0, 0.0}
        variance = pair_type_variance(values, np.array([0, 0, 1]))
        self.assertAlmostEqual(variance, 2.0 / 9.0, places=14)


@tag("slow")
class CollapseScalingTests(SimpleTestCase):
    def test_layer_one_spread_shrinks_with_n(self):
        """Test the GCN layer-1 spread ratio between n = 400 and 1600 lies in [1.4, 2.8]"""
        model = SymmetricSBM(6, 0.8, 0.2)
        cfg = GcnConfig(L=1, d=64, self_loop=False)
        ratios = []
        for seed in range(10):
            spreads = {}
            for n in (400, 1600):
                graph = sample_graph(model, n, seed=seed)
                spreads[n] = collapse_diagnostic(gcn_forward(graph, cfg, seed=seed)).loc[1, "spread"]
            ratios.append(spreads[400] / spreads[1600])
        self.assertTrue(1.4 <= np.median(ratios) <= 2.8)

    def test_lggnn_pair_spread_stays_bounded_below(self):
        model = SymmetricSBM(6, 0.8, 0.2)
        for n in (400, 1600):
            graph = sample_graph(model, n, seed=0)
            moments = moment_estimates(embed(graph, L=1, seed=0))
            self.assertGreater(pair_type_variance(moments.order(2), graph.communities), 1e-4)

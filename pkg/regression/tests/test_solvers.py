# regression/tests/test_solvers.py
import numpy as np
from django.test import SimpleTestCase

from graphons.families import BlockGraphon, ConstantGraphon, SymmetricSBM
from graphons.graphs import PairSet, SampledGraph
from graphons.sampling import sample_graph
from graphons.spectrum import beta_star, sbm_spectrum
from lggnn.embedding import embed
from lggnn.estimators import MomentEstimates, moment_estimates
from lggnn.oracles import population_moments
from lggnn_lab.exceptions import EmptyDataError, ParameterError
from ..solvers import (
    BOX_PG,
    PLS,
    RegressionFit,
    fit_box_constrained,
    fit_pls,
    fit_pls_design,
    predict,
    threshold_edges,
)
from ..space import SearchSpace
from ..stats import SufficientStats, accumulate_stats


def _stats_from_design(X, y):
    stats = SufficientStats.zeros(X.shape[1])
    stats.add_block(X, y)
    return stats


def _assert_kkt(test, stats, fit, rel_tol=1e-6):
    """Interior coordinates have zero gradient; active ones push outward."""
    gradient = 2.0 * (stats.gram @ fit.beta - stats.cross) / stats.pair_count
    scale = 2.0 * np.linalg.norm(stats.cross) / stats.pair_count
    width = fit.space.half_widths
    for i, value in enumerate(fit.beta):
        if value >= width[i] * (1 - 1e-9):
            test.assertLessEqual(gradient[i], rel_tol * scale)
        elif value <= -width[i] * (1 - 1e-9):
            test.assertGreaterEqual(gradient[i], -rel_tol * scale)
        else:
            test.assertLessEqual(abs(gradient[i]), rel_tol * scale)


class AccumulateStatsTests(SimpleTestCase):
    def setUp(self):
        self.graph = sample_graph(SymmetricSBM(3, 0.7, 0.2), 30, seed=2)
        self.moments = moment_estimates(embed(self.graph, L=2, d=16, seed=3))

    def test_single_unit_pair(self):
        """Test q-hat = e_1 with a = 1 gives gram e_1 e_1^T and cross e_1"""
        values = np.zeros((2, 2, 2))
        values[0, 0, 1] = values[0, 1, 0] = 1.0
        graph = SampledGraph.from_edges(2, [(0, 1)])
        stats = accumulate_stats(MomentEstimates(values=values), graph)
        np.testing.assert_array_equal(stats.gram, [[1.0, 0.0], [0.0, 0.0]])
        np.testing.assert_array_equal(stats.cross, [1.0, 0.0])
        self.assertEqual(stats.pair_count, 1)
        self.assertEqual(stats.target_ss, 1.0)

    def test_all_pairs_count(self):
        graph = SampledGraph.from_edges(4, [(0, 1), (2, 3)])
        moments = moment_estimates(embed(graph, L=1, d=4, seed=0))
        self.assertEqual(accumulate_stats(moments, graph).pair_count, 6)

    def test_merge_doubles(self):
        """Test accumulating the same pairs twice doubles gram and cross exactly"""
        stats = accumulate_stats(self.moments, self.graph)
        doubled = stats.merge(stats)
        np.testing.assert_array_equal(doubled.gram, 2 * stats.gram)
        np.testing.assert_array_equal(doubled.cross, 2 * stats.cross)
        self.assertEqual(doubled.pair_count, 2 * stats.pair_count)

    def test_filter_forms_agree(self):
        """Test PairSet, mask and callable filters select the same pairs"""
        pairs = PairSet.all_pairs(30).select(np.arange(435) % 3 == 0)
        mask = np.zeros((30, 30), dtype=bool)
        mask[pairs.rows, pairs.cols] = True
        by_set = accumulate_stats(self.moments, self.graph, pairs)
        by_mask = accumulate_stats(self.moments, self.graph, mask)
        by_callable = accumulate_stats(self.moments, self.graph, lambda r, c: pairs.contains(r, c))
        for other in (by_mask, by_callable):
            self.assertEqual(other.pair_count, by_set.pair_count)
            np.testing.assert_allclose(other.gram, by_set.gram, rtol=1e-12)
            np.testing.assert_allclose(other.cross, by_set.cross, rtol=1e-12, atol=1e-15)

    def test_block_size_does_not_change_totals(self):
        small = accumulate_stats(self.moments, self.graph, block_pairs=7)
        default = accumulate_stats(self.moments, self.graph)
        np.testing.assert_allclose(small.gram, default.gram, rtol=1e-12)
        self.assertEqual(small.pair_count, default.pair_count)

    def test_empty_filter(self):
        with self.assertRaises(EmptyDataError):
            accumulate_stats(self.moments, self.graph, PairSet.empty(30))

    def test_vertex_count_mismatch(self):
        other = sample_graph(SymmetricSBM(3, 0.7, 0.2), 31, seed=2)
        with self.assertRaises(ParameterError):
            accumulate_stats(self.moments, other)

    def test_objective_is_mean_squared_residual(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(40, 3))
        y = (rng.random(40) < 0.4).astype(float)
        stats = _stats_from_design(X, y)
        beta = rng.normal(size=3)
        self.assertAlmostEqual(stats.objective(beta), np.mean((X @ beta - y) ** 2), places=12)


class BoxSolverTests(SimpleTestCase):
    def test_clamps_at_active_bound(self):
        """Test an unconstrained optimum of 5 is clamped to the bound 1"""
        stats = SufficientStats(gram=np.array([[1.0]]), cross=np.array([5.0]), target_ss=25.0, pair_count=1)
        fit = fit_box_constrained(stats, SearchSpace.box(1, b=[1.0]))
        self.assertAlmostEqual(fit.beta[0], 1.0, places=12)
        self.assertTrue(fit.converged)
        self.assertEqual(fit.method, BOX_PG)

    def test_interior_optimum(self):
        """Test an interior optimum matches the normal-equation solve within 1e-6"""
        rng = np.random.default_rng(11)
        X = rng.normal(size=(200, 3))
        y = X @ np.array([0.3, -0.5, 0.8]) + 0.05 * rng.normal(size=200)
        stats = _stats_from_design(X, y)
        oracle = np.linalg.solve(X.T @ X, X.T @ y)
        fit = fit_box_constrained(stats, SearchSpace.box(3))
        np.testing.assert_allclose(fit.beta, oracle, atol=1e-6)
        self.assertTrue(fit.converged)

    def test_kkt_certificates(self):
        """Test optimality conditions on fits with and without active bounds"""
        rng = np.random.default_rng(5)
        for trial in range(20):
            X = rng.normal(size=(80, 3)) @ rng.normal(size=(3, 3))
            y = X @ rng.normal(scale=3.0, size=3) + rng.normal(size=80)
            stats = _stats_from_design(X, y)
            space = SearchSpace.box(3, rho=0.5, b=rng.uniform(0.2, 1.0, size=3))
            fit = fit_box_constrained(stats, space)
            self.assertTrue(fit.converged, msg=f"trial {trial}")
            self.assertTrue(space.contains(fit.beta))
            _assert_kkt(self, stats, fit)

    def test_kkt_on_moment_features(self):
        """Test the certificates on collinear moment-estimate designs"""
        for seed in range(3):
            graph = sample_graph(SymmetricSBM(6, 0.8, 0.2), 120, seed=seed)
            moments = moment_estimates(embed(graph, L=1, d=120, seed=seed))
            stats = accumulate_stats(moments, graph)
            space = SearchSpace.box(2, b=[15.0, 40.0])
            fit = fit_box_constrained(stats, space)
            self.assertTrue(space.contains(fit.beta))
            _assert_kkt(self, stats, fit)

    def test_l1_ball_feasible_and_optimal(self):
        """Test the l1 fit stays in the ball and beats random feasible points"""
        rng = np.random.default_rng(9)
        X = rng.normal(size=(100, 3))
        y = X @ np.array([2.0, -1.0, 0.5]) + 0.1 * rng.normal(size=100)
        stats = _stats_from_design(X, y)
        space = SearchSpace.l1_ball(3, radius=0.5)
        fit = fit_box_constrained(stats, space)
        self.assertLessEqual(np.sum(np.abs(fit.beta)), 0.5 + 1e-9)
        for _ in range(200):
            point = space.project(rng.normal(size=3))
            self.assertLessEqual(fit.objective, stats.objective(point) + 1e-10)

    def test_zero_statistics(self):
        stats = SufficientStats(gram=np.zeros((2, 2)), cross=np.zeros(2), target_ss=0.0, pair_count=10)
        fit = fit_box_constrained(stats, SearchSpace.box(2))
        np.testing.assert_array_equal(fit.beta, [0.0, 0.0])
        self.assertTrue(fit.converged)

    def test_non_psd_gram_is_floored(self):
        """Test a numerically indefinite gram is floored and flagged"""
        stats = SufficientStats(
            gram=np.array([[1.0, 0.0], [0.0, -1e-3]]), cross=np.array([1.0, 0.0]),
            target_ss=1.0, pair_count=1,
        )
        fit = fit_box_constrained(stats, SearchSpace.box(2))
        self.assertIn("non_psd_gram", fit.warnings)
        np.testing.assert_allclose(fit.beta, [1.0, 0.0], atol=1e-8)

    def test_dimension_mismatch(self):
        stats = SufficientStats.zeros(2)
        stats.pair_count = 1
        with self.assertRaises(ParameterError):
            fit_box_constrained(stats, SearchSpace.box(3))

    def test_record(self):
        stats = SufficientStats(gram=np.array([[1.0]]), cross=np.array([5.0]), target_ss=25.0, pair_count=1)
        record = fit_box_constrained(stats, SearchSpace.box(1, b=[1.0])).to_record()
        self.assertEqual(
            set(record), {"method", "beta", "intercept", "bounds", "objective", "iterations", "converged", "warnings"}
        )
        self.assertEqual(record["bounds"]["mode"], "box")


class PlsTests(SimpleTestCase):
    def test_full_components_equal_ols(self):
        """Test PLS with every component recovers least squares with intercept"""
        rng = np.random.default_rng(2)
        X = rng.normal(size=(60, 3))
        y = X @ np.array([1.5, -0.7, 0.2]) + 0.3 + 0.2 * rng.normal(size=60)
        design = np.column_stack([X, np.ones(60)])
        oracle, *_ = np.linalg.lstsq(design, y, rcond=None)
        fit = fit_pls_design(X, y, components=3)
        np.testing.assert_allclose(fit.beta, oracle[:3], atol=1e-8)
        self.assertAlmostEqual(fit.intercept, oracle[3], delta=1e-8)
        self.assertEqual(fit.method, PLS)

    def test_single_component_closed_form(self):
        """Test w = X^T y / |X^T y|, beta = w (t^T y / t^T t) with t = X w on centred data"""
        X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]])
        y = np.array([1.0, 0.0, 1.0, 1.0])
        Xc, yc = X - X.mean(axis=0), y - y.mean()
        w = Xc.T @ yc
        w /= np.linalg.norm(w)
        t = Xc @ w
        expected = w * (t @ yc) / (t @ t)
        fit = fit_pls_design(X, y, components=1)
        np.testing.assert_allclose(fit.beta, expected, atol=1e-10)
        self.assertAlmostEqual(fit.intercept, y.mean() - X.mean(axis=0) @ expected, places=10)

    def test_constant_response(self):
        """Test equal responses give beta = 0 and a constant prediction"""
        X = np.random.default_rng(0).normal(size=(10, 2))
        fit = fit_pls_design(X, np.ones(10), components=2)
        np.testing.assert_array_equal(fit.beta, [0.0, 0.0])
        self.assertEqual(fit.intercept, 1.0)

    def test_zero_variance_column(self):
        rng = np.random.default_rng(1)
        X = np.column_stack([rng.normal(size=30), np.full(30, 2.0), rng.normal(size=30)])
        y = X[:, 0] - X[:, 2] + 0.1 * rng.normal(size=30)
        fit = fit_pls_design(X, y, components=2)
        self.assertEqual(fit.beta[1], 0.0)
        self.assertTrue(any(w.startswith("zero_variance_columns") for w in fit.warnings))

    def test_component_range(self):
        graph = sample_graph(SymmetricSBM(2, 0.8, 0.2), 20, seed=1)
        moments = moment_estimates(embed(graph, L=1, d=8, seed=1))
        self.assertEqual(fit_pls(moments, graph).components, 2)
        with self.assertRaises(ParameterError):
            fit_pls(moments, graph, components=3)
        with self.assertRaises(ParameterError):
            fit_pls(moments, graph, components=0)

    def test_empty_graph(self):
        graph = sample_graph(ConstantGraphon(0.0), 10, seed=0)
        moments = moment_estimates(embed(graph, L=1, d=4, seed=0))
        fit = fit_pls(moments, graph)
        np.testing.assert_array_equal(fit.beta, [0.0, 0.0])
        self.assertEqual(fit.intercept, 0.0)


class PredictTests(SimpleTestCase):
    def setUp(self):
        self.model = SymmetricSBM(6, 0.8, 0.2)
        self.graph = sample_graph(self.model, 60, seed=7)

    def _fit(self, beta, intercept=0.0, method=BOX_PG):
        return RegressionFit(
            beta=np.asarray(beta, dtype=float), space=None, objective=0.0, iterations=0,
            converged=True, method=method, intercept=intercept,
        )

    def test_zero_coefficients(self):
        moments = moment_estimates(embed(self.graph, L=1, d=8, seed=0))
        np.testing.assert_array_equal(predict(self._fit([0, 0]), moments, PairSet.all_pairs(60)), 0.0)
        pls = predict(self._fit([0, 0], intercept=0.3, method=PLS), moments, PairSet.all_pairs(60))
        np.testing.assert_array_equal(pls, 0.3)

    def test_population_moments_with_beta_star(self):
        """Test <beta*, W^(2:3)> returns 0.8 within blocks and 0.2 across"""
        moments = population_moments(self.graph, L=1)
        fit = self._fit(beta_star(sbm_spectrum(self.model)))
        pairs = PairSet.all_pairs(60)
        scores = predict(fit, moments, pairs)
        same = self.graph.communities[pairs.rows] == self.graph.communities[pairs.cols]
        np.testing.assert_allclose(scores[same], 0.8, atol=1e-8)
        np.testing.assert_allclose(scores[~same], 0.2, atol=1e-8)

    def test_positive_scaling_keeps_ranking(self):
        moments = moment_estimates(embed(self.graph, L=1, d=16, seed=2))
        fit = self._fit([1.0, -0.5])
        base = predict(fit, moments, PairSet.all_pairs(60))
        scaled = predict(fit, moments.scaled(3.0), PairSet.all_pairs(60))
        np.testing.assert_allclose(scaled, 3.0 * base, rtol=1e-12, atol=1e-12 * np.max(np.abs(base)))
        self.assertEqual(np.argmax(scaled), np.argmax(base))

    def test_matrix_form(self):
        moments = moment_estimates(embed(self.graph, L=1, d=16, seed=2))
        fit = self._fit([1.0, -0.5])
        matrix = predict(fit, moments)
        pairs = PairSet.all_pairs(60)
        expected = predict(fit, moments, pairs)
        np.testing.assert_allclose(
            matrix[pairs.rows, pairs.cols], expected, rtol=1e-12, atol=1e-12 * np.max(np.abs(expected))
        )
        np.testing.assert_array_equal(matrix, matrix.T)
        self.assertFalse(np.any(np.diag(matrix)))

    def test_clamp(self):
        moments = moment_estimates(embed(self.graph, L=1, d=16, seed=2))
        clamped = predict(self._fit([50.0, -50.0]), moments, PairSet.all_pairs(60), clamp=True)
        self.assertTrue(np.all((clamped >= 0.0) & (clamped <= 1.0)))

    def test_dimension_mismatch(self):
        moments = moment_estimates(embed(self.graph, L=2, d=8, seed=2))
        with self.assertRaises(ParameterError):
            predict(self._fit([1.0, 0.0]), moments)


class ThresholdTests(SimpleTestCase):
    def setUp(self):
        self.p_hat = np.array([
            [0.0, 0.9, 0.2, 0.4],
            [0.9, 0.0, 0.6, 0.1],
            [0.2, 0.6, 0.0, 0.3],
            [0.4, 0.1, 0.3, 0.0],
        ])

    def test_minus_infinity_keeps_all_pairs(self):
        self.assertEqual(len(threshold_edges(self.p_hat, -np.inf)), 6)

    def test_above_maximum_is_empty(self):
        self.assertEqual(len(threshold_edges(self.p_hat, 0.95)), 0)

    def test_vector_scores(self):
        pairs = PairSet([0, 2], [1, 3], 4)
        kept = threshold_edges(np.array([0.9, 0.1]), 0.5, pairs)
        self.assertEqual(list(kept), [(0, 1)])

    def test_inclusive_threshold(self):
        kept = threshold_edges(self.p_hat, 0.6)
        self.assertEqual(list(kept), [(0, 1), (1, 2)])


class IdentifiabilityTests(SimpleTestCase):
    def test_single_feature_cannot_separate_pair_types(self):
        """Test a fit on q^(2) alone scores pair types (1,1) and (1,2) identically"""
        model = BlockGraphon([[0.5, 0.25], [0.25, 0.75]])
        graph = sample_graph(model, 200, seed=3)
        moments = population_moments(graph, L=0)
        fit = fit_box_constrained(accumulate_stats(moments, graph), SearchSpace.box(1, b=[10.0]))
        pairs = PairSet.all_pairs(200)
        scores = predict(fit, moments, pairs)
        labels = graph.communities
        first = scores[(labels[pairs.rows] == 0) & (labels[pairs.cols] == 0)]
        mixed = scores[labels[pairs.rows] != labels[pairs.cols]]
        self.assertEqual(np.unique(first).size, 1)
        self.assertEqual(first[0], mixed[0])
        self.assertAlmostEqual(model.evaluate(0.1, 0.2) - model.evaluate(0.1, 0.9), 0.25, places=12)

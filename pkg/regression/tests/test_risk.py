# regression/tests/test_risk.py
import math

import numpy as np
from django.test import SimpleTestCase

from graphons.families import BlockGraphon, ConstantGraphon, GeometricGraphon, SymmetricSBM
from graphons.graphs import PairSet
from graphons.sampling import sample_graph
from graphons.spectrum import beta_star, sbm_spectrum
from lggnn.embedding import embed
from lggnn.estimators import moment_estimates
from lggnn_lab.exceptions import EmptyDataError, UnsupportedModelError
from ..risk import empirical_risk, gen_error_bound, population_risk_sbm
from ..solvers import fit_box_constrained
from ..space import SearchSpace
from ..stats import accumulate_stats


class PopulationRiskTests(SimpleTestCase):
    def test_zero_at_beta_star(self):
        """Test R(beta*) = 0 for block models whose distinct rank fits the coefficients"""
        for model in (
            SymmetricSBM(6, 0.8, 0.2),
            ConstantGraphon(0.3),
            BlockGraphon([[0.5, 0.25], [0.25, 0.75]]),
            SymmetricSBM(4, 0.55, 0.45),
        ):
            spec = sbm_spectrum(model)
            padded = np.zeros(3)
            target = beta_star(spec)
            padded[: target.size] = target
            self.assertLess(population_risk_sbm(spec, padded), 1e-10)

    def test_constant_with_zero_beta(self):
        """Test beta = 0 on constant(p) gives p^2"""
        self.assertAlmostEqual(population_risk_sbm(sbm_spectrum(ConstantGraphon(0.4)), [0.0]), 0.16, places=14)

    def test_ssbm_top_eigenvalue_only(self):
        """Test beta = (1 / (mu_1 rho), 0) leaves 5 (rho mu_2 - rho mu_2^2 / mu_1)^2"""
        spec = sbm_spectrum(SymmetricSBM(6, 0.8, 0.2))
        for rho in (1.0, 0.5):
            risk = population_risk_sbm(spec, [1.0 / (0.3 * rho), 0.0], rho=rho)
            expected = 5 * (0.1 - 0.01 / 0.3) ** 2 * rho ** 2
            self.assertAlmostEqual(risk, expected, places=12)
        self.assertAlmostEqual(population_risk_sbm(spec, [1 / 0.3, 0.0]), 0.0222, delta=1e-4)

    def test_accepts_block_model(self):
        model = SymmetricSBM(6, 0.8, 0.2)
        self.assertEqual(
            population_risk_sbm(model, [1.0, 0.0]), population_risk_sbm(sbm_spectrum(model), [1.0, 0.0])
        )

    def test_unsupported_model(self):
        with self.assertRaises(UnsupportedModelError):
            population_risk_sbm(GeometricGraphon(11, 0.2), [1.0])


class GenErrorBoundTests(SimpleTestCase):
    def test_zero_when_rank_covered(self):
        spec = sbm_spectrum(SymmetricSBM(6, 0.8, 0.2))
        self.assertEqual(gen_error_bound(spec, L=1), 0.0)
        self.assertEqual(gen_error_bound(sbm_spectrum(ConstantGraphon(0.5)), L=0), 0.0)

    def test_ssbm_single_moment_truncation(self):
        """Test L = 0 on SSBM(6, .8, .2) gives sqrt(2.1^2 + 0.3^2)"""
        spec = sbm_spectrum(SymmetricSBM(6, 0.8, 0.2))
        self.assertAlmostEqual(gen_error_bound(spec, L=0), math.sqrt(4.5), places=10)


class EmpiricalRiskTests(SimpleTestCase):
    def setUp(self):
        self.graph = sample_graph(SymmetricSBM(3, 0.6, 0.1), 40, seed=6)
        self.moments = moment_estimates(embed(self.graph, L=1, d=20, seed=1))

    def test_empty_graph_zero_beta(self):
        graph = sample_graph(ConstantGraphon(0.0), 15, seed=0)
        moments = moment_estimates(embed(graph, L=1, d=4, seed=0))
        self.assertEqual(empirical_risk([0.0, 0.0], moments, graph), 0.0)

    def test_zero_beta_is_edge_fraction(self):
        """Test beta = 0 gives e / m over the evaluated pairs"""
        risk = empirical_risk([0.0, 0.0], self.moments, self.graph)
        self.assertAlmostEqual(risk, self.graph.num_edges / 780, places=14)

    def test_matches_sufficient_statistics(self):
        """Test the streamed risk equals the quadratic form of the accumulated statistics"""
        rng = np.random.default_rng(3)
        pairs = PairSet.all_pairs(40).select(rng.random(780) < 0.5)
        stats = accumulate_stats(self.moments, self.graph, pairs)
        for _ in range(5):
            beta = rng.normal(size=2)
            direct = empirical_risk(beta, self.moments, self.graph, pairs)
            self.assertAlmostEqual(direct, stats.objective(beta), delta=1e-10)

    def test_accepts_fit(self):
        stats = accumulate_stats(self.moments, self.graph)
        fit = fit_box_constrained(stats, SearchSpace.box(2))
        self.assertAlmostEqual(empirical_risk(fit, self.moments, self.graph), fit.objective, delta=1e-10)

    def test_empty_filter(self):
        with self.assertRaises(EmptyDataError):
            empirical_risk([0.0, 0.0], self.moments, self.graph, PairSet.empty(40))

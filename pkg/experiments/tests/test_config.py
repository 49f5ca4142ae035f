# experiments/tests/test_config.py
import json
import math
import tempfile
from pathlib import Path

from django.test import SimpleTestCase, override_settings

from graphons.families import SymmetricSBM
from lggnn_lab.exceptions import ConfigError
from ..config import CONFIG_DIR, ExperimentConfig, available_presets, resolve_config


class ExperimentConfigTests(SimpleTestCase):
    def test_defaults(self):
        cfg = ExperimentConfig.from_document({"model": "ssbm_80_20"})
        self.assertEqual(cfg.method, "lggnn_box")
        self.assertEqual(cfg.protocol, "in_sample")
        self.assertEqual(cfg.ks, [50, 100])
        self.assertEqual(cfg.seeds, [1, 2, 3])
        self.assertEqual(cfg.n, 1000)
        self.assertTrue(cfg.is_synthetic)
        self.assertIsInstance(cfg.graphon(), SymmetricSBM)

    def test_inline_model_document(self):
        cfg = ExperimentConfig.from_document({"model": {"kind": "constant", "p": 0.3}, "n": 50})
        self.assertEqual(cfg.graphon().evaluate(0.1, 0.9), 0.3)

    def test_rho_modes(self):
        """Test rho = 1, n^(-1/2) and log(n)/n"""
        base = ExperimentConfig.from_document({"model": "ssbm_80_20", "n": 400})
        self.assertEqual(base.rho(), 1.0)
        self.assertAlmostEqual(base.replace(rho_mode="inv_sqrt_n").rho(), 0.05)
        self.assertAlmostEqual(base.replace(rho_mode="log_n_over_n").rho(), math.log(400) / 400)

    def test_requires_graph_source(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_document({"name": "empty"})

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError) as ctx:
            ExperimentConfig.from_document({"model": "no_such_graphon"})
        self.assertIn("model", str(ctx.exception))

    def test_rejected_fields(self):
        bad_documents = [
            {"model": "ssbm_80_20", "p": 1.0},
            {"model": "ssbm_80_20", "p": 0.0},
            {"model": "ssbm_80_20", "seeds": [1, 1]},
            {"model": "ssbm_80_20", "d_policy": "wide"},
            {"model": "ssbm_80_20", "d_policy": "0"},
            {"model": "ssbm_80_20", "method": "lggnn_sgd"},
            {"model": "ssbm_80_20", "L": 2, "pls_components": 4},
            {"model": "ssbm_80_20", "L": 1, "box_bounds": [1.0]},
            {"model": "ssbm_80_20", "l1_radius": -1.0},
            {"model": "ssbm_80_20", "gcn": {"activation": "tanh"}},
            {"model": {"kind": "ssbm", "k": 2, "p": 1.5, "q": 0.1}},
        ]
        for document in bad_documents:
            with self.subTest(document=document):
                with self.assertRaises(ConfigError):
                    ExperimentConfig.from_document(document)

    def test_replace_revalidates(self):
        cfg = ExperimentConfig.from_document({"model": "ssbm_80_20"})
        self.assertEqual(cfg.replace(n=64).n, 64)
        with self.assertRaises(ConfigError):
            cfg.replace(p=2.0)

    def test_echo_columns(self):
        cfg = ExperimentConfig.from_document({"name": "echo", "model": "ssbm_80_20", "n": 300})
        self.assertEqual(
            cfg.echo(),
            {"name": "echo", "graph": "ssbm_80_20", "n": 300, "rho_mode": "one", "L": 2,
             "d_policy": "auto", "method": "lggnn_box", "protocol": "in_sample", "p": 0.2},
        )

    def test_echo_for_edge_list(self):
        cfg = ExperimentConfig.from_document({"edge_list": "data/cora.edges"})
        self.assertFalse(cfg.is_synthetic)
        self.assertEqual(cfg.echo()["graph"], "cora.edges")
        self.assertEqual(cfg.echo()["rho_mode"], "empirical")

    def test_results_dir(self):
        cfg = ExperimentConfig.from_document({"name": "run_a", "model": "ssbm_80_20", "output_dir": "/tmp/out"})
        self.assertEqual(cfg.results_dir(), Path("/tmp/out") / "run_a")
        default_root = cfg.replace(output_dir="")
        with override_settings(LGGNN_SETTINGS={"OUTPUT_DIR": Path("/srv/results")}):
            self.assertEqual(default_root.results_dir(), Path("/srv/results") / "run_a")

    def test_load_errors(self):
        with tempfile.TemporaryDirectory() as tmp:
            missing = Path(tmp) / "missing.json"
            with self.assertRaises(ConfigError):
                ExperimentConfig.load(missing)
            broken = Path(tmp) / "broken.json"
            broken.write_text("{not json")
            with self.assertRaises(ConfigError):
                ExperimentConfig.load(broken)
            good = Path(tmp) / "good.json"
            good.write_text(json.dumps({"name": "good", "model": "ssbm_55_45"}))
            self.assertEqual(ExperimentConfig.load(good).name, "good")


class PresetTests(SimpleTestCase):
    def test_every_preset_validates(self):
        names = available_presets()
        self.assertIn("ssbm_80_20_lggnn", names)
        self.assertIn("cora", names)
        for name in names:
            with self.subTest(preset=name):
                cfg = resolve_config(name)
                self.assertEqual(cfg.name, name)

    def test_resolve_by_path(self):
        cfg = resolve_config(CONFIG_DIR / "ssbm_80_20_gcn.json")
        self.assertEqual(cfg.method, "gcn_untrained")

    def test_unknown_name(self):
        with self.assertRaises(ConfigError):
            resolve_config("no_such_experiment")

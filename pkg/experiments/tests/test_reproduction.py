# experiments/tests/test_reproduction.py
import tempfile

from django.conf import settings
from django.test import SimpleTestCase, tag
from unittest import skipUnless

from ..config import resolve_config
from ..runner import run_cora, run_experiment

CORA_AVAILABLE = settings.LGGNN_SETTINGS["CORA_EDGE_LIST"].exists()


@tag("slow")
class SyntheticTableTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _run(self, preset, **changes):
        cfg = resolve_config(preset).replace(output_dir=self.tmp.name, **changes)
        result = run_experiment(cfg, persist=False)
        self.assertEqual(result.failures, [])
        return result

    def test_ssbm_top_pairs_are_in_community(self):
        """Test P-Ratio@100 on SSBM(6, 0.8, 0.2) at n=1000 is exactly 1 over three seeds"""
        result = self._run("ssbm_80_20_lggnn")
        self.assertEqual(result.mean("prob_ratio@100"), 1.0)
        self.assertGreater(result.mean("auc_roc"), 0.5)

    def test_ten_sbm_table_row(self):
        result = self._run("ten_sbm_lggnn")
        self.assertGreaterEqual(result.mean("prob_ratio@100"), 0.83)
        self.assertLessEqual(result.mean("prob_ratio@100"), 0.94)
        self.assertGreaterEqual(result.mean("auc_roc"), 0.70)
        self.assertLessEqual(result.mean("auc_roc"), 0.77)

    def test_geometric_table_row(self):
        result = self._run("geometric_lggnn")
        self.assertGreaterEqual(result.mean("auc_roc"), 0.86)
        self.assertLessEqual(result.mean("auc_roc"), 0.96)

    def test_untrained_gcn_cross_entropy(self):
        result = self._run("ssbm_80_20_gcn", n=300)
        self.assertIsNotNone(result.mean("cross_entropy"))


@tag("slow")
@skipUnless(CORA_AVAILABLE, "Cora edge list not present")
class CoraTests(SimpleTestCase):
    def test_hits_at_50(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = resolve_config("cora").replace(
                edge_list=str(settings.LGGNN_SETTINGS["CORA_EDGE_LIST"]), output_dir=tmp,
            )
            results = run_cora(cfg, persist=False)
        box, pls = results["lggnn_box"], results["lggnn_pls"]
        self.assertGreaterEqual(box.mean("hits@50"), 0.50)
        self.assertLessEqual(box.mean("hits@50"), 0.63)
        self.assertGreaterEqual(pls.mean("hits@50"), 0.53)
        self.assertLessEqual(pls.mean("hits@50"), 0.65)

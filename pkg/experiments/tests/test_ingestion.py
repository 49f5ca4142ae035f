# experiments/tests/test_ingestion.py
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from lggnn_lab.exceptions import ConfigError, EdgeListParseError, EmptyDataError
from ..ingestion import load_edge_list


class LoadEdgeListTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _write(self, text):
        path = Path(self.tmp.name) / "graph.edges"
        path.write_text(text)
        return path

    def test_path_graph(self):
        """Test '0 1' and '1 2' load as a path on three vertices"""
        graph = load_edge_list(self._write("0 1\n1 2\n"))
        self.assertEqual(graph.n, 3)
        self.assertEqual(graph.num_edges, 2)
        np.testing.assert_array_equal(graph.degrees, [1, 2, 1])
        self.assertAlmostEqual(graph.rho, 2 / 3)
        self.assertFalse(graph.has_latents)
        self.assertEqual(graph.metadata["latents"], "absent")

    def test_self_loop_dropped_with_warning(self):
        with self.assertLogs("experiments.ingestion", level="WARNING") as logs:
            graph = load_edge_list(self._write("0 1\n2 2\n"))
        self.assertEqual(graph.metadata["self_loops_dropped"], 1)
        self.assertEqual(graph.num_edges, 1)
        self.assertEqual(graph.n, 3)
        self.assertTrue(any("1 self-loops" in line for line in logs.output))

    def test_duplicates_merged(self):
        graph = load_edge_list(self._write("0 1\n1 0\n0 1\n1 2\n"))
        self.assertEqual(graph.num_edges, 2)
        self.assertEqual(graph.metadata["duplicates_merged"], 2)

    def test_comments_and_blank_lines(self):
        graph = load_edge_list(self._write("# header\n\n0 1  # first\n1 2\n"))
        self.assertEqual(graph.num_edges, 2)

    def test_ids_compacted(self):
        graph = load_edge_list(self._write("10 20\n20 35\n"))
        self.assertEqual(graph.n, 3)
        self.assertTrue(graph.metadata["relabelled"])
        self.assertTrue(graph.has_edge(np.array([0, 1]), np.array([1, 2])).all())

    def test_parse_error_reports_line(self):
        path = self._write("0 1\n1 two\n")
        with self.assertRaises(EdgeListParseError) as ctx:
            load_edge_list(path)
        self.assertEqual(ctx.exception.line_number, 2)

    def test_wrong_field_count(self):
        with self.assertRaises(EdgeListParseError) as ctx:
            load_edge_list(self._write("0 1\n1 2\n3\n"))
        self.assertEqual(ctx.exception.line_number, 3)

    def test_missing_file(self):
        missing = Path(self.tmp.name) / "absent.edges"
        with self.assertRaises(ConfigError) as ctx:
            load_edge_list(missing)
        self.assertIn(str(missing), str(ctx.exception))

    def test_no_edges(self):
        with self.assertRaises(EmptyDataError):
            load_edge_list(self._write("# nothing here\n"))

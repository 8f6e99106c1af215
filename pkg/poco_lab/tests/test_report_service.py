# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import csv
import io
import json
import tempfile
import unittest
from pathlib import Path

from poco_lab.exceptions import ManifestError
from poco_lab.services.report_service import CSV_COLUMNS, ReportService, report

GOLDEN = Path(__file__).parent / "golden" / "foo_trace.jsonl"


class TestReportService(unittest.TestCase):
	"""Test cases for trace files and their renderings"""

	def setUp(self):
		self.service = ReportService()
		self.trace = self.service.read_trace(GOLDEN)

	def test_read_trace(self):
		"""Test every golden line is read in order"""
		self.assertEqual([row["round"] for row in self.trace], [1, 2, 3, 4, 5])

	def test_write_trace_is_byte_stable(self):
		"""Test writing read rows reproduces the file"""
		with tempfile.TemporaryDirectory() as tmp:
			path = self.service.write_trace(self.trace, Path(tmp) / "trace.jsonl")
			self.assertEqual(path.read_bytes(), GOLDEN.read_bytes())

	def test_bad_trace_lines(self):
		"""Test invalid JSON and unknown schema versions are rejected"""
		with tempfile.TemporaryDirectory() as tmp:
			path = Path(tmp) / "trace.jsonl"
			path.write_text("{\"schema_version\": 9}\n", encoding="utf-8")
			with self.assertRaises(ManifestError):
				self.service.read_trace(path)
			path.write_text("{\n", encoding="utf-8")
			with self.assertRaises(ManifestError):
				self.service.read_trace(path)

	def test_json_rendering(self):
		"""Test the JSON report carries rounds and fresh-seed ratios"""
		data = json.loads(report(self.trace, "json", {"percentages": {}}))
		self.assertEqual(len(data["rounds"]), 5)
		self.assertEqual(data["fresh_seed_ratio"][0], 1.0)
		self.assertIn("ledger", data)

	def test_csv_rendering(self):
		"""Test one CSV row per round under the fixed header"""
		rows = list(csv.reader(io.StringIO(report(self.trace, "csv"))))
		self.assertEqual(tuple(rows[0]), CSV_COLUMNS)
		self.assertEqual(len(rows), 6)
		self.assertEqual(rows[2][1], "bug(bug)")
		self.assertEqual(rows[2][2], "s2 s3")
		self.assertEqual(rows[4][8], "converging")
		self.assertEqual(rows[5][9], "1")

	def test_text_rendering(self):
		"""Test the text report and its time composition section"""
		ledger = {
			"totals": {"base_cmin": 1.0},
			"percentages": {"base_cmin": 100.0},
			"probes": {"count": 2, "seconds": 0.5},
		}
		text = report(self.trace, "text", ledger)
		self.assertTrue(text.startswith("round 1: ok\n"))
		self.assertIn("reckless [0 1 2 3 4] (converging)", text)
		self.assertIn("fixed point", text)
		self.assertIn("time composition:", text)
		self.assertIn("probes: 2 in 0.5000s", text)

	def test_unknown_format(self):
		"""Test only json, csv and text render"""
		with self.assertRaises(ValueError):
			report(self.trace, "xml")


if __name__ == "__main__":
	unittest.main()

# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import io
import json
import re
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from poco_lab.api.cli import main
from poco_lab.exceptions import EXIT_INPUT, EXIT_OK, EXIT_PRECONDITION, EXIT_USAGE

GOLDEN = Path(__file__).parent / "golden" / "foo_trace.jsonl"
ARTIFACTS = ("selected.json", "baseline.json", "delta.json", "trace.jsonl", "toggles.json")


class TestCli(unittest.TestCase):
	"""Test cases for the poco-lab command line"""

	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()
		self.root = Path(self.tmp.name)

	def tearDown(self):
		self.tmp.cleanup()

	def run_cli(self, *argv):
		out, err = io.StringIO(), io.StringIO()
		with redirect_stdout(out), redirect_stderr(err):
			code = main(list(argv))
		return code, out.getvalue(), err.getvalue()

	def foo_corpus(self):
		directory = self.root / "corpus"
		directory.mkdir(exist_ok=True)
		for name, data in {"s1": b"abcde", "s2": b"jello", "s3": b""}.items():
			(directory / name).write_bytes(data)
		return directory

	def test_parse_prints_census(self):
		"""Test parse reports foo's census"""
		code, out, _ = self.run_cli("parse", "foo")
		self.assertEqual(code, EXIT_OK)
		census = json.loads(out)
		self.assertEqual((census["guards"], census["blocks"], census["edges"]), (5, 11, 15))

	def test_pretty(self):
		"""Test parse --pretty prints canonical source"""
		code, out, _ = self.run_cli("parse", "foo", "--pretty")
		self.assertEqual(code, EXIT_OK)
		self.assertIn("entry fn foo(input) {", out)

	def test_usage_errors(self):
		"""Test missing commands, unknown commands and missing options exit 1"""
		self.assertEqual(self.run_cli()[0], EXIT_USAGE)
		self.assertEqual(self.run_cli("frobnicate")[0], EXIT_USAGE)
		self.assertEqual(self.run_cli("poco", "foo")[0], EXIT_USAGE)
		self.assertEqual(self.run_cli("eval", "foo", "corpus")[0], EXIT_USAGE)

	def test_input_errors(self):
		"""Test unreadable programs and bad sources exit 2"""
		self.assertEqual(self.run_cli("parse", str(self.root / "missing.gl"))[0], EXIT_INPUT)
		bad = self.root / "bad.gl"
		bad.write_text("entry fn f(input) { x = 1 }\n", encoding="utf-8")
		self.assertEqual(self.run_cli("parse", str(bad))[0], EXIT_INPUT)

	def test_parse_error_prints_bare_diagnostic(self):
		"""Test a syntax error is printed as file:line:col: message and also logged"""
		bad = self.root / "bad.gl"
		bad.write_text("entry fn f(input) { x = 1 }\n", encoding="utf-8")
		code, out, err = self.run_cli("parse", str(bad))
		self.assertEqual(code, EXIT_INPUT)
		self.assertEqual(out, "")
		lines = err.splitlines()
		bare = [line for line in lines if re.fullmatch(re.escape(str(bad)) + r":1:\d+: \S.*", line)]
		self.assertEqual(len(bare), 1, err)
		self.assertTrue(any("parse: Error parsing program: " + bare[0] in line for line in lines), err)

	def test_config_errors(self):
		"""Test an invalid config file is a usage error"""
		config = self.root / "config.json"
		config.write_text("{\"no_such_setting\": 1}", encoding="utf-8")
		self.assertEqual(self.run_cli("--config", str(config), "parse", "foo")[0], EXIT_USAGE)

	def test_show_config(self):
		"""Test flags reach the merged settings from either side of the command"""
		code, out, _ = self.run_cli("--step-budget", "5", "parse", "foo", "--show-config", "--toggle-loops")
		self.assertEqual(code, EXIT_OK)
		settings = json.loads(out)
		self.assertEqual(settings["step_budget"], 5)
		self.assertTrue(settings["toggle_loops"])

	def test_precondition_failure(self):
		"""Test a corpus that faults without toggles exits 3"""
		program = self.root / "div.gl"
		program.write_text("entry fn f(input) {\n\tx = 10 / input[0];\n}\n", encoding="utf-8")
		corpus = self.root / "faulty"
		corpus.mkdir()
		(corpus / "zero").write_bytes(b"")
		code, _, _ = self.run_cli("poco", str(program), str(corpus), "-o", str(self.root / "out"))
		self.assertEqual(code, EXIT_PRECONDITION)

	def test_poco_is_reproducible(self):
		"""Test two selection runs write byte-identical artifacts"""
		corpus = self.foo_corpus()
		for name in ("one", "two"):
			code, _, _ = self.run_cli("poco", "foo", str(corpus), "-o", str(self.root / name), "--step-budget", "1000")
			self.assertEqual(code, EXIT_OK)

		for artifact in ARTIFACTS:
			with self.subTest(artifact=artifact):
				self.assertEqual((self.root / "one" / artifact).read_bytes(), (self.root / "two" / artifact).read_bytes())
		self.assertEqual((self.root / "one" / "trace.jsonl").read_bytes(), GOLDEN.read_bytes())
		delta = json.loads((self.root / "one" / "delta.json").read_text(encoding="utf-8"))
		self.assertEqual([seed["id"] for seed in delta["seeds"]], ["s2"])

	def test_run_and_report(self):
		"""Test run prints outcomes and report renders a trace"""
		seed = self.root / "hello"
		seed.write_bytes(b"hello")
		code, out, _ = self.run_cli("run", "foo", str(seed))
		self.assertEqual(code, EXIT_OK)
		self.assertEqual(json.loads(out)["result"], {"kind": "bug", "label": "bug"})

		output = self.root / "report.csv"
		code, _, _ = self.run_cli("report", str(GOLDEN), "--format", "csv", "-o", str(output))
		self.assertEqual(code, EXIT_OK)
		self.assertEqual(len(output.read_text(encoding="utf-8").splitlines()), 6)

	def test_cmin_and_fuzz(self):
		"""Test cmin writes its selection and fuzz its report"""
		corpus = self.foo_corpus()
		code, _, _ = self.run_cli("cmin", "foo", str(corpus), "-o", str(self.root / "cmin"))
		self.assertEqual(code, EXIT_OK)
		self.assertTrue((self.root / "cmin" / "seeds" / "s3").is_file())

		code, _, _ = self.run_cli(
			"fuzz", "foo", str(corpus), "--manifest", str(self.root / "cmin" / "selected.json"),
			"-o", str(self.root / "fuzz"), "--fuzz-executions", "200")
		self.assertEqual(code, EXIT_OK)
		report = json.loads((self.root / "fuzz" / "report.json").read_text(encoding="utf-8"))
		self.assertEqual(report["executions"], 200)
		self.assertEqual([entry["id"] for entry in report["queue"]][:1], ["s3"])


if __name__ == "__main__":
	unittest.main()

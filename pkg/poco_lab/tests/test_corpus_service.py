# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import json
import tempfile
import unittest
from pathlib import Path

from poco_lab.exceptions import CorpusError, ManifestError
from poco_lab.models.fuzz_report import CrashRecord, FuzzReport
from poco_lab.models.seed import Corpus
from poco_lab.services.corpus_service import CorpusService, ingest_corpus, read_manifest, write_manifest
from poco_lab.services.fuzz_service import fuzz
from poco_lab.services.instrument_service import insert_toggles
from poco_lab.services.parser_service import parse


class TestCorpusService(unittest.TestCase):
	"""Test cases for corpus ingestion and manifests"""

	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()
		self.root = Path(self.tmp.name)
		self.service = CorpusService()

	def tearDown(self):
		self.tmp.cleanup()

	def write_corpus(self, files, name="corpus"):
		directory = self.root / name
		directory.mkdir()
		for filename, data in files.items():
			(directory / filename).write_bytes(data)
		return directory

	def test_ingest_sorts_by_id(self):
		"""Test ids are file stems in lexicographic order"""
		directory = self.write_corpus({"s3": b"", "s1.bin": b"abcde", "s2": b"jello"})
		corpus = ingest_corpus(directory)
		self.assertEqual(corpus.ids, ["s1", "s2", "s3"])
		self.assertEqual(corpus.by_id("s1").data, b"abcde")

	def test_empty_and_missing_directories(self):
		"""Test a corpus needs at least one readable file"""
		with self.assertRaises(CorpusError):
			ingest_corpus(self.write_corpus({}))
		with self.assertRaises(CorpusError):
			ingest_corpus(self.root / "nowhere")

	def test_duplicate_stems(self):
		"""Test two files with one stem are rejected"""
		with self.assertRaises(CorpusError):
			ingest_corpus(self.write_corpus({"a.txt": b"1", "a.bin": b"2"}))

	def test_ingest_single_file(self):
		"""Test a seed file is a one-seed corpus"""
		path = self.root / "hello.in"
		path.write_bytes(b"hello")
		corpus = self.service.ingest(path)
		self.assertEqual(corpus.ids, ["hello"])

	def test_manifest_round_trip(self):
		"""Test a written manifest reads back against its corpus"""
		corpus = Corpus.from_bytes({"b": b"jello", "a": b""})
		path = write_manifest(corpus, self.root / "out" / "selected.json")
		data = json.loads(path.read_text(encoding="utf-8"))

		self.assertEqual(data["hash"], "sha256")
		self.assertEqual([entry["id"] for entry in data["seeds"]], ["a", "b"])
		self.assertTrue(path.read_text(encoding="utf-8").endswith("}\n"))
		self.assertEqual(read_manifest(path, corpus), ("a", "b"))

	def test_manifest_mismatches(self):
		"""Test manifests naming unknown or changed seeds are rejected"""
		path = write_manifest(Corpus.from_bytes({"a": b"x"}), self.root / "m.json")
		with self.assertRaises(ManifestError):
			read_manifest(path, Corpus.from_bytes({"b": b"x"}))
		with self.assertRaises(ManifestError):
			read_manifest(path, Corpus.from_bytes({"a": b"y"}))

		broken = self.root / "broken.json"
		broken.write_text("{\"seeds\": 3}", encoding="utf-8")
		with self.assertRaises(ManifestError):
			read_manifest(broken)
		broken.write_text("not json", encoding="utf-8")
		with self.assertRaises(ManifestError):
			read_manifest(broken)

	def test_copy_seeds_and_crashes(self):
		"""Test seeds and crash inputs are written as raw files"""
		corpus = Corpus.from_bytes({"a": b"xy"})
		directory = self.service.copy_seeds(corpus, self.root / "seeds")
		self.assertEqual((directory / "a").read_bytes(), b"xy")

		report = FuzzReport(1, (), (CrashRecord("bug", 0, b"hello"),), ((1, 7),), frozenset())
		paths = self.service.write_crashes(report, self.root / "crashes")
		self.assertEqual([p.name for p in paths], ["bug-0"])
		self.assertEqual(paths[0].read_bytes(), b"hello")

	def test_crash_files_stay_in_their_directory(self):
		"""Test string crash labels with path separators become plain file names"""
		crashes = self.root / "run" / "crashes"
		report = FuzzReport(
			4, (),
			(CrashRecord("../escaped", 0, b"a"), CrashRecord("a/b", 3, b"b"), CrashRecord("..", 4, b"c")),
			((4, 1),), frozenset(),
		)
		paths = self.service.write_crashes(report, crashes)

		self.assertEqual([p.name for p in paths], ["_escaped-0", "a_b-3", "_-4"])
		self.assertTrue(all(p.parent == crashes for p in paths))
		self.assertEqual(sorted(p.name for p in (self.root / "run").iterdir()), ["crashes"])

	def test_fuzzed_string_label_crash_is_written(self):
		"""Test a fuzzing campaign on a string-labelled crash writes inside the crash directory"""
		ip = insert_toggles(parse('entry fn f(input) {\n\tcrash("../escaped");\n}\n'))
		report = fuzz(ip, Corpus.from_bytes({"e": b""}), 5, 0)
		self.assertEqual(report.crash_labels, frozenset({"../escaped"}))

		crashes = self.root / "run" / "crashes"
		paths = self.service.write_crashes(report, crashes)
		self.assertEqual([p.name for p in paths], ["_escaped-0"])
		self.assertFalse((self.root / "run" / "escaped-0").exists())


if __name__ == "__main__":
	unittest.main()

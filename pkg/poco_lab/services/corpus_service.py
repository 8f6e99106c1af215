# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import json
from pathlib import Path

from poco_lab.exceptions import CorpusError, ManifestError
from poco_lab.hooks import manifest_hash_algorithm, schema_version
from poco_lab.logger import get_logger
from poco_lab.models.seed import Corpus, Seed

logger = get_logger(__name__)


def dump_json(data):
	"""Canonical JSON text of every artifact: sorted keys, two-space indent, trailing newline"""
	return json.dumps(data, sort_keys=True, indent=2) + "\n"


class CorpusService:
	"""Reads corpora and writes manifests, seed copies and crash files"""

	def ingest_corpus(self, directory):
		"""
		Load every regular file of a directory as a seed

		Args:
			directory: corpus directory; ids are file name stems

		Returns:
			Corpus in lexicographic id order
		"""
		directory = Path(directory)
		if not directory.is_dir():
			raise CorpusError(f"corpus directory '{directory}' does not exist")

		seeds = {}
		for path in sorted(p for p in directory.iterdir() if p.is_file()):
			seed_id = path.stem
			if seed_id in seeds:
				raise CorpusError(f"duplicate seed id '{seed_id}' in {directory}")
			try:
				seeds[seed_id] = path.read_bytes()
			except OSError as e:
				raise CorpusError(f"cannot read seed '{path}': {e.strerror or e}") from e

		if not seeds:
			raise CorpusError("empty corpus")
		logger.info("ingested %d seeds from %s", len(seeds), directory)
		return Corpus.from_bytes(seeds)

	def ingest_seed_file(self, path):
		path = Path(path)
		try:
			return Corpus.from_seeds([Seed(path.stem, path.read_bytes())])
		except OSError as e:
			raise CorpusError(f"cannot read seed '{path}': {e.strerror or e}") from e

	def ingest(self, path):
		"""A corpus directory or a single seed file"""
		return self.ingest_corpus(path) if Path(path).is_dir() else self.ingest_seed_file(path)

	def manifest(self, seeds):
		entries = sorted((seed.manifest_entry() for seed in seeds), key=lambda e: e["id"])
		return {
			"schema_version": schema_version,
			"hash": manifest_hash_algorithm,
			"seeds": entries,
		}

	def write_manifest(self, seeds, path):
		path = Path(path)
		path.parent.mkdir(parents=True, exist_ok=True)
		path.write_text(dump_json(self.manifest(seeds)), encoding="utf-8")
		return path

	def read_manifest(self, path, corpus=None):
		"""
		Read a manifest back into its id set

		Args:
			path: manifest file
			corpus: when given, every entry must match a seed of it by size and hash

		Returns:
			tuple of seed ids, sorted
		"""
		try:
			data = json.loads(Path(path).read_text(encoding="utf-8"))
		except (OSError, ValueError) as e:
			raise ManifestError(f"cannot read manifest '{path}': {e}") from e

		if not isinstance(data, dict) or not isinstance(data.get("seeds"), list):
			raise ManifestError(f"manifest '{path}' has no seed list")
		if data.get("schema_version") != schema_version:
			raise ManifestError(f"manifest '{path}' has schema version {data.get('schema_version')!r}")

		ids = []
		for entry in data["seeds"]:
			seed_id = entry.get("id") if isinstance(entry, dict) else None
			if not isinstance(seed_id, str):
				raise ManifestError(f"manifest '{path}' has an entry without id")
			if corpus is not None:
				if seed_id not in corpus.ids:
					raise ManifestError(f"manifest seed '{seed_id}' is not in the corpus")
				if corpus.by_id(seed_id).manifest_entry() != entry:
					raise ManifestError(f"manifest seed '{seed_id}' does not match the corpus contents")
			ids.append(seed_id)

		if len(set(ids)) != len(ids):
			raise ManifestError(f"manifest '{path}' lists a seed twice")
		return tuple(sorted(ids))

	def copy_seeds(self, seeds, directory):
		"""Write seeds as raw files named by id"""
		directory = Path(directory)
		directory.mkdir(parents=True, exist_ok=True)
		for seed in seeds:
			(directory / seed.id).write_bytes(seed.data)
		return directory

	def write_crashes(self, report, directory):
		"""One raw input file per recorded crash, named label-execution"""
		directory = Path(directory)
		directory.mkdir(parents=True, exist_ok=True)
		paths = []
		for crash in report.crashes:
			path = directory / crash.filename
			path.write_bytes(crash.data)
			paths.append(path)
		return paths


def ingest_corpus(directory):
	return CorpusService().ingest_corpus(directory)


def write_manifest(seeds, path):
	return CorpusService().write_manifest(seeds, path)


def read_manifest(path, corpus=None):
	return CorpusService().read_manifest(path, corpus)

# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from poco_lab.exceptions import CorpusError


@dataclass(frozen=True, order=True)
class Seed:
	id: str
	data: bytes

	@property
	def size(self):
		return len(self.data)

	@property
	def sha256(self):
		return hashlib.sha256(self.data).hexdigest()

	def manifest_entry(self):
		return {"id": self.id, "size": self.size, "sha256": self.sha256}


@dataclass(frozen=True)
class Corpus:
	"""Ordered set of seeds, sorted by id"""
	seeds: tuple

	def __post_init__(self):
		self.validate()

	@classmethod
	def from_seeds(cls, seeds):
		return cls(tuple(sorted(seeds, key=lambda s: s.id)))

	@classmethod
	def from_bytes(cls, items):
		"""Build a corpus from a {id: bytes} mapping"""
		return cls.from_seeds(Seed(seed_id, bytes(data)) for seed_id, data in items.items())

	def validate(self):
		ids = [seed.id for seed in self.seeds]
		if len(ids) != len(set(ids)):
			dupes = sorted({i for i in ids if ids.count(i) > 1})
			raise CorpusError(f"duplicate seed id: {', '.join(dupes)}")
		if ids != sorted(ids):
			raise CorpusError("corpus seeds must be sorted by id")

	def __iter__(self):
		return iter(self.seeds)

	def __len__(self):
		return len(self.seeds)

	def __contains__(self, seed):
		return seed in self.seeds

	@property
	def ids(self):
		return [seed.id for seed in self.seeds]

	def by_id(self, seed_id):
		for seed in self.seeds:
			if seed.id == seed_id:
				return seed
		raise CorpusError(f"unknown seed id '{seed_id}'")

	def subset(self, ids):
		wanted = set(ids)
		return Corpus(tuple(seed for seed in self.seeds if seed.id in wanted))

# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from typing import NamedTuple

from poco_lab.logger import get_logger
from poco_lab.models.hierarchy import ToggleVector
from poco_lab.models.outcome import Verdict
from poco_lab.models.seed import Corpus
from poco_lab.services.runtime_service import runtime_for

logger = get_logger(__name__)


class CminResult(NamedTuple):
	selected: Corpus
	passed: frozenset
	result: Verdict
	outcome: object

	@property
	def selected_ids(self):
		return tuple(self.selected.ids)


def greedy_cover(edge_sets, sizes):
	"""
	Greedy per-edge cover

	Walk edges in sorted order; every still-uncovered edge is covered by its
	smallest seed (ties by id). Returns the chosen ids, sorted.

	Args:
		edge_sets: {seed_id: set of edges}
		sizes: {seed_id: size}
	"""
	owners = {}
	for seed_id, edges in edge_sets.items():
		for edge in edges:
			owners.setdefault(edge, []).append(seed_id)

	covered = set()
	chosen = set()
	for edge in sorted(owners):
		if edge in covered:
			continue
		best = min(owners[edge], key=lambda seed_id: (sizes[seed_id], seed_id))
		chosen.add(best)
		covered |= edge_sets[best]
	return sorted(chosen)


class MinimizeService:
	"""afl-cmin style corpus minimizer"""

	def __init__(self, runtime):
		self.runtime = runtime

	def cmin(self, tv, corpus, budget):
		"""
		Select a coverage-preserving subset of the corpus

		Args:
			tv: ToggleVector to execute under
			corpus: non-empty Corpus
			budget: step budget per execution

		Returns:
			CminResult(selected, passed, result, outcome)
		"""
		outcome = self.runtime.execute_corpus(tv, corpus, budget)
		edge_sets = {seed_id: out.edges for seed_id, out in outcome.outcomes.items()}
		sizes = {seed.id: seed.size for seed in corpus}

		chosen = greedy_cover(edge_sets, sizes)
		selected = corpus.subset(chosen)

		passed = set()
		for seed_id in chosen:
			passed |= outcome[seed_id].cond_sat

		logger.debug("cmin kept %d of %d seeds (%d edges)", len(selected), len(corpus), len(outcome.edges))
		return CminResult(selected, frozenset(passed), outcome.result, outcome)


def cmin(ip, tv, corpus, budget):
	tv = tv or ToggleVector.all_off()
	tv.validate(ip)
	return MinimizeService(runtime_for(ip)).cmin(tv, corpus, budget)

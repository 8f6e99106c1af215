# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import time

from poco_lab.hooks import default_settings
from poco_lab.logger import get_logger
from poco_lab.models.hierarchy import ToggleVector
from poco_lab.services.runtime_service import runtime_for

logger = get_logger(__name__)


class RecklessService:
	"""Finds guards whose disabling breaks the target (crashing) or collapses coverage (converging)"""

	def __init__(self, runtime, probe_multiplier=None):
		self.runtime = runtime
		self.probe_multiplier = probe_multiplier or default_settings["probe_budget_multiplier"]
		self.probe_count = 0
		self.probe_seconds = 0.0

	def _probe(self, corpus, disabled, budget):
		"""Run the corpus with `disabled` toggled on; True on fault or timeout"""
		started = time.perf_counter()
		try:
			outcome = self.runtime.execute_corpus(ToggleVector.of(disabled), corpus, budget)
		finally:
			self.probe_count += 1
			self.probe_seconds += time.perf_counter() - started
		return outcome.result.is_crash

	def collect_crashing_reckless(self, corpus, g_minus, budget, check_precondition=True):
		"""
		Windowed binary search for guards whose disabling crashes the corpus

		Args:
			corpus: Corpus to probe with
			g_minus: disabled guards, earliest disabled first
			budget: normal step budget; probes use budget * probe_multiplier
			check_precondition: first confirm that disabling all of g_minus crashes

		Returns:
			frozenset of reckless guard ids
		"""
		guards = list(g_minus)
		probe_budget = budget * self.probe_multiplier
		if not guards:
			return frozenset()

		if check_precondition and not self._probe(corpus, guards, probe_budget):
			logger.warning(
				"no crash with all %d disabled guards under the probe budget; skipping crashing-reckless search",
				len(guards))
			return frozenset()

		reckless = set()
		tmp = []
		pos, length = -1, 1
		while pos + 1 < len(guards):
			window = guards[pos + 1:pos + 1 + length]
			tmp.extend(window)
			if self._probe(corpus, tmp, probe_budget):
				del tmp[len(tmp) - len(window):]
				if length == 1:
					reckless.update(window)
					pos += 1
				else:
					length //= 2
			else:
				pos += length
				length *= 2

		logger.info("crashing-reckless: %s", sorted(reckless))
		return frozenset(reckless)

	def collect_converging_reckless(self, s_new, g_minus, budget):
		"""
		Disabled guards whose true branch the newly selected seeds enter

		Returns:
			frozenset of guard ids
		"""
		g_minus = list(g_minus)
		if not g_minus or len(s_new) == 0:
			return frozenset()
		outcome = self.runtime.execute_corpus(ToggleVector.of(g_minus), s_new, budget)
		reckless = frozenset(g for g in g_minus if g in outcome.branch_entered)
		logger.info("converging-reckless: %s", sorted(reckless))
		return reckless


def collect_crashing_reckless(ip, corpus, g_minus, budget):
	return RecklessService(runtime_for(ip)).collect_crashing_reckless(corpus, g_minus, budget)


def collect_converging_reckless(ip, s_new, g_minus, budget):
	return RecklessService(runtime_for(ip)).collect_converging_reckless(s_new, g_minus, budget)

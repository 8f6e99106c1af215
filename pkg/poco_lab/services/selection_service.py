# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import importlib
import time

from poco_lab import hooks
from poco_lab.config import Settings
from poco_lab.exceptions import PreconditionError
from poco_lab.logger import get_logger, log_error
from poco_lab.models.hierarchy import ToggleVector
from poco_lab.models.selection import (
	CONVERGING,
	CRASHING,
	TERMINATION_FIXED_POINT,
	TERMINATION_MAX_ROUNDS,
	TERMINATION_WALL_BUDGET,
	FixedPointCheck,
	RoundRecord,
	SelectionResult,
	SelectionState,
)
from poco_lab.services.hierarchy_service import HierarchyService
from poco_lab.services.instrument_service import extract_hierarchy
from poco_lab.services.ledger_service import (
	BASE_CMIN,
	CONVERGING_RECKLESS,
	CRASHING_RECKLESS,
	GUARD_OPERATIONS,
	HIERARCHY_PARSING,
	LedgerService,
)
from poco_lab.services.minimize_service import MinimizeService
from poco_lab.services.reckless_service import RecklessService
from poco_lab.services.runtime_service import RuntimeService

logger = get_logger(__name__)


def check_fixed_point(state, s_new, passed, outermost, reckless):
	"""
	The four-conjunct fixed-point condition of one round

	Args:
		state: SelectionState holding S' (the previous non-reckless selection)
		s_new: ids selected this round
		passed, outermost, reckless: sets recognized this round

	Returns:
		FixedPointCheck; `.reached` is the condition itself
	"""
	if state.round < 1:
		raise ValueError("fixed point is only defined from round 1 on")
	previous = tuple(state.previous) if state.previous is not None else ()
	return FixedPointCheck(
		same_selection=previous == tuple(s_new),
		no_reckless=not reckless,
		no_passed=not passed,
		no_outermost=not outermost,
	)


class SelectionService:
	"""Iterative guard-toggling seed selection"""

	def __init__(self, ip, settings=None, ledger=None, clock=time.monotonic):
		self.ip = ip
		self.settings = settings or Settings()
		self.ledger = ledger or LedgerService()
		self.clock = clock
		self.runtime = RuntimeService.from_instrumented(ip, self.settings.max_call_depth)
		self.minimizer = MinimizeService(self.runtime)
		self.reckless = RecklessService(self.runtime, self.settings.probe_budget_multiplier)
		self.hierarchy_service = HierarchyService()
		with self.ledger.measure(HIERARCHY_PARSING):
			self.hierarchy = extract_hierarchy(ip)

	def baseline(self, corpus, budget):
		"""All-off cmin; refuses corpora with seeds that fault or time out"""
		with self.ledger.measure(BASE_CMIN):
			result = self.minimizer.cmin(ToggleVector.all_off(), corpus, budget)
		crashing = result.outcome.crashing_seeds()
		if crashing:
			raise PreconditionError("seeds fault or time out on the un-toggled target", crashing)
		return result

	def select(self, corpus, budget=None, wall_budget=None, max_rounds=None):
		"""
		Run selection rounds until the fixed point, the round cap or the wall budget

		Returns:
			SelectionResult
		"""
		budget = budget or self.settings.step_budget
		wall_budget = wall_budget or self.settings.wall_budget
		max_rounds = max_rounds or self.settings.max_rounds

		baseline = self.baseline(corpus, budget).selected_ids
		state = SelectionState(previous=())
		started = self.clock()
		termination = None

		while termination is None:
			if state.round >= max_rounds:
				termination = TERMINATION_MAX_ROUNDS
				break
			if self.clock() - started >= wall_budget:
				termination = TERMINATION_WALL_BUDGET
				break

			record = self.run_round(state, corpus, budget)
			state.trace.append(record)
			self._run_hooks(record)
			if record.fixed_point.reached:
				termination = TERMINATION_FIXED_POINT

		selected = tuple(sorted(state.selected))
		delta = tuple(seed_id for seed_id in selected if seed_id not in baseline)
		logger.info("selection ended (%s) after %d rounds: %d seeds, %d additional",
			termination, state.round, len(selected), len(delta))

		return SelectionResult(
			selected=selected,
			baseline=tuple(baseline),
			delta=delta,
			trace=tuple(state.trace),
			termination=termination,
			disabled=tuple(state.disabled),
			reckless=tuple(sorted(state.reckless)),
			ledger=self.ledger.report(self.runtime.cache.get_stats()),
		)

	def run_round(self, state, corpus, budget):
		state.round += 1
		self.ledger.begin_round(state.round)
		disabled_before = tuple(state.disabled)
		s_begin = tuple(sorted(state.selected))

		with self.ledger.measure(GUARD_OPERATIONS):
			tv = ToggleVector.of(state.disabled)
		with self.ledger.measure(BASE_CMIN):
			result = self.minimizer.cmin(tv, corpus, budget)
		s_new = result.selected_ids

		reckless_now = frozenset()
		source = None
		if result.result.is_crash:
			probes_before = (self.reckless.probe_count, self.reckless.probe_seconds)
			with self.ledger.measure(CRASHING_RECKLESS):
				reckless_now = self.reckless.collect_crashing_reckless(corpus, state.disabled, budget)
			self.ledger.record_probes(
				self.reckless.probe_count - probes_before[0],
				self.reckless.probe_seconds - probes_before[1])
			source = CRASHING
		elif tuple(state.previous) == s_new:
			with self.ledger.measure(CONVERGING_RECKLESS):
				reckless_now = self.reckless.collect_converging_reckless(result.selected, state.disabled, budget)
			source = CONVERGING
		if not reckless_now:
			source = None

		passed = frozenset()
		outermost = frozenset()
		newly_disabled = ()
		if reckless_now:
			with self.ledger.measure(GUARD_OPERATIONS):
				state.reckless |= reckless_now
				state.disabled = [g for g in state.disabled if g not in state.reckless]
				passed = self._fresh_passed(result.passed, state)
			fixed_point = check_fixed_point(state, s_new, passed, outermost, reckless_now)
		else:
			state.selected = sorted(set(state.selected) | set(s_new))
			passed = self._fresh_passed(result.passed, state)
			if passed:
				with self.ledger.measure(GUARD_OPERATIONS):
					state.obstacles |= self._obstacles(passed, passed, outermost, state)
					newly_disabled = tuple(sorted(passed))
					state.disabled.extend(newly_disabled)
			else:
				with self.ledger.measure(HIERARCHY_PARSING):
					hierarchy = self.hierarchy.with_disabled(state.disabled)
					outermost = self.hierarchy_service.collect_outermost(hierarchy, state.obstacles) - state.reckless
				if outermost:
					with self.ledger.measure(GUARD_OPERATIONS):
						state.obstacles = set(self._obstacles(outermost, passed, outermost, state))
						newly_disabled = tuple(sorted(outermost))
						state.disabled.extend(newly_disabled)
			fixed_point = check_fixed_point(state, s_new, passed, outermost, reckless_now)
			state.previous = s_new

		state.validate(self.ip.toggleable)
		timings = self.ledger.end_round()
		s_end = tuple(sorted(state.selected))

		record = RoundRecord(
			round=state.round,
			disabled=tuple(sorted(disabled_before)),
			selected=s_new,
			s_begin=s_begin,
			s_end=s_end,
			s_increment=tuple(seed_id for seed_id in s_end if seed_id not in s_begin),
			result=result.result,
			passed=tuple(sorted(passed)),
			outermost=tuple(sorted(outermost)),
			newly_disabled=newly_disabled,
			newly_reckless=tuple(sorted(reckless_now)),
			reckless_source=source,
			fixed_point=fixed_point,
			timings={k: v for k, v in timings.items() if k not in ("round", "elapsed")},
		)
		record.validate()
		return record

	def _decided(self, state):
		return state.reckless | set(state.disabled)

	def _obstacles(self, candidates, passed, outermost, state):
		"""Candidates that are obstacles under the statuses before this round disables them"""
		hierarchy = self.hierarchy.with_disabled(state.disabled)
		return frozenset(
			g for g in candidates if self.hierarchy_service.is_obstacle(g, hierarchy, passed, outermost)
		)

	def _fresh_passed(self, passed, state):
		"""Passed toggleable guards that are neither reckless nor already disabled"""
		return frozenset(g for g in passed if g in self.ip.toggleable) - self._decided(state)

	def _run_hooks(self, record):
		for path in hooks.selection_events.get("on_round", []):
			try:
				module_name, _, attr = path.rpartition(".")
				getattr(importlib.import_module(module_name), attr)(record)
			except Exception as e:
				log_error(f"Error running round hook {path}: {str(e)}", "selection")


def select(ip, corpus, config=None):
	"""
	Iterative seed selection over an instrumented program

	Args:
		ip: InstrumentedProgram
		corpus: non-empty Corpus whose seeds do not fault on the un-toggled target
		config: Settings, a dict of overrides, or None

	Returns:
		SelectionResult
	"""
	settings = config if isinstance(config, Settings) else Settings(config)
	return SelectionService(ip, settings).select(corpus)

# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from poco_lab.config import Settings
from poco_lab.exceptions import EvaluationError
from poco_lab.hooks import schema_version
from poco_lab.logger import get_logger
from poco_lab.models.seed import Corpus
from poco_lab.services.fuzz_service import FuzzService
from poco_lab.services.runtime_service import RuntimeService

logger = get_logger(__name__)


@dataclass(frozen=True)
class ImprovementReport:
	holds: bool
	candidate: str
	trials: int
	# per trial: sorted findings of the augmented set missing from the base set
	delta_findings: tuple = field(default=())

	@property
	def improved_trials(self):
		return sum(1 for delta in self.delta_findings if delta)

	def to_dict(self):
		return {
			"schema_version": schema_version,
			"candidate": self.candidate,
			"holds": self.holds,
			"trials": self.trials,
			"improved_trials": self.improved_trials,
			"delta_findings": [[_finding_json(f) for f in delta] for delta in self.delta_findings],
		}


def _finding_json(finding):
	kind, value = finding
	if kind == "bug":
		return {"bug": value}
	return {"edge": [kind, value]}


def _sort_key(finding):
	# bug labels sort after edges
	return (1, "", finding[1]) if finding[0] == "bug" else (0, finding, "")


def executions_to_bug(report, label=None):
	"""Execution index of the first crash (with `label`), or None"""
	crash = report.first_crash(label)
	return None if crash is None else crash.execution


def a12(samples_a, samples_b):
	"""
	Vargha-Delaney effect size: P(A > B) + 0.5 * P(A == B)

	Returns:
		float in [0, 1]
	"""
	a = np.asarray(list(samples_a), dtype=float)
	b = np.asarray(list(samples_b), dtype=float)
	if a.size == 0 or b.size == 0:
		raise EvaluationError("a12 needs two non-empty samples")
	wins = np.count_nonzero(a[:, None] > b[None, :])
	ties = np.count_nonzero(a[:, None] == b[None, :])
	return float((wins + 0.5 * ties) / (a.size * b.size))


def fresh_seed_ratio(trace):
	"""
	Per-round ratio of distinct selected seeds to all selections so far

	Args:
		trace: RoundRecords, their dicts, or plain id lists

	Returns:
		list with one ratio per round; None where nothing was selected yet
	"""
	ratios = []
	distinct = set()
	total = 0
	for record in trace:
		if isinstance(record, dict):
			selected = record["selected"]
		else:
			selected = getattr(record, "selected", record)
		distinct |= set(selected)
		total += len(selected)
		ratios.append(len(distinct) / total if total else None)
	return ratios


def bug_stats(reports):
	"""
	Success rate and median time-to-bug per bug label

	Args:
		reports: FuzzReports of repeated campaigns

	Returns:
		{label: {"gamma", "discoveries", "repeats", "median_executions"}}
	"""
	reports = list(reports)
	if not reports:
		raise EvaluationError("bug_stats needs at least one report")

	found = {}
	for report in reports:
		for crash in report.crashes:
			found.setdefault(crash.label, []).append(crash.execution)

	stats = {}
	for label in sorted(found):
		executions = found[label]
		stats[label] = {
			"gamma": len(executions) / len(reports),
			"discoveries": len(executions),
			"repeats": len(reports),
			"median_executions": float(np.median(executions)),
		}
	return stats


class EvaluationService:
	"""Paired fuzzing campaigns for seed-improvement and crash-time experiments"""

	def __init__(self, ip, settings=None):
		self.settings = settings or Settings()
		self.fuzzer = FuzzService(RuntimeService.from_instrumented(ip, self.settings.max_call_depth), self.settings)

	def _rng_seeds(self, trials, rng_seeds):
		if rng_seeds is None:
			return [self.settings.rng_seed + t for t in range(trials)]
		rng_seeds = list(rng_seeds)
		if len(rng_seeds) < trials:
			raise EvaluationError(f"{trials} trials need {trials} rng seeds, got {len(rng_seeds)}")
		return rng_seeds[:trials]

	def seed_improvement(self, base_set, candidate, budget_executions=None, trials=None, rng_seeds=None):
		"""
		Does adding `candidate` to `base_set` yield new findings in most trials?

		Returns:
			ImprovementReport
		"""
		trials = trials or self.settings.eval_trials
		base = list(base_set)
		if any(seed.id == candidate.id for seed in base):
			raise EvaluationError(f"candidate '{candidate.id}' is already in the base set")
		augmented = Corpus.from_seeds(base + [candidate])

		deltas = []
		for rng_seed in self._rng_seeds(trials, rng_seeds):
			base_report = self.fuzzer.fuzz(base, budget_executions, rng_seed)
			augmented_report = self.fuzzer.fuzz(augmented, budget_executions, rng_seed)
			delta = augmented_report.findings - base_report.findings
			deltas.append(tuple(sorted(delta, key=_sort_key)))

		report = ImprovementReport(
			holds=sum(1 for d in deltas if d) * 2 > trials,
			candidate=candidate.id,
			trials=trials,
			delta_findings=tuple(deltas),
		)
		logger.info("seed improvement of %s: %d/%d trials", candidate.id, report.improved_trials, trials)
		return report

	def campaigns(self, seeds, budget_executions=None, trials=None, rng_seeds=None, stop_on_crash=None):
		"""Repeated fuzzing campaigns with paired rng seeds"""
		trials = trials or self.settings.eval_trials
		return [
			self.fuzzer.fuzz(seeds, budget_executions, rng_seed, stop_on_crash)
			for rng_seed in self._rng_seeds(trials, rng_seeds)
		]

	def per_seed_crash_times(self, corpus, budget_executions=None, trials=None, rng_seeds=None):
		"""
		Fuzz every seed alone and summarize how quickly it reaches a bug

		Returns:
			{seed_id: {"crash_ratio", "min", "max", "mean"}} with executions-to-bug
		"""
		table = {}
		for seed in corpus:
			reports = self.campaigns([seed], budget_executions, trials, rng_seeds, stop_on_crash=True)
			times = [t for t in (executions_to_bug(r) for r in reports) if t is not None]
			table[seed.id] = {
				"crash_ratio": len(times) / len(reports),
				"min": int(np.min(times)) if times else None,
				"max": int(np.max(times)) if times else None,
				"mean": float(np.mean(times)) if times else None,
			}
		return table

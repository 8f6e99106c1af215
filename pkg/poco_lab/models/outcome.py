# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

OK = "ok"
BUG = "bug"
TIMEOUT = "timeout"
FAULT = "fault"

_SEVERITY = {OK: 0, BUG: 1, TIMEOUT: 2, FAULT: 3}

INDEX_OUT_OF_BOUNDS = "index-out-of-bounds"
DIVISION_BY_ZERO = "division-by-zero"
MODULO_BY_ZERO = "modulo-by-zero"
STACK_OVERFLOW = "stack-overflow"


@dataclass(frozen=True)
class Verdict:
	kind: str
	# bug label or fault kind
	detail: Optional[str] = None

	@classmethod
	def ok(cls):
		return cls(OK)

	@classmethod
	def bug(cls, label):
		return cls(BUG, label)

	@classmethod
	def fault(cls, kind):
		return cls(FAULT, kind)

	@classmethod
	def timeout(cls):
		return cls(TIMEOUT)

	@property
	def severity(self):
		return _SEVERITY[self.kind]

	@property
	def is_crash(self):
		"""Fault or timeout; a planted bug is a finding, not a crash"""
		return self.kind in (FAULT, TIMEOUT)

	def worse(self, other):
		"""The more severe verdict; ties keep self"""
		return other if other.severity > self.severity else self

	def to_dict(self):
		data = {"kind": self.kind}
		if self.kind == BUG:
			data["label"] = self.detail
		elif self.kind == FAULT:
			data["fault"] = self.detail
		return data

	def __str__(self):
		return f"{self.kind}({self.detail})" if self.detail else self.kind


def bitmap_hex(guard_ids):
	"""Render a set of guard ids as a hex bitmap (bit g set for guard g)"""
	value = 0
	for g in guard_ids:
		value |= 1 << g
	return f"0x{value:x}"


@dataclass(frozen=True)
class ExecOutcome:
	seed_id: str
	verdict: Verdict
	edges: frozenset
	cond_sat: frozenset
	branch_entered: frozenset
	steps: int

	def validate(self, budget=None):
		if not self.cond_sat <= self.branch_entered:
			raise ValueError("cond_sat must imply branch_entered")
		if budget is not None and self.steps > budget:
			raise ValueError("steps exceed budget")

	def to_dict(self):
		return {
			"seed": self.seed_id,
			"verdict": self.verdict.to_dict(),
			"edges": [list(edge) for edge in sorted(self.edges)],
			"cond_sat": bitmap_hex(self.cond_sat),
			"branch_entered": bitmap_hex(self.branch_entered),
			"steps": self.steps,
		}


@dataclass(frozen=True)
class CorpusOutcome:
	"""Per-seed outcomes of one corpus run plus their unions"""
	outcomes: dict
	edges: frozenset = frozenset()
	cond_sat: frozenset = frozenset()
	branch_entered: frozenset = frozenset()
	result: Verdict = field(default_factory=Verdict.ok)

	@classmethod
	def merge(cls, outcomes):
		"""Merge per-seed outcomes in seed-id order"""
		ordered = dict(sorted(outcomes.items()))
		edges, cond_sat, branch_entered = set(), set(), set()
		result = Verdict.ok()
		for outcome in ordered.values():
			edges |= outcome.edges
			cond_sat |= outcome.cond_sat
			branch_entered |= outcome.branch_entered
			result = result.worse(outcome.verdict)
		return cls(ordered, frozenset(edges), frozenset(cond_sat), frozenset(branch_entered), result)

	def __getitem__(self, seed_id):
		return self.outcomes[seed_id]

	def crashing_seeds(self):
		return [seed_id for seed_id, outcome in self.outcomes.items() if outcome.verdict.is_crash]

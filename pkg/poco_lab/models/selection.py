# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from poco_lab.hooks import schema_version

TERMINATION_FIXED_POINT = "fixed-point"
TERMINATION_MAX_ROUNDS = "max-rounds"
TERMINATION_WALL_BUDGET = "wall-budget"

CRASHING = "crashing"
CONVERGING = "converging"


@dataclass(frozen=True)
class FixedPointCheck:
	same_selection: bool
	no_reckless: bool
	no_passed: bool
	no_outermost: bool

	@property
	def reached(self):
		return self.same_selection and self.no_reckless and self.no_passed and self.no_outermost

	def to_dict(self):
		return {
			"same_selection": self.same_selection,
			"no_reckless": self.no_reckless,
			"no_passed": self.no_passed,
			"no_outermost": self.no_outermost,
			"reached": self.reached,
		}


@dataclass(frozen=True)
class RoundRecord:
	round: int
	disabled: tuple
	selected: tuple
	s_begin: tuple
	s_end: tuple
	s_increment: tuple
	result: object
	passed: tuple
	outermost: tuple
	newly_disabled: tuple
	newly_reckless: tuple
	reckless_source: Optional[str]
	fixed_point: FixedPointCheck
	# seconds per ledger category; never serialized into the trace
	timings: dict = field(default_factory=dict, compare=False)

	def validate(self):
		if tuple(sorted(set(self.s_begin) | set(self.s_increment))) != self.s_end:
			raise ValueError(f"round {self.round}: s_end != s_begin + s_increment")

	@property
	def elapsed(self):
		return sum(self.timings.values())

	def to_dict(self):
		return {
			"schema_version": schema_version,
			"round": self.round,
			"disabled": list(self.disabled),
			"selected": list(self.selected),
			"s_begin": list(self.s_begin),
			"s_end": list(self.s_end),
			"s_increment": list(self.s_increment),
			"result": self.result.to_dict(),
			"passed": list(self.passed),
			"outermost": list(self.outermost),
			"newly_disabled": list(self.newly_disabled),
			"newly_reckless": list(self.newly_reckless),
			"reckless_source": self.reckless_source,
			"fixed_point": self.fixed_point.to_dict(),
		}


@dataclass
class SelectionState:
	"""Working sets of the iterative selection loop"""
	selected: list = field(default_factory=list)  # S, seed ids
	previous: Optional[tuple] = None  # S', last non-reckless round's S_new
	reckless: set = field(default_factory=set)  # R, sticky
	disabled: list = field(default_factory=list)  # G-, in disabling order
	obstacles: set = field(default_factory=set)  # O_new
	round: int = 0
	trace: list = field(default_factory=list)

	def validate(self, toggleable=None):
		if self.reckless & set(self.disabled):
			raise ValueError("reckless guards must not stay disabled")
		if len(self.disabled) != len(set(self.disabled)):
			raise ValueError("disabled guards must be unique")
		if toggleable is not None and not set(self.disabled) <= set(toggleable):
			raise ValueError("only toggleable guards can be disabled")


@dataclass(frozen=True)
class SelectionResult:
	selected: tuple
	baseline: tuple
	delta: tuple
	trace: tuple
	termination: str
	disabled: tuple
	reckless: tuple
	ledger: Optional[dict] = field(default=None, compare=False)

	@property
	def rounds(self):
		return len(self.trace)

	def toggles(self):
		return {"schema_version": schema_version, "on": sorted(self.disabled)}

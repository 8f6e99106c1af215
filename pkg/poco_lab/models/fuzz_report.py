# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from poco_lab.hooks import schema_version


@dataclass(frozen=True)
class QueueEntry:
	id: str
	data: bytes
	parent: Optional[str] = None
	operator: Optional[str] = None
	found_at: int = 0

	def to_dict(self):
		return {
			"id": self.id,
			"size": len(self.data),
			"parent": self.parent,
			"operator": self.operator,
			"found_at": self.found_at,
		}


@dataclass(frozen=True)
class CrashRecord:
	label: str
	execution: int
	data: bytes
	wall_time: float = field(default=0.0, compare=False)

	@property
	def filename(self):
		# labels may be arbitrary string literals; keep the name inside one directory
		safe = re.sub(r"[^A-Za-z0-9_.-]", "_", self.label).lstrip(".") or "_"
		return f"{safe}-{self.execution}"

	def to_dict(self, include_time=False):
		data = {"label": self.label, "execution": self.execution, "size": len(self.data)}
		if include_time:
			data["wall_time"] = round(self.wall_time, 6)
		return data


@dataclass(frozen=True)
class FuzzReport:
	executions: int
	queue: tuple
	crashes: tuple
	edge_timeline: tuple
	final_edges: frozenset
	rng_seed: int = 0

	@property
	def crash_labels(self):
		return frozenset(crash.label for crash in self.crashes)

	@property
	def findings(self):
		"""Final edges plus crash labels"""
		return frozenset(self.final_edges) | frozenset(("bug", label) for label in self.crash_labels)

	def first_crash(self, label=None):
		for crash in self.crashes:
			if label is None or crash.label == label:
				return crash
		return None

	def validate(self):
		counts = [count for _, count in self.edge_timeline]
		if counts != sorted(counts):
			raise ValueError("edge timeline must be non-decreasing")

	def to_dict(self, include_time=False):
		return {
			"schema_version": schema_version,
			"rng_seed": self.rng_seed,
			"executions": self.executions,
			"queue": [entry.to_dict() for entry in self.queue],
			"crashes": [crash.to_dict(include_time) for crash in self.crashes],
			"edge_timeline": [list(sample) for sample in self.edge_timeline],
			"final_edges": [list(edge) for edge in sorted(self.final_edges)],
		}

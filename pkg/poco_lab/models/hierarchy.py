# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

from poco_lab.exceptions import UnknownGuardError

VIRTUAL_ROOT = -1

ENABLED = "enabled"
DISABLED = "disabled"


@dataclass(frozen=True)
class InstrumentedProgram:
	"""A program whose toggleable guards read `TOG_g || cond`"""
	base: object
	program: object
	cfg: object
	guards: tuple
	toggleable: frozenset
	toggle_loops: bool = False

	@property
	def toggle_count(self):
		return len(self.toggleable)

	def guard_table(self):
		return [
			{
				"id": guard.id,
				"line": guard.line,
				"col": guard.col,
				"kind": guard.kind,
				"function": guard.function,
				"toggleable": guard.id in self.toggleable,
			}
			for guard in self.guards
		]


@dataclass(frozen=True)
class ToggleVector:
	"""Set of guards whose toggle is on (guard disabled)"""
	on: frozenset = frozenset()

	@classmethod
	def all_off(cls):
		return cls()

	@classmethod
	def of(cls, guard_ids):
		return cls(frozenset(guard_ids))

	def validate(self, ip):
		for g in sorted(self.on):
			if g not in ip.toggleable:
				raise UnknownGuardError(g)

	def bits(self, ip):
		"""Explicit map over every toggleable guard"""
		return {g: g in self.on for g in sorted(ip.toggleable)}

	@property
	def digest(self):
		payload = ",".join(str(g) for g in sorted(self.on))
		return hashlib.sha256(payload.encode("ascii")).hexdigest()[:16]

	def to_dict(self):
		return {"on": sorted(self.on)}

	@classmethod
	def from_dict(cls, data):
		if isinstance(data, dict):
			if "on" in data:
				return cls.of(int(g) for g in data["on"])
			# {"3": true, ...} bit map form
			return cls.of(int(g) for g, bit in data.items() if g != "schema_version" and bit is True)
		return cls.of(int(g) for g in data)

	def __len__(self):
		return len(self.on)


@dataclass(frozen=True)
class GuardHierarchy:
	"""Guards, domination edges and per-guard status"""
	guards: frozenset
	edges: frozenset
	status: dict = field(default_factory=dict)
	# non-toggleable guards: traversed like disabled guards, never collected
	transparent: frozenset = frozenset()
	virtual_root: int = VIRTUAL_ROOT

	def __post_init__(self):
		children = {VIRTUAL_ROOT: []}
		parents = {}
		for parent, child in sorted(self.edges):
			children.setdefault(parent, []).append(child)
			parents[child] = parent
		object.__setattr__(self, "_children", {k: tuple(v) for k, v in children.items()})
		object.__setattr__(self, "_parents", parents)

	def _check(self, g):
		if g != self.virtual_root and g not in self.guards:
			raise UnknownGuardError(g)

	def successors(self, g):
		"""Immediate children of g in the domination forest"""
		self._check(g)
		return self._children.get(g, ())

	def parent(self, g):
		self._check(g)
		return self._parents.get(g, self.virtual_root)

	def ancestors(self, g):
		"""Dominators of g, nearest first, excluding the virtual root"""
		chain = []
		current = self.parent(g)
		while current != self.virtual_root:
			chain.append(current)
			current = self._parents.get(current, self.virtual_root)
		return chain

	def is_enabled(self, g):
		if g == self.virtual_root:
			return False
		self._check(g)
		return self.status.get(g, ENABLED) == ENABLED

	def with_disabled(self, guard_ids):
		"""Copy of the hierarchy where exactly guard_ids are disabled"""
		disabled = set(guard_ids)
		for g in disabled:
			self._check(g)
		status = {g: DISABLED if g in disabled else ENABLED for g in sorted(self.guards)}
		return replace(self, status=status)

	@property
	def disabled(self):
		return frozenset(g for g in self.guards if not self.is_enabled(g))

	def to_dict(self):
		return {
			"virtual_root": self.virtual_root,
			"root_children": list(self._children.get(self.virtual_root, ())),
			"edges": [list(edge) for edge in sorted(self.edges) if edge[0] != self.virtual_root],
			"transparent": sorted(self.transparent),
		}

	def to_json(self):
		return json.dumps(self.to_dict(), sort_keys=True)

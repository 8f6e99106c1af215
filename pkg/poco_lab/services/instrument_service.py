# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from dataclasses import replace

from poco_lab.logger import get_logger
from poco_lab.models.hierarchy import VIRTUAL_ROOT, GuardHierarchy, InstrumentedProgram
from poco_lab.models.program import WHILE, If, Toggled, While
from poco_lab.services.cfg_service import build_cfg

logger = get_logger(__name__)


class InstrumentService:
	"""Toggle insertion and guard-hierarchy extraction"""

	def insert_toggles(self, program, toggle_loops=False):
		"""
		Rewrite every eligible guard condition `c` into `TOG_g || c`

		Args:
			program: checked Program
			toggle_loops: also make while guards toggleable

		Returns:
			InstrumentedProgram; the CFG is shared with the base program
		"""
		toggleable = frozenset(
			guard.id for guard in program.guards if toggle_loops or guard.kind != WHILE
		)
		functions = tuple(
			replace(fn, body=self._rewrite_body(fn.body, toggleable)) for fn in program.functions
		)
		instrumented = replace(program, functions=functions)

		ip = InstrumentedProgram(
			base=program,
			program=instrumented,
			cfg=build_cfg(program),
			guards=program.guards,
			toggleable=toggleable,
			toggle_loops=toggle_loops,
		)
		logger.debug("inserted %d toggles (%d guards)", ip.toggle_count, len(program.guards))
		return ip

	def _rewrite_body(self, body, toggleable):
		return tuple(self._rewrite(stmt, toggleable) for stmt in body)

	def _rewrite(self, stmt, toggleable):
		if isinstance(stmt, If):
			cond = Toggled(stmt.guard_id, stmt.cond) if stmt.guard_id in toggleable else stmt.cond
			orelse = None if stmt.orelse is None else self._rewrite_body(stmt.orelse, toggleable)
			return replace(stmt, cond=cond, then=self._rewrite_body(stmt.then, toggleable), orelse=orelse)
		if isinstance(stmt, While):
			cond = Toggled(stmt.guard_id, stmt.cond) if stmt.guard_id in toggleable else stmt.cond
			return replace(stmt, cond=cond, body=self._rewrite_body(stmt.body, toggleable))
		return stmt

	def extract_hierarchy(self, ip):
		"""
		Domination forest from lexical nesting

		A guard's parent is the nearest enclosing if/while guard; top-level
		guards hang off the virtual root.
		"""
		edges = set()
		for fn in ip.base.functions:
			self._collect_edges(fn.body, VIRTUAL_ROOT, edges)

		guards = frozenset(guard.id for guard in ip.guards)
		hierarchy = GuardHierarchy(
			guards=guards,
			edges=frozenset(edges),
			transparent=guards - ip.toggleable,
		)
		return hierarchy.with_disabled(())

	def _collect_edges(self, body, parent, edges):
		for stmt in body:
			if isinstance(stmt, If):
				edges.add((parent, stmt.guard_id))
				self._collect_edges(stmt.then, stmt.guard_id, edges)
				if stmt.orelse is not None:
					self._collect_edges(stmt.orelse, stmt.guard_id, edges)
			elif isinstance(stmt, While):
				edges.add((parent, stmt.guard_id))
				self._collect_edges(stmt.body, stmt.guard_id, edges)


_service = InstrumentService()


def insert_toggles(program, toggle_loops=False):
	return _service.insert_toggles(program, toggle_loops)


def extract_hierarchy(ip):
	return _service.extract_hierarchy(ip)

# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from collections import deque

from poco_lab.exceptions import UnknownGuardError
from poco_lab.logger import get_logger

logger = get_logger(__name__)


class HierarchyService:
	"""Outermost-guard discovery and guard status predicates"""

	def collect_outermost(self, hierarchy, o_new):
		"""
		Breadth-first walk from the latest obstacles to the toggling boundary

		Successors that are enabled and not obstacles are collected; disabled,
		transparent or obstacle successors are walked through. Starts from the
		virtual root when there are no obstacles yet.

		Args:
			hierarchy: GuardHierarchy with current statuses
			o_new: set of guard ids

		Returns:
			frozenset of outermost guard ids
		"""
		for g in o_new:
			if g not in hierarchy.guards:
				raise UnknownGuardError(g)

		o_new = frozenset(o_new)
		queue = deque(sorted(o_new) if o_new else [hierarchy.virtual_root])
		checked = set()
		outermost = set()

		while queue:
			g = queue.popleft()
			if g in checked:
				continue
			checked.add(g)
			for child in hierarchy.successors(g):
				if (child not in o_new and hierarchy.is_enabled(child)
						and child not in hierarchy.transparent):
					outermost.add(child)
				else:
					queue.append(child)

		return frozenset(outermost)

	def is_obstacle(self, g, hierarchy, passed, outermost):
		"""Enabled and either passed or outermost"""
		if g not in hierarchy.guards:
			raise UnknownGuardError(g)
		return hierarchy.is_enabled(g) and (g in passed or g in outermost)


_service = HierarchyService()


def collect_outermost(hierarchy, o_new):
	return _service.collect_outermost(hierarchy, o_new)


def is_obstacle(g, hierarchy, passed, outermost):
	return _service.is_obstacle(g, hierarchy, passed, outermost)

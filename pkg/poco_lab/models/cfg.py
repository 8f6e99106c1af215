# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class BasicBlock:
	id: int
	function: str
	# sids of the simple statements (and the guard statement) held by the block
	statements: tuple = ()
	# guard whose condition terminates this block, if any
	guard: Optional[int] = None


@dataclass(frozen=True)
class Cfg:
	"""Control-flow graph of one function"""
	function: str
	blocks: tuple
	edges: frozenset
	entry: int
	exit: Optional[int] = None

	@property
	def block_ids(self):
		return [block.id for block in self.blocks]

	def successors(self, block_id):
		return sorted(dst for src, dst in self.edges if src == block_id)

	def validate(self, sink_ids=()):
		"""Every block except exit has an outgoing edge; branch blocks have exactly two"""
		sinks = set(sink_ids)
		for block in self.blocks:
			out = [dst for src, dst in self.edges if src == block.id]
			if block.id == self.exit:
				continue
			if block.guard is not None:
				if len(out) != 2:
					raise ValueError(f"branch block {block.id} has {len(out)} successors")
			elif not out and block.id not in sinks:
				raise ValueError(f"block {block.id} has no successor")


@dataclass(frozen=True)
class IfLayout:
	"""Block ids an if statement occupies"""
	cond: int
	then_entry: int
	else_entry: Optional[int]
	join: Optional[int]


@dataclass(frozen=True)
class WhileLayout:
	header: int
	body_entry: int
	after: Optional[int]


@dataclass(frozen=True)
class ProgramCfg:
	"""All function CFGs plus the inter-procedural glue of a program"""
	functions: dict
	# crash label -> sink block id
	sinks: dict
	# (calling block, callee entry) pairs
	call_edges: frozenset = frozenset()
	# sid -> IfLayout / WhileLayout
	layouts: dict = field(default_factory=dict)
	block_count: int = 0

	def cfg(self, function):
		return self.functions[function]

	@property
	def edges(self):
		"""Intra-procedural, crash and call edges of the whole program"""
		edges = set(self.call_edges)
		for cfg in self.functions.values():
			edges |= cfg.edges
		return frozenset(edges)

	@property
	def blocks(self):
		return [block for cfg in self.functions.values() for block in cfg.blocks]

	def census(self):
		return {
			"functions": len(self.functions),
			"blocks": self.block_count,
			"sinks": len(self.sinks),
			"edges": len(self.edges),
		}

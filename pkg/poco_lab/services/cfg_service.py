# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from poco_lab.logger import get_logger
from poco_lab.models.cfg import BasicBlock, Cfg, IfLayout, ProgramCfg, WhileLayout
from poco_lab.models.program import (
	Assign,
	Call,
	Crash,
	ExprStmt,
	If,
	IndexAssign,
	Return,
	While,
	iter_subexpressions,
)

logger = get_logger(__name__)

_EXIT = "exit"


class _FunctionBuilder:
	"""Lays out the blocks of one function; block ids come from the shared counter"""

	def __init__(self, fn, counter):
		self.fn = fn
		self.counter = counter
		self.blocks = {}
		self.edges = set()
		# (block, symbolic target) resolved once every function is laid out
		self.pending = []
		self.layouts = {}

	def new_block(self):
		block_id = self.counter[0]
		self.counter[0] += 1
		self.blocks[block_id] = {"statements": [], "guard": None}
		return block_id

	def build(self):
		entry = self.new_block()
		end = self.body(self.fn.body, entry)
		if self.fn.has_return or end is None:
			exit_block = self.new_block()
			if end is not None:
				self.edges.add((end, exit_block))
		else:
			exit_block = end
		self.entry = entry
		self.exit = exit_block
		self.edges |= {(src, exit_block) for src, target in self.pending if target == _EXIT}
		self.pending = [(src, target) for src, target in self.pending if target != _EXIT]
		return entry, exit_block

	def body(self, statements, current):
		"""Lay out a statement list starting in `current`; returns the fall-through block or None"""
		for stmt in statements:
			current = self.statement(stmt, current)
			if current is None:
				return None
		return current

	def statement(self, stmt, current):
		if isinstance(stmt, If):
			return self.if_statement(stmt, current)
		if isinstance(stmt, While):
			return self.while_statement(stmt, current)

		self.blocks[current]["statements"].append(stmt.sid)
		self.record_calls(stmt, current)
		if isinstance(stmt, Return):
			self.pending.append((current, _EXIT))
			return None
		if isinstance(stmt, Crash):
			self.pending.append((current, ("sink", stmt.label)))
			return None
		return current

	def record_calls(self, stmt, current):
		roots = []
		if isinstance(stmt, Assign):
			roots = [stmt.value]
		elif isinstance(stmt, IndexAssign):
			roots = [stmt.index, stmt.value]
		elif isinstance(stmt, ExprStmt):
			roots = [stmt.call]
		elif isinstance(stmt, Return) and stmt.value is not None:
			roots = [stmt.value]
		for root in roots:
			for node in iter_subexpressions(root):
				if isinstance(node, Call):
					self.pending.append((current, ("call", node.name)))

	def if_statement(self, stmt, current):
		cond = current
		self.blocks[cond]["statements"].append(stmt.sid)
		self.blocks[cond]["guard"] = stmt.guard_id

		then_entry = self.new_block()
		self.edges.add((cond, then_entry))
		then_end = self.body(stmt.then, then_entry)

		else_entry = else_end = None
		if stmt.orelse is not None:
			else_entry = self.new_block()
			self.edges.add((cond, else_entry))
			else_end = self.body(stmt.orelse, else_entry)

		join = None
		if stmt.orelse is None:
			join = self.new_block()
			self.edges.add((cond, join))
			if then_end is not None:
				self.edges.add((then_end, join))
		elif then_end is not None or else_end is not None:
			join = self.new_block()
			for end in (then_end, else_end):
				if end is not None:
					self.edges.add((end, join))

		self.layouts[stmt.sid] = IfLayout(cond, then_entry, else_entry, join)
		return join

	def while_statement(self, stmt, current):
		header = self.new_block()
		self.edges.add((current, header))
		self.blocks[header]["statements"].append(stmt.sid)
		self.blocks[header]["guard"] = stmt.guard_id

		body_entry = self.new_block()
		self.edges.add((header, body_entry))
		body_end = self.body(stmt.body, body_entry)
		if body_end is not None:
			self.edges.add((body_end, header))

		after = self.new_block()
		self.edges.add((header, after))
		self.layouts[stmt.sid] = WhileLayout(header, body_entry, after)
		return after


class CfgService:
	"""Builds deterministic, source-ordered control-flow graphs"""

	def build_cfg(self, program):
		"""
		Build the CFG of every function in a checked program

		Args:
			program: Program

		Returns:
			ProgramCfg with global block ids, crash sinks and call edges
		"""
		counter = [0]
		builders = []
		for fn in program.functions:
			builder = _FunctionBuilder(fn, counter)
			builder.build()
			builders.append(builder)

		block_count = counter[0]
		sinks = {label: block_count + i for i, label in enumerate(program.crash_labels())}
		entries = {builder.fn.name: builder.entry for builder in builders}

		functions = {}
		call_edges = set()
		layouts = {}
		for builder in builders:
			edges = set(builder.edges)
			for src, (kind, name) in builder.pending:
				if kind == "sink":
					edges.add((src, sinks[name]))
				else:
					call_edges.add((src, entries[name]))

			blocks = tuple(
				BasicBlock(block_id, builder.fn.name, tuple(data["statements"]), data["guard"])
				for block_id, data in sorted(builder.blocks.items())
			)
			functions[builder.fn.name] = Cfg(builder.fn.name, blocks, frozenset(edges), builder.entry, builder.exit)
			layouts.update(builder.layouts)

		program_cfg = ProgramCfg(functions, sinks, frozenset(call_edges), layouts, block_count)
		logger.debug("built cfg: %s", program_cfg.census())
		return program_cfg


_service = CfgService()


def build_cfg(program):
	return _service.build_cfg(program)

# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

"""GuardLang syntax tree.

Nodes are frozen dataclasses. Source positions never take part in equality,
so a re-parsed pretty-printed program compares equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from poco_lab.exceptions import GuardLangError

IF = "if"
WHILE = "while"


@dataclass(frozen=True)
class Node:
	line: int = field(default=0, compare=False, kw_only=True, repr=False)
	col: int = field(default=0, compare=False, kw_only=True, repr=False)


# Expressions
# -----------

@dataclass(frozen=True)
class IntLit(Node):
	value: int
	is_char: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class BytesLit(Node):
	value: bytes


@dataclass(frozen=True)
class Var(Node):
	name: str


@dataclass(frozen=True)
class Index(Node):
	name: str
	index: "Expr"


@dataclass(frozen=True)
class Len(Node):
	operand: "Expr"


@dataclass(frozen=True)
class ArrayNew(Node):
	size: int


@dataclass(frozen=True)
class Call(Node):
	name: str
	args: tuple = ()


@dataclass(frozen=True)
class Unary(Node):
	op: str
	operand: "Expr"


@dataclass(frozen=True)
class Binary(Node):
	op: str
	left: "Expr"
	right: "Expr"


@dataclass(frozen=True)
class Toggled(Node):
	"""`TOG_<guard_id> || cond`, produced only by toggle insertion"""
	guard_id: int
	cond: "Expr"


Expr = Union[IntLit, BytesLit, Var, Index, Len, ArrayNew, Call, Unary, Binary, Toggled]


# Statements
# ----------

@dataclass(frozen=True)
class Assign(Node):
	sid: int
	name: str
	value: Expr


@dataclass(frozen=True)
class IndexAssign(Node):
	sid: int
	name: str
	index: Expr
	value: Expr


@dataclass(frozen=True)
class If(Node):
	sid: int
	guard_id: int
	cond: Expr
	then: tuple
	orelse: Optional[tuple] = None


@dataclass(frozen=True)
class While(Node):
	sid: int
	guard_id: int
	cond: Expr
	body: tuple


@dataclass(frozen=True)
class Return(Node):
	sid: int
	value: Optional[Expr] = None


@dataclass(frozen=True)
class Crash(Node):
	sid: int
	label: str


@dataclass(frozen=True)
class ExprStmt(Node):
	sid: int
	call: Call


Stmt = Union[Assign, IndexAssign, If, While, Return, Crash, ExprStmt]


# Types and definitions
# ---------------------

@dataclass(frozen=True)
class VarType:
	kind: str  # "int", "bytes" or "array"
	size: int = 0

	def __str__(self):
		return f"array({self.size})" if self.kind == "array" else self.kind


INT = VarType("int")
BYTES = VarType("bytes")


def array_type(size):
	return VarType("array", size)


@dataclass(frozen=True)
class Param(Node):
	name: str
	type: VarType = INT


@dataclass(frozen=True)
class FunctionDef(Node):
	name: str
	params: tuple
	body: tuple
	is_entry: bool = False
	# (name, VarType) pairs in first-assignment order, filled by the checker
	locals: tuple = ()

	@property
	def has_return(self):
		return any(isinstance(s, Return) for s in iter_statements(self.body))

	def local_type(self, name):
		for local_name, var_type in self.locals:
			if local_name == name:
				return var_type
		return None


@dataclass(frozen=True)
class GuardSite:
	id: int
	sid: int
	kind: str
	cond: Expr
	function: str
	line: int = field(default=0, compare=False)
	col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Program:
	functions: tuple
	entry: str
	guards: tuple = ()

	def function(self, name):
		for fn in self.functions:
			if fn.name == name:
				return fn
		return None

	@property
	def entry_function(self):
		return self.function(self.entry)

	def guard(self, guard_id):
		if 0 <= guard_id < len(self.guards):
			return self.guards[guard_id]
		return None

	def statements(self):
		"""All statements of all functions, pre-order"""
		for fn in self.functions:
			yield from iter_statements(fn.body)

	def crash_labels(self):
		"""Crash labels in order of first appearance"""
		labels = []
		for stmt in self.statements():
			if isinstance(stmt, Crash) and stmt.label not in labels:
				labels.append(stmt.label)
		return labels

	def validate(self):
		"""Check the structural invariants every Program must satisfy"""
		entries = [fn for fn in self.functions if fn.is_entry]
		if len(entries) != 1 or entries[0].name != self.entry:
			raise GuardLangError("missing entry function")

		sids = [stmt.sid for stmt in self.statements()]
		if len(sids) != len(set(sids)):
			raise GuardLangError("statement ids are not unique")

		if [g.id for g in self.guards] != list(range(len(self.guards))):
			raise GuardLangError("guard ids are not dense and ordered")


def iter_statements(body) -> Iterator[Stmt]:
	"""Yield statements of a block in pre-order (lexical order)"""
	for stmt in body:
		yield stmt
		if isinstance(stmt, If):
			yield from iter_statements(stmt.then)
			if stmt.orelse is not None:
				yield from iter_statements(stmt.orelse)
		elif isinstance(stmt, While):
			yield from iter_statements(stmt.body)


def iter_subexpressions(expr) -> Iterator[Expr]:
	"""Yield an expression and all of its sub-expressions"""
	yield expr
	if isinstance(expr, (Index,)):
		yield from iter_subexpressions(expr.index)
	elif isinstance(expr, Len):
		yield from iter_subexpressions(expr.operand)
	elif isinstance(expr, Call):
		for arg in expr.args:
			yield from iter_subexpressions(arg)
	elif isinstance(expr, Unary):
		yield from iter_subexpressions(expr.operand)
	elif isinstance(expr, Binary):
		yield from iter_subexpressions(expr.left)
		yield from iter_subexpressions(expr.right)
	elif isinstance(expr, Toggled):
		yield from iter_subexpressions(expr.cond)

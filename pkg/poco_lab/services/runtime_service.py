# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

"""Deterministic GuardLang interpreter.

Programs are compiled once into nested closures; each execution then only
walks closures. Block transitions follow the layouts recorded by the CFG
builder, so every edge an execution reports is an edge of the static CFG
(or a call or crash-sink edge).
"""

from __future__ import annotations

import operator

from poco_lab.exceptions import CorpusError, PocoLabError
from poco_lab.logger import get_logger
from poco_lab.models.hierarchy import ToggleVector
from poco_lab.models.outcome import (
	DIVISION_BY_ZERO,
	INDEX_OUT_OF_BOUNDS,
	MODULO_BY_ZERO,
	STACK_OVERFLOW,
	CorpusOutcome,
	ExecOutcome,
	Verdict,
)
from poco_lab.models.program import (
	ArrayNew,
	Assign,
	Binary,
	BytesLit,
	Call,
	Crash,
	ExprStmt,
	If,
	Index,
	IndexAssign,
	IntLit,
	Len,
	Return,
	Toggled,
	Unary,
	Var,
	While,
	iter_statements,
)
from poco_lab.services.cache_service import CacheService
from poco_lab.services.cfg_service import build_cfg

logger = get_logger(__name__)

# every execution begins with the virtual edge (START_BLOCK, entry block)
START_BLOCK = -1

_MASK = (1 << 64) - 1
_SIGN = 1 << 63


def wrap(value):
	"""Two's complement 64-bit wrap-around"""
	value &= _MASK
	return value - (1 << 64) if value & _SIGN else value


def trunc_div(a, b):
	q = abs(a) // abs(b)
	return q if (a >= 0) == (b >= 0) else -q


def trunc_mod(a, b):
	return a - b * trunc_div(a, b)


class _Fault(Exception):
	def __init__(self, kind):
		self.kind = kind


class _Timeout(Exception):
	pass


class _Bug(Exception):
	def __init__(self, label):
		self.label = label


class _Return(Exception):
	def __init__(self, value):
		self.value = value


class _Context:
	__slots__ = ("steps", "budget", "edges", "cond_sat", "branch_entered", "cur", "toggles", "depth")

	def __init__(self, budget, toggles, entry_block):
		self.steps = 0
		self.budget = budget
		self.edges = set()
		self.cond_sat = set()
		self.branch_entered = set()
		self.cur = entry_block
		self.toggles = toggles
		self.depth = 1

	def tick(self):
		# the step that reaches the budget is the timeout; completed runs stay below it
		self.steps += 1
		if self.steps >= self.budget:
			self.steps = self.budget
			raise _Timeout()

	def goto(self, block):
		self.edges.add((self.cur, block))
		self.cur = block


_ARITH = {
	"+": operator.add,
	"-": operator.sub,
	"*": operator.mul,
}
_COMPARE = {
	"==": operator.eq,
	"!=": operator.ne,
	"<": operator.lt,
	"<=": operator.le,
	">": operator.gt,
	">=": operator.ge,
}


class _Compiler:
	"""Turns a checked Program into closures over (ctx, env)"""

	def __init__(self, program, cfg, max_call_depth):
		self.program = program
		self.cfg = cfg
		self.max_call_depth = max_call_depth
		# filled lazily so recursive and forward calls resolve
		self.functions = {}
		self.owners = {
			stmt.sid: fn.name for fn in program.functions for stmt in iter_statements(fn.body)
		}

	def compile(self):
		for fn in self.program.functions:
			self.functions[fn.name] = self.function(fn)
		return self.functions

	# Functions
	# ---------

	def function(self, fn):
		fn_cfg = self.cfg.cfg(fn.name)
		entry, exit_block = fn_cfg.entry, fn_cfg.exit
		defaults = []
		for name, var_type in fn.locals:
			if var_type.kind == "int":
				defaults.append((name, lambda: 0))
			elif var_type.kind == "bytes":
				defaults.append((name, lambda: b""))
			else:
				size = var_type.size
				defaults.append((name, lambda size=size: [0] * size))
		param_names = [param.name for param in fn.params]
		body = self.block(fn.body)

		def invoke(ctx, args):
			env = {name: make() for name, make in defaults}
			env.update(zip(param_names, args))
			try:
				body(ctx, env)
			except _Return as ret:
				return ret.value
			if ctx.cur != exit_block:
				ctx.goto(exit_block)
			return 0

		invoke.entry = entry
		invoke.exit = exit_block
		return invoke

	# Statements
	# ----------

	def block(self, statements):
		compiled = [self.statement(stmt) for stmt in statements]
		if len(compiled) == 1:
			return compiled[0]

		def run(ctx, env):
			for stmt in compiled:
				stmt(ctx, env)

		return run

	def statement(self, stmt):
		if isinstance(stmt, Assign):
			name, value = stmt.name, self.expr(stmt.value)

			def run_assign(ctx, env):
				ctx.tick()
				env[name] = value(ctx, env)

			return run_assign

		if isinstance(stmt, IndexAssign):
			name, index, value = stmt.name, self.expr(stmt.index), self.expr(stmt.value)

			def run_index_assign(ctx, env):
				ctx.tick()
				target = env[name]
				i = index(ctx, env)
				v = value(ctx, env)
				if not 0 <= i < len(target):
					raise _Fault(INDEX_OUT_OF_BOUNDS)
				target[i] = v

			return run_index_assign

		if isinstance(stmt, ExprStmt):
			call = self.expr(stmt.call)

			def run_expr(ctx, env):
				ctx.tick()
				call(ctx, env)

			return run_expr

		if isinstance(stmt, Return):
			value = self.expr(stmt.value) if stmt.value is not None else (lambda ctx, env: 0)
			fn_exit = self.cfg.cfg(self._owner(stmt)).exit

			def run_return(ctx, env):
				ctx.tick()
				result = value(ctx, env)
				ctx.goto(fn_exit)
				raise _Return(result)

			return run_return

		if isinstance(stmt, Crash):
			label, sink = stmt.label, self.cfg.sinks[stmt.label]

			def run_crash(ctx, env):
				ctx.tick()
				ctx.goto(sink)
				raise _Bug(label)

			return run_crash

		if isinstance(stmt, If):
			return self.if_statement(stmt)
		if isinstance(stmt, While):
			return self.while_statement(stmt)
		raise TypeError(f"cannot compile {type(stmt).__name__}")

	def _owner(self, stmt):
		return self.owners[stmt.sid]

	def guard(self, guard_id, cond):
		"""Evaluate a guard, recording condSat and branchEntered"""
		if isinstance(cond, Toggled):
			original = self.expr(cond.cond)

			def evaluate_toggled(ctx, env):
				ctx.tick()
				if guard_id in ctx.toggles:
					try:
						sat = original(ctx, env) != 0
					except _Fault:
						sat = False
					if sat:
						ctx.cond_sat.add(guard_id)
					ctx.branch_entered.add(guard_id)
					return True
				if original(ctx, env) != 0:
					ctx.cond_sat.add(guard_id)
					ctx.branch_entered.add(guard_id)
					return True
				return False

			return evaluate_toggled

		plain = self.expr(cond)

		def evaluate(ctx, env):
			ctx.tick()
			if plain(ctx, env) != 0:
				ctx.cond_sat.add(guard_id)
				ctx.branch_entered.add(guard_id)
				return True
			return False

		return evaluate

	def if_statement(self, stmt):
		layout = self.cfg.layouts[stmt.sid]
		test = self.guard(stmt.guard_id, stmt.cond)
		then = self.block(stmt.then)
		orelse = self.block(stmt.orelse) if stmt.orelse is not None else None
		then_entry, else_entry, join = layout.then_entry, layout.else_entry, layout.join

		def run_if(ctx, env):
			if test(ctx, env):
				ctx.goto(then_entry)
				then(ctx, env)
				ctx.goto(join)
			elif orelse is not None:
				ctx.goto(else_entry)
				orelse(ctx, env)
				ctx.goto(join)
			else:
				ctx.goto(join)

		return run_if

	def while_statement(self, stmt):
		layout = self.cfg.layouts[stmt.sid]
		test = self.guard(stmt.guard_id, stmt.cond)
		body = self.block(stmt.body)
		header, body_entry, after = layout.header, layout.body_entry, layout.after

		def run_while(ctx, env):
			ctx.goto(header)
			while test(ctx, env):
				ctx.goto(body_entry)
				body(ctx, env)
				ctx.goto(header)
			ctx.goto(after)

		return run_while

	# Expressions
	# -----------

	def expr(self, expr):
		if isinstance(expr, IntLit):
			value = expr.value
			return lambda ctx, env: value
		if isinstance(expr, BytesLit):
			value = expr.value
			return lambda ctx, env: value
		if isinstance(expr, Var):
			name = expr.name
			return lambda ctx, env: env[name]
		if isinstance(expr, Index):
			return self.index(expr)
		if isinstance(expr, Len):
			operand = self.expr(expr.operand)
			return lambda ctx, env: len(operand(ctx, env))
		if isinstance(expr, ArrayNew):
			size = expr.size
			return lambda ctx, env: [0] * size
		if isinstance(expr, Call):
			return self.call(expr)
		if isinstance(expr, Unary):
			operand = self.expr(expr.operand)
			if expr.op == "-":
				return lambda ctx, env: wrap(-operand(ctx, env))
			return lambda ctx, env: 1 if operand(ctx, env) == 0 else 0
		if isinstance(expr, Binary):
			return self.binary(expr)
		if isinstance(expr, Toggled):
			raise TypeError("toggled conditions are only valid as guard conditions")
		raise TypeError(f"cannot compile {type(expr).__name__}")

	def index(self, expr):
		name, index = expr.name, self.expr(expr.index)

		def read(ctx, env):
			target = env[name]
			i = index(ctx, env)
			if isinstance(target, bytes):
				# byte strings read as zero outside [0, len)
				return target[i] if 0 <= i < len(target) else 0
			if not 0 <= i < len(target):
				raise _Fault(INDEX_OUT_OF_BOUNDS)
			return target[i]

		return read

	def call(self, expr):
		name = expr.name
		args = [self.expr(arg) for arg in expr.args]
		functions = self.functions
		max_depth = self.max_call_depth

		def run_call(ctx, env):
			ctx.tick()
			values = [arg(ctx, env) for arg in args]
			callee = functions[name]
			caller_block = ctx.cur
			ctx.goto(callee.entry)
			if ctx.depth >= max_depth:
				raise _Fault(STACK_OVERFLOW)
			ctx.depth += 1
			try:
				result = callee(ctx, values)
			finally:
				ctx.depth -= 1
			ctx.cur = caller_block
			return result

		return run_call

	def binary(self, expr):
		op = expr.op
		left, right = self.expr(expr.left), self.expr(expr.right)

		if op == "&&":
			return lambda ctx, env: 1 if left(ctx, env) != 0 and right(ctx, env) != 0 else 0
		if op == "||":
			return lambda ctx, env: 1 if left(ctx, env) != 0 or right(ctx, env) != 0 else 0
		if op in _COMPARE:
			compare = _COMPARE[op]
			return lambda ctx, env: 1 if compare(left(ctx, env), right(ctx, env)) else 0
		if op in _ARITH:
			arith = _ARITH[op]
			return lambda ctx, env: wrap(arith(left(ctx, env), right(ctx, env)))
		if op == "/":
			def divide(ctx, env):
				a, b = left(ctx, env), right(ctx, env)
				if b == 0:
					raise _Fault(DIVISION_BY_ZERO)
				return wrap(trunc_div(a, b))
			return divide
		if op == "%":
			def modulo(ctx, env):
				a, b = left(ctx, env), right(ctx, env)
				if b == 0:
					raise _Fault(MODULO_BY_ZERO)
				return wrap(trunc_mod(a, b))
			return modulo
		raise TypeError(f"unknown operator {op}")


class RuntimeService:
	"""Executes one compiled program on seeds under toggle vectors"""

	def __init__(self, program, cfg, toggleable=frozenset(), max_call_depth=64, cache=None):
		self.program = program
		self.cfg = cfg
		self.toggleable = frozenset(toggleable)
		self.max_call_depth = max_call_depth
		self.functions = _Compiler(program, cfg, max_call_depth).compile()
		self.entry = self.functions[program.entry]
		self.cache = cache if cache is not None else CacheService()
		self.executions = 0

	@classmethod
	def from_instrumented(cls, ip, max_call_depth=64, cache=None):
		return cls(ip.program, ip.cfg, ip.toggleable, max_call_depth, cache)

	@classmethod
	def from_program(cls, program, max_call_depth=64):
		"""Runtime for an uninstrumented program (no toggles)"""
		return cls(program, build_cfg(program), frozenset(), max_call_depth)

	def execute_bytes(self, data, tv=None, budget=100000, seed_id=""):
		"""
		Run the entry function on raw input bytes

		Args:
			data: input bytes
			tv: ToggleVector, all off when None
			budget: step budget (> 0)
			seed_id: id copied into the outcome

		Returns:
			ExecOutcome
		"""
		if budget <= 0:
			raise PocoLabError("step budget must be positive")
		toggles = tv.on if tv is not None else frozenset()
		ctx = _Context(budget, toggles, START_BLOCK)
		ctx.goto(self.entry.entry)
		self.executions += 1

		try:
			self.entry(ctx, [bytes(data)])
			verdict = Verdict.ok()
		except _Bug as bug:
			verdict = Verdict.bug(bug.label)
		except _Fault as fault:
			verdict = Verdict.fault(fault.kind)
		except _Timeout:
			verdict = Verdict.timeout()
		except RecursionError:
			verdict = Verdict.fault(STACK_OVERFLOW)

		return ExecOutcome(
			seed_id=seed_id,
			verdict=verdict,
			edges=frozenset(ctx.edges),
			cond_sat=frozenset(ctx.cond_sat),
			branch_entered=frozenset(ctx.branch_entered),
			steps=ctx.steps,
		)

	def execute(self, tv, seed, budget):
		"""Run one seed; outcomes are cached by (seed, toggles, budget)"""
		key = (seed.id, seed.sha256, tv.digest, budget)
		return self.cache.get_or_set(key, lambda: self.execute_bytes(seed.data, tv, budget, seed.id))

	def execute_corpus(self, tv, corpus, budget):
		"""
		Run every seed of a corpus and merge the results

		Returns:
			CorpusOutcome with per-seed outcomes, unions and the worst verdict
		"""
		if len(corpus) == 0:
			raise CorpusError("empty corpus")
		outcomes = {seed.id: self.execute(tv, seed, budget) for seed in corpus}
		return CorpusOutcome.merge(outcomes)


_RUNTIMES = {}


def runtime_for(ip, max_call_depth=64):
	"""Shared compiled runtime for an instrumented program"""
	key = (id(ip), max_call_depth)
	cached = _RUNTIMES.get(key)
	if cached is not None and cached[0] is ip:
		return cached[1]
	if len(_RUNTIMES) >= 32:
		_RUNTIMES.clear()
	runtime = RuntimeService.from_instrumented(ip, max_call_depth)
	_RUNTIMES[key] = (ip, runtime)
	return runtime


def execute(ip, tv, seed, budget):
	tv = tv or ToggleVector.all_off()
	tv.validate(ip)
	return runtime_for(ip).execute(tv, seed, budget)


def execute_corpus(ip, tv, corpus, budget):
	tv = tv or ToggleVector.all_off()
	tv.validate(ip)
	return runtime_for(ip).execute_corpus(tv, corpus, budget)

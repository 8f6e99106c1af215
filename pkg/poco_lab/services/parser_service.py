# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

"""GuardLang front end: lexer, parser, static checker and pretty printer."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from poco_lab.exceptions import GuardLangError
from poco_lab.logger import get_logger
from poco_lab.models.program import (
	BYTES,
	IF,
	INT,
	WHILE,
	ArrayNew,
	Assign,
	Binary,
	BytesLit,
	Call,
	Crash,
	ExprStmt,
	FunctionDef,
	GuardSite,
	If,
	Index,
	IndexAssign,
	IntLit,
	Len,
	Param,
	Program,
	Return,
	Toggled,
	Unary,
	Var,
	While,
	array_type,
	iter_subexpressions,
)

logger = get_logger(__name__)

KEYWORDS = {"fn", "entry", "if", "else", "while", "return", "crash", "len", "array", "int", "bytes"}

_TOKEN_SPEC = [
	("COMMENT", r"//[^\n]*"),
	("NEWLINE", r"\n"),
	("SKIP", r"[ \t\r]+"),
	("HEX", r"0[xX][0-9a-fA-F]+"),
	("INT", r"[0-9]+"),
	("CHAR", r"'(?:\\x[0-9a-fA-F]{2}|\\.|[^'\\\n])'"),
	("STRING", r'"(?:\\x[0-9a-fA-F]{2}|\\.|[^"\\\n])*"'),
	("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
	("OP", r"==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){}\[\],;:]"),
	("MISMATCH", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))

_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34}

# binary operator precedence, loosest first
PRECEDENCE = {
	"||": 1,
	"&&": 2,
	"==": 3, "!=": 3,
	"<": 4, "<=": 4, ">": 4, ">=": 4,
	"+": 5, "-": 5,
	"*": 6, "/": 6, "%": 6,
}
UNARY_PRECEDENCE = 7
ATOM_PRECEDENCE = 8

INT64_MAX = (1 << 63) - 1


@dataclass(frozen=True)
class Token:
	kind: str
	text: str
	line: int
	col: int
	value: object = None


def _decode_escapes(body, line, col):
	out = bytearray()
	i = 0
	while i < len(body):
		ch = body[i]
		if ch != "\\":
			encoded = ch.encode("utf-8")
			out.extend(encoded)
			i += 1
			continue
		nxt = body[i + 1]
		if nxt == "x":
			out.append(int(body[i + 2:i + 4], 16))
			i += 4
		elif nxt in _ESCAPES:
			out.append(_ESCAPES[nxt])
			i += 2
		else:
			raise GuardLangError(f"unknown escape '\\{nxt}'", line, col + i)
	return bytes(out)


def tokenize(source):
	"""Split GuardLang source into tokens; the last token is EOF"""
	tokens = []
	line, line_start = 1, 0
	for match in _TOKEN_RE.finditer(source):
		kind = match.lastgroup
		text = match.group()
		col = match.start() - line_start + 1
		if kind == "NEWLINE":
			line += 1
			line_start = match.end()
			continue
		if kind in ("SKIP", "COMMENT"):
			continue
		if kind == "MISMATCH":
			raise GuardLangError(f"unexpected character {text!r}", line, col)

		value = None
		if kind == "HEX":
			kind, value = "INT", int(text, 16)
		elif kind == "INT":
			value = int(text)
		elif kind == "CHAR":
			decoded = _decode_escapes(text[1:-1], line, col)
			if len(decoded) != 1:
				raise GuardLangError("character literal must be a single byte", line, col)
			value = decoded[0]
		elif kind == "STRING":
			value = _decode_escapes(text[1:-1], line, col)
		elif kind == "IDENT" and text in KEYWORDS:
			kind = "KEYWORD"

		if kind == "INT" and value > INT64_MAX:
			raise GuardLangError("integer literal out of range", line, col)
		tokens.append(Token(kind, text, line, col, value))

	tokens.append(Token("EOF", "", line, len(source) - line_start + 1))
	return tokens


class _Parser:
	"""Recursive-descent parser producing an unchecked Program"""

	def __init__(self, tokens):
		self.tokens = tokens
		self.pos = 0
		self.next_sid = 0
		self.next_guard = 0
		self.guards = []
		self.function = None

	# Token helpers
	# -------------

	@property
	def current(self):
		return self.tokens[self.pos]

	def check(self, text, kind=None):
		token = self.current
		if kind is not None and token.kind != kind:
			return False
		return token.text == text and token.kind in ("OP", "KEYWORD")

	def accept(self, text):
		if self.check(text):
			return self.advance()
		return None

	def advance(self):
		token = self.current
		if token.kind != "EOF":
			self.pos += 1
		return token

	def expect(self, text):
		token = self.current
		if not self.check(text):
			found = "end of input" if token.kind == "EOF" else f"'{token.text}'"
			raise GuardLangError(f"expected '{text}', found {found}", token.line, token.col)
		return self.advance()

	def expect_ident(self, what="identifier"):
		token = self.current
		if token.kind != "IDENT":
			found = "end of input" if token.kind == "EOF" else f"'{token.text}'"
			raise GuardLangError(f"expected {what}, found {found}", token.line, token.col)
		return self.advance()

	def new_sid(self):
		sid = self.next_sid
		self.next_sid += 1
		return sid

	# Declarations
	# ------------

	def parse_program(self):
		functions = []
		while self.current.kind != "EOF":
			functions.append(self.parse_function())
		return functions, self.guards

	def parse_function(self):
		start = self.current
		is_entry = self.accept("entry") is not None
		self.expect("fn")
		name = self.expect_ident("function name").text
		self.function = name
		self.expect("(")
		params = []
		if not self.check(")"):
			params.append(self.parse_param(is_entry))
			while self.accept(","):
				params.append(self.parse_param(is_entry))
		self.expect(")")
		body = self.parse_block()
		return FunctionDef(name, tuple(params), body, is_entry, line=start.line, col=start.col)

	def parse_param(self, is_entry):
		token = self.expect_ident("parameter name")
		param_type = BYTES if is_entry else INT
		if self.accept(":"):
			type_token = self.current
			if self.accept("int"):
				param_type = INT
			elif self.accept("bytes"):
				param_type = BYTES
			else:
				raise GuardLangError("expected parameter type 'int' or 'bytes'", type_token.line, type_token.col)
		return Param(token.text, param_type, line=token.line, col=token.col)

	# Statements
	# ----------

	def parse_block(self):
		self.expect("{")
		body = []
		while not self.check("}"):
			if self.current.kind == "EOF":
				raise GuardLangError("expected '}', found end of input", self.current.line, self.current.col)
			body.append(self.parse_statement())
		self.expect("}")
		return tuple(body)

	def parse_statement(self):
		token = self.current
		pos = {"line": token.line, "col": token.col}

		if self.check("if"):
			return self.parse_if()

		if self.accept("while"):
			sid = self.new_sid()
			guard_id = self._register_guard(sid, WHILE, token)
			self.expect("(")
			cond = self.parse_expr()
			self.expect(")")
			self._set_guard_cond(guard_id, cond)
			body = self.parse_block()
			return While(sid, guard_id, cond, body, **pos)

		if self.accept("return"):
			sid = self.new_sid()
			value = None if self.check(";") else self.parse_expr()
			self.expect(";")
			return Return(sid, value, **pos)

		if self.accept("crash"):
			sid = self.new_sid()
			self.expect("(")
			label_token = self.current
			if label_token.kind == "IDENT":
				label = self.advance().text
			elif label_token.kind == "STRING":
				label = self.advance().value.decode("utf-8", "replace")
			else:
				raise GuardLangError("expected crash label", label_token.line, label_token.col)
			if not label:
				raise GuardLangError("crash label must not be empty", label_token.line, label_token.col)
			self.expect(")")
			self.expect(";")
			return Crash(sid, label, **pos)

		if token.kind == "IDENT":
			sid = self.new_sid()
			name = self.advance().text
			if self.check("("):
				call = self.parse_call_tail(name, token)
				self.expect(";")
				return ExprStmt(sid, call, **pos)
			if self.accept("["):
				index = self.parse_expr()
				self.expect("]")
				self.expect("=")
				value = self.parse_expr()
				self.expect(";")
				return IndexAssign(sid, name, index, value, **pos)
			self.expect("=")
			value = self.parse_expr()
			self.expect(";")
			return Assign(sid, name, value, **pos)

		found = "end of input" if token.kind == "EOF" else f"'{token.text}'"
		raise GuardLangError(f"expected statement, found {found}", token.line, token.col)

	def parse_if(self):
		token = self.expect("if")
		sid = self.new_sid()
		guard_id = self._register_guard(sid, IF, token)
		self.expect("(")
		cond = self.parse_expr()
		self.expect(")")
		self._set_guard_cond(guard_id, cond)
		then = self.parse_block()
		orelse = None
		if self.accept("else"):
			orelse = (self.parse_if(),) if self.check("if") else self.parse_block()
		return If(sid, guard_id, cond, then, orelse, line=token.line, col=token.col)

	def _register_guard(self, sid, kind, token):
		guard_id = self.next_guard
		self.next_guard += 1
		self.guards.append(GuardSite(guard_id, sid, kind, None, self.function, token.line, token.col))
		return guard_id

	def _set_guard_cond(self, guard_id, cond):
		self.guards[guard_id] = replace(self.guards[guard_id], cond=cond)

	# Expressions
	# -----------

	def parse_expr(self, min_prec=1):
		left = self.parse_unary()
		while True:
			token = self.current
			prec = PRECEDENCE.get(token.text) if token.kind == "OP" else None
			if prec is None or prec < min_prec:
				return left
			self.advance()
			right = self.parse_expr(prec + 1)
			left = Binary(token.text, left, right, line=token.line, col=token.col)

	def parse_unary(self):
		token = self.current
		if token.kind == "OP" and token.text in ("!", "-"):
			self.advance()
			return Unary(token.text, self.parse_unary(), line=token.line, col=token.col)
		return self.parse_primary()

	def parse_primary(self):
		token = self.current
		pos = {"line": token.line, "col": token.col}

		if token.kind == "INT":
			self.advance()
			return IntLit(token.value, **pos)
		if token.kind == "CHAR":
			self.advance()
			return IntLit(token.value, True, **pos)
		if token.kind == "STRING":
			self.advance()
			return BytesLit(token.value, **pos)
		if self.accept("len"):
			self.expect("(")
			operand = self.parse_expr()
			self.expect(")")
			return Len(operand, **pos)
		if self.accept("array"):
			self.expect("(")
			size_token = self.current
			if size_token.kind != "INT" or size_token.value <= 0:
				raise GuardLangError("array size must be a positive integer literal", size_token.line, size_token.col)
			self.advance()
			self.expect(")")
			return ArrayNew(size_token.value, **pos)
		if self.accept("("):
			inner = self.parse_expr()
			self.expect(")")
			return inner
		if token.kind == "IDENT":
			name = self.advance().text
			if self.check("("):
				return self.parse_call_tail(name, token)
			if self.accept("["):
				index = self.parse_expr()
				self.expect("]")
				return Index(name, index, **pos)
			return Var(name, **pos)

		found = "end of input" if token.kind == "EOF" else f"'{token.text}'"
		raise GuardLangError(f"expected expression, found {found}", token.line, token.col)

	def parse_call_tail(self, name, token):
		self.expect("(")
		args = []
		if not self.check(")"):
			args.append(self.parse_expr())
			while self.accept(","):
				args.append(self.parse_expr())
		self.expect(")")
		return Call(name, tuple(args), line=token.line, col=token.col)


class _Checker:
	"""Static rules: entry shape, typing, reachability and call arity"""

	def __init__(self, functions):
		self.functions = {}
		for fn in functions:
			if fn.name in self.functions:
				raise GuardLangError(f"duplicate function '{fn.name}'", fn.line, fn.col)
			self.functions[fn.name] = fn

	def check_program(self, functions, guards):
		entries = [fn for fn in functions if fn.is_entry]
		if not entries:
			raise GuardLangError("missing entry function", 1, 1)
		if len(entries) > 1:
			raise GuardLangError("multiple entry functions", entries[1].line, entries[1].col)
		entry = entries[0]
		if len(entry.params) != 1 or entry.params[0].name != "input" or entry.params[0].type != BYTES:
			raise GuardLangError("entry function must take exactly one byte-string parameter named 'input'",
				entry.line, entry.col)

		checked = tuple(self.check_function(fn) for fn in functions)
		program = Program(checked, entry.name, tuple(guards))
		program.validate()
		return program

	def check_function(self, fn):
		env = {}
		for param in fn.params:
			if param.name in env:
				raise GuardLangError(f"duplicate parameter '{param.name}'", param.line, param.col)
			env[param.name] = param.type
		self.env = env
		self.locals = []
		self.check_block(fn.body)
		return replace(fn, locals=tuple(self.locals))

	def check_block(self, body):
		for index, stmt in enumerate(body):
			if index > 0 and isinstance(body[index - 1], (Return, Crash)):
				raise GuardLangError("unreachable statement", stmt.line, stmt.col)
			self.check_statement(stmt)

	def check_statement(self, stmt):
		match stmt:
			case Assign(name=name, value=value):
				value_type = self.type_of(value)
				if isinstance(value, Var) and value_type.kind == "array":
					raise GuardLangError("arrays cannot be copied", value.line, value.col)
				self.declare(name, value_type, stmt)
			case IndexAssign(name=name, index=index, value=value):
				target = self.lookup(name, stmt)
				if target == BYTES:
					raise GuardLangError(f"byte string '{name}' is immutable", stmt.line, stmt.col)
				if target.kind != "array":
					raise GuardLangError(f"'{name}' is not an array", stmt.line, stmt.col)
				self.expect_int(index)
				self.expect_int(value)
			case If(cond=cond, then=then, orelse=orelse):
				self.check_condition(cond)
				self.check_block(then)
				if orelse is not None:
					self.check_block(orelse)
			case While(cond=cond, body=body):
				self.check_condition(cond)
				self.check_block(body)
			case Return(value=value):
				if value is not None:
					self.expect_int(value)
			case Crash():
				pass
			case ExprStmt(call=call):
				self.type_of(call)

	def check_condition(self, cond):
		for node in iter_subexpressions(cond):
			if isinstance(node, Call):
				raise GuardLangError("calls are not allowed in guard conditions", node.line, node.col)
		self.expect_int(cond)

	def declare(self, name, var_type, node):
		known = self.env.get(name)
		if known is None:
			self.env[name] = var_type
			self.locals.append((name, var_type))
		elif known != var_type:
			raise GuardLangError(f"type error: '{name}' is {known}, assigned {var_type}", node.line, node.col)

	def lookup(self, name, node):
		var_type = self.env.get(name)
		if var_type is None:
			raise GuardLangError(f"undefined variable '{name}'", node.line, node.col)
		return var_type

	def expect_int(self, expr):
		found = self.type_of(expr)
		if found != INT:
			raise GuardLangError(f"type error: expected int, found {found}", expr.line, expr.col)

	def type_of(self, expr):
		match expr:
			case IntLit():
				return INT
			case BytesLit():
				return BYTES
			case Var(name=name):
				return self.lookup(name, expr)
			case Index(name=name, index=index):
				target = self.lookup(name, expr)
				if target != BYTES and target.kind != "array":
					raise GuardLangError(f"type error: '{name}' cannot be indexed", expr.line, expr.col)
				self.expect_int(index)
				return INT
			case Len(operand=operand):
				found = self.type_of(operand)
				if found == INT:
					raise GuardLangError("type error: len() needs a byte string or array", expr.line, expr.col)
				return INT
			case ArrayNew(size=size):
				return array_type(size)
			case Call(name=name, args=args):
				callee = self.functions.get(name)
				if callee is None:
					raise GuardLangError(f"undefined function '{name}'", expr.line, expr.col)
				if len(args) != len(callee.params):
					raise GuardLangError(
						f"function '{name}' takes {len(callee.params)} arguments, {len(args)} given",
						expr.line, expr.col)
				for arg, param in zip(args, callee.params):
					found = self.type_of(arg)
					if found != param.type:
						raise GuardLangError(f"type error: expected {param.type}, found {found}", arg.line, arg.col)
				return INT
			case Unary(operand=operand):
				self.expect_int(operand)
				return INT
			case Binary(op=op, left=left, right=right):
				left_type = self.type_of(left)
				right_type = self.type_of(right)
				if op in ("==", "!=") and left_type == right_type == BYTES:
					return INT
				if left_type != INT or right_type != INT:
					bad = left if left_type != INT else right
					raise GuardLangError(f"type error: operator '{op}' expects int operands", bad.line, bad.col)
				return INT
		raise GuardLangError(f"unsupported expression {type(expr).__name__}", expr.line, expr.col)


class ParserService:
	"""Service turning GuardLang text into checked Programs and back"""

	def __init__(self):
		self.indent = "\t"

	def parse(self, source, filename="<input>"):
		"""
		Parse and check GuardLang source

		Args:
			source: Program text
			filename: Name used in diagnostics

		Returns:
			Program
		"""
		try:
			parser = _Parser(tokenize(source))
			functions, guards = parser.parse_program()
			program = _Checker(functions).check_program(functions, guards)
		except GuardLangError as e:
			raise e.with_filename(filename)
		except RecursionError:
			raise GuardLangError("program nesting too deep", 1, 1, filename)

		logger.debug("parsed %s: %d functions, %d guards", filename, len(program.functions), len(program.guards))
		return program

	def parse_file(self, path):
		try:
			with open(path, "rb") as f:
				raw = f.read()
		except OSError as e:
			raise GuardLangError(f"cannot read program: {e.strerror}", 0, 0, str(path))
		try:
			source = raw.decode("utf-8")
		except UnicodeDecodeError as e:
			raise GuardLangError(f"source is not UTF-8 ({e.reason})", 1, 1, str(path))
		return self.parse(source, str(path))

	# Pretty printing
	# ---------------

	def pretty(self, program):
		"""Canonical source text of a program"""
		chunks = [self._function(fn) for fn in program.functions]
		return "\n".join(chunks)

	def _function(self, fn):
		params = ", ".join(self._param(p, fn.is_entry) for p in fn.params)
		head = ("entry " if fn.is_entry else "") + f"fn {fn.name}({params}) {{"
		lines = [head]
		self._block(fn.body, 1, lines)
		lines.append("}")
		return "\n".join(lines) + "\n"

	def _param(self, param, is_entry):
		if is_entry or param.type == INT:
			return param.name
		return f"{param.name}: {param.type}"

	def _block(self, body, depth, lines):
		for stmt in body:
			self._statement(stmt, depth, lines)

	def _statement(self, stmt, depth, lines):
		pad = self.indent * depth
		match stmt:
			case Assign(name=name, value=value):
				lines.append(f"{pad}{name} = {self.expr(value)};")
			case IndexAssign(name=name, index=index, value=value):
				lines.append(f"{pad}{name}[{self.expr(index)}] = {self.expr(value)};")
			case If():
				self._if(stmt, depth, lines, pad)
			case While(cond=cond, body=body):
				lines.append(f"{pad}while ({self.expr(cond)}) {{")
				self._block(body, depth + 1, lines)
				lines.append(f"{pad}}}")
			case Return(value=value):
				lines.append(f"{pad}return;" if value is None else f"{pad}return {self.expr(value)};")
			case Crash(label=label):
				lines.append(f"{pad}crash({self._label(label)});")
			case ExprStmt(call=call):
				lines.append(f"{pad}{self.expr(call)};")

	def _if(self, stmt, depth, lines, prefix):
		pad = self.indent * depth
		lines.append(f"{prefix}if ({self.expr(stmt.cond)}) {{")
		self._block(stmt.then, depth + 1, lines)
		orelse = stmt.orelse
		if orelse is None:
			lines.append(f"{pad}}}")
		elif len(orelse) == 1 and isinstance(orelse[0], If):
			self._if(orelse[0], depth, lines, f"{pad}}} else ")
		else:
			lines.append(f"{pad}}} else {{")
			self._block(orelse, depth + 1, lines)
			lines.append(f"{pad}}}")

	@staticmethod
	def _label(label):
		if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", label) and label not in KEYWORDS:
			return label
		return _quote_bytes(label.encode("utf-8"))

	def expr(self, expr):
		return self._expr(expr)[0]

	def _expr(self, expr):
		"""Return (text, precedence)"""
		match expr:
			case IntLit(value=value, is_char=True) if 0 <= value <= 255:
				return _quote_char(value), ATOM_PRECEDENCE
			case IntLit(value=value):
				return str(value), ATOM_PRECEDENCE
			case BytesLit(value=value):
				return _quote_bytes(value), ATOM_PRECEDENCE
			case Var(name=name):
				return name, ATOM_PRECEDENCE
			case Index(name=name, index=index):
				return f"{name}[{self.expr(index)}]", ATOM_PRECEDENCE
			case Len(operand=operand):
				return f"len({self.expr(operand)})", ATOM_PRECEDENCE
			case ArrayNew(size=size):
				return f"array({size})", ATOM_PRECEDENCE
			case Call(name=name, args=args):
				return f"{name}({', '.join(self.expr(a) for a in args)})", ATOM_PRECEDENCE
			case Unary(op=op, operand=operand):
				text, prec = self._expr(operand)
				if prec < UNARY_PRECEDENCE:
					text = f"({text})"
				return f"{op}{text}", UNARY_PRECEDENCE
			case Binary(op=op, left=left, right=right):
				prec = PRECEDENCE[op]
				left_text, left_prec = self._expr(left)
				right_text, right_prec = self._expr(right)
				if left_prec < prec:
					left_text = f"({left_text})"
				if right_prec <= prec:
					right_text = f"({right_text})"
				return f"{left_text} {op} {right_text}", prec
			case Toggled(guard_id=guard_id, cond=cond):
				return f"TOG_{guard_id} || ({self.expr(cond)})", PRECEDENCE["||"]
		raise TypeError(f"cannot print {type(expr).__name__}")


def _quote_char(value):
	ch = chr(value)
	if 0x20 <= value < 0x7F and ch not in ("'", "\\"):
		return f"'{ch}'"
	return f"'\\x{value:02x}'"


def _quote_bytes(data):
	out = []
	for value in data:
		ch = chr(value)
		if 0x20 <= value < 0x7F and ch not in ('"', "\\"):
			out.append(ch)
		else:
			out.append(f"\\x{value:02x}")
	return '"' + "".join(out) + '"'


_service = ParserService()


def parse(source, filename="<input>"):
	return _service.parse(source, filename)


def parse_file(path):
	return _service.parse_file(path)


def pretty(program):
	return _service.pretty(program)

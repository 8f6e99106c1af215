# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_PRECONDITION = 3


class PocoLabError(Exception):
	"""Base error; carries the process exit code the CLI should use"""

	exit_code = EXIT_INPUT

	def __init__(self, message, exit_code=None):
		super().__init__(message)
		self.message = message
		if exit_code is not None:
			self.exit_code = exit_code


class GuardLangError(PocoLabError):
	"""A GuardLang diagnostic (syntax or static error) with a source position"""

	def __init__(self, message, line=0, col=0, filename="<input>"):
		super().__init__(message)
		self.line = line
		self.col = col
		self.filename = filename

	def with_filename(self, filename):
		self.filename = filename
		return self

	def __str__(self):
		return f"{self.filename}:{self.line}:{self.col}: {self.message}"


class CorpusError(PocoLabError):
	pass


class ManifestError(PocoLabError):
	pass


class ConfigError(PocoLabError):
	exit_code = EXIT_USAGE


class PreconditionError(PocoLabError):
	"""Raised when an operation's documented precondition does not hold"""

	exit_code = EXIT_PRECONDITION

	def __init__(self, message, seed_ids=()):
		super().__init__(message)
		self.seed_ids = tuple(seed_ids)

	def __str__(self):
		if not self.seed_ids:
			return self.message
		return f"{self.message}: {', '.join(self.seed_ids)}"


class UnknownGuardError(PocoLabError):
	def __init__(self, guard_id):
		super().__init__(f"unknown guard id {guard_id}")
		self.guard_id = guard_id


class EvaluationError(PocoLabError):
	pass

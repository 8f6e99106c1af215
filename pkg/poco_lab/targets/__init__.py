# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

"""GuardLang targets shipped with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from poco_lab.exceptions import GuardLangError
from poco_lab.services.parser_service import ParserService

SUFFIX = ".gl"


def available_targets():
	return sorted(
		entry.name[:-len(SUFFIX)]
		for entry in resources.files(__name__).iterdir()
		if entry.name.endswith(SUFFIX)
	)


def target_source(name):
	entry = resources.files(__name__).joinpath(name + SUFFIX)
	if not entry.is_file():
		raise GuardLangError(f"unknown target '{name}' (known: {', '.join(available_targets())})", 0, 0, name)
	return entry.read_text(encoding="utf-8")


def load_target(name):
	"""Parse a shipped target by name, e.g. load_target("foo")"""
	return ParserService().parse(target_source(name), name + SUFFIX)


def load_program(path_or_name):
	"""A program file when the path exists, otherwise a shipped target"""
	path = Path(path_or_name)
	if not path.exists() and str(path_or_name) in available_targets():
		return load_target(str(path_or_name))
	return ParserService().parse_file(path)

# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import json
from typing import Any, Callable, NamedTuple

from poco_lab.exceptions import ConfigError
from poco_lab.hooks import default_settings


class SettingMeta(NamedTuple):
	"""Type and validity rule of one setting"""
	type: type
	validator: Callable[[Any], bool]
	cli_help: str


SETTINGS_SCHEMA: dict[str, SettingMeta] = {
	"step_budget": SettingMeta(int, lambda x: x > 0, "Interpreter steps per execution; reaching it is a timeout"),
	"probe_budget_multiplier": SettingMeta(int, lambda x: x >= 1, "Step budget multiplier for reckless probes"),
	"max_call_depth": SettingMeta(int, lambda x: x >= 1, "Call depth before a stack-overflow fault"),
	"toggle_loops": SettingMeta(bool, lambda x: isinstance(x, bool), "Insert toggles into while guards"),
	"wall_budget": SettingMeta(float, lambda x: x > 0, "Selection wall-clock budget (seconds)"),
	"max_rounds": SettingMeta(int, lambda x: x >= 1, "Maximum selection rounds"),
	"rng_seed": SettingMeta(int, lambda x: x >= 0, "Random seed"),
	"fuzz_executions": SettingMeta(int, lambda x: x > 0, "Fuzzing budget in executions"),
	"fuzz_energy": SettingMeta(int, lambda x: x > 0, "Mutations per queue entry per cycle"),
	"havoc_max_stack": SettingMeta(int, lambda x: x >= 1, "Maximum stacked havoc operations"),
	"max_input_size": SettingMeta(int, lambda x: x >= 1, "Largest input the fuzzer generates (bytes)"),
	"stop_on_crash": SettingMeta(bool, lambda x: isinstance(x, bool), "End a fuzz campaign at the first bug"),
	"eval_trials": SettingMeta(int, lambda x: x >= 1, "Paired trials for seed-improvement checks"),
	"log_level": SettingMeta(str, lambda x: x.upper() in {"DEBUG", "INFO", "WARNING", "ERROR"}, "Log level"),
}


class Settings:
	"""Merged settings: defaults < config file < flags"""

	def __init__(self, values=None):
		self._values = dict(default_settings)
		if values:
			self.update(values, source="<values>")

	@classmethod
	def load(cls, config_path=None, overrides=None):
		"""
		Build settings from the defaults, an optional JSON file and flag overrides

		Args:
			config_path: Path of a JSON object file, or None
			overrides: Mapping of flag values; None entries are ignored

		Returns:
			Settings
		"""
		settings = cls()
		if config_path:
			settings.update(cls._read_file(config_path), source=str(config_path))
		if overrides:
			settings.update({k: v for k, v in overrides.items() if v is not None}, source="<flags>")
		return settings

	@staticmethod
	def _read_file(path):
		try:
			with open(path, "r", encoding="utf-8") as f:
				data = json.load(f)
		except OSError as e:
			raise ConfigError(f"cannot read config file {path}: {e.strerror}")
		except json.JSONDecodeError as e:
			raise ConfigError(f"invalid JSON in config file {path}: {e.msg}")

		if not isinstance(data, dict):
			raise ConfigError(f"config file {path} must hold a JSON object")
		return data

	def update(self, values, source="<values>"):
		for key, value in values.items():
			if key not in SETTINGS_SCHEMA:
				raise ConfigError(f"unknown setting '{key}' in {source}")
			self._values[key] = self._coerce(key, value, source)

	def _coerce(self, key, value, source):
		meta = SETTINGS_SCHEMA[key]
		# JSON has no int/float split for whole numbers; bools are not ints here
		if meta.type is bool:
			if not isinstance(value, bool):
				raise ConfigError(f"setting '{key}' in {source} must be a boolean")
		elif meta.type is float and isinstance(value, int) and not isinstance(value, bool):
			value = float(value)
		elif not isinstance(value, meta.type) or isinstance(value, bool):
			raise ConfigError(f"setting '{key}' in {source} must be of type {meta.type.__name__}")

		if not meta.validator(value):
			raise ConfigError(f"invalid value {value!r} for setting '{key}' in {source}")
		return value

	def __getitem__(self, key):
		return self._values[key]

	def __getattr__(self, key):
		try:
			return self.__dict__["_values"][key]
		except KeyError:
			raise AttributeError(key)

	def as_dict(self):
		return dict(sorted(self._values.items()))

	def to_json(self):
		return json.dumps(self.as_dict(), indent=2, sort_keys=True)

# -*- coding: utf-8 -*-
from __future__ import annotations

app_version = "1.0.0"

app_name = "poco_lab"
app_title = "PoCo Lab"
app_publisher = "PoCo Lab contributors"
app_description = "Guard-toggling iterative seed selection over GuardLang fuzz targets"
app_license = "MIT"

# Artifacts
# ---------

# bumped whenever a JSON artifact changes shape
schema_version = 1

# content hashes written into manifests
manifest_hash_algorithm = "sha256"

# Default settings
# ----------------
# Precedence is flags > config file > these defaults (see poco_lab.config)

default_settings = {
	# runtime
	# a run ends in timeout once it reaches step_budget steps, so a completed run used fewer
	"step_budget": 100000,
	"probe_budget_multiplier": 10,
	"max_call_depth": 64,
	# instrumentation
	"toggle_loops": False,
	# selection
	"wall_budget": 7200.0,  # two hours
	"max_rounds": 10000,
	"rng_seed": 0,
	# fuzzing
	"fuzz_executions": 200000,
	"fuzz_energy": 64,
	"havoc_max_stack": 8,
	"max_input_size": 4096,
	"stop_on_crash": False,
	# evaluation
	"eval_trials": 30,
	# logging
	"log_level": "WARNING",
}

# Selection events
# ----------------
# Dotted paths called with each finished RoundRecord

selection_events = {
	"on_round": [
		"poco_lab.hooks.on_round_finished",
	],
}


def on_round_finished(record):
	"""Log a one-line summary of a finished selection round"""
	try:
		from poco_lab.logger import get_logger

		get_logger("poco_lab.selection").info(
			"round %d: |S|=%d disabled=%s passed=%s outermost=%s reckless=%s result=%s",
			record.round,
			len(record.s_end),
			list(record.disabled),
			sorted(record.passed),
			sorted(record.outermost),
			sorted(record.newly_reckless),
			record.result.kind,
		)
	except (ImportError, AttributeError):
		pass

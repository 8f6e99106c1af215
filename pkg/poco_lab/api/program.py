# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from pathlib import Path

from poco_lab.hooks import schema_version
from poco_lab.logger import log_error
from poco_lab.services.cfg_service import build_cfg
from poco_lab.services.corpus_service import dump_json
from poco_lab.services.instrument_service import extract_hierarchy, insert_toggles
from poco_lab.services.parser_service import pretty
from poco_lab.targets import load_program


def parse_program(program_path, show_pretty=False):
	"""Parse and check a program; return its census and optionally its canonical source"""
	try:
		program = load_program(program_path)
		census = {
			"schema_version": schema_version,
			"entry": program.entry,
			"guards": len(program.guards),
			"crash_labels": list(program.crash_labels()),
			**build_cfg(program).census(),
		}

		return {
			"success": True,
			"data": {
				"census": census,
				"source": pretty(program) if show_pretty else None,
			},
			"message": f"{program_path}: {census['functions']} functions, {census['guards']} guards"
		}

	except Exception as e:
		log_error(f"Error parsing program: {str(e)}", "parse")
		return {
			"success": False,
			"data": None,
			"message": str(e),
			"error": e
		}


def instrument_program(program_path, output_dir, toggle_loops=False):
	"""Write the instrumented program, its guard table and its guard hierarchy"""
	try:
		ip = insert_toggles(load_program(program_path), toggle_loops)
		hierarchy = extract_hierarchy(ip)

		output_dir = Path(output_dir)
		output_dir.mkdir(parents=True, exist_ok=True)
		files = {
			"instrumented.gl": pretty(ip.program),
			"guards.json": dump_json({"schema_version": schema_version, "guards": ip.guard_table()}),
			"hierarchy.json": dump_json({"schema_version": schema_version, **hierarchy.to_dict()}),
		}
		for name, text in files.items():
			(output_dir / name).write_text(text, encoding="utf-8")

		return {
			"success": True,
			"data": {
				"toggleable": sorted(ip.toggleable),
				"files": [str(output_dir / name) for name in files],
			},
			"message": f"instrumented {len(ip.toggleable)} of {len(ip.guards)} guards"
		}

	except Exception as e:
		log_error(f"Error instrumenting program: {str(e)}", "instrument")
		return {
			"success": False,
			"data": None,
			"message": str(e),
			"error": e
		}

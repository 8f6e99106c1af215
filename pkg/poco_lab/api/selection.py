# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import json
from pathlib import Path

from poco_lab.config import Settings
from poco_lab.exceptions import ManifestError
from poco_lab.hooks import schema_version
from poco_lab.logger import log_error
from poco_lab.models.hierarchy import ToggleVector
from poco_lab.services.corpus_service import CorpusService, dump_json
from poco_lab.services.instrument_service import insert_toggles
from poco_lab.services.minimize_service import MinimizeService
from poco_lab.services.report_service import ReportService
from poco_lab.services.runtime_service import RuntimeService
from poco_lab.services.selection_service import SelectionService
from poco_lab.targets import load_program


def load_toggles(path, ip):
	"""Toggle vector from a JSON file ({"on": [...]}, a bit map or a list); all off when path is None"""
	if not path:
		return ToggleVector.all_off()
	try:
		data = json.loads(Path(path).read_text(encoding="utf-8"))
		tv = ToggleVector.from_dict(data)
	except (OSError, ValueError, TypeError) as e:
		raise ManifestError(f"cannot read toggle vector '{path}': {e}") from e
	tv.validate(ip)
	return tv


def run_seeds(program_path, seeds_path, toggles_path=None, settings=None):
	"""Execute a seed file or corpus directory and report every outcome"""
	try:
		settings = settings or Settings()
		ip = insert_toggles(load_program(program_path), settings.toggle_loops)
		tv = load_toggles(toggles_path, ip)
		corpus = CorpusService().ingest(seeds_path)

		runtime = RuntimeService.from_instrumented(ip, settings.max_call_depth)
		outcome = runtime.execute_corpus(tv, corpus, settings.step_budget)

		return {
			"success": True,
			"data": {
				"schema_version": schema_version,
				"toggles": tv.to_dict(),
				"budget": settings.step_budget,
				"result": outcome.result.to_dict(),
				"outcomes": [out.to_dict() for out in outcome.outcomes.values()],
			},
			"message": f"ran {len(corpus)} seeds: {outcome.result}"
		}

	except Exception as e:
		log_error(f"Error running seeds: {str(e)}", "run")
		return {
			"success": False,
			"data": None,
			"message": str(e),
			"error": e
		}


def minimize_corpus(program_path, corpus_dir, output_dir, toggles_path=None, settings=None):
	"""Run cmin; write the selected manifest and copy the selected seeds"""
	try:
		settings = settings or Settings()
		ip = insert_toggles(load_program(program_path), settings.toggle_loops)
		tv = load_toggles(toggles_path, ip)
		corpus_service = CorpusService()
		corpus = corpus_service.ingest_corpus(corpus_dir)

		runtime = RuntimeService.from_instrumented(ip, settings.max_call_depth)
		result = MinimizeService(runtime).cmin(tv, corpus, settings.step_budget)

		output_dir = Path(output_dir)
		manifest = corpus_service.write_manifest(result.selected, output_dir / "selected.json")
		corpus_service.copy_seeds(result.selected, output_dir / "seeds")

		return {
			"success": True,
			"data": {
				"selected": list(result.selected_ids),
				"passed": sorted(result.passed),
				"result": result.result.to_dict(),
				"manifest": str(manifest),
			},
			"message": f"cmin kept {len(result.selected)} of {len(corpus)} seeds"
		}

	except Exception as e:
		log_error(f"Error minimizing corpus: {str(e)}", "cmin")
		return {
			"success": False,
			"data": None,
			"message": str(e),
			"error": e
		}


def run_poco(program_path, corpus_dir, output_dir, settings=None):
	"""
	Iterative guard-toggling selection

	Writes selected.json, baseline.json, delta.json, trace.jsonl, toggles.json
	and ledger.json into output_dir.
	"""
	try:
		settings = settings or Settings()
		ip = insert_toggles(load_program(program_path), settings.toggle_loops)
		corpus_service = CorpusService()
		corpus = corpus_service.ingest_corpus(corpus_dir)

		result = SelectionService(ip, settings).select(corpus)

		output_dir = Path(output_dir)
		output_dir.mkdir(parents=True, exist_ok=True)
		corpus_service.write_manifest(corpus.subset(result.selected), output_dir / "selected.json")
		corpus_service.write_manifest(corpus.subset(result.baseline), output_dir / "baseline.json")
		corpus_service.write_manifest(corpus.subset(result.delta), output_dir / "delta.json")
		ReportService().write_trace(result.trace, output_dir / "trace.jsonl")
		(output_dir / "toggles.json").write_text(dump_json(result.toggles()), encoding="utf-8")
		(output_dir / "ledger.json").write_text(dump_json(result.ledger), encoding="utf-8")

		return {
			"success": True,
			"data": {
				"selected": list(result.selected),
				"baseline": list(result.baseline),
				"delta": list(result.delta),
				"rounds": result.rounds,
				"termination": result.termination,
				"output_dir": str(output_dir),
			},
			"message": f"selected {len(result.selected)} seeds ({len(result.delta)} beyond cmin) in {result.rounds} rounds"
		}

	except Exception as e:
		log_error(f"Error running selection: {str(e)}", "poco")
		return {
			"success": False,
			"data": None,
			"message": str(e),
			"error": e
		}

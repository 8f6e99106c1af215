# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

from pathlib import Path

from poco_lab.config import Settings
from poco_lab.exceptions import EvaluationError
from poco_lab.hooks import schema_version
from poco_lab.logger import log_error
from poco_lab.services.corpus_service import CorpusService, dump_json
from poco_lab.services.evaluation_service import EvaluationService, a12, bug_stats, executions_to_bug
from poco_lab.services.fuzz_service import FuzzService
from poco_lab.services.instrument_service import insert_toggles
from poco_lab.services.report_service import ReportService
from poco_lab.services.runtime_service import RuntimeService
from poco_lab.targets import load_program


def _seeds(corpus_service, corpus_dir, manifest_path=None):
	corpus = corpus_service.ingest(corpus_dir)
	if not manifest_path:
		return corpus
	return corpus.subset(corpus_service.read_manifest(manifest_path, corpus))


def _censored_times(reports):
	"""Executions to the first bug; campaigns without one count as budget + 1"""
	times = []
	for report in reports:
		found = executions_to_bug(report)
		times.append(report.executions + 1 if found is None else found)
	return times


def run_fuzz(program_path, corpus_dir, output_dir, manifest_path=None, settings=None):
	"""Fuzz a corpus (optionally restricted to a manifest); write report.json and crash inputs"""
	try:
		settings = settings or Settings()
		ip = insert_toggles(load_program(program_path), settings.toggle_loops)
		corpus_service = CorpusService()
		seeds = _seeds(corpus_service, corpus_dir, manifest_path)

		fuzzer = FuzzService(RuntimeService.from_instrumented(ip, settings.max_call_depth), settings)
		report = fuzzer.fuzz(seeds)
		report.validate()

		output_dir = Path(output_dir)
		output_dir.mkdir(parents=True, exist_ok=True)
		(output_dir / "report.json").write_text(dump_json(report.to_dict()), encoding="utf-8")
		corpus_service.write_crashes(report, output_dir / "crashes")

		return {
			"success": True,
			"data": {
				"executions": report.executions,
				"queue": len(report.queue),
				"edges": len(report.final_edges),
				"crashes": [crash.to_dict() for crash in report.crashes],
			},
			"message": f"{report.executions} executions, {len(report.crashes)} bugs"
		}

	except Exception as e:
		log_error(f"Error fuzzing: {str(e)}", "fuzz")
		return {
			"success": False,
			"data": None,
			"message": str(e),
			"error": e
		}


def run_eval(program_path, corpus_dir, base_manifest=None, candidate=None, compare_manifest=None,
		per_seed=False, settings=None):
	"""
	Evaluation experiments over repeated fuzz campaigns

	Exactly one mode applies:
		candidate: does adding this seed id to the base set improve findings?
		compare_manifest: bug statistics and effect size of two seed sets
		per_seed: crash ratio and executions-to-bug of every seed fuzzed alone
	"""
	try:
		settings = settings or Settings()
		modes = [bool(candidate), bool(compare_manifest), bool(per_seed)]
		if sum(modes) != 1:
			raise EvaluationError("choose exactly one of --candidate, --compare or --per-seed")

		ip = insert_toggles(load_program(program_path), settings.toggle_loops)
		corpus_service = CorpusService()
		service = EvaluationService(ip, settings)
		corpus = corpus_service.ingest(corpus_dir)
		base = _seeds(corpus_service, corpus_dir, base_manifest)

		if candidate:
			if candidate not in corpus.ids:
				raise EvaluationError(f"candidate '{candidate}' is not in the corpus")
			data = service.seed_improvement(base, corpus.by_id(candidate)).to_dict()
			message = f"seed improvement {'holds' if data['holds'] else 'does not hold'} for {candidate}"
		elif compare_manifest:
			other = _seeds(corpus_service, corpus_dir, compare_manifest)
			base_reports = service.campaigns(base)
			other_reports = service.campaigns(other)
			base_times = _censored_times(base_reports)
			other_times = _censored_times(other_reports)
			data = {
				"schema_version": schema_version,
				"trials": len(base_reports),
				"base": {"seeds": list(base.ids), "bugs": bug_stats(base_reports), "executions_to_bug": base_times},
				"compare": {"seeds": list(other.ids), "bugs": bug_stats(other_reports), "executions_to_bug": other_times},
				# probability that the base set needs more executions than the compared set
				"a12": a12(base_times, other_times),
			}
			message = f"a12 = {data['a12']:.3f}"
		else:
			data = {
				"schema_version": schema_version,
				"seeds": service.per_seed_crash_times(base),
			}
			message = f"crash times of {len(base)} seeds"

		return {
			"success": True,
			"data": data,
			"message": message
		}

	except Exception as e:
		log_error(f"Error evaluating seeds: {str(e)}", "eval")
		return {
			"success": False,
			"data": None,
			"message": str(e),
			"error": e
		}


def render_report(trace_path, fmt="text", ledger_path=None):
	"""Render a trace file (and optional ledger file) as json, csv or text"""
	try:
		service = ReportService()
		trace = service.read_trace(trace_path)
		ledger = service.read_ledger(ledger_path) if ledger_path else None

		return {
			"success": True,
			"data": service.render(trace, fmt, ledger),
			"message": f"{len(trace)} rounds"
		}

	except Exception as e:
		log_error(f"Error rendering report: {str(e)}", "report")
		return {
			"success": False,
			"data": None,
			"message": str(e),
			"error": e
		}

# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

"""poco-lab command line."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from poco_lab import __version__
from poco_lab.api.evaluation import render_report, run_eval, run_fuzz
from poco_lab.api.program import instrument_program, parse_program
from poco_lab.api.selection import minimize_corpus, run_poco, run_seeds
from poco_lab.config import SETTINGS_SCHEMA, Settings
from poco_lab.exceptions import EXIT_INPUT, EXIT_OK, EXIT_USAGE, GuardLangError, PocoLabError
from poco_lab.logger import configure_logging, log_error
from poco_lab.services.corpus_service import dump_json
from poco_lab.services.report_service import FORMATS


class UsageError(Exception):
	pass


class ArgumentParser(argparse.ArgumentParser):
	"""argparse parser whose usage errors exit with status 1"""

	def error(self, message):
		self.print_usage(sys.stderr)
		raise UsageError(f"{self.prog}: error: {message}")


def _flag(key):
	return "--" + key.replace("_", "-")


def _settings_parent():
	# suppressed defaults keep a subcommand from resetting flags given before it
	parent = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
	group = parent.add_argument_group("settings (flags > --config file > defaults)")
	group.add_argument("--config", metavar="PATH", help="JSON file with settings")
	group.add_argument("--show-config", action="store_const", const=True, help="Print the merged settings as JSON and exit")
	group.add_argument("--verbose", "-v", action="store_const", const=True, help="Log at DEBUG level")
	for key, meta in SETTINGS_SCHEMA.items():
		if meta.type is bool:
			group.add_argument(_flag(key), dest=key, action="store_const", const=True, help=meta.cli_help)
		else:
			group.add_argument(_flag(key), dest=key, type=meta.type, help=meta.cli_help)
	return parent


def build_parser():
	settings = _settings_parent()
	parser = ArgumentParser(prog="poco-lab", description="Guard-toggling iterative seed selection", parents=[settings])
	parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
	commands = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=ArgumentParser)

	cmd = commands.add_parser("parse", parents=[settings], help="Check a program and print its census")
	cmd.add_argument("program", help="GuardLang file or shipped target name")
	cmd.add_argument("--pretty", action="store_true", help="Print the canonical source instead")

	cmd = commands.add_parser("instrument", parents=[settings], help="Insert toggles; write guard table and hierarchy")
	cmd.add_argument("program")
	cmd.add_argument("--output", "-o", required=True, metavar="DIR")

	cmd = commands.add_parser("run", parents=[settings], help="Execute seeds and print their outcomes")
	cmd.add_argument("program")
	cmd.add_argument("seeds", help="Seed file or corpus directory")
	cmd.add_argument("--toggles", metavar="JSON", help="Toggle vector file")
	cmd.add_argument("--output", "-o", metavar="FILE")

	cmd = commands.add_parser("cmin", parents=[settings], help="Coverage-preserving corpus minimization")
	cmd.add_argument("program")
	cmd.add_argument("corpus")
	cmd.add_argument("--toggles", metavar="JSON")
	cmd.add_argument("--output", "-o", required=True, metavar="DIR")

	cmd = commands.add_parser("poco", parents=[settings], help="Iterative guard-toggling seed selection")
	cmd.add_argument("program")
	cmd.add_argument("corpus")
	cmd.add_argument("--output", "-o", required=True, metavar="DIR")

	cmd = commands.add_parser("fuzz", parents=[settings], help="Fuzz a corpus or a manifest's seeds")
	cmd.add_argument("program")
	cmd.add_argument("corpus")
	cmd.add_argument("--manifest", metavar="JSON", help="Only fuzz the seeds listed here")
	cmd.add_argument("--output", "-o", required=True, metavar="DIR")

	cmd = commands.add_parser("eval", parents=[settings], help="Seed-improvement and crash-time experiments")
	cmd.add_argument("program")
	cmd.add_argument("corpus")
	cmd.add_argument("--base", metavar="JSON", help="Manifest of the base seed set (default: whole corpus)")
	mode = cmd.add_mutually_exclusive_group(required=True)
	mode.add_argument("--candidate", metavar="ID", help="Seed id to test for seed improvement")
	mode.add_argument("--compare", metavar="JSON", help="Manifest of a second seed set")
	mode.add_argument("--per-seed", action="store_true", help="Fuzz each seed alone")
	cmd.add_argument("--output", "-o", metavar="FILE")

	cmd = commands.add_parser("report", parents=[settings], help="Render a selection trace")
	cmd.add_argument("trace", help="trace.jsonl")
	cmd.add_argument("--ledger", metavar="JSON")
	cmd.add_argument("--format", "-f", choices=FORMATS, default="text")
	cmd.add_argument("--output", "-o", metavar="FILE")

	return parser


def load_settings(args):
	overrides = {key: getattr(args, key, None) for key in SETTINGS_SCHEMA}
	return Settings.load(getattr(args, "config", None), overrides)


def dispatch(args, settings):
	"""Run one subcommand; return its envelope and the text to emit on success"""
	match args.command:
		case "parse":
			response = parse_program(args.program, args.pretty)
			if response["success"]:
				data = response["data"]
				return response, data["source"] if args.pretty else dump_json(data["census"])
		case "instrument":
			response = instrument_program(args.program, args.output, settings.toggle_loops)
		case "run":
			response = run_seeds(args.program, args.seeds, args.toggles, settings)
			if response["success"]:
				return response, dump_json(response["data"])
		case "cmin":
			response = minimize_corpus(args.program, args.corpus, args.output, args.toggles, settings)
		case "poco":
			response = run_poco(args.program, args.corpus, args.output, settings)
		case "fuzz":
			response = run_fuzz(args.program, args.corpus, args.output, args.manifest, settings)
		case "eval":
			response = run_eval(args.program, args.corpus, args.base, args.candidate, args.compare,
				args.per_seed, settings)
			if response["success"]:
				return response, dump_json(response["data"])
		case "report":
			response = render_report(args.trace, args.format, args.ledger)
			if response["success"]:
				return response, response["data"]
		case _:
			raise UsageError("missing command")
	return response, None


def emit(text, output=None):
	if output:
		path = Path(output)
		path.parent.mkdir(parents=True, exist_ok=True)
		path.write_text(text, encoding="utf-8")
	else:
		sys.stdout.write(text)


def exit_code(error):
	if isinstance(error, PocoLabError):
		return error.exit_code
	return EXIT_INPUT


def main(argv=None):
	parser = build_parser()
	try:
		args = parser.parse_args(argv)
		settings = load_settings(args)
	except UsageError as e:
		print(str(e), file=sys.stderr)
		return EXIT_USAGE
	except PocoLabError as e:
		configure_logging()
		log_error(str(e), "config")
		return e.exit_code

	configure_logging(settings.log_level, getattr(args, "verbose", False))

	if getattr(args, "show_config", False):
		sys.stdout.write(settings.to_json() + "\n")
		return EXIT_OK
	if not getattr(args, "command", None):
		parser.print_usage(sys.stderr)
		return EXIT_USAGE

	response, text = dispatch(args, settings)
	if not response["success"]:
		error = response.get("error")
		if isinstance(error, GuardLangError):
			# bare file:line:col line beside the logged copy
			print(str(error), file=sys.stderr)
		return exit_code(error)

	if text is not None:
		emit(text, getattr(args, "output", None) if args.command in ("run", "eval", "report") else None)
	elif response.get("message"):
		print(response["message"], file=sys.stderr)
	return EXIT_OK


if __name__ == "__main__":
	sys.exit(main())

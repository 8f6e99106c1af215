# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from poco_lab.exceptions import ManifestError
from poco_lab.hooks import schema_version
from poco_lab.logger import get_logger
from poco_lab.services.evaluation_service import fresh_seed_ratio
from poco_lab.services.ledger_service import CATEGORIES

logger = get_logger(__name__)

FORMATS = ("json", "csv", "text")

CSV_COLUMNS = (
	"round", "result", "selected", "s_end", "disabled", "passed", "outermost",
	"newly_reckless", "reckless_source", "fixed_point", "fresh_seed_ratio",
)


def trace_line(record):
	"""One compact JSON line of the trace file"""
	data = record if isinstance(record, dict) else record.to_dict()
	return json.dumps(data, sort_keys=True, separators=(",", ":"))


def _ids(values):
	return " ".join(str(v) for v in values)


def _verdict(result):
	detail = result.get("label") or result.get("fault")
	return f"{result['kind']}({detail})" if detail else result["kind"]


class ReportService:
	"""Writes and renders selection traces"""

	def write_trace(self, trace, path):
		path = Path(path)
		path.parent.mkdir(parents=True, exist_ok=True)
		with path.open("w", encoding="utf-8", newline="\n") as f:
			for record in trace:
				f.write(trace_line(record) + "\n")
		return path

	def read_trace(self, path):
		rows = []
		try:
			lines = Path(path).read_text(encoding="utf-8").splitlines()
		except OSError as e:
			raise ManifestError(f"cannot read trace '{path}': {e.strerror or e}") from e
		for number, line in enumerate(lines, 1):
			if not line.strip():
				continue
			try:
				row = json.loads(line)
			except ValueError as e:
				raise ManifestError(f"{path}:{number}: invalid trace line: {e}") from e
			if row.get("schema_version") != schema_version:
				raise ManifestError(f"{path}:{number}: unsupported schema version {row.get('schema_version')!r}")
			rows.append(row)
		return rows

	def read_ledger(self, path):
		try:
			return json.loads(Path(path).read_text(encoding="utf-8"))
		except (OSError, ValueError) as e:
			raise ManifestError(f"cannot read ledger '{path}': {e}") from e

	def render(self, trace, fmt="text", ledger=None):
		"""
		Deterministic rendering of a trace

		Args:
			trace: RoundRecords or their dicts
			fmt: json, csv or text
			ledger: optional ledger report to append

		Returns:
			str
		"""
		rows = [r if isinstance(r, dict) else r.to_dict() for r in trace]
		if fmt == "json":
			return self._json(rows, ledger)
		if fmt == "csv":
			return self._csv(rows)
		if fmt == "text":
			return self._text(rows, ledger)
		raise ValueError(f"unknown report format '{fmt}', expected one of {', '.join(FORMATS)}")

	def _json(self, rows, ledger):
		data = {
			"schema_version": schema_version,
			"rounds": rows,
			"fresh_seed_ratio": fresh_seed_ratio(rows),
		}
		if ledger is not None:
			data["ledger"] = ledger
		return json.dumps(data, sort_keys=True, indent=2) + "\n"

	def _csv(self, rows):
		out = io.StringIO()
		writer = csv.writer(out, lineterminator="\n")
		writer.writerow(CSV_COLUMNS)
		for row, ratio in zip(rows, fresh_seed_ratio(rows)):
			writer.writerow([
				row["round"],
				_verdict(row["result"]),
				_ids(row["selected"]),
				_ids(row["s_end"]),
				_ids(row["disabled"]),
				_ids(row["passed"]),
				_ids(row["outermost"]),
				_ids(row["newly_reckless"]),
				row["reckless_source"] or "",
				int(row["fixed_point"]["reached"]),
				"" if ratio is None else f"{ratio:.4f}",
			])
		return out.getvalue()

	def _text(self, rows, ledger):
		lines = []
		for row, ratio in zip(rows, fresh_seed_ratio(rows)):
			lines.append(f"round {row['round']}: {_verdict(row['result'])}")
			lines.append(f"  G-      [{_ids(row['disabled'])}]")
			lines.append(f"  S_new   [{_ids(row['selected'])}]")
			lines.append(f"  S       [{_ids(row['s_end'])}]")
			if row["passed"]:
				lines.append(f"  passed  [{_ids(row['passed'])}]")
			if row["outermost"]:
				lines.append(f"  outer   [{_ids(row['outermost'])}]")
			if row["newly_reckless"]:
				lines.append(f"  reckless [{_ids(row['newly_reckless'])}] ({row['reckless_source']})")
			if ratio is not None:
				lines.append(f"  fresh   {ratio:.4f}")
			if row["fixed_point"]["reached"]:
				lines.append("  fixed point")

		if ledger is not None:
			lines.append("")
			lines.append("time composition:")
			percentages = ledger.get("percentages", {})
			totals = ledger.get("totals", {})
			for category in CATEGORIES:
				lines.append(f"  {category:<20} {totals.get(category, 0.0):10.4f}s {percentages.get(category, 0.0):8.2f}%")
			probes = ledger.get("probes", {})
			if probes.get("count"):
				lines.append(f"  probes: {probes['count']} in {probes['seconds']:.4f}s")
		return "\n".join(lines) + "\n"


def report(trace, fmt="text", ledger=None):
	return ReportService().render(trace, fmt, ledger)

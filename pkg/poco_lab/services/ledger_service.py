# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import time
from contextlib import contextmanager

import psutil

from poco_lab.hooks import schema_version
from poco_lab.logger import get_logger, log_error

logger = get_logger(__name__)

BASE_CMIN = "base_cmin"
CRASHING_RECKLESS = "crashing_reckless"
CONVERGING_RECKLESS = "converging_reckless"
HIERARCHY_PARSING = "hierarchy_parsing"
GUARD_OPERATIONS = "guard_operations"

CATEGORIES = (BASE_CMIN, CRASHING_RECKLESS, CONVERGING_RECKLESS, HIERARCHY_PARSING, GUARD_OPERATIONS)


class LedgerService:
    """Time-composition ledger of a selection run"""

    def __init__(self):
        self.rows = []
        self.current = None
        self.probe_count = 0
        self.probe_seconds = 0.0
        self.setup = dict.fromkeys(CATEGORIES, 0.0)
        self.peak_rss = 0
        self._process = None
        self.sample_memory()

    def begin_round(self, round_number):
        self.current = {"round": round_number, **dict.fromkeys(CATEGORIES, 0.0)}

    def end_round(self):
        """Close the current round and return its row"""
        row = self.current
        row["elapsed"] = sum(row[c] for c in CATEGORIES)
        self.rows.append(row)
        self.current = None
        self.sample_memory()
        return row

    def record(self, category, seconds):
        if category not in CATEGORIES:
            raise ValueError(f"unknown ledger category '{category}'")
        target = self.current if self.current is not None else self.setup
        target[category] += seconds

    @contextmanager
    def measure(self, category):
        """Charge the wall time of the block to a category"""
        started = time.perf_counter()
        try:
            yield
        finally:
            self.record(category, time.perf_counter() - started)

    def record_probes(self, count, seconds):
        self.probe_count += count
        self.probe_seconds += seconds

    def sample_memory(self):
        """Track peak resident set size of this process"""
        try:
            if self._process is None:
                self._process = psutil.Process()
            self.peak_rss = max(self.peak_rss, self._process.memory_info().rss)
        except Exception as e:
            log_error(f"Error sampling memory: {str(e)}", "ledger")
        return self.peak_rss

    def totals(self):
        totals = dict(self.setup)
        for row in self.rows:
            for category in CATEGORIES:
                totals[category] += row[category]
        return totals

    def percentages(self):
        """
        Share of each category in the total; all zero when nothing was timed

        Returns:
            dict: category -> percent
        """
        totals = self.totals()
        grand_total = sum(totals.values())
        if grand_total <= 0:
            return dict.fromkeys(CATEGORIES, 0.0)
        return {category: round(100.0 * totals[category] / grand_total, 4) for category in CATEGORIES}

    def report(self, cache_stats=None):
        totals = self.totals()
        crashing = totals[CRASHING_RECKLESS]
        return {
            "schema_version": schema_version,
            "rows": [dict(row) for row in self.rows],
            "setup": dict(self.setup),
            "totals": totals,
            "total_seconds": sum(totals.values()),
            "percentages": self.percentages(),
            "probes": {
                "count": self.probe_count,
                "seconds": self.probe_seconds,
                "share_of_crashing_reckless": round(self.probe_seconds / crashing, 4) if crashing > 0 else 0.0,
            },
            "cache": dict(cache_stats or {}),
            "peak_rss_bytes": self.peak_rss,
        }

# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import random
import time

from poco_lab.config import Settings
from poco_lab.exceptions import CorpusError
from poco_lab.logger import get_logger
from poco_lab.models.fuzz_report import CrashRecord, FuzzReport, QueueEntry
from poco_lab.models.outcome import BUG
from poco_lab.services.runtime_service import RuntimeService

logger = get_logger(__name__)

BIT_FLIP = "bitflip"
BYTE_REPLACE = "replace"
BYTE_INSERT = "insert"
BYTE_DELETE = "delete"
SPLICE = "splice"
HAVOC = "havoc"

OPERATORS = (BIT_FLIP, BYTE_REPLACE, BYTE_INSERT, BYTE_DELETE, SPLICE, HAVOC)
_STACKABLE = (BIT_FLIP, BYTE_REPLACE, BYTE_INSERT, BYTE_DELETE)


class Mutator:
    """Byte-level mutation operators driven by one random.Random"""

    def __init__(self, rng, max_size, havoc_max_stack):
        self.rng = rng
        self.max_size = max_size
        self.havoc_max_stack = havoc_max_stack

    def mutate(self, data, donors):
        """Return (child bytes, operator name); donors are queue entries for splicing"""
        op = OPERATORS[self.rng.randrange(len(OPERATORS))]
        if op == SPLICE:
            child = self.splice(data, donors[self.rng.randrange(len(donors))].data)
        elif op == HAVOC:
            child = bytearray(data)
            for _ in range(self.rng.randint(1, self.havoc_max_stack)):
                child = self.apply(self.rng.choice(_STACKABLE), child)
        else:
            child = self.apply(op, bytearray(data))
        return bytes(child[:self.max_size]), op

    def apply(self, op, buf):
        rng = self.rng
        # nothing to flip, replace or delete in an empty input
        if not buf and op != BYTE_INSERT:
            op = BYTE_INSERT

        if op == BIT_FLIP:
            i = rng.randrange(len(buf))
            buf[i] ^= 1 << rng.randrange(8)
        elif op == BYTE_REPLACE:
            buf[rng.randrange(len(buf))] = rng.randrange(256)
        elif op == BYTE_INSERT:
            buf.insert(rng.randrange(len(buf) + 1), rng.randrange(256))
        elif op == BYTE_DELETE:
            del buf[rng.randrange(len(buf))]
        return buf

    def splice(self, data, donor):
        i = self.rng.randrange(len(data) + 1)
        j = self.rng.randrange(len(donor) + 1)
        return bytearray(data[:i] + donor[j:])


class FuzzService:
    """Minimal deterministic mutational greybox fuzzer over the un-toggled target"""

    def __init__(self, runtime, settings=None):
        self.runtime = runtime
        self.settings = settings or Settings()

    def fuzz(self, seeds, budget_executions=None, rng_seed=None, stop_on_crash=None):
        """
        Fuzz starting from the given seeds

        Args:
            seeds: iterable of Seed (a Corpus works)
            budget_executions: total executions, initial seeds included
            rng_seed: seed of the campaign's random.Random
            stop_on_crash: end the campaign at the first bug

        Returns:
            FuzzReport
        """
        settings = self.settings
        budget_executions = budget_executions or settings.fuzz_executions
        rng_seed = settings.rng_seed if rng_seed is None else rng_seed
        stop_on_crash = settings.stop_on_crash if stop_on_crash is None else stop_on_crash
        step_budget = settings.step_budget

        initial = self._dedupe(seeds)
        if not initial:
            raise CorpusError("empty initial seeds")

        rng = random.Random(rng_seed)
        mutator = Mutator(rng, settings.max_input_size, settings.havoc_max_stack)
        started = time.perf_counter()

        queue = []
        crashes = []
        labels = set()
        edges = set()
        timeline = []
        executions = 0
        stopped = False

        def run(data):
            nonlocal executions, stopped
            index = executions
            executions += 1
            outcome = self.runtime.execute_bytes(data, None, step_budget)
            fresh = outcome.edges - edges
            if fresh:
                edges.update(fresh)
                timeline.append((index, len(edges)))
            if outcome.verdict.kind == BUG and outcome.verdict.detail not in labels:
                labels.add(outcome.verdict.detail)
                crashes.append(CrashRecord(outcome.verdict.detail, index, bytes(data), time.perf_counter() - started))
                logger.debug("execution %d reached bug '%s'", index, outcome.verdict.detail)
                if stop_on_crash:
                    stopped = True
            return index, bool(fresh)

        for seed in initial:
            if executions >= budget_executions or stopped:
                break
            index, _ = run(seed.data)
            queue.append(QueueEntry(seed.id, seed.data, found_at=index))

        cursor = 0
        while executions < budget_executions and not stopped:
            parent = queue[cursor % len(queue)]
            for _ in range(settings.fuzz_energy):
                if executions >= budget_executions or stopped:
                    break
                child, op = mutator.mutate(parent.data, queue)
                index, fresh = run(child)
                if fresh:
                    entry = QueueEntry(f"id{len(queue):06d}", child, parent.id, op, index)
                    queue.append(entry)
                    logger.debug("queued %s (%s from %s) at execution %d", entry.id, op, parent.id, index)
            cursor += 1

        if not timeline or timeline[-1][0] != executions:
            timeline.append((executions, len(edges)))

        return FuzzReport(
            executions=executions,
            queue=tuple(queue),
            crashes=tuple(crashes),
            edge_timeline=tuple(timeline),
            final_edges=frozenset(edges),
            rng_seed=rng_seed,
        )

    @staticmethod
    def _dedupe(seeds):
        """Identical contents collapse to the first seed"""
        seen = set()
        unique = []
        for seed in seeds:
            if seed.data in seen:
                continue
            seen.add(seed.data)
            unique.append(seed)
        return unique

    def replay(self, crash):
        """Label reached when re-running a crash input, or None"""
        outcome = self.runtime.execute_bytes(crash.data, None, self.settings.step_budget)
        return outcome.verdict.detail if outcome.verdict.kind == BUG else None


def fuzz(ip, initial_seeds, budget_executions, rng_seed, settings=None):
    runtime = RuntimeService.from_instrumented(ip, (settings or Settings()).max_call_depth)
    return FuzzService(runtime, settings).fuzz(initial_seeds, budget_executions, rng_seed)

# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import itertools
import random
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from poco_lab.exceptions import CorpusError, PocoLabError
from poco_lab.models.hierarchy import ToggleVector
from poco_lab.models.outcome import (
	BUG,
	DIVISION_BY_ZERO,
	FAULT,
	INDEX_OUT_OF_BOUNDS,
	MODULO_BY_ZERO,
	OK,
	STACK_OVERFLOW,
	TIMEOUT,
	Verdict,
)
from poco_lab.models.seed import Corpus, Seed
from poco_lab.services.cache_service import CacheService
from poco_lab.services.instrument_service import insert_toggles
from poco_lab.services.parser_service import parse
from poco_lab.services.runtime_service import RuntimeService, execute, trunc_div, trunc_mod, wrap
from poco_lab.targets import load_target
from poco_lab.tests.generators import ALPHABET, guard_blocks, guard_tree_source, random_program, reached_guards

ALL_FOO = ToggleVector.of(range(5))


def runtime_of(source, toggle_loops=False, max_call_depth=64):
	return RuntimeService.from_instrumented(insert_toggles(parse(source), toggle_loops), max_call_depth)


class TestRuntimeService(unittest.TestCase):
	"""Test cases for the GuardLang interpreter"""

	def setUp(self):
		self.foo = insert_toggles(load_target("foo"))
		self.runtime = RuntimeService.from_instrumented(self.foo)

	def test_hello_reaches_the_bug(self):
		"""Test the only input passing all five checks"""
		outcome = self.runtime.execute_bytes(b"hello", ToggleVector.all_off(), 1000)

		self.assertEqual(outcome.verdict, Verdict.bug("bug"))
		self.assertEqual(outcome.edges, {(-1, 0), (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 11)})
		self.assertEqual(outcome.cond_sat, frozenset(range(5)))
		self.assertEqual(outcome.steps, 6)

	def test_empty_input_reads_zero(self):
		"""Test byte strings read 0 outside their bounds"""
		outcome = self.runtime.execute_bytes(b"", ToggleVector.all_off(), 1000)
		self.assertEqual(outcome.verdict.kind, OK)
		self.assertEqual(outcome.edges, {(-1, 0), (0, 10)})
		self.assertEqual(outcome.cond_sat, frozenset())

	def test_toggled_guards_enter_their_branch(self):
		"""Test toggled guards enter the true branch without satisfying the condition"""
		outcome = self.runtime.execute_bytes(b"jello", ALL_FOO, 1000)
		self.assertEqual(outcome.verdict, Verdict.bug("bug"))
		self.assertEqual(outcome.cond_sat, frozenset({1, 2, 3, 4}))
		self.assertEqual(outcome.branch_entered, frozenset(range(5)))

	def test_partial_toggles(self):
		"""Test the untoggled guards keep their original semantics"""
		outcome = self.runtime.execute_bytes(b"jello", ToggleVector.of([0]), 1000)
		self.assertEqual(outcome.verdict.kind, BUG)
		outcome = self.runtime.execute_bytes(b"jelly", ToggleVector.of([0]), 1000)
		self.assertEqual(outcome.verdict.kind, OK)
		self.assertEqual(outcome.cond_sat, frozenset({1, 2, 3}))

	def test_synergistic_toggles_fault(self):
		"""Test boo faults only with both guards toggled"""
		runtime = RuntimeService.from_instrumented(insert_toggles(load_target("boo")))
		seed = b"\x04\x08"
		kinds = {
			frozenset(): OK,
			frozenset({0}): OK,
			frozenset({1}): OK,
		}
		for on, kind in kinds.items():
			self.assertEqual(runtime.execute_bytes(seed, ToggleVector.of(on), 1000).verdict.kind, kind, on)
		both = runtime.execute_bytes(seed, ToggleVector.of([0, 1]), 1000)
		self.assertEqual(both.verdict, Verdict.fault(INDEX_OUT_OF_BOUNDS))

	def test_arithmetic_wraps_and_truncates(self):
		"""Test 64-bit wrapping and C division semantics"""
		self.assertEqual(wrap(2**63), -(2**63))
		self.assertEqual(trunc_div(-7, 2), -3)
		self.assertEqual(trunc_mod(-7, 2), -1)
		self.assertEqual(trunc_mod(7, -2), 1)
		runtime = runtime_of(
			"entry fn f(input) {\n"
			"\tx = 9223372036854775807 + 1;\n"
			"\tif (x < 0 && -7 / 2 == -3 && -7 % 2 == -1) { crash(arith); }\n"
			"}\n"
		)
		self.assertEqual(runtime.execute_bytes(b"", None, 100).verdict, Verdict.bug("arith"))

	def test_faults(self):
		"""Test each fault kind is a verdict, not an exception"""
		cases = {
			"entry fn f(input) { x = 1 / input[0]; }": DIVISION_BY_ZERO,
			"entry fn f(input) { x = 1 % input[0]; }": MODULO_BY_ZERO,
			"entry fn f(input) { a = array(2); a[input[0] - 1] = 1; }": INDEX_OUT_OF_BOUNDS,
			"entry fn f(input) { a = array(2); x = a[2]; }": INDEX_OUT_OF_BOUNDS,
		}
		for source, kind in cases.items():
			with self.subTest(source=source):
				outcome = runtime_of(source).execute_bytes(b"", None, 100)
				self.assertEqual(outcome.verdict, Verdict.fault(kind))
				self.assertTrue(outcome.verdict.is_crash)

	def test_stack_overflow(self):
		"""Test unbounded recursion faults at the call depth limit"""
		runtime = runtime_of(
			"fn r(n) { return r(n + 1); }\nentry fn f(input) { x = r(0); }\n", max_call_depth=16)
		outcome = runtime.execute_bytes(b"", None, 10000)
		self.assertEqual(outcome.verdict, Verdict.fault(STACK_OVERFLOW))

	def test_calls_return_values(self):
		"""Test values flow through calls and returns"""
		runtime = runtime_of(
			"fn twice(n) { return n * 2; }\n"
			"entry fn f(input) { x = twice(input[0]); if (x == 8) { crash(four); } }\n"
		)
		self.assertEqual(runtime.execute_bytes(b"\x04", None, 100).verdict, Verdict.bug("four"))
		self.assertEqual(runtime.execute_bytes(b"\x05", None, 100).verdict.kind, OK)

	def test_timeout(self):
		"""Test the step budget ends non-terminating runs"""
		outcome = runtime_of("entry fn f(input) { x = 0; while (1) { x = x + 1; } }").execute_bytes(b"", None, 100)
		self.assertEqual(outcome.verdict.kind, TIMEOUT)
		self.assertEqual(outcome.steps, 100)

	def test_reaching_the_budget_is_a_timeout(self):
		"""Test a three-step program needs a budget of four to complete"""
		runtime = runtime_of("entry fn f(input) { x = 1; y = 2; z = 3; }")
		exact = runtime.execute_bytes(b"", None, 3)
		self.assertEqual((exact.verdict.kind, exact.steps), (TIMEOUT, 3))
		roomy = runtime.execute_bytes(b"", None, 4)
		self.assertEqual((roomy.verdict.kind, roomy.steps), (OK, 3))

	def test_toggled_loop_times_out(self):
		"""Test a toggled loop guard never exits"""
		source = "entry fn f(input) { i = 0; while (i < 2) { i = i + 1; } }"
		runtime = runtime_of(source, toggle_loops=True)
		self.assertEqual(runtime.execute_bytes(b"", None, 500).verdict.kind, OK)
		self.assertEqual(runtime.execute_bytes(b"", ToggleVector.of([0]), 500).verdict.kind, TIMEOUT)

	def test_fault_in_toggled_condition(self):
		"""Test a faulting condition under a toggle leaves condSat unset"""
		runtime = runtime_of("entry fn f(input) { if (10 / input[0] == 1) { crash(div); } }")
		outcome = runtime.execute_bytes(b"\x00", ToggleVector.of([0]), 100)
		self.assertEqual(outcome.verdict, Verdict.bug("div"))
		self.assertEqual(outcome.cond_sat, frozenset())
		self.assertEqual(outcome.branch_entered, frozenset({0}))
		self.assertEqual(runtime.execute_bytes(b"\x00", None, 100).verdict.kind, FAULT)

	def test_budget_must_be_positive(self):
		"""Test a zero budget is rejected"""
		with self.assertRaises(PocoLabError):
			self.runtime.execute_bytes(b"", None, 0)

	def test_execute_is_cached(self):
		"""Test repeated executions are served from the outcome cache"""
		seed = Seed("s", b"hello")
		first = execute(self.foo, None, seed, 1000)
		runtime = RuntimeService.from_instrumented(self.foo)
		runtime.execute(ToggleVector.all_off(), seed, 1000)
		runtime.execute(ToggleVector.all_off(), seed, 1000)
		stats = runtime.cache.get_stats()
		self.assertEqual((stats["hits"], stats["misses"]), (1, 1))
		self.assertEqual(runtime.executions, 1)
		self.assertEqual(first.verdict, Verdict.bug("bug"))

	def test_cache_evicts_least_recently_used(self):
		"""Test a full cache drops the entry touched longest ago"""
		cache = CacheService(max_entries=2)
		cache.set("a", 1)
		cache.set("b", 2)
		self.assertEqual(cache.get("a"), 1)
		cache.set("c", 3)
		self.assertIsNone(cache.get("b"))
		self.assertEqual(cache.get_or_set("c", lambda: 99), 3)
		stats = cache.get_stats()
		self.assertEqual((stats["entries"], stats["evictions"]), (2, 1))
		self.assertEqual((stats["hits"], stats["misses"]), (2, 1))

	def test_execute_corpus_merges(self):
		"""Test corpus runs merge edges and keep the worst verdict"""
		corpus = Corpus.from_bytes({"a": b"hello", "b": b"", "c": b"help"})
		outcome = self.runtime.execute_corpus(ToggleVector.all_off(), corpus, 1000)
		self.assertEqual(list(outcome.outcomes), ["a", "b", "c"])
		self.assertEqual(outcome.result, Verdict.bug("bug"))
		self.assertIn((5, 11), outcome.edges)
		self.assertIn((0, 10), outcome.edges)
		self.assertEqual(outcome.crashing_seeds(), [])

	def test_empty_corpus(self):
		"""Test running an empty corpus is an input error"""
		with self.assertRaises(CorpusError):
			self.runtime.execute_corpus(ToggleVector.all_off(), Corpus(()), 1000)

	def test_outcome_serialization(self):
		"""Test outcome JSON lists sorted edges and hex bitmaps"""
		data = self.runtime.execute_bytes(b"hello", ALL_FOO, 1000, "s").to_dict()
		self.assertEqual(data["verdict"], {"kind": "bug", "label": "bug"})
		self.assertEqual(data["edges"][0], [-1, 0])
		self.assertEqual(data["cond_sat"], "0x1f")
		self.assertEqual(data["branch_entered"], "0x1f")

	@given(
		st.integers(min_value=0, max_value=2**32 - 1),
		st.lists(st.binary(max_size=6), min_size=1, max_size=4),
	)
	@settings(derandomize=True, max_examples=1000, deadline=None)
	def test_toggles_off_preserves_semantics(self, seed, inputs):
		"""Test instrumented runs with toggles off match the base program"""
		program = random_program(seed, allow_faults=True)
		base = RuntimeService.from_program(program)
		instrumented = RuntimeService.from_instrumented(insert_toggles(program))
		for data in inputs + [bytes(ALPHABET)]:
			expected = base.execute_bytes(data, None, 10000)
			actual = instrumented.execute_bytes(data, ToggleVector.all_off(), 10000)
			self.assertEqual(actual.verdict, expected.verdict)
			self.assertEqual(actual.cond_sat, expected.cond_sat)
			self.assertEqual(actual.edges, expected.edges)

	@given(
		st.integers(min_value=0, max_value=2**32 - 1),
		st.integers(min_value=1, max_value=300),
		st.binary(max_size=6),
	)
	@settings(derandomize=True, max_examples=500, deadline=None)
	def test_steps_never_exceed_the_budget(self, seed, budget, data):
		"""Test every verdict stays within budget, with toggled-open loops too"""
		ip = insert_toggles(random_program(seed, allow_faults=True), toggle_loops=True)
		rng = random.Random(seed)
		on = [g for g in sorted(ip.toggleable) if rng.random() < 0.5]
		outcome = RuntimeService.from_instrumented(ip).execute_bytes(data, ToggleVector.of(on), budget)

		self.assertLessEqual(outcome.steps, budget)
		self.assertEqual(outcome.verdict.kind == TIMEOUT, outcome.steps == budget)

	@given(st.integers(min_value=0, max_value=2**32 - 1), st.binary(max_size=6))
	@settings(derandomize=True, max_examples=300, deadline=None)
	def test_more_toggles_never_lose_reached_guards(self, seed, data):
		"""Test turning on a toggle keeps every guard the run reached before"""
		ip = insert_toggles(parse(guard_tree_source(seed)))
		blocks, _ = guard_blocks(ip)
		runtime = RuntimeService.from_instrumented(ip)
		toggleable = sorted(ip.toggleable)

		reached = {}
		for k in range(len(toggleable) + 1):
			for on in itertools.combinations(toggleable, k):
				edges = runtime.execute_bytes(data, ToggleVector.of(on), 1000).edges
				reached[frozenset(on)] = reached_guards(blocks, edges)
		for on, guards in reached.items():
			for g in set(toggleable) - on:
				self.assertTrue(guards <= reached[on | {g}], (seed, sorted(on), g))


if __name__ == "__main__":
	unittest.main()

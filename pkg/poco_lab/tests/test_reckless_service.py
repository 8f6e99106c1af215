# -*- coding: utf-8 -*-
# Copyright (c) 2024, PoCo Lab contributors
# For license information, please see license.txt

from __future__ import annotations

import math
import random
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from poco_lab.models.hierarchy import ToggleVector
from poco_lab.models.seed import Corpus
from poco_lab.services.instrument_service import insert_toggles
from poco_lab.services.parser_service import parse
from poco_lab.services.reckless_service import RecklessService, collect_crashing_reckless
from poco_lab.services.runtime_service import RuntimeService
from poco_lab.targets import load_target


def reckless_source(n, reckless):
	"""n flat guards; disabling any guard in `reckless` divides by zero"""
	lines = ["entry fn target(input) {", "\tzero = 0;", "\tx = 0;"]
	for g in range(n):
		body = "x = 1 / zero;" if g in reckless else f"x = x + {g};"
		lines.append(f"\tif (input[{g}] == 200) {{ {body} }}")
	lines.append("}")
	return "\n".join(lines) + "\n"


def service_for(source, multiplier=10):
	runtime = RuntimeService.from_instrumented(insert_toggles(parse(source)))
	return RecklessService(runtime, multiplier)


class TestRecklessService(unittest.TestCase):
	"""Test cases for reckless guard detection"""

	def setUp(self):
		self.boo = insert_toggles(load_target("boo"))
		self.boo_corpus = Corpus.from_bytes({"s": b"\x04\x08"})

	def test_synergistic_pair_blames_the_later_guard(self):
		"""Test boo's pair reports only the guard whose disabling completes the crash"""
		service = RecklessService(RuntimeService.from_instrumented(self.boo))
		reckless = service.collect_crashing_reckless(self.boo_corpus, [0, 1], 1000)
		self.assertEqual(reckless, {1})
		self.assertEqual(service.probe_count, 4)

	def test_module_function(self):
		"""Test the convenience wrapper runs the same search"""
		self.assertEqual(collect_crashing_reckless(self.boo, self.boo_corpus, [0, 1], 1000), {1})

	def test_failed_precondition_returns_nothing(self):
		"""Test no search happens when disabling everything does not crash"""
		service = RecklessService(RuntimeService.from_instrumented(self.boo))
		self.assertEqual(service.collect_crashing_reckless(self.boo_corpus, [0], 1000), frozenset())
		self.assertEqual(service.probe_count, 1)

	def test_empty_disabled_list(self):
		"""Test nothing is probed without disabled guards"""
		service = RecklessService(RuntimeService.from_instrumented(self.boo))
		self.assertEqual(service.collect_crashing_reckless(self.boo_corpus, [], 1000), frozenset())
		self.assertEqual(service.probe_count, 0)

	def test_probes_use_the_multiplied_budget(self):
		"""Test probe timeouts are judged on budget times the multiplier"""
		source = "entry fn f(input) {\n\ti = 0;\n\twhile (i < 30) { i = i + 1; }\n\tif (input[0] == 1) { x = 1; }\n}\n"
		corpus = Corpus.from_bytes({"s": b""})
		# 30 iterations fit in 10 * 20 steps but not in 20
		service = service_for(source, multiplier=10)
		self.assertEqual(service.collect_crashing_reckless(corpus, [1], 20), frozenset())
		service = service_for(source, multiplier=1)
		self.assertEqual(service.collect_crashing_reckless(corpus, [1], 20), {1})

	def test_converging_reckless(self):
		"""Test converging guards are the disabled guards new seeds enter"""
		foo = insert_toggles(load_target("foo"))
		service = RecklessService(RuntimeService.from_instrumented(foo))
		s_new = Corpus.from_bytes({"s3": b""})
		self.assertEqual(service.collect_converging_reckless(s_new, [0, 1, 2, 3, 4], 1000), frozenset(range(5)))
		self.assertEqual(service.collect_converging_reckless(s_new, [], 1000), frozenset())
		self.assertEqual(service.collect_converging_reckless(Corpus.from_bytes({"a": b"a"}), [0], 1000), {0})
		jelly = Corpus.from_bytes({"j": b"xx"})
		self.assertEqual(service.collect_converging_reckless(jelly, [1], 1000), frozenset())

	def test_entry_size_check_converges(self):
		"""Test a disabled early-return guard at the parser entry is entered by every seed"""
		ip = insert_toggles(load_target("xmllint_entry"))
		service = RecklessService(RuntimeService.from_instrumented(ip))
		s_new = Corpus.from_bytes({"doc": b"<?ab<c>/", "empty": b""})
		# guard 3 is `len(input) < 5`; guard 6 sits behind it in the tag loop
		self.assertEqual(service.collect_converging_reckless(s_new, [3], 1000), {3})
		self.assertEqual(service.collect_converging_reckless(s_new, [3, 6], 1000), {3})
		self.assertEqual(service.collect_converging_reckless(s_new, [6], 1000), {6})

	@given(st.integers(min_value=0, max_value=2**32 - 1))
	@settings(derandomize=True, max_examples=150, deadline=None)
	def test_matches_singleton_oracle(self, seed):
		"""Test independent reckless guards are found exactly within the probe bound"""
		rng = random.Random(seed)
		n = rng.randint(1, 12)
		k = rng.randint(1, n)
		reckless = frozenset(rng.sample(range(n), k))
		service = service_for(reckless_source(n, reckless))
		corpus = Corpus.from_bytes({"s": b""})
		order = list(range(n))
		rng.shuffle(order)

		# every guard is reckless alone iff disabling it alone crashes
		oracle = frozenset(
			g for g in range(n)
			if service.runtime.execute_corpus(ToggleVector.of([g]), corpus, 1000).result.is_crash
		)
		self.assertEqual(oracle, reckless)

		service.probe_count = 0
		found = service.collect_crashing_reckless(corpus, order, 100)
		self.assertEqual(found, reckless)
		log_n = max(1, math.ceil(math.log2(n)))
		self.assertLessEqual(service.probe_count, 4 * k * log_n + log_n + 2)


if __name__ == "__main__":
	unittest.main()

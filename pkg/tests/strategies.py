"""Hypothesis strategies shared by the test modules."""

import random

from hypothesis import strategies as st

from corpus import ALPHABET, random_formula, random_monitor
from monitorability.traces import Trace

actions = st.sampled_from(ALPHABET)
words = st.lists(actions, max_size=5).map(tuple)
finite = words.map(Trace)
lassos = st.tuples(st.lists(actions, max_size=2), st.lists(actions, min_size=1, max_size=2)).map(
    lambda p: Trace(tuple(p[0]), tuple(p[1]))
)
traces = st.one_of(finite, lassos)


def formulas(kind: str = "any", depth: int = 4):
    return st.integers(0, 10**9).map(lambda seed: random_formula(random.Random(seed), kind, depth))


def monitors(regular: bool = False, depth: int = 4):
    return st.integers(0, 10**9).map(lambda seed: random_monitor(random.Random(seed), regular, depth))

"""Hypothesis strategies built on the seeded random tree generator."""

import random

from hypothesis import strategies as st

from nbsr.synth import random_tree


@st.composite
def trees(draw, max_n=12, labels=("S", "NP", "VP", "PP"), max_arity=5):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_tree(random.Random(seed), n, labels, max_arity=max_arity)

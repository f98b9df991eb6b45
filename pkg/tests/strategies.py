"""Hypothesis strategies shared by the test modules."""

import random

from hypothesis import strategies as st

from cyclic_proofs.corpus import preproof_from_shape, random_trace_structure


@st.composite
def shapes(draw, max_nodes=6, max_arity=2, acyclic=None):
    n = draw(st.integers(1, max_nodes))
    if acyclic is None:
        acyclic = draw(st.booleans())
    out = []
    for v in range(n):
        lo = v + 1 if acyclic else 0
        if lo >= n:
            out.append(())
            continue
        out.append(tuple(draw(st.lists(st.integers(lo, n - 1), max_size=max_arity))))
    return out


def preproofs(**kw):
    return shapes(**kw).map(preproof_from_shape)


@st.composite
def traced_preproofs(draw, max_nodes=5, max_fml=3):
    """A pre-proof over a hypothesis shape with a seeded random trace structure."""
    c = draw(preproofs(max_nodes=max_nodes))
    seed = draw(st.integers(0, 2**32 - 1))
    return c, random_trace_structure(random.Random(seed), c, max_fml)

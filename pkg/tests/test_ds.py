import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclic_proofs.core import labelled_graph, validate_preproof
from cyclic_proofs.ds import (
    BudgetExceeded, DsState, StreamSpec, branch_at, check_counter_independence,
    ds_abstract_preproof, ds_coalgebraic, ds_proof_system, ds_reference, ds_step,
)
from cyclic_proofs.trace import TraceStep, TraceStructure, decide_gtc

streams = st.builds(
    StreamSpec,
    st.lists(st.integers(0, 9), max_size=4),
    st.lists(st.integers(0, 9), min_size=1, max_size=6),
)

WORKED = StreamSpec([4, 2], [3, 7, 6, 5, 9])


def test_worked_example():
    assert WORKED.take(8) == [4, 2, 3, 7, 6, 5, 9, 3]
    assert ds_reference(WORKED, 3) == [2, 1, 3]
    assert ds_coalgebraic(1, WORKED, 3) == [2, 1, 3]


def test_constant_and_ascending_streams():
    assert ds_coalgebraic(1, StreamSpec([], [5]), 4) == [1, 1, 1, 1]
    # an ascending prefix into a constant tail; a longer period would wrap downwards
    assert ds_coalgebraic(1, StreamSpec([1, 2, 3], [4]), 6) == [1] * 6
    assert ds_coalgebraic(1, StreamSpec([], [3, 4, 5]), 3) == [1, 1, 2]
    assert ds_coalgebraic(5, StreamSpec([], [5]), 1) == [5]


def test_one_step():
    assert ds_step(DsState(1, 0), WORKED) == (DsState(2, 1), None)
    assert ds_step(DsState(2, 1), WORKED) == (DsState(1, 2), 2)


def test_stream_spec_rejects_bad_input():
    with pytest.raises(ValueError):
        StreamSpec([1], [])
    with pytest.raises(ValueError):
        StreamSpec([-1], [1])


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        ds_coalgebraic(1, WORKED, 10, step_budget=3)


def test_abstract_preproof_shape():
    c, t = ds_abstract_preproof(WORKED)
    assert len(c) == WORKED.states
    assert len(labelled_graph(c).edges) == WORKED.states
    assert c.children_of[-1] == (len(WORKED.prefix),)
    assert validate_preproof(ds_proof_system(), c).ok
    assert [c.rule_of[p].schema for p in c.nodes] == [branch_at(WORKED, p) for p in c.nodes]


def test_without_progress_the_gtc_fails():
    c, _ = ds_abstract_preproof(WORKED)
    flat = TraceStructure(fml=lambda s: frozenset("*"), steps=lambda r, i: frozenset([TraceStep("*", "*", False)]))
    assert not decide_gtc(c, flat).holds


def test_constant_period_progresses_everywhere():
    c, t = ds_abstract_preproof(StreamSpec([], [3]))
    assert all(st.progressing for st in t.steps(c.rule_of[0], 0))
    assert decide_gtc(c, t).holds


@settings(max_examples=150, deadline=None)
@given(streams, st.integers(1, 30))
def test_coalgebraic_matches_reference(xs, k):
    assert ds_coalgebraic(1, xs, k) == ds_reference(xs, k)


@settings(max_examples=150, deadline=None)
@given(streams)
def test_abstraction_passes_gtc_and_ignores_the_counter(xs):
    c, t = ds_abstract_preproof(xs)
    assert decide_gtc(c, t).holds
    assert check_counter_independence(xs)


@settings(max_examples=100, deadline=None)
@given(streams, st.integers(0, 40))
def test_canonical_positions_agree(xs, k):
    assert xs[xs.canonical(k)] == xs[k]
    assert 0 <= xs.canonical(k) < xs.states

import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclic_proofs.core import (
    PreProof, ProofSystem, RuleInstance, is_well_founded, labelled_graph, shortest_path_edges, validate_preproof,
)
from cyclic_proofs.corpus import CopyMorphism, preproof_from_shape, random_morphism, random_trace_structure
from cyclic_proofs.ds import EMIT, SKIP, ds_trace_structure
from cyclic_proofs.trace import (
    BruteForceBudgetExceeded, DomainMismatch, IllTypedTraceStructure, Lasso, PremiseIndexError,
    ProofSystemMorphism, TraceMatrix, TraceStep, TraceStructure, brute_force_gtc, check_recursive_via_gtc,
    compose, count_closed_walks, decide_gtc, default_bound, iter_cycles, lasso_has_progressing_trace,
    pullback_trace_structure, reindex_preproof, step_matrix,
)
from cyclic_proofs.trace import ClosureStats

from strategies import preproofs, shapes, traced_preproofs


def self_loop(progressing):
    c = preproof_from_shape([(0,)])
    t = TraceStructure.from_tables({"s0": ["f"]}, {("r0", 0): [("f", "f", progressing)]})
    return c, t


def brute_compose(m1, m2):
    return frozenset((a, c, p1 or p2) for (a, b, p1), (b2, c, p2) in product(m1.arcs, m2.arcs) if b == b2)


arcs_2x2 = st.frozensets(st.tuples(st.sampled_from("xy"), st.sampled_from("xy"), st.booleans()))


def test_rule_without_steps_gives_empty_matrix():
    c = preproof_from_shape([(0,)])
    t = TraceStructure.from_tables({"s0": ["f"]}, {})
    m = step_matrix(t, c.rule_of[0], 0)
    assert m.arcs == frozenset() and m.domain == {"f"}
    with pytest.raises(PremiseIndexError):
        step_matrix(t, c.rule_of[0], 1)


def test_ds_structure_has_one_progressing_arc_on_emit():
    t = ds_trace_structure()
    assert step_matrix(t, EMIT, 0).arcs == {("*", "*", True)}
    assert step_matrix(t, SKIP, 0).arcs == {("*", "*", False)}


def test_compose_identity_and_empty():
    m = TraceMatrix(frozenset("xy"), frozenset("xy"), frozenset({("x", "y", True), ("y", "y", False)}))
    assert compose(m, TraceMatrix.identity("xy")) == m
    empty = TraceMatrix(frozenset("xy"), frozenset("xy"))
    assert compose(empty, m).arcs == frozenset()
    with pytest.raises(DomainMismatch):
        compose(m, TraceMatrix.identity("z"))


@given(arcs_2x2, arcs_2x2)
def test_compose_matches_enumeration_of_paths(a1, a2):
    m1 = TraceMatrix(frozenset("xy"), frozenset("xy"), a1)
    m2 = TraceMatrix(frozenset("xy"), frozenset("xy"), a2)
    assert compose(m1, m2).arcs == brute_compose(m1, m2)


@given(arcs_2x2, arcs_2x2, arcs_2x2)
def test_compose_is_associative(a1, a2, a3):
    ms = [TraceMatrix(frozenset("xy"), frozenset("xy"), a) for a in (a1, a2, a3)]
    assert compose(compose(ms[0], ms[1]), ms[2]) == compose(ms[0], compose(ms[1], ms[2]))


def test_nonprogressing_self_loop_fails_with_that_loop():
    c, t = self_loop(False)
    for verdict in (decide_gtc(c, t), brute_force_gtc(c, t)):
        assert not verdict.holds
        assert verdict.counterexample == Lasso((), ((0, 0),))


def test_progressing_self_loop_holds():
    c, t = self_loop(True)
    assert decide_gtc(c, t).holds
    assert brute_force_gtc(c, t).holds


def test_dual_arcs_on_one_pair():
    # premise 0 carries x -> x both ways, premise 1 only non-progressing
    c = preproof_from_shape([(0, 0)])
    steps = {("r0", 0): [("x", "x", True), ("x", "x", False)], ("r0", 1): [("x", "x", False)]}
    t = TraceStructure.from_tables({"s0": ["x"]}, steps)
    verdict = decide_gtc(c, t)
    assert not verdict.holds
    assert verdict.counterexample.cycle == ((0, 1),)
    assert not brute_force_gtc(c, t).holds
    only_first = TraceStructure.from_tables({"s0": ["x"]}, {("r0", 0): steps[("r0", 0)]})
    loop = preproof_from_shape([(0,)])
    assert decide_gtc(loop, only_first).holds


def test_suffix_reading_lets_a_trace_start_late():
    # node 0 has no formulas; the loop at node 1 progresses
    c = preproof_from_shape([(1,), (1,)])
    t = TraceStructure.from_tables({"s1": ["f"]}, {("r1", 0): [("f", "f", True)]})
    assert decide_gtc(c, t).holds and brute_force_gtc(c, t).holds


def test_ill_typed_steps_are_rejected():
    c = preproof_from_shape([(0,)])
    t = TraceStructure.from_tables({"s0": ["f"]}, {("r0", 0): [("g", "f", False)]})
    with pytest.raises(IllTypedTraceStructure):
        decide_gtc(c, t)


def test_lasso_check_rejects_non_paths():
    c = preproof_from_shape([(1,), (0,)])
    Lasso((), ((0, 0), (1, 0))).check(c)
    with pytest.raises(ValueError):
        Lasso((), ((0, 0),)).check(c)
    with pytest.raises(ValueError):
        Lasso((), ())


def test_brute_force_budget():
    c = preproof_from_shape([(0, 0)])
    t = TraceStructure.from_tables({"s0": ["a", "b", "c"]}, {})
    assert count_closed_walks(c, default_bound(c, t)) == 2 + 4 + 8 + 16
    with pytest.raises(BruteForceBudgetExceeded):
        brute_force_gtc(c, t, max_walks=10)


def test_tree_and_cycle_recursiveness():
    assert check_recursive_via_gtc(preproof_from_shape([(1, 2), (), ()]))
    assert not check_recursive_via_gtc(preproof_from_shape([(1,), (2,), (1,)]))


@settings(max_examples=100, deadline=None)
@given(traced_preproofs(max_nodes=4, max_fml=2))
def test_sct_agrees_with_brute_force(ct):
    c, t = ct
    a, b = decide_gtc(c, t), brute_force_gtc(c, t)
    assert a.holds == b.holds
    if not a.holds:
        a.counterexample.check(c)
        assert not lasso_has_progressing_trace(c, t, a.counterexample)


@settings(max_examples=100, deadline=None)
@given(preproofs(acyclic=True), st.integers(0, 10**6))
def test_well_founded_implies_gtc(c, seed):
    t = random_trace_structure(random.Random(seed), c)
    assert decide_gtc(c, t).holds
    assert brute_force_gtc(c, t, 3).holds


@settings(max_examples=100, deadline=None)
@given(preproofs(max_nodes=7))
def test_recursive_iff_well_founded(c):
    assert check_recursive_via_gtc(c) == is_well_founded(c).well_founded


@settings(max_examples=100, deadline=None)
@given(traced_preproofs(), st.integers(0, 10**6))
def test_removing_progress_never_repairs_a_failure(ct, seed):
    c, t = ct
    rng = random.Random(seed)
    demoted = {}
    for n in c.nodes:
        r = c.rule_of[n]
        for i in range(r.arity):
            demoted[(r.rule_id, i)] = [(a, b, p and rng.random() < 0.5) for a, b, p in t.steps(r, i)]
    fml = {s: t.fml(s) for s in c.judgement_of}
    weaker = TraceStructure.from_tables(fml, demoted)
    if not decide_gtc(c, t).holds:
        assert not decide_gtc(c, weaker).holds


@settings(max_examples=100, deadline=None)
@given(traced_preproofs())
def test_closure_stays_within_its_bound(ct):
    c, t = ct
    stats = ClosureStats()
    decide_gtc(c, t, stats)
    assert stats.matrices <= stats.bound


@settings(max_examples=60, deadline=None)
@given(shapes(max_nodes=5), st.integers(1, 8))
def test_cycles_are_closed_walks_from_their_least_node(shape, bound):
    c = preproof_from_shape(shape)
    seen = set()
    for cyc in iter_cycles(c, bound):
        assert cyc[0][0] == min(n for n, _ in cyc)
        Lasso((), cyc).check(c)
        seen.add(cyc)
    # every self-loop whose lasso fits in the bound shows up
    for n, i, m in labelled_graph(c).edges:
        if n == m and 1 + len(shortest_path_edges(c, n)) <= bound:
            assert ((n, i),) in seen


# -- base change -------------------------------------------------------------


def test_identity_morphism_reindexes_to_the_same_preproof():
    c = preproof_from_shape([(1,), (0, 1)])
    f = ProofSystemMorphism.identity()
    assert reindex_preproof(f, c) == c
    t = random_trace_structure(random.Random(1), c)
    t2 = pullback_trace_structure(f, t)
    for n in c.nodes:
        r = c.rule_of[n]
        assert t2.fml(r.conclusion) == t.fml(r.conclusion)
        assert all(t2.steps(r, i) == t.steps(r, i) for i in range(r.arity))


def test_copy_without_premises_is_a_dangling_rule():
    c = preproof_from_shape([(0,)])
    r = c.rule_of[0]
    f = CopyMorphism({"s0": 2}, {(r, 0, 0): (0,), (r, 1, 0): ()}).morphism()
    c2 = reindex_preproof(f, c)
    assert [len(k) for k in c2.children_of] == [1, 0]
    # a system over P whose rules keep the arity of the rule they lie over
    same_arity = ProofSystem("copies", validate=lambda r2: r2.arity == f.on_rule(r2).arity)
    report = validate_preproof(same_arity, c2)
    assert [(v.node, v.invariant) for v in report.violations] == [(1, "rule accepted by copies")]


def test_collapse_morphism_duplicates_steps_onto_preimages():
    # P' has two rules over the single rule of P, one per copy of the judgement
    c = preproof_from_shape([(0,)])
    r = c.rule_of[0]
    t = TraceStructure.from_tables({"s0": ["f"]}, {("r0", 0): [("f", "f", True)]})
    f = CopyMorphism({"s0": 2}, {(r, 0, 0): (1,), (r, 1, 0): (0,)}).morphism()
    c2 = reindex_preproof(f, c)
    t2 = pullback_trace_structure(f, t)
    assert len(c2) == 2
    for n in c2.nodes:
        assert t2.steps(c2.rule_of[n], 0) == {TraceStep("f", "f", True)}
    assert decide_gtc(c2, t2).holds


def test_reindexed_edges_project_to_base_edges():
    rng = random.Random(4)
    for _ in range(30):
        c = preproof_from_shape([(1,), (0, 2), (2,)])
        f = random_morphism(rng, c).morphism()
        c2 = reindex_preproof(f, c)
        base = set(labelled_graph(c).edges)
        for a, i2, b in labelled_graph(c2).edges:
            i = f.on_premise_index(c2.rule_of[a])[i2]
            assert (c2.names[a][0], i, c2.names[b][0]) in base


@settings(max_examples=80, deadline=None)
@given(traced_preproofs(max_nodes=4), st.integers(0, 10**6))
def test_base_change_preserves_gtc(ct, seed):
    c, t = ct
    if not decide_gtc(c, t).holds:
        return
    f = random_morphism(random.Random(seed), c).morphism()
    assert decide_gtc(reindex_preproof(f, c), pullback_trace_structure(f, t)).holds


def test_morphism_square_violations_raise():
    c = preproof_from_shape([(0,)])
    bad = ProofSystemMorphism(
        on_judgement=lambda s: s,
        fiber=lambda s: (s,),
        lift_rule=lambda r, s: RuleInstance("other", r.schema, s, r.premises),
        on_rule=lambda r: r,
        on_premise_index=lambda r: (0,),
    )
    with pytest.raises(ValueError):
        reindex_preproof(bad, c)


def test_preproof_equality_ignores_names():
    c = preproof_from_shape([()])
    assert PreProof(c.judgement_of, c.rule_of, c.children_of, c.roots, names=("x",)) == c

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclic_proofs.core import labelled_graph
from cyclic_proofs.corpus import preproof_from_shape, random_preproof, random_trace_structure
from cyclic_proofs.ds import StreamSpec, ds_abstract_preproof
from cyclic_proofs.mucalc.calculus import apply_rule, mu_trace_structure, sequent
from cyclic_proofs.mucalc.syntax import parse_formula
from cyclic_proofs.ordinal import (
    OMEGA, ZERO, IllTypedAnnotation, LiftBudgetExceeded, NonApplicable, Ordinal, OrdinalOverflow,
    RefutationCertificate, annotation_morphism, build_lifted_graph, certificate_from_heights,
    decide_gtc_via_lift, lasso_heights, lifted_cycle_exists_full, lifted_edge_ok, ord_compare, ord_succ, ord_sup,
    ord_sup_plus_one, parse_ordinal, refute_gtc_via_lift, sufficient_gamma, verify_refutation,
)
from cyclic_proofs.trace import Lasso, TraceStructure, decide_gtc, default_bound, iter_lassos
from cyclic_proofs.trace import lasso_has_progressing_trace, reindex_preproof

from strategies import preproofs, traced_preproofs

# CNF as (exponent, coefficient) lists with distinct exponents below 4
cnfs = st.dictionaries(st.integers(0, 3), st.integers(1, 5), max_size=4).map(lambda d: Ordinal(d.items()))


def coeff_vector(a: Ordinal):
    """Coefficients from w^3 down to w^0; lexicographic order on these is the ordinal order below w^4."""
    d = dict(a.cnf)
    return tuple(d.get(e, 0) for e in (3, 2, 1, 0))


def self_loop(progressing):
    c = preproof_from_shape([(0,)])
    t = TraceStructure.from_tables({"s0": ["f"]}, {("r0", 0): [("f", "f", progressing)]})
    return c, t


# -- ordinals ----------------------------------------------------------------


def test_omega_above_naturals():
    assert ord_compare(OMEGA, 5) == 1
    assert ord_compare(5, OMEGA) == -1
    assert 5 < OMEGA and OMEGA > 10**9


def test_sup_examples():
    assert ord_sup([]) == ZERO
    a = Ordinal([(1, 2), (0, 1)])
    b = Ordinal([(1, 3)])
    assert ord_sup([a, b]) == b
    assert ord_sup_plus_one([]) == ZERO
    assert ord_sup_plus_one([a, b]) == Ordinal([(1, 3), (0, 1)])


def test_parse_and_print_round_trip():
    a = parse_ordinal("w^2*3 + w*1 + 4")
    assert a.cnf == ((2, 3), (1, 1), (0, 4))
    assert str(a) == "w^2*3 + w*1 + 4"
    assert parse_ordinal("0") == ZERO
    assert parse_ordinal("w") == OMEGA
    # ordinal addition absorbs smaller terms on the left
    assert parse_ordinal("3 + w") == OMEGA
    for bad in ("", "w^", "x", "1 +"):
        with pytest.raises(ValueError):
            parse_ordinal(bad)
    with pytest.raises(OrdinalOverflow):
        parse_ordinal("w^w")


@given(cnfs, cnfs)
def test_compare_matches_coefficient_vectors(a, b):
    va, vb = coeff_vector(a), coeff_vector(b)
    assert ord_compare(a, b) == (va > vb) - (va < vb)
    assert (a == b) == (va == vb)


@given(cnfs, cnfs, cnfs)
def test_order_is_transitive(a, b, c):
    if a <= b <= c:
        assert a <= c


@given(cnfs)
def test_succ_increases_and_text_round_trips(a):
    assert ord_succ(a) > a
    assert parse_ordinal(str(a)) == a
    assert hash(a) == hash(parse_ordinal(str(a)))


@given(st.lists(cnfs, max_size=5))
def test_sup_dominates_members(values):
    s = ord_sup(values)
    assert all(v <= s for v in values)
    assert s in values or s == ZERO


@given(cnfs, cnfs)
def test_addition_matches_cnf_rule(a, b):
    # the terms of a below the leading exponent of b disappear
    total = a + b
    if b == ZERO:
        assert total == a
    else:
        lead = b.cnf[0][0]
        assert total >= b
        assert [t for t in total.cnf if t[0] > lead] == [t for t in a.cnf if t[0] > lead]


# -- lifted edges ------------------------------------------------------------


def test_lifted_edge_ok_basic_cases():
    c = preproof_from_shape([(0,)])
    r = c.rule_of[0]
    empty = TraceStructure.from_tables({"s0": ["f"]}, {})
    assert lifted_edge_ok(empty, r, 0, {"f": 0}, {"f": 7})
    _, t = self_loop(True)
    assert lifted_edge_ok(t, r, 0, {"f": 1}, {"f": 0})
    assert not lifted_edge_ok(t, r, 0, {"f": 0}, {"f": 0})
    with pytest.raises(IllTypedAnnotation):
        lifted_edge_ok(t, r, 0, {}, {"f": 0})


def test_nu_unfold_needs_a_smaller_stage():
    phi = parse_formula("nu x.[a]x")
    r = apply_rule("nu", sequent(phi), phi)
    t = mu_trace_structure()
    (src,) = t.fml(r.conclusion)
    (tgt,) = t.fml(r.premises[0])
    for alpha in range(4):
        for beta in range(4):
            assert lifted_edge_ok(t, r, 0, {src: alpha}, {tgt: beta}) == (beta < alpha)


def test_gamma_one_without_progress_is_the_base_graph():
    c = preproof_from_shape([(1, 2), (0,), (2,)])
    t = TraceStructure.from_tables({"s0": ["f"], "s2": ["g"]}, {("r2", 0): [("g", "g", False)]})
    g = build_lifted_graph(c, t, 1)
    assert len(g.nodes) == len(c)
    assert sorted((a[0], i, b[0]) for a, i, b in g.edges) == sorted(labelled_graph(c).edges)


def test_gamma_one_drops_progressing_edges():
    c, t = self_loop(True)
    assert build_lifted_graph(c, t, 1).edges == ()


def test_ds_lifted_edges():
    xs = StreamSpec([4, 2], [3, 7, 6, 5, 9])
    c, t = ds_abstract_preproof(xs)
    g = build_lifted_graph(c, t, 3)
    got = {(a[0], a[1][0], b[0], b[1][0]) for a, _, b in g.edges}
    want = set()
    for p in c.nodes:
        q = c.children_of[p][0]
        i, j = xs[p], xs[p + 1]
        for m in range(3):
            for m2 in range(3):
                if (i <= j and m > m2) or (i > j and m >= m2):
                    want.add((p, m, q, m2))
    assert got == want


def test_lift_budget():
    c, t = random_preproof(random.Random(0), 6, 3)
    with pytest.raises(LiftBudgetExceeded):
        build_lifted_graph(c, t, 50, budget=10)


# -- refutation --------------------------------------------------------------


def test_self_loop_refutations():
    c, t = self_loop(False)
    cert = refute_gtc_via_lift(c, t, 1)
    assert cert is not None and cert.cycle == ((0, 0),)
    assert verify_refutation(c, t, cert)
    c, t = self_loop(True)
    assert all(refute_gtc_via_lift(c, t, g) is None for g in (1, 2, 5))
    assert decide_gtc_via_lift(c, t).holds


@settings(max_examples=50, deadline=None)
@given(preproofs(acyclic=True), st.integers(0, 10**6), st.integers(1, 4))
def test_well_founded_graphs_have_no_refutation(c, seed, gamma):
    t = random_trace_structure(random.Random(seed), c, 2)
    assert refute_gtc_via_lift(c, t, gamma) is None


def test_tampered_certificate_is_rejected():
    rng = random.Random(11)
    tampered = 0
    while tampered < 20:
        c, t = random_preproof(rng, 4, 2)
        cert = decide_gtc_via_lift(c, t).certificate
        if cert is None:
            continue
        assert verify_refutation(c, t, cert)
        # lower one annotation just below what some outgoing step demands
        L = len(cert.cycle)
        for k, (n, i) in enumerate(cert.cycle):
            nxt = cert.annotations[(k + 1) % L]
            for a, b, prog in t.steps(c.rule_of[n], i):
                need = nxt[b].finite_value() + (1 if prog else 0)
                if need > 0 and not (L == 1 and a == b):
                    anns = list(cert.annotations)
                    anns[k] = {**anns[k], a: Ordinal.of(need - 1)}
                    bad = RefutationCertificate(cert.cycle, tuple(anns))
                    assert not verify_refutation(c, t, bad)
                    tampered += 1
                    break
            else:
                continue
            break
    bad_cycle = RefutationCertificate(((0, 5),), ({},))
    c = preproof_from_shape([(0,)])
    assert not verify_refutation(c, TraceStructure.from_tables({}, {}), bad_cycle)


@settings(max_examples=80, deadline=None)
@given(traced_preproofs(max_nodes=4, max_fml=2))
def test_lift_agrees_with_sct(ct):
    c, t = ct
    v = decide_gtc_via_lift(c, t)
    assert v.holds == decide_gtc(c, t).holds
    if not v.holds:
        assert verify_refutation(c, t, v.certificate)


@settings(max_examples=60, deadline=None)
@given(traced_preproofs(max_nodes=4, max_fml=2), st.integers(1, 4))
def test_refutation_is_monotone_in_gamma(ct, gamma):
    c, t = ct
    if refute_gtc_via_lift(c, t, gamma) is not None:
        assert refute_gtc_via_lift(c, t, gamma + 1) is not None
        assert refute_gtc_via_lift(c, t, sufficient_gamma(c, t)) is not None


@settings(max_examples=60, deadline=None)
@given(traced_preproofs(max_nodes=3, max_fml=2), st.integers(1, 3))
def test_search_graph_matches_full_lifted_graph(ct, gamma):
    c, t = ct
    assert (refute_gtc_via_lift(c, t, gamma) is not None) == lifted_cycle_exists_full(c, t, gamma)


@settings(max_examples=40, deadline=None)
@given(traced_preproofs(max_nodes=3, max_fml=2))
def test_annotation_morphism_realises_the_lifted_graph(ct):
    c, t = ct
    gamma = 2
    c2 = reindex_preproof(annotation_morphism(t, gamma), c)
    via_morphism = sorted((c2.names[a][0], c2.names[a][1][1], c2.names[b][0], c2.names[b][1][1])
                          for a, _, b in labelled_graph(c2).edges)
    direct = sorted((a[0], a[1], b[0], b[1]) for a, _, b in build_lifted_graph(c, t, gamma).edges)
    assert via_morphism == direct


# -- heights -----------------------------------------------------------------


def test_heights_without_progress_are_zero():
    c = preproof_from_shape([(1,), (0,)])
    t = TraceStructure.from_tables({"s0": ["f"], "s1": ["g"]}, {("r0", 0): [("f", "g", False)]})
    h = lasso_heights(c, t, Lasso((), ((0, 0), (1, 0))))
    assert set(h.values()) == {ZERO}


def test_heights_count_progress_before_the_cycle():
    # 0 -> 1 -> 2 -> 2; f progresses once on the edge out of node 1
    c = preproof_from_shape([(1,), (2,), (2,)])
    t = TraceStructure.from_tables(
        {"s0": ["f"], "s1": ["f"], "s2": ["f"]},
        {("r0", 0): [("f", "f", False)], ("r1", 0): [("f", "f", True)]},
    )
    h = lasso_heights(c, t, Lasso(((0, 0), (1, 0)), ((2, 0),)))
    assert h == {(0, "f"): 1, (1, "f"): 1, (2, "f"): 0}


def test_heights_refuse_progressing_lassos():
    c, t = self_loop(True)
    with pytest.raises(NonApplicable):
        lasso_heights(c, t, Lasso((), ((0, 0),)))


@settings(max_examples=60, deadline=None)
@given(traced_preproofs(max_nodes=5, max_fml=2))
def test_height_certificates_verify(ct):
    c, t = ct
    for lasso in iter_lassos(c, min(default_bound(c, t), 6)):
        if not lasso_has_progressing_trace(c, t, lasso):
            cert = certificate_from_heights(c, t, lasso)
            assert verify_refutation(c, t, cert)
            assert not decide_gtc(c, t).holds

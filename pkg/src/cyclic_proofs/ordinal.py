"""Ordinals below omega^omega and the ordinal-annotated lift of a pre-proof.

An annotation gives every formula of a judgement an ordinal. The lifted
graph keeps a base edge between annotated nodes only when every trace step
along it weakly decreases the annotation, strictly on progressing steps. A
cycle in the lifted graph is therefore a refutation of the GTC.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Mapping, Sequence

from .core import NodeId, PreProof, RuleInstance, find_cycle, shortest_path_edges
from .trace import (
    GtcVerdict,
    Lasso,
    ProofSystemMorphism,
    TraceStructure,
    check_trace_structure,
    has_progressing_trace,
    sorted_tokens,
)


class OrdinalOverflow(ArithmeticError):
    """The result would not be below omega^omega."""


@total_ordering
class Ordinal:
    """Cantor normal form ``sum w^e * c`` with strictly decreasing natural ``e``."""

    __slots__ = ("cnf",)

    def __init__(self, cnf: Iterable[tuple[int, int]] = ()):
        terms = []
        for e, c in cnf:
            if isinstance(e, Ordinal):
                if not e.is_finite():
                    raise OrdinalOverflow("exponent must be finite below w^w")
                e = e.finite_value()
            if not isinstance(e, int) or e < 0:
                raise OrdinalOverflow(f"exponent {e!r} is not a natural number")
            if not isinstance(c, int) or c < 0:
                raise ValueError(f"coefficient {c!r} is not a natural number")
            if c:
                terms.append((e, c))
        terms.sort(key=lambda t: -t[0])
        merged: list[tuple[int, int]] = []
        for e, c in terms:
            if merged and merged[-1][0] == e:
                raise ValueError("exponents must be distinct")
            merged.append((e, c))
        self.cnf = tuple(merged)

    @classmethod
    def of(cls, x) -> "Ordinal":
        if isinstance(x, Ordinal):
            return x
        if isinstance(x, int) and x >= 0:
            return cls([(0, x)])
        raise TypeError(f"cannot convert {x!r} to an ordinal")

    @classmethod
    def omega(cls, power: int = 1, coeff: int = 1) -> "Ordinal":
        return cls([(power, coeff)])

    def is_finite(self) -> bool:
        return not self.cnf or self.cnf[0][0] == 0

    def finite_value(self) -> int:
        if not self.is_finite():
            raise ValueError(f"{self} is infinite")
        return self.cnf[0][1] if self.cnf else 0

    def __eq__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other) if other >= 0 else None
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.cnf == other.cnf

    def __hash__(self):
        if self.is_finite():
            return hash(self.finite_value())
        return hash(self.cnf)

    def __lt__(self, other):
        if isinstance(other, int):
            if other < 0:
                return False
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return ord_compare(self, other) < 0

    def __add__(self, other):
        other = Ordinal.of(other)
        if not other.cnf:
            return self
        lead = other.cnf[0][0]
        keep = [(e, c) for e, c in self.cnf if e > lead]
        same = [c for e, c in self.cnf if e == lead]
        head = (lead, other.cnf[0][1] + (same[0] if same else 0))
        return Ordinal(keep + [head] + list(other.cnf[1:]))

    def __radd__(self, other):
        return Ordinal.of(other) + self

    def __repr__(self):
        return f"Ordinal({self})"

    def __str__(self):
        if not self.cnf:
            return "0"
        parts = []
        for e, c in self.cnf:
            if e == 0:
                parts.append(str(c))
            elif e == 1:
                parts.append(f"w*{c}")
            else:
                parts.append(f"w^{e}*{c}")
        return " + ".join(parts)


ZERO = Ordinal()
OMEGA = Ordinal.omega()

_TERM = re.compile(r"^(?:(w)(?:\^(\d+|w))?(?:\*(\d+))?|(\d+))$")


def parse_ordinal(text: str) -> Ordinal:
    """Parse CNF text such as ``w^2*3 + w*1 + 4`` (``w`` stands for omega)."""
    total = ZERO
    pieces = [p.strip() for p in text.split("+")]
    if not text.strip() or any(not p for p in pieces):
        raise ValueError(f"malformed ordinal {text!r}")
    for p in pieces:
        m = _TERM.match(p.replace(" ", ""))
        if not m:
            raise ValueError(f"malformed ordinal term {p!r}")
        w, exp, coeff, nat = m.groups()
        if nat is not None:
            total = total + int(nat)
            continue
        if exp == "w":
            raise OrdinalOverflow("w^w is not below w^w")
        total = total + Ordinal.omega(int(exp) if exp else 1, int(coeff) if coeff else 1)
    return total


def ord_compare(a, b) -> int:
    """-1, 0 or 1 as ``a`` is below, equal to or above ``b``."""
    a, b = Ordinal.of(a), Ordinal.of(b)
    for (ea, ca), (eb, cb) in zip(a.cnf, b.cnf):
        if ea != eb:
            return -1 if ea < eb else 1
        if ca != cb:
            return -1 if ca < cb else 1
    return (len(a.cnf) > len(b.cnf)) - (len(a.cnf) < len(b.cnf))


def ord_succ(a) -> Ordinal:
    return Ordinal.of(a) + 1


def ord_sup(values: Iterable) -> Ordinal:
    """Least upper bound of a finite set; ``sup {} = 0``."""
    best = ZERO
    for v in values:
        v = Ordinal.of(v)
        if v > best:
            best = v
    return best


def ord_sup_plus_one(values: Iterable) -> Ordinal:
    """``sup {v + 1 | v in values}``, which is 0 on the empty set."""
    vals = list(values)
    if not vals:
        return ZERO
    return ord_succ(ord_sup(vals))


# -- annotations and lifted edges --------------------------------------------


class IllTypedAnnotation(ValueError):
    pass


class LiftBudgetExceeded(RuntimeError):
    pass


class NonApplicable(ValueError):
    pass


DEFAULT_BUDGET = 10**6


def lifted_edge_ok(t: TraceStructure, r: RuleInstance, i: int, f: Mapping, g: Mapping) -> bool:
    """Does every registered step of ``(r, i)`` decrease from ``f`` to ``g``?

    Progressing steps need ``g(psi) < f(phi)``, the others ``g(psi) <= f(phi)``.
    """
    for phi in t.fml(r.conclusion):
        if phi not in f:
            raise IllTypedAnnotation(f"annotation of {r.conclusion} misses {phi}")
    for psi in t.fml(r.premises[i]):
        if psi not in g:
            raise IllTypedAnnotation(f"annotation of premise {i} misses {psi}")
    for phi, psi, prog in t.steps(r, i):
        lo, hi = g[psi], f[phi]
        if prog:
            if not lo < hi:
                return False
        elif not lo <= hi:
            return False
    return True


@dataclass(frozen=True)
class LiftedGraph:
    """Lifted nodes are ``(node, annotation)``; an annotation is a tuple of
    naturals aligned with ``formulas[node]``."""

    formulas: Mapping[NodeId, tuple]
    nodes: tuple
    edges: tuple

    def annotation(self, lifted) -> dict:
        n, values = lifted
        return dict(zip(self.formulas[n], values))


@dataclass(frozen=True)
class RefutationCertificate:
    """A base cycle together with an annotation at each of its positions."""

    cycle: tuple[tuple[NodeId, int], ...]
    annotations: tuple[Mapping, ...]

    def __post_init__(self):
        if len(self.cycle) != len(self.annotations):
            raise ValueError("one annotation per cycle position is required")
        if not self.cycle:
            raise ValueError("a certificate needs a nonempty cycle")


def _formula_table(c: PreProof, t: TraceStructure) -> dict[NodeId, tuple]:
    return {n: sorted_tokens(t.fml(c.judgement_of[n])) for n in c.nodes}


def lifted_node_count(c: PreProof, t: TraceStructure, gamma: int) -> int:
    return sum(gamma ** len(t.fml(j)) for j in c.judgement_of)


def _check_budget(c, t, gamma, budget):
    if gamma < 1:
        raise ValueError("gamma must be at least 1")
    count = lifted_node_count(c, t, gamma)
    if count > budget:
        raise LiftBudgetExceeded(f"{count} lifted nodes at gamma={gamma} exceeds the budget of {budget}")
    return count


def _successor_bounds(t, r, i, dom, cod, f, gamma):
    """Pointwise largest annotation reachable along ``(r, i)`` from ``f``, or None."""
    pos = {phi: k for k, phi in enumerate(dom)}
    bound = {psi: gamma - 1 for psi in cod}
    for phi, psi, prog in t.steps(r, i):
        cap = f[pos[phi]] - (1 if prog else 0)
        if cap < bound[psi]:
            bound[psi] = cap
    if any(b < 0 for b in bound.values()):
        return None
    return tuple(bound[psi] for psi in cod)


def build_lifted_graph(c: PreProof, t: TraceStructure, gamma: int, budget: int = DEFAULT_BUDGET) -> LiftedGraph:
    _check_budget(c, t, gamma, budget)
    check_trace_structure(c, t)
    fm = _formula_table(c, t)
    nodes = tuple((n, f) for n in c.nodes for f in itertools.product(range(gamma), repeat=len(fm[n])))
    edges = []
    for n in c.nodes:
        r = c.rule_of[n]
        for f in itertools.product(range(gamma), repeat=len(fm[n])):
            for i, m in enumerate(c.children_of[n]):
                top = _successor_bounds(t, r, i, fm[n], fm[m], f, gamma)
                if top is None:
                    continue
                for g in itertools.product(*(range(b + 1) for b in top)):
                    edges.append(((n, f), i, (m, g)))
    return LiftedGraph(fm, nodes, tuple(edges))


def annotation_morphism(t: TraceStructure, gamma: int) -> ProofSystemMorphism:
    """The forgetful morphism from the annotated system down to the base one.

    Judgements above ``s`` are ``(s, f)`` with ``f`` a tuple of values below
    ``gamma`` aligned with the sorted formulas of ``s``. The rule above
    ``(r, f)`` has one premise per compatible pair ``(i, g)``.
    """

    def fiber(s):
        k = len(t.fml(s))
        return [(s, f) for f in itertools.product(range(gamma), repeat=k)]

    cache: dict = {}

    def lift_with_index(r, s2):
        if (r, s2) in cache:
            return cache[(r, s2)]
        s, f = s2
        fa = dict(zip(sorted_tokens(t.fml(s)), f))
        prems, idx = [], []
        for i, p in enumerate(r.premises):
            cod = sorted_tokens(t.fml(p))
            for g in itertools.product(range(gamma), repeat=len(cod)):
                if lifted_edge_ok(t, r, i, fa, dict(zip(cod, g))):
                    prems.append((p, g))
                    idx.append(i)
        cache[(r, s2)] = RuleInstance((r, f), r.schema, s2, tuple(prems)), tuple(idx)
        return cache[(r, s2)]

    def lift(r, s2):
        return lift_with_index(r, s2)[0]

    def premise_index(r2):
        return lift_with_index(r2.rule_id[0], r2.conclusion)[1]

    return ProofSystemMorphism(
        on_judgement=lambda s2: s2[0],
        fiber=fiber,
        lift_rule=lift,
        on_rule=lambda r2: r2.rule_id[0],
        on_premise_index=premise_index,
    )


def _lift_search_graph(c, t, gamma, fm):
    """Lifted nodes with only the pointwise-largest successor along each edge.

    A larger annotation can mimic every move of a smaller one, so this graph
    has a cycle iff the full lifted graph does, and its edges are genuine
    lifted edges.
    """
    succ: dict = {}
    for n in c.nodes:
        r = c.rule_of[n]
        for f in itertools.product(range(gamma), repeat=len(fm[n])):
            out = []
            for i, m in enumerate(c.children_of[n]):
                top = _successor_bounds(t, r, i, fm[n], fm[m], f, gamma)
                if top is not None:
                    out.append((i, (m, top)))
            succ[(n, f)] = out
    return succ


def refute_gtc_via_lift(c: PreProof, t: TraceStructure, gamma: int,
                        budget: int = DEFAULT_BUDGET) -> RefutationCertificate | None:
    """A certificate iff the lifted graph at ``gamma`` has a cycle."""
    _check_budget(c, t, gamma, budget)
    check_trace_structure(c, t)
    fm = _formula_table(c, t)
    labelled = _lift_search_graph(c, t, gamma, fm)
    succ = {v: [w for _, w in out] for v, out in labelled.items()}
    cyc = find_cycle(succ)
    if cyc is None:
        return None
    positions, annotations = [], []
    for k, v in enumerate(cyc):
        w = cyc[(k + 1) % len(cyc)]
        i = next(i for i, u in labelled[v] if u == w)
        positions.append((v[0], i))
        annotations.append(dict(zip(fm[v[0]], (Ordinal.of(x) for x in v[1]))))
    return RefutationCertificate(tuple(positions), tuple(annotations))


def sufficient_gamma(c: PreProof, t: TraceStructure) -> int:
    maxf = max((len(t.fml(j)) for j in c.judgement_of), default=0)
    return len(c) * (1 + maxf) + 1


def decide_gtc_via_lift(c: PreProof, t: TraceStructure, budget: int = DEFAULT_BUDGET) -> GtcVerdict:
    gamma = sufficient_gamma(c, t)
    cert = refute_gtc_via_lift(c, t, gamma, budget)
    if cert is None:
        return GtcVerdict(True)
    lasso = Lasso(shortest_path_edges(c, cert.cycle[0][0]), cert.cycle)
    return GtcVerdict(False, lasso, certificate=cert)


def verify_refutation(c: PreProof, t: TraceStructure, cert: RefutationCertificate) -> bool:
    """The cycle must exist and every consecutive annotation pair must pass."""
    L = len(cert.cycle)
    for k, (n, i) in enumerate(cert.cycle):
        if not 0 <= n < len(c) or not 0 <= i < len(c.children_of[n]):
            return False
        if c.children_of[n][i] != cert.cycle[(k + 1) % L][0]:
            return False
    for k, (n, i) in enumerate(cert.cycle):
        f, g = cert.annotations[k], cert.annotations[(k + 1) % L]
        try:
            if not lifted_edge_ok(t, c.rule_of[n], i, f, g):
                return False
        except IllTypedAnnotation:
            return False
    return True


# -- heights -----------------------------------------------------------------


def lasso_heights(c: PreProof, t: TraceStructure, lasso: Lasso) -> dict[tuple[int, object], Ordinal]:
    """Heights of ``(position, formula)`` on a non-progressing lasso.

    Positions index ``prefix + cycle``; the position after the last one is
    the start of the cycle. A height is the sup of ``height + 1`` over the
    positions reachable by a trace segment whose only progressing step is
    its last one.
    """
    lasso.check(c)
    if has_progressing_trace(c, t, lasso.cycle):
        raise NonApplicable("the lasso carries an infinitely progressing trace")
    path = lasso.prefix + lasso.cycle
    P = len(path)
    start = len(lasso.prefix)

    def nxt(k):
        return k + 1 if k + 1 < P else start

    states = [(k, phi) for k, (n, _) in enumerate(path) for phi in sorted_tokens(t.fml(c.judgement_of[n]))]
    step_arcs: dict = {s: [] for s in states}
    for k, (n, i) in enumerate(path):
        for phi, psi, prog in t.steps(c.rule_of[n], i):
            step_arcs[(k, phi)].append(((nxt(k), psi), bool(prog)))

    def progress_targets(s):
        seen, todo, out = {s}, [s], set()
        while todo:
            v = todo.pop()
            for w, prog in step_arcs[v]:
                if prog:
                    out.add(w)
                elif w not in seen:
                    seen.add(w)
                    todo.append(w)
        return out

    jumps = {s: sorted(progress_targets(s), key=repr) for s in states}
    height: dict = {}
    on_path: set = set()
    for s0 in states:
        if s0 in height:
            continue
        work = [(s0, iter(jumps[s0]))]
        on_path.add(s0)
        while work:
            v, it = work[-1]
            for w in it:
                if w in on_path:
                    raise AssertionError("height graph has a cycle on a non-progressing lasso")
                if w not in height:
                    on_path.add(w)
                    work.append((w, iter(jumps[w])))
                    break
            else:
                height[v] = ord_sup_plus_one(height[w] for w in jumps[v])
                on_path.discard(v)
                work.pop()
    return height


def certificate_from_heights(c: PreProof, t: TraceStructure, lasso: Lasso) -> RefutationCertificate:
    height = lasso_heights(c, t, lasso)
    start = len(lasso.prefix)
    anns = []
    for k, (n, _) in enumerate(lasso.cycle):
        anns.append({phi: height[(start + k, phi)] for phi in t.fml(c.judgement_of[n])})
    return RefutationCertificate(lasso.cycle, tuple(anns))


def lifted_cycle_exists_full(c: PreProof, t: TraceStructure, gamma: int, budget: int = DEFAULT_BUDGET) -> bool:
    """Cycle search on the fully enumerated lifted graph (slow; for cross-checks)."""
    g = build_lifted_graph(c, t, gamma, budget)
    succ: dict = {v: [] for v in g.nodes}
    for a, _, b in g.edges:
        succ[a].append(b)
    return find_cycle(succ) is not None


def annotation_values(cert: RefutationCertificate, formulas: Mapping[NodeId, Sequence]) -> list[list[Ordinal]]:
    """Annotations as value lists in canonical formula order, for serialisation."""
    return [[Ordinal.of(ann[phi]) for phi in formulas[n]] for (n, _), ann in zip(cert.cycle, cert.annotations)]

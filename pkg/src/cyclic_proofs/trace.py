"""Trace structures and the global trace condition (GTC).

Two deciders live here:

* :func:`decide_gtc` builds the composition closure of progress-annotated
  matrices along the labelled graph and looks for an idempotent cyclic
  matrix without a progressing self-arc (the size-change criterion);
* :func:`brute_force_gtc` enumerates lassos up to a length bound and checks
  each periodic path directly in a product graph.

Base change of pre-proofs and trace structures along proof-system morphisms
is at the end of the module.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .core import (
    Judgement,
    NodeId,
    PreProof,
    RuleInstance,
    is_well_founded,
    shortest_path_edges,
    strongly_connected_components,
)

FormulaToken = Hashable


class TraceStep(NamedTuple):
    source: FormulaToken
    target: FormulaToken
    progressing: bool = False


def token_key(token) -> tuple:
    """Deterministic ordering for heterogeneous formula tokens."""
    return (str(token), repr(token))


def sorted_tokens(tokens: Iterable[FormulaToken]) -> tuple:
    return tuple(sorted(tokens, key=token_key))


@dataclass(frozen=True)
class TraceStructure:
    """``fml`` gives the formulas of a judgement, ``steps`` the registered
    trace steps of ``(rule instance, premise index)``."""

    fml: Callable[[Judgement], frozenset]
    steps: Callable[[RuleInstance, int], frozenset]

    @classmethod
    def from_tables(
        cls,
        fml: Mapping[Judgement, Iterable[FormulaToken]],
        steps: Mapping[tuple[Hashable, int], Iterable],
        *,
        key: Callable[[RuleInstance], Hashable] = lambda r: r.rule_id,
    ) -> "TraceStructure":
        """Tables keyed by judgement and by ``(key(rule), index)``.

        Missing judgements have no formulas, missing rules no steps.
        """
        fml_t = {s: frozenset(v) for s, v in fml.items()}
        step_t = {k: frozenset(TraceStep(*st) for st in v) for k, v in steps.items()}
        return cls(
            fml=lambda s: fml_t.get(s, frozenset()),
            steps=lambda r, i: step_t.get((key(r), i), frozenset()),
        )


class IllTypedTraceStructure(ValueError):
    pass


def check_trace_structure(c: PreProof, t: TraceStructure) -> None:
    """Every registered step must connect formulas of the right judgements."""
    for n in c.nodes:
        r = c.rule_of[n]
        src = t.fml(r.conclusion)
        for i in range(r.arity):
            tgt = t.fml(r.premises[i])
            for st in t.steps(r, i):
                if st.source not in src:
                    raise IllTypedTraceStructure(
                        f"node {n}: step source {st.source} not a formula of {r.conclusion}")
                if st.target not in tgt:
                    raise IllTypedTraceStructure(
                        f"node {n}: step target {st.target} not a formula of premise {i}")


# -- matrices ----------------------------------------------------------------


@dataclass(frozen=True)
class TraceMatrix:
    """A progress-annotated relation; a pair may carry both kinds of arc."""

    domain: frozenset
    codomain: frozenset
    arcs: frozenset = frozenset()

    def __post_init__(self):
        for a, b, p in self.arcs:
            if a not in self.domain or b not in self.codomain:
                raise ValueError(f"arc {a!r} -> {b!r} outside domain/codomain")

    @classmethod
    def identity(cls, formulas: Iterable[FormulaToken]) -> "TraceMatrix":
        fs = frozenset(formulas)
        return cls(fs, fs, frozenset((f, f, False) for f in fs))

    def has_progressing_self_arc(self) -> bool:
        return any(p and a == b for a, b, p in self.arcs)


class DomainMismatch(ValueError):
    pass


class PremiseIndexError(IndexError):
    pass


def step_matrix(t: TraceStructure, r: RuleInstance, i: int) -> TraceMatrix:
    if not 0 <= i < r.arity:
        raise PremiseIndexError(f"premise index {i} out of range for arity {r.arity}")
    arcs = frozenset((st.source, st.target, bool(st.progressing)) for st in t.steps(r, i))
    return TraceMatrix(frozenset(t.fml(r.conclusion)), frozenset(t.fml(r.premises[i])), arcs)


def compose(m1: TraceMatrix, m2: TraceMatrix) -> TraceMatrix:
    if m1.codomain != m2.domain:
        raise DomainMismatch("codomain of the first matrix differs from the domain of the second")
    out_of: dict = {}
    for b, c, p in m2.arcs:
        out_of.setdefault(b, []).append((c, p))
    arcs = set()
    for a, b, p1 in m1.arcs:
        for c, p2 in out_of.get(b, ()):
            arcs.add((a, c, p1 or p2))
    return TraceMatrix(m1.domain, m2.codomain, frozenset(arcs))


# -- verdicts ----------------------------------------------------------------


@dataclass(frozen=True)
class Lasso:
    """The periodic path ``prefix . cycle^omega``.

    Both parts are sequences of ``(node, premise index)``; the cycle's last
    edge leads back to its first node and the prefix ends where it starts.
    """

    prefix: tuple[tuple[NodeId, int], ...]
    cycle: tuple[tuple[NodeId, int], ...]

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("a lasso needs a nonempty cycle")

    def check(self, c: PreProof) -> None:
        path = self.prefix + self.cycle
        for k, (n, i) in enumerate(path):
            if not 0 <= i < len(c.children_of[n]):
                raise ValueError(f"lasso step {k}: node {n} has no premise {i}")
            nxt = path[k + 1][0] if k + 1 < len(path) else self.cycle[0][0]
            if c.children_of[n][i] != nxt:
                raise ValueError(f"lasso step {k}: premise {i} of node {n} is not node {nxt}")

    def __len__(self):
        return len(self.prefix) + len(self.cycle)

    def __str__(self):
        fmt = lambda part: " ".join(f"{n}/{i}" for n, i in part)  # noqa: E731
        return f"prefix: {fmt(self.prefix)}".rstrip() + f"\ncycle: {fmt(self.cycle)}"


@dataclass(frozen=True)
class GtcVerdict:
    holds: bool
    counterexample: Lasso | None = None
    certificate: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.holds != (self.counterexample is None):
            raise ValueError("a counterexample is present exactly when the GTC fails")

    def __bool__(self):
        return self.holds


# -- closure decider ---------------------------------------------------------

# A matrix over indexed formula lists is a tuple of rows; row k is the pair
# (non-progressing target bitmask, progressing target bitmask).


def _compose_rows(m1, m2):
    out = []
    for np1, p1 in m1:
        np_row = p_row = 0
        k = 0
        bits = np1 | p1
        while bits:
            if bits & 1:
                np2, p2 = m2[k]
                if (np1 >> k) & 1:
                    np_row |= np2
                    p_row |= p2
                if (p1 >> k) & 1:
                    p_row |= np2 | p2
            bits >>= 1
            k += 1
        out.append((np_row, p_row))
    return tuple(out)


def _edge_rows(t: TraceStructure, r: RuleInstance, i: int, dom: Sequence, cod: Sequence):
    pos_d = {f: k for k, f in enumerate(dom)}
    pos_c = {f: k for k, f in enumerate(cod)}
    rows = [[0, 0] for _ in dom]
    for st in t.steps(r, i):
        try:
            a, b = pos_d[st.source], pos_c[st.target]
        except KeyError:
            raise IllTypedTraceStructure(f"ill-typed step {st} for rule {r} premise {i}") from None
        rows[a][1 if st.progressing else 0] |= 1 << b
    return tuple((np_, p_) for np_, p_ in rows)


def _is_failing_idempotent(m) -> bool:
    if _compose_rows(m, m) != m:
        return False
    return not any((p >> k) & 1 for k, (_, p) in enumerate(m))


@dataclass
class ClosureStats:
    matrices: int = 0
    bound: int = 0


def decide_gtc(c: PreProof, t: TraceStructure, stats: ClosureStats | None = None) -> GtcVerdict:
    """Decide the GTC by composition closure.

    Fails iff some node ``n`` has a matrix ``M`` realised by a cycle through
    ``n`` with ``M;M = M`` and no progressing self-arc; the counterexample is
    a lasso whose cycle realises ``M``.
    """
    fmls = {n: sorted_tokens(t.fml(c.judgement_of[n])) for n in c.nodes}
    check_trace_structure(c, t)
    edges = []
    for n in c.nodes:
        r = c.rule_of[n]
        for i, m in enumerate(c.children_of[n]):
            edges.append((n, i, m, _edge_rows(t, r, i, fmls[n], fmls[m])))
    out_edges: dict[NodeId, list] = {n: [] for n in c.nodes}
    for e in edges:
        out_edges[e[0]].append(e)

    maxf = max((len(v) for v in fmls.values()), default=0)
    per_pair_bound = 4 ** (maxf * maxf)
    # closure[(a, b)][M] = (parent key or None, edge): back-pointers for witnesses
    closure: dict[tuple[NodeId, NodeId], dict] = {}
    queue: deque = deque()
    for n, i, m, rows in edges:
        slot = closure.setdefault((n, m), {})
        if rows not in slot:
            slot[rows] = (None, (n, i))
            queue.append((n, m, rows))
    while queue:
        a, b, M = queue.popleft()
        for _, i, d, rows in out_edges[b]:
            M2 = _compose_rows(M, rows)
            slot = closure.setdefault((a, d), {})
            if M2 not in slot:
                slot[M2] = ((a, b, M), (b, i))
                if len(slot) > per_pair_bound:
                    raise AssertionError("composition closure exceeded its finite bound")
                queue.append((a, d, M2))
    if stats is not None:
        stats.matrices = sum(len(v) for v in closure.values())
        stats.bound = len(fmls) ** 2 * per_pair_bound

    def witness(a, b, M):
        path = []
        key = (a, b, M)
        while key is not None:
            parent, edge = closure[(key[0], key[1])][key[2]]
            path.append(edge)
            key = parent
        return tuple(reversed(path))

    for n in c.nodes:
        for M in closure.get((n, n), {}):
            if _is_failing_idempotent(M):
                cycle = witness(n, n, M)
                return GtcVerdict(False, Lasso(shortest_path_edges(c, n), cycle))
    return GtcVerdict(True)


# -- brute force oracle ------------------------------------------------------


def _node_distances(c: PreProof) -> dict[NodeId, int]:
    dist = {r: 0 for r in c.roots}
    frontier = list(dict.fromkeys(c.roots))
    while frontier:
        nxt = []
        for n in frontier:
            for m in c.children_of[n]:
                if m not in dist:
                    dist[m] = dist[n] + 1
                    nxt.append(m)
        frontier = nxt
    return dist


def iter_cycles(c: PreProof, bound: int) -> Iterator[tuple[tuple[NodeId, int], ...]]:
    """Closed walks ``v`` such that some rotation of ``v`` forms a lasso of
    length at most ``bound`` with a shortest prefix.

    Each rotation class is produced from its least node (possibly several
    times if that node repeats).
    """
    dist = _node_distances(c)
    reach = sorted(dist)
    for s in reach:
        floor = min(dist[n] for n in reach if n >= s)
        budget = bound - floor
        if budget < 1:
            continue
        path: list[tuple[NodeId, int]] = []
        # stack of (node, next premise index to try, min distance seen so far)
        stack = [(s, 0, dist[s])]
        while stack:
            n, i, dmin = stack[-1]
            kids = c.children_of[n]
            if i >= len(kids) or len(path) >= budget:
                stack.pop()
                if path:
                    path.pop()
                continue
            stack[-1] = (n, i + 1, dmin)
            m = kids[i]
            if m < s:
                continue
            path.append((n, i))
            if m == s and len(path) + dmin <= bound:
                yield tuple(path)
            stack.append((m, 0, min(dmin, dist[m])))


def iter_lassos(c: PreProof, bound: int) -> Iterator[Lasso]:
    for cyc in iter_cycles(c, bound):
        yield Lasso(shortest_path_edges(c, cyc[0][0]), cyc)


def lasso_product_graph(c: PreProof, t: TraceStructure, cycle: Sequence[tuple[NodeId, int]]):
    """Product of the cycle positions with formulas.

    Returns ``(succ, prog_arcs)``: successor lists over ``(position, formula)``
    and the set of progressing arcs.
    """
    L = len(cycle)
    succ: dict = {}
    prog = set()
    for k, (n, i) in enumerate(cycle):
        for f in t.fml(c.judgement_of[n]):
            succ.setdefault((k, f), [])
        r = c.rule_of[n]
        k2 = (k + 1) % L
        for st in t.steps(r, i):
            a, b = (k, st.source), (k2, st.target)
            succ.setdefault(a, []).append(b)
            succ.setdefault(b, [])
            if st.progressing:
                prog.add((a, b))
    return succ, prog


def has_progressing_trace(c: PreProof, t: TraceStructure, cycle: Sequence[tuple[NodeId, int]]) -> bool:
    """Does ``cycle^omega`` carry an infinitely progressing trace on some suffix?"""
    succ, prog = lasso_product_graph(c, t, cycle)
    comp_of = {}
    for k, comp in enumerate(strongly_connected_components(succ)):
        for v in comp:
            comp_of[v] = k
    return any(comp_of[a] == comp_of[b] for a, b in prog)


def lasso_has_progressing_trace(c: PreProof, t: TraceStructure, lasso: Lasso) -> bool:
    lasso.check(c)
    return has_progressing_trace(c, t, lasso.cycle)


def default_bound(c: PreProof, t: TraceStructure) -> int:
    maxf = max((len(t.fml(j)) for j in c.judgement_of), default=0)
    return len(c) * (1 + maxf)


def count_closed_walks(c: PreProof, bound: int) -> int:
    """Upper bound on the closed walks :func:`iter_cycles` visits at ``bound``."""
    total = 0
    for s in c.nodes:
        counts = {s: 1}
        for _ in range(bound):
            nxt: dict = {}
            for v, k in counts.items():
                for m in c.children_of[v]:
                    if m >= s:
                        nxt[m] = nxt.get(m, 0) + k
            counts = nxt
            total += counts.get(s, 0)
    return total


class BruteForceBudgetExceeded(RuntimeError):
    pass


def brute_force_gtc(c: PreProof, t: TraceStructure, bound: int | None = None,
                    max_walks: int | None = None) -> GtcVerdict:
    """Check every lasso of length at most ``bound`` in its product graph.

    The number of lassos is exponential in ``bound``; with ``max_walks`` set,
    inputs with more closed walks than that are refused up front.
    """
    if bound is None:
        bound = default_bound(c, t)
    if bound < 1:
        raise ValueError("bound must be at least 1")
    if max_walks is not None:
        walks = count_closed_walks(c, bound)
        if walks > max_walks:
            raise BruteForceBudgetExceeded(f"{walks} closed walks exceed the budget of {max_walks}")
    for cyc in iter_cycles(c, bound):
        if not has_progressing_trace(c, t, cyc):
            return GtcVerdict(False, Lasso(shortest_path_edges(c, cyc[0][0]), cyc))
    return GtcVerdict(True)


def identity_trace_structure() -> TraceStructure:
    """One formula per judgement, identity steps, nothing progressing."""
    return TraceStructure(
        fml=lambda s: frozenset([("id", s)]),
        steps=lambda r, i: frozenset([TraceStep(("id", r.conclusion), ("id", r.premises[i]), False)]),
    )


def check_recursive_via_gtc(c: PreProof) -> bool:
    return decide_gtc(c, identity_trace_structure()).holds


# -- base change -------------------------------------------------------------


class MorphismError(ValueError):
    pass


@dataclass(frozen=True)
class ProofSystemMorphism:
    """A morphism ``P' -> P`` of discrete proof systems.

    ``fiber(s)`` lists the judgements of ``P'`` over ``s``; ``lift_rule(r, s')``
    is the unique rule of ``P'`` over ``s'`` mapped to ``r``; and
    ``on_premise_index(r')[i']`` is the premise of ``on_rule(r')`` that ``i'``
    lies over.
    """

    on_judgement: Callable[[Judgement], Judgement]
    fiber: Callable[[Judgement], Iterable[Judgement]]
    lift_rule: Callable[[RuleInstance, Judgement], RuleInstance]
    on_rule: Callable[[RuleInstance], RuleInstance]
    on_premise_index: Callable[[RuleInstance], Sequence[int]]

    @classmethod
    def identity(cls) -> "ProofSystemMorphism":
        return cls(
            on_judgement=lambda s: s,
            fiber=lambda s: (s,),
            lift_rule=lambda r, s: r,
            on_rule=lambda r: r,
            on_premise_index=lambda r: tuple(range(r.arity)),
        )


def check_morphism_on(f: ProofSystemMorphism, r: RuleInstance, s2: Judgement) -> RuleInstance:
    """Lift ``r`` to ``s2`` and check the commuting squares; returns the lift."""
    if f.on_judgement(s2) != r.conclusion:
        raise MorphismError(f"{s2} does not lie over {r.conclusion}")
    r2 = f.lift_rule(r, s2)
    if r2.conclusion != s2:
        raise MorphismError(f"lift of {r} over {s2} concludes {r2.conclusion}")
    if f.on_rule(r2) != r:
        raise MorphismError(f"lift of {r} over {s2} maps back to {f.on_rule(r2)}")
    idx = tuple(f.on_premise_index(r2))
    if len(idx) != r2.arity:
        raise MorphismError(f"premise index map of {r2} has the wrong length")
    for i2, i in enumerate(idx):
        if not 0 <= i < r.arity:
            raise MorphismError(f"premise {i2} of {r2} maps outside the arity of {r}")
        if f.on_judgement(r2.premises[i2]) != r.premises[i]:
            raise MorphismError(f"premise square fails at {r2}, premise {i2}")
    return r2


def reindex_preproof(f: ProofSystemMorphism, c: PreProof) -> PreProof:
    """Pull ``c`` back along ``f``.

    Nodes are the pairs ``(n, s')`` with ``s'`` over ``judgement_of(n)``,
    recorded in ``names``. Roots are the lifts of ``c``'s roots, extended by
    the least unreached nodes until every node is reachable.
    """
    pairs: list[tuple[NodeId, Judgement]] = []
    index: dict[tuple[NodeId, Judgement], int] = {}
    for n in c.nodes:
        for s2 in f.fiber(c.judgement_of[n]):
            if (n, s2) in index:
                continue
            index[(n, s2)] = len(pairs)
            pairs.append((n, s2))
    judgements, rules, children = [], [], []
    for n, s2 in pairs:
        r2 = check_morphism_on(f, c.rule_of[n], s2)
        idx = f.on_premise_index(r2)
        kids = []
        for i2, i in enumerate(idx):
            key = (c.children_of[n][i], r2.premises[i2])
            if key not in index:
                raise MorphismError(f"premise {r2.premises[i2]} missing from the fiber it lies in")
            kids.append(index[key])
        judgements.append(s2)
        rules.append(r2)
        children.append(tuple(kids))
    roots = [index[(r, s2)] for r in c.roots for s2 in f.fiber(c.judgement_of[r])]
    seen: set[int] = set()

    def mark(starts):
        todo = list(starts)
        while todo:
            v = todo.pop()
            if v not in seen:
                seen.add(v)
                todo.extend(children[v])

    mark(roots)
    for v in range(len(pairs)):
        if v not in seen:
            roots.append(v)
            mark([v])
    return PreProof(tuple(judgements), tuple(rules), tuple(children), tuple(roots), names=tuple(pairs))


def pullback_trace_structure(f: ProofSystemMorphism, t: TraceStructure) -> TraceStructure:
    def fml(s2):
        return t.fml(f.on_judgement(s2))

    def steps(r2, i2):
        return t.steps(f.on_rule(r2), tuple(f.on_premise_index(r2))[i2])

    return TraceStructure(fml=fml, steps=steps)


__all__ = [
    "TraceStep", "TraceStructure", "TraceMatrix", "Lasso", "GtcVerdict", "ProofSystemMorphism",
    "step_matrix", "compose", "decide_gtc", "brute_force_gtc", "check_recursive_via_gtc",
    "reindex_preproof", "pullback_trace_structure", "iter_lassos", "lasso_has_progressing_trace",
    "has_progressing_trace", "identity_trace_structure", "check_trace_structure", "default_bound",
    "count_closed_walks", "BruteForceBudgetExceeded", "IllTypedTraceStructure", "DomainMismatch", "PremiseIndexError", "MorphismError", "is_well_founded",
]

"""Seeded random inputs: pre-proofs with trace structures, graphs, streams,
proof-system morphisms, formulas and transition systems."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Hashable

from .core import PreProof, RuleInstance, is_well_founded
from .ds import StreamSpec
from .mucalc.calculus import Sequent
from .mucalc.fixtures import build_preproof
from .mucalc.semantics import LTS
from .mucalc.syntax import And, Box, Diamond, Mu, NProp, Nu, Or, Prop, Var, canonical
from .trace import ProofSystemMorphism, TraceStep, TraceStructure


def _ensure_roots(children) -> tuple[int, ...]:
    """Root 0 plus the least unreached node, repeatedly, until all are reached."""
    seen: set[int] = set()
    roots = []

    def mark(v):
        todo = [v]
        while todo:
            u = todo.pop()
            if u not in seen:
                seen.add(u)
                todo.extend(children[u])

    for v in range(len(children)):
        if v not in seen:
            roots.append(v)
            mark(v)
    return tuple(roots)


def random_shape(rng: random.Random, n: int, acyclic: bool = False, max_arity: int = 2) -> list[tuple[int, ...]]:
    """Children lists for ``n`` nodes; arities lean towards 1."""
    weights = [1, 3, 1, 1][: max_arity + 1]
    shape = []
    for v in range(n):
        arity = rng.choices(range(len(weights)), weights)[0]
        if acyclic:
            targets = list(range(v + 1, n))
            arity = min(arity, len(targets)) if targets else 0
            shape.append(tuple(rng.choice(targets) for _ in range(arity)))
        else:
            shape.append(tuple(rng.randrange(n) for _ in range(arity)))
    return shape


def preproof_from_shape(shape) -> PreProof:
    """One judgement ``s<v>`` and one rule ``r<v>`` per node."""
    nodes = []
    for v, kids in enumerate(shape):
        rule = RuleInstance(f"r{v}", "rule", f"s{v}", tuple(f"s{k}" for k in kids))
        nodes.append((f"s{v}", rule, kids))
    return PreProof.build(nodes, roots=_ensure_roots(shape))


def random_graph(rng: random.Random, max_nodes: int = 8, acyclic: bool | None = None) -> PreProof:
    n = rng.randint(1, max_nodes)
    if acyclic is None:
        acyclic = rng.random() < 0.5
    return preproof_from_shape(random_shape(rng, n, acyclic))


def random_trace_structure(rng: random.Random, c: PreProof, max_fml: int = 3,
                           density: float = 0.45, prog_rate: float = 0.3) -> TraceStructure:
    """Formulas ``f0 .. f<k-1>`` per judgement, random steps and progress flags.

    A pair may receive both a progressing and a non-progressing step.
    """
    fml = {s: [f"f{k}" for k in range(rng.randint(0, max_fml))] for s in dict.fromkeys(c.judgement_of)}
    steps: dict = {}
    for n in c.nodes:
        r = c.rule_of[n]
        for i, p in enumerate(r.premises):
            out = []
            for a in fml[r.conclusion]:
                for b in fml[p]:
                    if rng.random() < density:
                        prog = rng.random() < prog_rate
                        out.append(TraceStep(a, b, prog))
                        if prog and rng.random() < 0.2:
                            out.append(TraceStep(a, b, False))
            steps[(r.rule_id, i)] = out
    return TraceStructure.from_tables(fml, steps)


def random_preproof(rng: random.Random, max_nodes: int = 6, max_fml: int = 3) -> tuple[PreProof, TraceStructure]:
    c = random_graph(rng, max_nodes, acyclic=rng.random() < 0.15)
    return c, random_trace_structure(rng, c, max_fml)


def random_stream(rng: random.Random, max_prefix: int = 4, max_period: int = 6, max_value: int = 9) -> StreamSpec:
    prefix = [rng.randint(0, max_value) for _ in range(rng.randint(0, max_prefix))]
    period = [rng.randint(0, max_value) for _ in range(rng.randint(1, max_period))]
    return StreamSpec(prefix, period)


# -- morphisms ---------------------------------------------------------------


@dataclass(frozen=True)
class CopyMorphism:
    """A system over ``P`` whose judgements are copies ``(s, j)``.

    Over a rule ``r`` and copy ``(s, j)`` there is one rule whose premises are
    the copies listed in ``links[(r, j, i)]`` for each premise ``i`` of ``r``;
    an empty list drops that premise.
    """

    copies: dict
    links: dict

    def morphism(self) -> ProofSystemMorphism:
        def premises_of(r, j):
            prems, idx = [], []
            for i, p in enumerate(r.premises):
                for j2 in self.links[(r, j, i)]:
                    prems.append((p, j2))
                    idx.append(i)
            return tuple(prems), tuple(idx)

        def lift(r, s2):
            return RuleInstance((r, s2[1]), r.schema, s2, premises_of(r, s2[1])[0])

        return ProofSystemMorphism(
            on_judgement=lambda s2: s2[0],
            fiber=lambda s: [(s, j) for j in range(self.copies[s])],
            lift_rule=lift,
            on_rule=lambda r2: r2.rule_id[0],
            on_premise_index=lambda r2: premises_of(r2.rule_id[0], r2.rule_id[1])[1],
        )


def random_morphism(rng: random.Random, c: PreProof, max_copies: int = 2) -> CopyMorphism:
    copies: dict[Hashable, int] = {s: rng.randint(1, max_copies) for s in dict.fromkeys(c.judgement_of)}
    links = {}
    for r in dict.fromkeys(c.rule_of):
        for j in range(copies[r.conclusion]):
            for i, p in enumerate(r.premises):
                k = rng.choices([0, 1, 2], [1, 4, 2])[0]
                links[(r, j, i)] = tuple(sorted(rng.sample(range(copies[p]), min(k, copies[p]))))
    return CopyMorphism(copies, links)


# -- mu-calculus -------------------------------------------------------------


def random_formula(rng: random.Random, depth: int = 4, props=("p", "q"), actions=("a", "b"),
                   free=()):
    """A random formula of the given maximal depth, closed unless ``free`` is given."""
    counter = [0]

    def go(d, bound):
        leaves = ["p", "np"] + (["var"] if bound else [])
        if d <= 1:
            kind = rng.choice(leaves)
        else:
            kind = rng.choice(leaves + ["or", "and", "dia", "box", "mu", "nu", "mu", "nu"])
        match kind:
            case "p":
                return Prop(rng.choice(props))
            case "np":
                return NProp(rng.choice(props))
            case "var":
                return Var(rng.choice(bound))
            case "or":
                return Or(go(d - 1, bound), go(d - 1, bound))
            case "and":
                return And(go(d - 1, bound), go(d - 1, bound))
            case "dia":
                return Diamond(rng.choice(actions), go(d - 1, bound))
            case "box":
                return Box(rng.choice(actions), go(d - 1, bound))
        x = f"v{counter[0]}"
        counter[0] += 1
        body = go(d - 1, bound + [x])
        return Mu(x, body) if kind == "mu" else Nu(x, body)

    return canonical(go(depth, list(free)))


def random_lts(rng: random.Random, max_states: int = 5, actions=("a", "b"), props=("p", "q"),
               edge_rate: float = 0.3):
    n = rng.randint(1, max_states)
    trans = {a: {(s, t) for s in range(n) for t in range(n) if rng.random() < edge_rate} for a in actions}
    label = {p: {s for s in range(n) if rng.random() < 0.5} for p in props}
    return LTS(n, trans, label)


def mucalc_preproof_corpus(seed: int, count: int, depth: int = 3):
    """Built pre-proofs of random one- or two-formula sequents; only cyclic ones are kept."""
    rng = random.Random(seed)
    out = []
    attempts = 0
    while len(out) < count and attempts < 200 * count:
        attempts += 1
        gamma = Sequent(random_formula(rng, depth) for _ in range(rng.randint(1, 2)))
        c = build_preproof(gamma, max_nodes=30)
        if c is not None and not is_well_founded(c).well_founded:
            out.append(c)
    return out


__all__ = [
    "random_shape", "preproof_from_shape", "random_graph", "random_trace_structure", "random_preproof",
    "random_stream", "CopyMorphism", "random_morphism", "random_formula", "random_lts",
    "mucalc_preproof_corpus",
]

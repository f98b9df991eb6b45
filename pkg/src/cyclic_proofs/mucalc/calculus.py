"""The cyclic sequent calculus for the modal mu-calculus.

Sequents are finite sets of canonical formulas. Rule instances use the
schemas ``Ax``, ``Wk``, ``or``, ``and``, ``Mod``, ``mu`` and ``nu``; the
``rule_id`` of an instance is its principal formula.

The trace structure tracks marked sequents. A formula token is a pair
``(formula, address)`` naming a formula of the sequent and the ``nu`` binder
inside it that carries the mark. Marks move as follows:

* side formulas that survive into a premise keep their marks;
* ``or``/``and``/``Mod``: a mark inside the principal formula descends into
  the matching immediate subformula;
* ``sigma x.phi`` unfolding to ``phi[sigma x.phi/x]``: a mark on the
  principal binder itself (only possible for ``nu``) moves to the binder of
  each substituted copy and progresses; a mark inside ``phi`` stays put in the
  unfolded body and is also copied into each substituted copy, without
  progress;
* ``Ax`` and the dropped formula of ``Wk`` have no steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from ..core import Algebra, PreProof, ProofSystem, RuleInstance, strongly_connected_components
from ..trace import Lasso, TraceStep, TraceStructure, decide_gtc
from .semantics import LTS, is_valid_sequent
from .syntax import (
    And, Box, Diamond, Formula, Mu, NProp, Nu, Or, Prop,
    canonical, is_subformula, nu_addresses, render, unfold, var_occurrences,
)

SCHEMAS = ("Ax", "Wk", "or", "and", "Mod", "mu", "nu")


class Sequent(frozenset):
    """A finite set of formulas, rendered in sorted text order."""

    def __new__(cls, formulas: Iterable[Formula] = ()):
        return super().__new__(cls, formulas)

    def sorted(self) -> list[Formula]:
        return sorted(self, key=render)

    def __str__(self):
        return "{" + ", ".join(render(f) for f in self.sorted()) + "}"

    __repr__ = __str__


def sequent(*formulas) -> Sequent:
    return Sequent(formulas)


@dataclass(frozen=True)
class MarkedSequent:
    """A sequent with a mark on the ``nu`` binder at ``address`` inside ``formula``."""

    base: Sequent
    formula: Formula
    address: tuple[int, ...]

    def __post_init__(self):
        if self.formula not in self.base:
            raise ValueError(f"{self.formula} is not in {self.base}")
        if self.address not in nu_addresses(self.formula):
            raise ValueError(f"no nu binder at {self.address} in {self.formula}")

    def __str__(self):
        parts = [render(f, self.address if f == self.formula else None) for f in self.base.sorted()]
        return "{" + ", ".join(parts) + "}"


# -- rules -------------------------------------------------------------------


def _component(phi: Formula, k: int) -> Formula:
    return canonical(phi.children()[k])


def _principal_ok(gamma: Sequent, delta: Sequent, chi: Formula, added: Iterable[Formula]) -> bool:
    added = set(added)
    return delta == (gamma - {chi}) | added or delta == gamma | added


def validate_rule_instance(r: RuleInstance) -> bool:
    """Does ``r`` match its schema exactly?"""
    gamma = r.conclusion
    if not isinstance(gamma, frozenset) or any(not isinstance(p, frozenset) for p in r.premises):
        return False
    chi = r.rule_id
    match r.schema:
        case "Ax":
            if r.premises or len(gamma) != 2:
                return False
            props = [f for f in gamma if isinstance(f, Prop)]
            if len(props) != 1 or NProp(props[0].name) not in gamma:
                return False
            return chi is None or chi == props[0]
        case "Wk":
            return r.arity == 1 and chi in gamma and r.premises[0] == gamma - {chi}
        case "or":
            return (r.arity == 1 and isinstance(chi, Or) and chi in gamma
                    and _principal_ok(gamma, r.premises[0], chi, (_component(chi, 0), _component(chi, 1))))
        case "and":
            return (r.arity == 2 and isinstance(chi, And) and chi in gamma
                    and all(_principal_ok(gamma, r.premises[k], chi, (_component(chi, k),)) for k in (0, 1)))
        case "mu" | "nu":
            kind = Mu if r.schema == "mu" else Nu
            return (r.arity == 1 and isinstance(chi, kind) and chi in gamma
                    and _principal_ok(gamma, r.premises[0], chi, (unfold(chi),)))
        case "Mod":
            if r.arity != 1 or not isinstance(chi, Box) or chi not in gamma:
                return False
            others = gamma - {chi}
            if any(not (isinstance(f, Diamond) and f.action == chi.action) for f in others):
                return False
            expected = {_component(f, 0) for f in others} | {_component(chi, 0)}
            return r.premises[0] == expected
    return False


def _principal_candidates(schema: str, gamma: Sequent) -> list:
    kinds = {"Ax": Prop, "Wk": Formula, "or": Or, "and": And, "Mod": Box, "mu": Mu, "nu": Nu}
    kind = kinds.get(schema)
    if kind is None:
        return []
    return [f for f in sorted(gamma, key=render) if isinstance(f, kind)]


def infer_rule_instance(schema: str, conclusion: Sequent, premises: Sequence[Sequent]) -> RuleInstance | None:
    """The valid instance of ``schema`` with the given sequents, choosing the
    first principal formula (in text order) that fits."""
    conclusion = Sequent(conclusion)
    premises = tuple(Sequent(p) for p in premises)
    for chi in _principal_candidates(schema, conclusion):
        r = RuleInstance(chi, schema, conclusion, premises)
        if validate_rule_instance(r):
            return r
    return None


def apply_rule(schema: str, conclusion: Sequent, principal: Formula | None = None) -> RuleInstance:
    """The instance of ``schema`` on ``conclusion`` that drops the principal formula."""
    gamma = Sequent(conclusion)
    chi = principal
    match schema:
        case "Ax":
            prems = ()
        case "Wk":
            prems = (Sequent(gamma - {chi}),)
        case "or":
            prems = (Sequent((gamma - {chi}) | {_component(chi, 0), _component(chi, 1)}),)
        case "and":
            prems = tuple(Sequent((gamma - {chi}) | {_component(chi, k)}) for k in (0, 1))
        case "mu" | "nu":
            prems = (Sequent((gamma - {chi}) | {unfold(chi)}),)
        case "Mod":
            prems = (Sequent({_component(f, 0) for f in gamma}),)
        case _:
            raise ValueError(f"unknown schema {schema!r}")
    r = RuleInstance(chi, schema, gamma, prems)
    if not validate_rule_instance(r):
        raise ValueError(f"{schema} does not apply to {gamma} with principal {chi}")
    return r


def mu_proof_system() -> ProofSystem:
    return ProofSystem("mucalc", validate=validate_rule_instance, fml=marked_tokens)


# -- marked trace structure --------------------------------------------------


@lru_cache(maxsize=None)
def _nu_addrs(phi: Formula) -> tuple:
    return tuple(nu_addresses(phi))


def marked_tokens(gamma) -> frozenset:
    """One token per marked sequent of ``gamma``."""
    return frozenset((f, a) for f in gamma for a in _nu_addrs(f))


def marked_sequents(gamma) -> list[MarkedSequent]:
    base = Sequent(gamma)
    return [MarkedSequent(base, f, a) for f, a in sorted(marked_tokens(gamma), key=lambda t: (render(t[0]), t[1]))]


def _principal_steps(r: RuleInstance, i: int):
    chi = r.rule_id
    out = []
    match r.schema:
        case "or":
            for a in _nu_addrs(chi):
                out.append(((chi, a), (_component(chi, a[0]), a[1:]), False))
        case "and":
            for a in _nu_addrs(chi):
                if a[0] == i:
                    out.append(((chi, a), (_component(chi, i), a[1:]), False))
        case "mu" | "nu":
            theta = unfold(chi)
            occ = var_occurrences(chi.body, chi.var)
            for a in _nu_addrs(chi):
                if a == ():
                    out.extend(((chi, a), (theta, o), True) for o in occ)
                else:
                    rest = a[1:]
                    out.append(((chi, a), (theta, rest), False))
                    out.extend(((chi, a), (theta, o + (0,) + rest), False) for o in occ)
    return out


@lru_cache(maxsize=4096)
def _mu_steps(r: RuleInstance, i: int) -> frozenset:
    gamma, delta = r.conclusion, r.premises[i]
    steps = set()
    if r.schema == "Ax":
        return frozenset()
    if r.schema == "Mod":
        for f in gamma:
            body = _component(f, 0)
            for a in _nu_addrs(f):
                steps.add(TraceStep((f, a), (body, a[1:]), False))
        return frozenset(steps)
    for f in gamma:
        if f in delta:
            for a in _nu_addrs(f):
                steps.add(TraceStep((f, a), (f, a), False))
    steps.update(TraceStep(*s) for s in _principal_steps(r, i))
    return frozenset(steps)


def mu_trace_structure(c: PreProof | None = None) -> TraceStructure:
    """Marked-sequent trace structure. It does not depend on ``c``; the
    argument is accepted so callers can pass the pre-proof it is used with."""
    return TraceStructure(fml=marked_tokens, steps=_mu_steps)


# -- formula-level threads ---------------------------------------------------


def _thread_arcs(r: RuleInstance, i: int):
    """Arcs ``(formula, formula', label)`` of the formula correspondence.

    ``label`` is the unfolded fixed-point formula on unfolding arcs, else None.
    """
    gamma, delta = r.conclusion, r.premises[i]
    if r.schema == "Ax":
        return []
    if r.schema == "Mod":
        return [(f, _component(f, 0), None) for f in gamma]
    out = [(f, f, None) for f in gamma if f in delta]
    chi = r.rule_id
    match r.schema:
        case "or":
            out += [(chi, _component(chi, 0), None), (chi, _component(chi, 1), None)]
        case "and":
            out.append((chi, _component(chi, i), None))
        case "mu" | "nu":
            out.append((chi, unfold(chi), chi))
    return out


_subformula = lru_cache(maxsize=None)(is_subformula)


def nu_thread_check(lasso: Lasso, c: PreProof) -> bool:
    """Does the periodic path of ``lasso`` carry a nu-thread?

    Threads live in the product of cycle positions and formulas. For each
    unfolded ``nu`` formula ``A`` we keep only the unfoldings of formulas that
    contain ``A`` as a subformula (``A`` is then the outermost binder unfolded
    on any cycle through the kept arcs) and look for an ``A`` unfolding inside
    a strongly connected component.
    """
    lasso.check(c)
    cycle = lasso.cycle
    L = len(cycle)
    arcs = []
    for k, (n, i) in enumerate(cycle):
        for f, g, lab in _thread_arcs(c.rule_of[n], i):
            arcs.append(((k, f), ((k + 1) % L, g), lab))
    nus = {lab for _, _, lab in arcs if isinstance(lab, Nu)}
    for A in sorted(nus, key=render):
        kept = [(a, b, lab) for a, b, lab in arcs if lab is None or _subformula(A, lab)]
        succ: dict = {}
        for a, b, _ in kept:
            succ.setdefault(a, []).append(b)
            succ.setdefault(b, [])
        comp_of = {}
        for idx, comp in enumerate(strongly_connected_components(succ)):
            for v in comp:
                comp_of[v] = idx
        if any(lab == A and comp_of[a] == comp_of[b] for a, b, lab in kept):
            return True
    return False


# -- semantics of proofs -----------------------------------------------------


class NotAProof(ValueError):
    """The pre-proof fails the GTC, so soundness says nothing about it."""

    def __init__(self, verdict):
        super().__init__(f"pre-proof fails the GTC:\n{verdict.counterexample}")
        self.verdict = verdict


def validity_algebra(K: LTS) -> Algebra:
    """Value ``"valid"`` for every sequent; evaluation refuses invalid conclusions."""
    def ev(r, values):
        if any(v != "valid" for v in values):
            raise ValueError("premise is not valid")
        if not is_valid_sequent(r.conclusion, K):
            raise ValueError(f"{r.conclusion} is not valid although its premises are")
        return "valid"

    return Algebra(ev)


@dataclass(frozen=True)
class SoundnessViolation:
    lts_index: int
    node: int
    sequent: Sequent

    def __str__(self):
        return f"LTS {self.lts_index}: node {self.node} sequent {self.sequent} is not valid"


@dataclass(frozen=True)
class SoundnessReport:
    checked: int
    violations: tuple[SoundnessViolation, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def soundness_harness(c: PreProof, Ks: Sequence[LTS]) -> SoundnessReport:
    """Check that every sequent of a GTC-satisfying pre-proof is valid on each LTS."""
    verdict = decide_gtc(c, mu_trace_structure(c))
    if not verdict.holds:
        raise NotAProof(verdict)
    bad = []
    checked = 0
    for k, K in enumerate(Ks):
        for n in c.nodes:
            checked += 1
            if not is_valid_sequent(c.judgement_of[n], K):
                bad.append(SoundnessViolation(k, n, c.judgement_of[n]))
    return SoundnessReport(checked, tuple(bad))


__all__ = [
    "SCHEMAS", "Sequent", "sequent", "MarkedSequent", "validate_rule_instance", "infer_rule_instance",
    "apply_rule", "mu_proof_system", "marked_tokens", "marked_sequents", "mu_trace_structure",
    "nu_thread_check", "NotAProof", "validity_algebra", "SoundnessViolation", "SoundnessReport",
    "soundness_harness",
]

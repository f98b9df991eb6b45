"""A deterministic pre-proof builder and the named fixture pre-proofs."""

from __future__ import annotations

from dataclasses import dataclass

from ..core import PreProof
from .calculus import Sequent, apply_rule
from .syntax import And, Box, Diamond, Fixpoint, NProp, Or, Prop, parse_sequent_formulas, render


def choose_rule(gamma: Sequent):
    """The builder's rule for ``gamma`` as ``(schema, principal)``, or None if stuck.

    Priority: axiom (weakening everything else away first), disjunction,
    fixed-point unfolding, conjunction, then a modal step after weakening
    formulas that do not fit it.
    """
    fs = gamma.sorted()
    for f in fs:
        if isinstance(f, Prop) and NProp(f.name) in gamma:
            if len(gamma) == 2:
                return "Ax", f
            extra = [g for g in fs if g not in (f, NProp(f.name))]
            return "Wk", extra[-1]
    for kind, schema in ((Or, "or"), (Fixpoint, None), (And, "and")):
        for f in fs:
            if isinstance(f, kind):
                return schema or type(f).__name__.lower(), f
    boxes = [f for f in fs if isinstance(f, Box)]
    if not boxes:
        return None
    box = boxes[0]
    for f in fs:
        if f != box and not (isinstance(f, Diamond) and f.action == box.action):
            return "Wk", f
    return "Mod", box


def build_preproof(root: Sequent, max_nodes: int = 200) -> PreProof | None:
    """Apply :func:`choose_rule` from ``root``, sharing nodes with equal sequents.

    Returns None when some sequent has no applicable rule or the graph grows
    beyond ``max_nodes``.
    """
    root = Sequent(root)
    index = {root: 0}
    order = [root]
    rules = []
    children = []
    k = 0
    while k < len(order):
        gamma = order[k]
        choice = choose_rule(gamma)
        if choice is None:
            return None
        r = apply_rule(choice[0], gamma, choice[1])
        kids = []
        for p in r.premises:
            if p not in index:
                if len(order) >= max_nodes:
                    return None
                index[p] = len(order)
                order.append(p)
            kids.append(index[p])
        rules.append(r)
        children.append(tuple(kids))
        k += 1
    return PreProof(tuple(order), tuple(rules), tuple(children), (0,))


@dataclass(frozen=True)
class Fixture:
    """A named root sequent with the expected GTC verdict of its built pre-proof.

    ``valid_but_unprovable`` marks pre-proofs that fail the GTC although their
    root sequent is valid: the builder just picked unhelpful rules.
    """

    name: str
    root: str
    gtc: bool
    valid_but_unprovable: bool = False

    def sequent(self) -> Sequent:
        return Sequent(parse_sequent_formulas(self.root))

    def preproof(self) -> PreProof:
        c = build_preproof(self.sequent())
        if c is None:
            raise ValueError(f"builder is stuck on fixture {self.name}")
        return c


FIXTURES = {
    f.name: f
    for f in [
        Fixture("p_notp", "p, ~p", True),
        Fixture("nu_box", "nu x.[a]x", True),
        Fixture("mu_box", "mu x.[a]x", False),
        # mu x.<a>x alone has no pre-proof (Mod needs a box); pair it with one.
        Fixture("mu_dia", "mu x.<a>x, mu y.[a]y", False),
        Fixture("nu_dia_mu_box", "nu x.<a>x, mu y.[a]y", True),
        Fixture("mu_dia_nu_box", "mu x.<a>x, nu y.[a]y", True),
        Fixture("nu_and", "nu x.([a]x & [b]x)", True),
        Fixture("nu_or_p", "nu x.([a]x | p), ~p", True),
        # valid everywhere, but the builder commits to the [a] box and loops on mu only
        Fixture("nested_nu_mu", "nu x.mu y.([a]y | [b]x)", False, valid_but_unprovable=True),
        Fixture("nested_mu_nu", "mu x.nu y.([a]y | [b]x)", True),
        Fixture("nu_box_and_p", "nu x.([a]x & (p | ~p))", True),
        Fixture("two_actions", "nu x.[a][b]x, <a>p", True),
        Fixture("mu_loop_valid", "mu x.x | nu y.y", False, valid_but_unprovable=True),
        Fixture("dia_box_pair", "nu x.<a>[b]x, mu y.[a]<b>y", True),
        Fixture("nu_nu", "nu x.nu y.[a]([b]x & [c]y)", True),
    ]
}


def fixture(name: str) -> PreProof:
    return FIXTURES[name].preproof()


def describe(c: PreProof) -> str:
    lines = []
    for n in c.nodes:
        r = c.rule_of[n]
        principal = "" if r.rule_id is None else f" @ {render(r.rule_id)}"
        kids = " ".join(str(k) for k in c.children_of[n])
        lines.append(f"{n}: {c.judgement_of[n]}  {r.schema}{principal} -> [{kids}]")
    return "\n".join(lines)


__all__ = ["choose_rule", "build_preproof", "Fixture", "FIXTURES", "fixture", "describe"]

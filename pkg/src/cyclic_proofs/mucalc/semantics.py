"""Finite labelled transition systems and the set semantics of formulas."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .syntax import And, Box, Diamond, Formula, Mu, NProp, Nu, Or, Prop, Var, free_vars


class LTSFormatError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class LTS:
    """States are ``0 .. n-1``; ``trans[a]`` is a set of pairs, ``label[p]`` a set of states."""

    n: int
    trans: Mapping[str, frozenset] = field(default_factory=dict)
    label: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "trans", {a: frozenset(v) for a, v in self.trans.items()})
        object.__setattr__(self, "label", {p: frozenset(v) for p, v in self.label.items()})
        for a, pairs in self.trans.items():
            for s, t in pairs:
                if not (0 <= s < self.n and 0 <= t < self.n):
                    raise ValueError(f"transition {a} {s} {t} leaves the state space")
        for p, states in self.label.items():
            if any(not 0 <= s < self.n for s in states):
                raise ValueError(f"label {p} names an undeclared state")

    @property
    def states(self) -> frozenset:
        return frozenset(range(self.n))

    def successors(self, action: str, s: int) -> list[int]:
        return [t for u, t in self.trans.get(action, ()) if u == s]

    def to_text(self) -> str:
        lines = [f"states {self.n}"]
        for a in sorted(self.trans):
            lines += [f"trans {a} {s} {t}" for s, t in sorted(self.trans[a])]
        for p in sorted(self.label):
            lines += [f"label {p} {s}" for s in sorted(self.label[p])]
        return "\n".join(lines) + "\n"


def parse_lts(text: str) -> LTS:
    """Read the line format; the ``states n`` header must precede all other lines."""
    n = None
    trans: dict[str, set] = {}
    label: dict[str, set] = {}

    def state(tok, lineno):
        s = int(tok)
        if not 0 <= s < n:
            raise LTSFormatError(f"state {s} outside 0..{n - 1}", lineno)
        return s

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "states" and len(parts) == 2:
                if n is not None:
                    raise LTSFormatError("duplicate states header", lineno)
                n = int(parts[1])
                if n < 0:
                    raise LTSFormatError("negative state count", lineno)
            elif parts[0] in ("trans", "label") and n is None:
                raise LTSFormatError("'states n' header must come first", lineno)
            elif parts[0] == "trans" and len(parts) == 4:
                trans.setdefault(parts[1], set()).add((state(parts[2], lineno), state(parts[3], lineno)))
            elif parts[0] == "label" and len(parts) == 3:
                label.setdefault(parts[1], set()).add(state(parts[2], lineno))
            else:
                raise LTSFormatError(f"unrecognised line {line!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, LTSFormatError):
                raise
            raise LTSFormatError(str(exc), lineno) from None
    if n is None:
        raise LTSFormatError("missing 'states n' header", 1)
    return LTS(n, trans, label)


class Valuation(dict):
    """Variable to state set; unlisted variables denote the empty set."""

    def __missing__(self, key):
        return frozenset()


class FixpointDiverged(AssertionError):
    pass


def _fixpoint(step: Callable[[frozenset], frozenset], start: frozenset, n_states: int, counts=None) -> frozenset:
    cur = start
    for k in range(n_states + 2):
        nxt = step(cur)
        if nxt == cur:
            if counts is not None:
                counts.append(k + 1)
            return cur
        cur = nxt
    raise FixpointDiverged("fixpoint iteration did not stabilise within |S| + 1 steps")


def _pre_dia(K: LTS, action: str, target: frozenset) -> frozenset:
    return frozenset(s for s, t in K.trans.get(action, ()) if t in target)


def _pre_box(K: LTS, action: str, target: frozenset) -> frozenset:
    bad = frozenset(s for s, t in K.trans.get(action, ()) if t not in target)
    return K.states - bad


def semantics(phi: Formula, K: LTS, rho: Mapping | None = None, counts: list | None = None) -> frozenset:
    """States satisfying ``phi``. Fixed points iterate from the top (nu) or bottom (mu).

    When ``counts`` is given, the number of iterations of every binder
    evaluation is appended to it.
    """
    env = Valuation(rho or {})
    S = K.states

    def ev(psi, env):
        match psi:
            case Prop(p):
                return K.label.get(p, frozenset())
            case NProp(p):
                return S - K.label.get(p, frozenset())
            case Var(x):
                return frozenset(env[x])
            case Or(a, b):
                return ev(a, env) | ev(b, env)
            case And(a, b):
                return ev(a, env) & ev(b, env)
            case Diamond(a, b):
                return _pre_dia(K, a, ev(b, env))
            case Box(a, b):
                return _pre_box(K, a, ev(b, env))
            case Mu(x, b):
                return _fixpoint(lambda v: ev(b, Valuation({**env, x: v})), frozenset(), K.n, counts)
            case Nu(x, b):
                return _fixpoint(lambda v: ev(b, Valuation({**env, x: v})), S, K.n, counts)
        raise TypeError(psi)

    return ev(phi, env)


def approximant_semantics(phi: Formula, ann, K: LTS, rho: Mapping | None = None) -> frozenset:
    """Semantics with every ``nu`` at address ``a`` cut off at stage ``ann(a)``.

    ``ann`` is an int (uniform), a mapping from addresses (missing ones
    default to ``K.n``) or a callable. Stage ``alpha`` is the intersection of
    ``F(stage beta)`` over ``beta < alpha``, with the empty intersection ``S``.
    """
    if isinstance(ann, int):
        look = lambda addr: ann  # noqa: E731
    elif callable(ann):
        look = ann
    else:
        look = lambda addr: ann.get(addr, K.n)  # noqa: E731
    S = K.states

    def ev(psi, env, addr):
        match psi:
            case Prop(p):
                return K.label.get(p, frozenset())
            case NProp(p):
                return S - K.label.get(p, frozenset())
            case Var(x):
                return frozenset(env[x])
            case Or(a, b):
                return ev(a, env, addr + (0,)) | ev(b, env, addr + (1,))
            case And(a, b):
                return ev(a, env, addr + (0,)) & ev(b, env, addr + (1,))
            case Diamond(a, b):
                return _pre_dia(K, a, ev(b, env, addr + (0,)))
            case Box(a, b):
                return _pre_box(K, a, ev(b, env, addr + (0,)))
            case Mu(x, b):
                return _fixpoint(lambda v: ev(b, Valuation({**env, x: v}), addr + (0,)), frozenset(), K.n)
            case Nu(x, b):
                alpha = look(addr)
                if alpha < 0:
                    raise ValueError("approximant stages are natural numbers")
                images: list[frozenset] = []
                stage = S
                for _ in range(alpha):
                    images.append(ev(b, Valuation({**env, x: stage}), addr + (0,)))
                    stage = frozenset(S.intersection(*images))
                return stage
        raise TypeError(psi)

    return ev(phi, Valuation(rho or {}), ())


class ValuationBudgetExceeded(RuntimeError):
    pass


def valuations(variables: Iterable[str], K: LTS) -> Iterable[Valuation]:
    variables = sorted(variables)
    subsets = [frozenset(c) for r in range(K.n + 1) for c in itertools.combinations(range(K.n), r)]
    for choice in itertools.product(subsets, repeat=len(variables)):
        yield Valuation(zip(variables, choice))


def is_valid_sequent(gamma: Iterable[Formula], K: LTS, budget: int = 1 << 16) -> bool:
    """Is the union of the formulas all of ``S`` under every valuation of their free variables?"""
    formulas = list(gamma)
    fv = set().union(*(free_vars(f) for f in formulas)) if formulas else set()
    count = 2 ** (K.n * len(fv))
    if count > budget:
        raise ValuationBudgetExceeded(f"{count} valuations exceed the budget of {budget}")
    S = K.states
    for rho in valuations(fv, K):
        covered = frozenset().union(*(semantics(f, K, rho) for f in formulas)) if formulas else frozenset()
        if covered != S:
            return False
    return True

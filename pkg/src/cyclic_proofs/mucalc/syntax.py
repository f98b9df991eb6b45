"""Modal mu-calculus formulas in negation normal form.

Formulas are immutable trees. Every formula handed out by this module is in
canonical form: bound variables are renamed ``x0, x1, ...`` in binder
preorder, skipping names used as propositions or free variables. Equality
of canonical formulas is alpha-equivalence.

Addresses are tuples of child indices: 0/1 for the operands of ``|`` and
``&``, 0 for the body of a modality or binder.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Iterator


class Formula:
    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self):
        return render(self)


@dataclass(frozen=True, repr=False)
class Prop(Formula):
    name: str


@dataclass(frozen=True, repr=False)
class NProp(Formula):
    name: str


@dataclass(frozen=True, repr=False)
class Var(Formula):
    name: str


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, repr=False)
class Diamond(Formula):
    action: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True, repr=False)
class Box(Formula):
    action: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True, repr=False)
class Mu(Formula):
    var: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True, repr=False)
class Nu(Formula):
    var: str
    body: Formula

    def children(self):
        return (self.body,)


Fixpoint = (Mu, Nu)

for _cls in (Prop, NProp, Var, Or, And, Diamond, Box, Mu, Nu):
    _cls.__repr__ = lambda self: f"<{render(self)}>"


def with_children(phi: Formula, kids) -> Formula:
    match phi:
        case Or():
            return Or(*kids)
        case And():
            return And(*kids)
        case Diamond(a, _):
            return Diamond(a, kids[0])
        case Box(a, _):
            return Box(a, kids[0])
        case Mu(x, _):
            return Mu(x, kids[0])
        case Nu(x, _):
            return Nu(x, kids[0])
    return phi


# -- traversal ---------------------------------------------------------------


def subformula_at(phi: Formula, address: tuple[int, ...]) -> Formula:
    for k in address:
        phi = phi.children()[k]
    return phi


def addresses(phi: Formula, prefix: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Formula]]:
    """Preorder walk yielding ``(address, subformula)``."""
    stack = [(prefix, phi)]
    while stack:
        addr, psi = stack.pop()
        yield addr, psi
        kids = psi.children()
        for k in reversed(range(len(kids))):
            stack.append((addr + (k,), kids[k]))


def nu_addresses(phi: Formula) -> list[tuple[int, ...]]:
    return [a for a, psi in addresses(phi) if isinstance(psi, Nu)]


def free_vars(phi: Formula) -> frozenset[str]:
    out = set()

    def go(psi, bound):
        match psi:
            case Var(x):
                if x not in bound:
                    out.add(x)
            case Mu(x, b) | Nu(x, b):
                go(b, bound | {x})
            case _:
                for k in psi.children():
                    go(k, bound)

    go(phi, frozenset())
    return frozenset(out)


def prop_names(phi: Formula) -> frozenset[str]:
    return frozenset(psi.name for _, psi in addresses(phi) if isinstance(psi, (Prop, NProp)))


def var_occurrences(body: Formula, x: str) -> list[tuple[int, ...]]:
    """Addresses of the free occurrences of ``x`` in ``body``."""
    out = []

    def go(psi, addr):
        match psi:
            case Var(y) if y == x:
                out.append(addr)
            case Mu(y, _) | Nu(y, _) if y == x:
                return
            case _:
                for k, ch in enumerate(psi.children()):
                    go(ch, addr + (k,))

    go(body, ())
    return out


def is_subformula(small: Formula, big: Formula) -> bool:
    """Is ``small`` alpha-equal to a closed-up subformula occurrence of ``big``?"""
    fv = free_vars(small)
    for _, psi in addresses(big):
        if free_vars(psi) == fv and canonical(psi) == small:
            return True
    return False


def is_well_named(phi: Formula) -> bool:
    binders = [psi.var for _, psi in addresses(phi) if isinstance(psi, Fixpoint)]
    if len(binders) != len(set(binders)):
        return False
    return not (set(binders) & (free_vars(phi) | prop_names(phi)))


# -- canonical form ----------------------------------------------------------


def canonical(phi: Formula) -> Formula:
    """Rename bound variables to ``x0, x1, ...`` in binder preorder."""
    reserved = free_vars(phi) | prop_names(phi)
    counter = [0]

    def fresh():
        while True:
            name = f"x{counter[0]}"
            counter[0] += 1
            if name not in reserved:
                return name

    def go(psi, env):
        match psi:
            case Var(x):
                return Var(env.get(x, x))
            case Mu(x, b):
                y = fresh()
                return Mu(y, go(b, {**env, x: y}))
            case Nu(x, b):
                y = fresh()
                return Nu(y, go(b, {**env, x: y}))
            case Prop() | NProp():
                return psi
        return with_children(psi, [go(k, env) for k in psi.children()])

    return go(phi, {})


def substitute(phi: Formula, x: str, replacement: Formula) -> Formula:
    """``phi[replacement/x]`` on free occurrences of ``x``.

    ``replacement`` must not have free variables bound inside ``phi``, which
    holds for the fixed-point unfoldings this is used for.
    """
    def go(psi):
        match psi:
            case Var(y) if y == x:
                return replacement
            case Mu(y, _) | Nu(y, _) if y == x:
                return psi
            case Prop() | NProp() | Var():
                return psi
        return with_children(psi, [go(k) for k in psi.children()])

    return go(phi)


def unfold(phi: Formula) -> Formula:
    """``sigma x.body`` to ``body[sigma x.body / x]``, canonicalised."""
    if not isinstance(phi, Fixpoint):
        raise ValueError(f"{phi} is not a fixed-point formula")
    return canonical(substitute(phi.body, phi.var, phi))


def negate(phi: Formula) -> Formula:
    """De Morgan dual. Variables stay put, so ``mu x.f`` goes to ``nu x.~f[~x/x]``."""
    def go(psi):
        match psi:
            case Prop(p):
                return NProp(p)
            case NProp(p):
                return Prop(p)
            case Var():
                return psi
            case Or(a, b):
                return And(go(a), go(b))
            case And(a, b):
                return Or(go(a), go(b))
            case Diamond(a, b):
                return Box(a, go(b))
            case Box(a, b):
                return Diamond(a, go(b))
            case Mu(x, b):
                return Nu(x, go(b))
            case Nu(x, b):
                return Mu(x, go(b))
        raise TypeError(psi)

    return canonical(go(phi))


# -- rendering ---------------------------------------------------------------

_PREC = {Or: 1, And: 2}


def render(phi: Formula, mark: tuple[int, ...] | None = None) -> str:
    """ASCII text; ``mark`` puts ``nu*`` on the binder at that address."""
    def go(psi, addr):
        match psi:
            case Prop(p):
                return p
            case NProp(p):
                return f"~{p}"
            case Var(x):
                return x
            case Or(a, b) | And(a, b):
                op = " | " if isinstance(psi, Or) else " & "
                prec = _PREC[type(psi)]
                left = go(a, addr + (0,))
                right = go(b, addr + (1,))
                if _PREC.get(type(a), 9) < prec:
                    left = f"({left})"
                if _PREC.get(type(b), 9) <= prec:
                    right = f"({right})"
                return left + op + right
            case Diamond(a, b) | Box(a, b):
                inner = go(b, addr + (0,))
                if isinstance(b, (Or, And)):
                    inner = f"({inner})"
                return (f"<{a}>" if isinstance(psi, Diamond) else f"[{a}]") + inner
            case Mu(x, b) | Nu(x, b):
                inner = go(b, addr + (0,))
                if isinstance(b, (Or, And)):
                    inner = f"({inner})"
                kw = "mu" if isinstance(psi, Mu) else "nu"
                if mark == addr:
                    kw = "nu*"
                return f"{kw} {x}.{inner}"
        raise TypeError(psi)

    return go(phi, ())


# -- parsing -----------------------------------------------------------------


class FormulaSyntaxError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class RenamingWarning(UserWarning):
    """The input was not well-named and bound variables were renamed."""


_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym><[^>]*>|\[[^\]]*\]|[~|&.()]))")
_KEYWORDS = {"mu", "nu"}


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start("ident") if m.group("ident") else m.start("sym")
        out.append((m.group("ident") or m.group("sym"), start))
        pos = m.end()
    out.append(("", len(text)))
    return out


class _Parser:
    def __init__(self, text, variables):
        self.toks = _tokenize(text)
        self.k = 0
        self.free = set(variables)

    def peek(self):
        return self.toks[self.k][0]

    def pos(self):
        return self.toks[self.k][1]

    def take(self, expected=None):
        tok, pos = self.toks[self.k]
        if expected is not None and tok != expected:
            raise FormulaSyntaxError(f"expected {expected!r}, found {tok or 'end of input'!r}", pos)
        self.k += 1
        return tok

    def parse(self):
        phi = self.disj(frozenset())
        if self.peek() != "":
            raise FormulaSyntaxError(f"unexpected {self.peek()!r}", self.pos())
        return phi

    def disj(self, bound):
        phi = self.conj(bound)
        while self.peek() == "|":
            self.take()
            phi = Or(phi, self.conj(bound))
        return phi

    def conj(self, bound):
        phi = self.unary(bound)
        while self.peek() == "&":
            self.take()
            phi = And(phi, self.unary(bound))
        return phi

    def ident(self):
        tok, pos = self.toks[self.k]
        if not tok or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok) or tok in _KEYWORDS:
            raise FormulaSyntaxError(f"expected an identifier, found {tok or 'end of input'!r}", pos)
        self.k += 1
        return tok

    def unary(self, bound):
        tok, pos = self.toks[self.k]
        if tok == "~":
            self.take()
            name_pos = self.pos()
            name = self.ident()
            if name in bound or name in self.free:
                raise FormulaSyntaxError(f"negated variable {name!r}", name_pos)
            return NProp(name)
        if tok.startswith("<") or tok.startswith("["):
            self.take()
            action = tok[1:-1].strip()
            if not re.fullmatch(r"[A-Za-z0-9_]+", action):
                raise FormulaSyntaxError(f"bad action {action!r}", pos)
            body = self.unary(bound)
            return Diamond(action, body) if tok[0] == "<" else Box(action, body)
        if tok in _KEYWORDS:
            self.take()
            x = self.ident()
            self.take(".")
            body = self.unary(bound | {x})
            return Mu(x, body) if tok == "mu" else Nu(x, body)
        if tok == "(":
            self.take()
            phi = self.disj(bound)
            self.take(")")
            return phi
        name = self.ident()
        if name in bound or name in self.free:
            return Var(name)
        return Prop(name)


def parse_formula(text: str, variables=()) -> Formula:
    """Parse ASCII formula text into canonical form.

    Identifiers are variables when bound by an enclosing ``mu``/``nu`` or
    listed in ``variables``; all other identifiers are propositions. Binders
    are prefix operators, so ``mu x.<a>x & p`` is ``(mu x.<a>x) & p``.
    """
    raw = _Parser(text, variables).parse()
    if not is_well_named(raw):
        warnings.warn(f"renamed bound variables in {text!r}", RenamingWarning, stacklevel=2)
    return canonical(raw)


def parse_sequent_formulas(text: str, variables=()) -> list[Formula]:
    text = text.strip()
    if text in ("", "{}"):
        return []
    return [parse_formula(part, variables) for part in text.split(",")]


def size(phi: Formula) -> int:
    return sum(1 for _ in addresses(phi))


def depth(phi: Formula) -> int:
    kids = phi.children()
    return 1 + max((depth(k) for k in kids), default=0)

"""Lengths of consecutive descending runs of a stream.

``ds(n, i:j:xs)`` recurses with ``n + 1`` when ``i > j`` and otherwise emits
``n`` and restarts at 1. Streams are eventually periodic, which makes the
call graph finite once the counter is forgotten: the branch taken depends on
the stream position only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import PreProof, ProofSystem, RuleInstance
from .trace import TraceStep, TraceStructure

STAR = "*"
SKIP = RuleInstance("*", "skip", STAR, (STAR,))
EMIT = RuleInstance("emit", "emit", STAR, (STAR,))


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class StreamSpec:
    """The stream ``prefix . period^omega``."""

    prefix: tuple[int, ...]
    period: tuple[int, ...]

    def __init__(self, prefix: Sequence[int] = (), period: Sequence[int] = (0,)):
        if not period:
            raise ValueError("period must be nonempty")
        if any(x < 0 for x in (*prefix, *period)):
            raise ValueError("stream elements are natural numbers")
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "period", tuple(period))

    def __getitem__(self, k: int) -> int:
        if k < len(self.prefix):
            return self.prefix[k]
        return self.period[(k - len(self.prefix)) % len(self.period)]

    @property
    def states(self) -> int:
        return len(self.prefix) + len(self.period)

    def canonical(self, k: int) -> int:
        """Position ``k`` folded onto ``0 .. states-1``."""
        if k < len(self.prefix):
            return k
        return len(self.prefix) + (k - len(self.prefix)) % len(self.period)

    def take(self, k: int) -> list[int]:
        return [self[i] for i in range(k)]


@dataclass(frozen=True)
class DsState:
    counter: int
    position: int


def ds_reference(xs: StreamSpec, k: int) -> list[int]:
    """Run lengths by a direct scan."""
    out = []
    pos, run = 0, 1
    while len(out) < k:
        if xs[pos] > xs[pos + 1]:
            run += 1
        else:
            out.append(run)
            run = 1
        pos += 1
    return out


def ds_step(state: DsState, xs: StreamSpec) -> tuple[DsState, int | None]:
    """One unfolding of the recursion; returns the next state and the output, if any."""
    i, j = xs[state.position], xs[state.position + 1]
    nxt = xs.canonical(state.position + 1)
    if i > j:
        return DsState(state.counter + 1, nxt), None
    return DsState(1, nxt), state.counter


def ds_coalgebraic(n0: int, xs: StreamSpec, k: int, step_budget: int | None = None) -> list[int]:
    """First ``k`` outputs of ``ds(n0, xs)`` by iterating the case split."""
    if step_budget is None:
        step_budget = (k + 1) * (xs.states + 1)
    out: list[int] = []
    state = DsState(n0, 0)
    steps = 0
    while len(out) < k:
        steps += 1
        if steps > step_budget:
            raise BudgetExceeded(f"no output after {step_budget} steps")
        state, emitted = ds_step(state, xs)
        if emitted is not None:
            out.append(emitted)
    return out


def ds_proof_system() -> ProofSystem:
    """One judgement ``*`` and the unary rules ``skip`` and ``emit``."""
    return ProofSystem("ds", validate=lambda r: r in (SKIP, EMIT))


def ds_trace_structure() -> TraceStructure:
    """The single formula ``*``; steps progress exactly on ``emit``."""
    return TraceStructure(
        fml=lambda s: frozenset([STAR]) if s == STAR else frozenset(),
        steps=lambda r, i: frozenset([TraceStep(STAR, STAR, r.schema == "emit")]),
    )


def branch_at(xs: StreamSpec, position: int) -> str:
    return "skip" if xs[position] > xs[position + 1] else "emit"


def check_counter_independence(xs: StreamSpec, counters: Sequence[int] = (1, 2, 7)) -> bool:
    """The branch and successor of a state depend only on its folded position."""
    for k in range(len(xs.prefix) + 2 * len(xs.period)):
        ref = branch_at(xs, xs.canonical(k))
        for n in counters:
            nxt, out = ds_step(DsState(n, k), xs)
            if (out is None) != (ref == "skip") or nxt.position != xs.canonical(k + 1):
                return False
    return True


def ds_abstract_preproof(xs: StreamSpec) -> tuple[PreProof, TraceStructure]:
    """The call graph over folded stream positions, rooted at position 0."""
    nodes = []
    for p in range(xs.states):
        rule = SKIP if branch_at(xs, p) == "skip" else EMIT
        nodes.append((STAR, rule, (xs.canonical(p + 1),)))
    return PreProof.build(nodes, roots=(0,), names=[f"pos{p}" for p in range(xs.states)]), ds_trace_structure()

"""Abstract proof systems, finite pre-proofs and their labelled graphs.

A pre-proof is stored as a finite coalgebra: every node carries a judgement,
the rule instance applied there and the ordered list of its premise nodes.
Node ids are the dense integers ``0 .. n-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

Judgement = Hashable
NodeId = int
Edge = tuple[NodeId, int, NodeId]


@dataclass(frozen=True)
class RuleInstance:
    """A concrete rule application ``premises / conclusion``.

    ``rule_id`` identifies the instance inside its schema (for the
    mu-calculus it is the principal formula), ``schema`` names the rule.
    """

    rule_id: Hashable
    schema: str
    conclusion: Judgement
    premises: tuple = ()

    @property
    def arity(self) -> int:
        return len(self.premises)

    def __str__(self):
        prem = " ; ".join(str(p) for p in self.premises)
        return f"{self.schema}[{self.rule_id}]: {prem} / {self.conclusion}"


def _accept_all(rule: RuleInstance) -> bool:
    return True


@dataclass(frozen=True)
class ProofSystem:
    name: str
    validate: Callable[[RuleInstance], bool] = _accept_all
    fml: Callable[[Judgement], frozenset] | None = None


@dataclass(frozen=True)
class PreProof:
    """A finite pre-proof.

    ``names`` optionally records where each node came from (file labels,
    reindexing origins); it never takes part in any check.
    """

    judgement_of: tuple
    rule_of: tuple[RuleInstance, ...]
    children_of: tuple[tuple[NodeId, ...], ...]
    roots: tuple[NodeId, ...]
    names: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.judgement_of)
        if len(self.rule_of) != n or len(self.children_of) != n:
            raise ValueError("judgement_of, rule_of and children_of must have equal length")

    @property
    def nodes(self) -> range:
        return range(len(self.judgement_of))

    def __len__(self):
        return len(self.judgement_of)

    def successors(self, n: NodeId) -> tuple[NodeId, ...]:
        return self.children_of[n]

    @classmethod
    def build(
        cls,
        nodes: Sequence[tuple[Judgement, RuleInstance, Sequence[NodeId]]],
        roots: Iterable[NodeId] = (0,),
        names=None,
    ) -> "PreProof":
        """Build from ``(judgement, rule, children)`` triples indexed by node id."""
        return cls(
            judgement_of=tuple(j for j, _, _ in nodes),
            rule_of=tuple(r for _, r, _ in nodes),
            children_of=tuple(tuple(ch) for _, _, ch in nodes),
            roots=tuple(roots),
            names=None if names is None else tuple(names),
        )


@dataclass(frozen=True)
class LabelledGraph:
    nodes: tuple[NodeId, ...]
    edges: tuple[Edge, ...]

    def out_edges(self, n: NodeId) -> list[Edge]:
        return [e for e in self.edges if e[0] == n]


@dataclass(frozen=True)
class Algebra:
    """Interpretation of rules: ``eval(rule, child_values) -> value``."""

    eval: Callable[[RuleInstance, tuple], Any]


@dataclass(frozen=True)
class Violation:
    node: NodeId | None
    invariant: str
    expected: Any = None
    actual: Any = None

    def __str__(self):
        where = "preproof" if self.node is None else f"node {self.node}"
        msg = f"{where}: {self.invariant}"
        if self.expected is not None or self.actual is not None:
            msg += f": expected {self.expected}, actual {self.actual}"
        return msg


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class WellFoundedness:
    """``cycle`` is empty when the pre-proof is well-founded."""

    cycle: tuple[NodeId, ...] = ()

    @property
    def well_founded(self) -> bool:
        return not self.cycle

    def __bool__(self):
        return self.well_founded


class NotWellFounded(Exception):
    def __init__(self, cycle):
        super().__init__(f"pre-proof has a cycle through nodes {list(cycle)}")
        self.cycle = tuple(cycle)


class AlgebraFailure(Exception):
    def __init__(self, node, rule, cause=None):
        super().__init__(f"algebra rejected rule at node {node}: {rule}" + (f" ({cause})" if cause else ""))
        self.node = node
        self.rule = rule


# -- graph utilities ---------------------------------------------------------


def strongly_connected_components(succ: Mapping[Hashable, Iterable[Hashable]]) -> list[list]:
    """Tarjan's algorithm, iterative. ``succ`` must have a key for every vertex.

    Components come out in reverse topological order of the condensation.
    """
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    comps: list[list] = []
    counter = 0
    for root in succ:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def find_cycle(succ: Mapping[Hashable, Iterable[Hashable]], starts=None) -> list | None:
    """Return the vertices of one cycle reachable from ``starts`` (default: all), or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour: dict = {}
    for root in (succ if starts is None else starts):
        if colour.get(root, WHITE) != WHITE:
            continue
        path = [root]
        work = [iter(succ[root])]
        colour[root] = GREY
        while work:
            for w in work[-1]:
                c = colour.get(w, WHITE)
                if c == GREY:
                    return path[path.index(w):]
                if c == WHITE:
                    colour[w] = GREY
                    path.append(w)
                    work.append(iter(succ[w]))
                    break
            else:
                colour[path.pop()] = BLACK
                work.pop()
    return None


def shortest_path_edges(c: PreProof, target: NodeId) -> tuple[tuple[NodeId, int], ...]:
    """Shortest ``(node, premise index)`` path from some root to ``target``."""
    parent: dict[NodeId, tuple[NodeId, int] | None] = {}
    frontier = []
    for r in c.roots:
        if r not in parent:
            parent[r] = None
            frontier.append(r)
    while frontier and target not in parent:
        nxt = []
        for n in frontier:
            for i, m in enumerate(c.children_of[n]):
                if m not in parent:
                    parent[m] = (n, i)
                    nxt.append(m)
        frontier = nxt
    if target not in parent:
        raise ValueError(f"node {target} is unreachable from the roots")
    path = []
    cur = parent[target]
    while cur is not None:
        path.append(cur)
        cur = parent[cur[0]]
    return tuple(reversed(path))


def reachable(c: PreProof, starts: Iterable[NodeId] | None = None) -> set[NodeId]:
    seen: set[NodeId] = set()
    todo = [r for r in (c.roots if starts is None else starts) if 0 <= r < len(c)]
    while todo:
        n = todo.pop()
        if n in seen:
            continue
        seen.add(n)
        todo.extend(m for m in c.children_of[n] if 0 <= m < len(c))
    return seen


# -- operations --------------------------------------------------------------


def validate_preproof(P: ProofSystem, c: PreProof) -> ValidationReport:
    """Check the pre-proof invariants and that ``P`` accepts every rule used."""
    out: list[Violation] = []
    n = len(c)
    if not c.roots:
        out.append(Violation(None, "roots nonempty", "at least one root", "none"))
    for r in c.roots:
        if not 0 <= r < n:
            out.append(Violation(None, "root in range", f"0..{n - 1}", r))
    for node in c.nodes:
        rule = c.rule_of[node]
        judgement = c.judgement_of[node]
        children = c.children_of[node]
        if rule.conclusion != judgement:
            out.append(Violation(node, "conclusion matches judgement", judgement, rule.conclusion))
        if len(children) != rule.arity:
            out.append(Violation(node, "child count equals arity", rule.arity, len(children)))
        for i, child in enumerate(children):
            if not 0 <= child < n:
                out.append(Violation(node, f"child[{i}] in range", f"0..{n - 1}", child))
                continue
            if i < rule.arity and c.judgement_of[child] != rule.premises[i]:
                out.append(Violation(node, f"premise[{i}] matches child judgement",
                                     rule.premises[i], c.judgement_of[child]))
        try:
            accepted = P.validate(rule)
        except Exception as exc:  # a crashing predicate is reported, not raised
            accepted = False
            out.append(Violation(node, f"rule accepted by {P.name}", "valid instance", f"error: {exc}"))
        else:
            if not accepted:
                out.append(Violation(node, f"rule accepted by {P.name}", "valid instance", str(rule)))
    unreached = sorted(set(c.nodes) - reachable(c))
    for node in unreached:
        out.append(Violation(node, "reachable from a root", "reachable", "unreachable"))
    return ValidationReport(tuple(out))


def labelled_graph(c: PreProof) -> LabelledGraph:
    edges = tuple((n, i, m) for n in c.nodes for i, m in enumerate(c.children_of[n]))
    return LabelledGraph(tuple(c.nodes), edges)


def is_well_founded(c: PreProof) -> WellFoundedness:
    succ = {n: c.children_of[n] for n in c.nodes}
    cycle = find_cycle(succ)
    return WellFoundedness(tuple(cycle) if cycle else ())


def topological_order(c: PreProof) -> list[NodeId]:
    """Children before parents. Raises NotWellFounded on a cycle."""
    verdict = is_well_founded(c)
    if not verdict.well_founded:
        raise NotWellFounded(verdict.cycle)
    order: list[NodeId] = []
    done: set[NodeId] = set()
    for root in c.nodes:
        if root in done:
            continue
        work = [(root, iter(c.children_of[root]))]
        done.add(root)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in done:
                    done.add(w)
                    work.append((w, iter(c.children_of[w])))
                    break
            else:
                order.append(v)
                work.pop()
    return order


def solve(c: PreProof, a: Algebra, order: Sequence[NodeId] | None = None) -> dict[NodeId, Any]:
    """The unique solution of a well-founded pre-proof.

    ``order`` may fix an evaluation order; it must list children before
    parents. The result does not depend on it.
    """
    if order is None:
        order = topological_order(c)
    else:
        verdict = is_well_founded(c)
        if not verdict.well_founded:
            raise NotWellFounded(verdict.cycle)
        if sorted(order) != list(c.nodes):
            raise ValueError("order must be a permutation of the nodes")
    values: dict[NodeId, Any] = {}
    for n in order:
        kids = c.children_of[n]
        if any(k not in values for k in kids):
            raise ValueError(f"order visits node {n} before one of its children")
        rule = c.rule_of[n]
        try:
            values[n] = a.eval(rule, tuple(values[k] for k in kids))
        except AlgebraFailure:
            raise
        except Exception as exc:
            raise AlgebraFailure(n, rule, exc) from exc
    return dict(sorted(values.items()))

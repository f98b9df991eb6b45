"""Line-oriented text format for pre-proofs, trace structures and certificates.

::

    # comments run to the end of the line
    system mucalc                       # mucalc | ds | custom
    judgement J0 = nu x.[a]x            # payload: a sequent, '*', or opaque text
    judgement J1 = [a]nu x.[a]x
    rule R0 = nu J0 -> J1 @ nu x.[a]x   # schema, conclusion -> premises, optional principal
    rule R1 = Mod J1 -> J0
    node 0 J0 R0                        # node ids are 0 .. n-1
    node 1 J1 R1
    edge 0 0 1                          # source, premise index, target
    edge 1 0 0
    root 0
    fml J0 f g                          # custom systems only: formulas of a judgement
    step R0 0 f g prog                  # custom systems only: a trace step of (rule, premise)
    cert 0 0 : w + 1 ; 0                # refutation certificate position: node, premise,
                                        # then one ordinal per formula in canonical order

For ``mucalc`` the trace structure is the marked-sequent one and a missing
principal formula is inferred; for ``ds`` the judgement is ``*`` and the
rules are ``skip`` and ``emit``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import PreProof, ProofSystem, RuleInstance
from .ds import EMIT, SKIP, STAR, ds_proof_system, ds_trace_structure
from .mucalc.calculus import Sequent, infer_rule_instance, mu_proof_system, mu_trace_structure
from .mucalc.syntax import FormulaSyntaxError, parse_formula, parse_sequent_formulas, render
from .ordinal import OrdinalOverflow, RefutationCertificate, parse_ordinal
from .trace import TraceStep, TraceStructure, sorted_tokens

SYSTEMS = ("mucalc", "ds", "custom")


class ProofFileError(ValueError):
    def __init__(self, message, line=0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class ProofFile:
    system: str
    preproof: PreProof
    trace: TraceStructure
    proof_system: ProofSystem
    certificate: RefutationCertificate | None = None
    judgement_names: dict = field(default_factory=dict)
    rule_names: dict = field(default_factory=dict)


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _name(tok, lineno, what):
    if not _NAME.fullmatch(tok):
        raise ProofFileError(f"bad {what} name {tok!r}", lineno)
    return tok


def _int(tok, lineno, what):
    try:
        v = int(tok)
    except ValueError:
        raise ProofFileError(f"{what} must be an integer, got {tok!r}", lineno) from None
    if v < 0:
        raise ProofFileError(f"{what} must be nonnegative", lineno)
    return v


def _judgement_payload(system, text, lineno):
    if system == "mucalc":
        try:
            return Sequent(parse_sequent_formulas(text))
        except FormulaSyntaxError as exc:
            raise ProofFileError(f"bad sequent: {exc}", lineno) from None
    if system == "ds":
        if text != STAR:
            raise ProofFileError("the ds system has the single judgement '*'", lineno)
        return STAR
    return text


def _build_rule(system, name, schema, concl, prems, principal, lineno):
    if system == "mucalc":
        if principal is not None:
            try:
                chi = parse_formula(principal)
            except FormulaSyntaxError as exc:
                raise ProofFileError(f"bad principal formula: {exc}", lineno) from None
            return RuleInstance(chi, schema, concl, prems)
        inferred = infer_rule_instance(schema, concl, prems)
        # an ill-formed instance is kept so that validation can report it
        return inferred or RuleInstance(None, schema, concl, prems)
    if system == "ds":
        for r in (SKIP, EMIT):
            if r.schema == schema and r.conclusion == concl and r.premises == prems:
                return r
        return RuleInstance(name, schema, concl, prems)
    return RuleInstance(name, schema, concl, prems)


def parse_proof(text: str) -> ProofFile:
    system = None
    judgements: dict[str, object] = {}
    rules: dict[str, RuleInstance] = {}
    nodes: dict[int, tuple[str, str, int]] = {}
    edges: dict[int, dict[int, int]] = {}
    roots: list[int] = []
    fml: dict[str, list] = {}
    steps: dict[tuple[str, int], list] = {}
    cert_lines: list[tuple[int, int, list, int]] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "system":
            if system is not None:
                raise ProofFileError("duplicate system line", lineno)
            if rest not in SYSTEMS:
                raise ProofFileError(f"unknown system {rest!r}", lineno)
            system = rest
            continue
        if system is None:
            raise ProofFileError("the first directive must be 'system'", lineno)
        if head == "judgement":
            name, eq, payload = rest.partition("=")
            name = _name(name.strip(), lineno, "judgement")
            if not eq:
                raise ProofFileError("expected 'judgement NAME = PAYLOAD'", lineno)
            if name in judgements:
                raise ProofFileError(f"duplicate judgement {name}", lineno)
            judgements[name] = _judgement_payload(system, payload.strip(), lineno)
        elif head == "rule":
            name, eq, body = rest.partition("=")
            name = _name(name.strip(), lineno, "rule")
            if not eq:
                raise ProofFileError("expected 'rule NAME = SCHEMA J -> J ...'", lineno)
            if name in rules:
                raise ProofFileError(f"duplicate rule {name}", lineno)
            body, at, principal = body.partition("@")
            lhs, arrow, rhs = body.partition("->")
            if not arrow:
                raise ProofFileError("rule needs '->'", lineno)
            parts = lhs.split()
            if len(parts) != 2:
                raise ProofFileError("expected 'SCHEMA CONCLUSION' before '->'", lineno)
            schema, concl = parts
            prem_names = rhs.split()
            for j in [concl, *prem_names]:
                if j not in judgements:
                    raise ProofFileError(f"undeclared judgement {j}", lineno)
            rules[name] = _build_rule(
                system, name, schema, judgements[concl], tuple(judgements[j] for j in prem_names),
                principal.strip() if at else None, lineno)
        elif head == "node":
            parts = rest.split()
            if len(parts) != 3:
                raise ProofFileError("expected 'node ID JUDGEMENT RULE'", lineno)
            nid = _int(parts[0], lineno, "node id")
            if nid in nodes:
                raise ProofFileError(f"duplicate node {nid}", lineno)
            if parts[1] not in judgements:
                raise ProofFileError(f"undeclared judgement {parts[1]}", lineno)
            if parts[2] not in rules:
                raise ProofFileError(f"undeclared rule {parts[2]}", lineno)
            nodes[nid] = (parts[1], parts[2], lineno)
        elif head == "edge":
            parts = rest.split()
            if len(parts) != 3:
                raise ProofFileError("expected 'edge SOURCE INDEX TARGET'", lineno)
            src, idx, dst = (_int(p, lineno, "edge field") for p in parts)
            if idx in edges.setdefault(src, {}):
                raise ProofFileError(f"duplicate edge {src} {idx}", lineno)
            edges[src][idx] = dst
        elif head == "root":
            roots.extend(_int(p, lineno, "root") for p in rest.split())
        elif head == "fml":
            if system != "custom":
                raise ProofFileError("fml lines are only allowed for custom systems", lineno)
            parts = rest.split()
            if not parts or parts[0] not in judgements:
                raise ProofFileError("expected 'fml JUDGEMENT TOKEN ...'", lineno)
            fml.setdefault(parts[0], []).extend(_name(p, lineno, "formula") for p in parts[1:])
        elif head == "step":
            if system != "custom":
                raise ProofFileError("step lines are only allowed for custom systems", lineno)
            parts = rest.split()
            if len(parts) not in (4, 5) or (len(parts) == 5 and parts[4] != "prog"):
                raise ProofFileError("expected 'step RULE INDEX SOURCE TARGET [prog]'", lineno)
            if parts[0] not in rules:
                raise ProofFileError(f"undeclared rule {parts[0]}", lineno)
            idx = _int(parts[1], lineno, "premise index")
            steps.setdefault((parts[0], idx), []).append(TraceStep(parts[2], parts[3], len(parts) == 5))
        elif head == "cert":
            pos, colon, values = rest.partition(":")
            parts = pos.split()
            if not colon or len(parts) != 2:
                raise ProofFileError("expected 'cert NODE INDEX : ORD ; ORD ...'", lineno)
            try:
                ords = [parse_ordinal(v) for v in values.split(";")] if values.strip() else []
            except (ValueError, OrdinalOverflow) as exc:
                raise ProofFileError(f"bad ordinal: {exc}", lineno) from None
            cert_lines.append((_int(parts[0], lineno, "node"), _int(parts[1], lineno, "index"), ords, lineno))
        else:
            raise ProofFileError(f"unknown directive {head!r}", lineno)

    if system is None:
        raise ProofFileError("missing 'system' line")
    if not nodes:
        raise ProofFileError("no nodes")
    if sorted(nodes) != list(range(len(nodes))):
        raise ProofFileError("node ids must be 0 .. n-1")
    n = len(nodes)
    children = []
    for v in range(n):
        out = edges.get(v, {})
        if sorted(out) != list(range(len(out))):
            raise ProofFileError(f"premise indices of node {v} must be 0 .. k-1")
        children.append(tuple(out[i] for i in range(len(out))))
    for src in edges:
        if src not in nodes:
            raise ProofFileError(f"edge from undeclared node {src}")
    if not roots:
        raise ProofFileError("no root")

    c = PreProof(
        judgement_of=tuple(judgements[nodes[v][0]] for v in range(n)),
        rule_of=tuple(rules[nodes[v][1]] for v in range(n)),
        children_of=tuple(children),
        roots=tuple(roots),
        names=tuple(nodes[v][0] for v in range(n)),
    )
    if system == "mucalc":
        t, P = mu_trace_structure(c), mu_proof_system()
    elif system == "ds":
        t, P = ds_trace_structure(), ds_proof_system()
    else:
        by_payload = {judgements[j]: toks for j, toks in fml.items()}
        t = TraceStructure.from_tables(by_payload, steps)
        P = ProofSystem("custom")

    cert = None
    if cert_lines:
        positions, anns = [], []
        for node, idx, ords, lineno in cert_lines:
            if node >= n:
                raise ProofFileError(f"certificate names undeclared node {node}", lineno)
            tokens = sorted_tokens(t.fml(c.judgement_of[node]))
            if len(tokens) != len(ords):
                raise ProofFileError(
                    f"node {node} has {len(tokens)} formulas but {len(ords)} ordinals are given", lineno)
            positions.append((node, idx))
            anns.append(dict(zip(tokens, ords)))
        cert = RefutationCertificate(tuple(positions), tuple(anns))
    return ProofFile(system, c, t, P, cert,
                     judgement_names={v: k for k, v in judgements.items()},
                     rule_names={v: k for k, v in rules.items()})


def load_proof(path) -> ProofFile:
    with open(path, encoding="utf-8") as fh:
        return parse_proof(fh.read())


def _payload_text(system, s):
    if system == "mucalc":
        return ", ".join(render(f) for f in Sequent(s).sorted()) or "{}"
    return str(s)


def dump_proof(c: PreProof, system: str, t: TraceStructure | None = None,
               certificate: RefutationCertificate | None = None) -> str:
    """Serialise ``c``. For custom systems ``t`` supplies ``fml``/``step`` lines."""
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}")
    lines = [f"system {system}"]
    jname: dict = {}
    for s in c.judgement_of:
        if s not in jname:
            jname[s] = f"J{len(jname)}"
            lines.append(f"judgement {jname[s]} = {_payload_text(system, s)}")
    rname: dict = {}
    for r in c.rule_of:
        if r in rname:
            continue
        for s in (r.conclusion, *r.premises):
            if s not in jname:
                jname[s] = f"J{len(jname)}"
                lines.append(f"judgement {jname[s]} = {_payload_text(system, s)}")
        if system == "custom":
            rname[r] = str(r.rule_id)
            _name(rname[r], 0, "rule")
        else:
            rname[r] = f"R{len(rname)}"
        prems = " ".join(jname[p] for p in r.premises)
        at = f" @ {render(r.rule_id)}" if system == "mucalc" and r.rule_id is not None else ""
        lines.append(f"rule {rname[r]} = {r.schema} {jname[r.conclusion]} -> {prems}".rstrip() + at)
    for n in c.nodes:
        lines.append(f"node {n} {jname[c.judgement_of[n]]} {rname[c.rule_of[n]]}")
    for n in c.nodes:
        for i, m in enumerate(c.children_of[n]):
            lines.append(f"edge {n} {i} {m}")
    lines.append("root " + " ".join(str(r) for r in c.roots))
    if system == "custom" and t is not None:
        for s, name in jname.items():
            toks = sorted_tokens(t.fml(s))
            if toks:
                lines.append(f"fml {name} " + " ".join(str(x) for x in toks))
        for r, name in rname.items():
            for i in range(r.arity):
                for st in sorted(t.steps(r, i), key=lambda st: (str(st.source), str(st.target), st.progressing)):
                    lines.append(f"step {name} {i} {st.source} {st.target}" + (" prog" if st.progressing else ""))
    if certificate is not None:
        if t is None:
            raise ValueError("a trace structure is needed to order certificate values")
        lines += certificate_lines(c, t, certificate)
    return "\n".join(lines) + "\n"


def certificate_lines(c: PreProof, t: TraceStructure, cert: RefutationCertificate) -> list[str]:
    out = []
    for (n, i), ann in zip(cert.cycle, cert.annotations):
        values = " ; ".join(str(ann[tok]) for tok in sorted_tokens(t.fml(c.judgement_of[n])))
        out.append(f"cert {n} {i} : {values}".rstrip())
    return out


__all__ = ["ProofFile", "ProofFileError", "parse_proof", "load_proof", "dump_proof", "certificate_lines", "SYSTEMS"]

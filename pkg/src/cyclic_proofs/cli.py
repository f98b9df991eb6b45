"""Command line interface.

Exit codes: 0 success / GTC holds / valid, 1 GTC fails / invalid / oracle
disagreement, 2 validation violations, 3 parse errors, 4 method budget
exceeded, 5 solving a pre-proof that is not well-founded, 6 algebra failure.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from .core import AlgebraFailure, Algebra, NotWellFounded, labelled_graph, solve, validate_preproof
from .corpus import random_preproof
from .ds import BudgetExceeded, StreamSpec, ds_abstract_preproof, ds_coalgebraic
from .fileformat import ProofFileError, certificate_lines, dump_proof, load_proof
from .mucalc.calculus import validity_algebra
from .mucalc.semantics import (
    LTSFormatError, ValuationBudgetExceeded, approximant_semantics, is_valid_sequent, parse_lts, semantics,
)
from .mucalc.syntax import FormulaSyntaxError, parse_formula, parse_sequent_formulas
from .ordinal import LiftBudgetExceeded, decide_gtc_via_lift, verify_refutation
from .trace import (
    BruteForceBudgetExceeded, IllTypedTraceStructure, brute_force_gtc, count_closed_walks, decide_gtc, default_bound,
)

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_PARSE, EXIT_BUDGET, EXIT_NOT_WF, EXIT_ALGEBRA = range(7)


def _out(line=""):
    print(line)


def _err(line):
    print(line, file=sys.stderr)


def _load(path):
    try:
        return load_proof(path)
    except OSError as exc:
        raise ProofFileError(f"cannot read {path}: {exc.strerror}") from None


def _validated(path):
    pf = _load(path)
    report = validate_preproof(pf.proof_system, pf.preproof)
    return pf, report


def _print_violations(report):
    for v in report.violations:
        _out(str(v))


def cmd_check(args) -> int:
    pf, report = _validated(args.path)
    if args.dot:
        c = pf.preproof
        _out("digraph preproof {")
        for n in c.nodes:
            _out(f'  {n} [label="{n}: {c.rule_of[n].schema}"];')
        for n, i, m in labelled_graph(c).edges:
            _out(f'  {n} -> {m} [label="{i}"];')
        _out("}")
    if not report.ok:
        _print_violations(report)
        return EXIT_INVALID
    _out("ok")
    return EXIT_OK


def cmd_gtc(args) -> int:
    pf, report = _validated(args.path)
    if not report.ok:
        _print_violations(report)
        return EXIT_INVALID
    c, t = pf.preproof, pf.trace
    try:
        if args.method == "sct":
            verdict = decide_gtc(c, t)
        elif args.method == "lift":
            verdict = decide_gtc_via_lift(c, t, budget=args.budget)
        else:
            bound = args.bound if args.bound is not None else default_bound(c, t)
            verdict = brute_force_gtc(c, t, bound, max_walks=args.max_walks)
    except LiftBudgetExceeded as exc:
        _err(f"{exc}; use --method sct")
        return EXIT_BUDGET
    except BruteForceBudgetExceeded as exc:
        _err(f"{exc}; use --method sct or a smaller --bound")
        return EXIT_BUDGET
    except IllTypedTraceStructure as exc:
        _err(f"ill-typed trace structure: {exc}")
        return EXIT_INVALID
    if verdict.holds:
        _out("GTC holds")
        return EXIT_OK
    _out("GTC fails")
    _out(str(verdict.counterexample))
    if verdict.certificate is not None:
        for line in certificate_lines(c, t, verdict.certificate):
            _out(line)
    return EXIT_FAIL


def cmd_verify_cert(args) -> int:
    pf, report = _validated(args.path)
    if not report.ok:
        _print_violations(report)
        return EXIT_INVALID
    if pf.certificate is None:
        raise ProofFileError("the file has no cert lines")
    if verify_refutation(pf.preproof, pf.trace, pf.certificate):
        _out("certificate valid: GTC fails")
        return EXIT_OK
    _out("certificate rejected")
    return EXIT_FAIL


def _parse_ann(spec: str):
    spec = spec.strip()
    if spec.isdigit():
        return int(spec)
    table = {}
    for item in spec.split(","):
        addr, eq, val = item.partition("=")
        addr = addr.strip()
        if not eq or not val.strip().isdigit():
            raise ValueError(f"bad annotation item {item!r}; expected ADDRESS=N")
        key = () if addr in ("", "-") else tuple(int(x) for x in addr.split("."))
        table[key] = int(val)
    return table


def _read_lts(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_lts(fh.read())
    except OSError as exc:
        raise ProofFileError(f"cannot read {path}: {exc.strerror}") from None


def _states(states) -> str:
    return " ".join(str(s) for s in sorted(states))


def cmd_mc(args) -> int:
    phi = parse_formula(args.formula, variables=())
    K = _read_lts(args.lts)
    if args.ann is None:
        result = semantics(phi, K)
    else:
        try:
            ann = _parse_ann(args.ann)
        except ValueError as exc:
            raise ProofFileError(str(exc)) from None
        result = approximant_semantics(phi, ann, K)
    _out(_states(result))
    return EXIT_OK


def cmd_valid(args) -> int:
    gamma = parse_sequent_formulas(args.sequent, variables=tuple(args.var or ()))
    K = _read_lts(args.lts)
    try:
        ok = is_valid_sequent(gamma, K, budget=args.budget)
    except ValuationBudgetExceeded as exc:
        _err(str(exc))
        return EXIT_BUDGET
    _out("valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_FAIL


def _size_algebra():
    return Algebra(lambda r, vs: 1 + sum(vs))


def cmd_solve(args) -> int:
    pf, report = _validated(args.path)
    if not report.ok:
        _print_violations(report)
        return EXIT_INVALID
    if args.algebra == "validity":
        if pf.system != "mucalc":
            raise ProofFileError("the validity algebra needs a mucalc proof file")
        if args.lts is None:
            raise ProofFileError("--lts is required for the validity algebra")
        algebra = validity_algebra(_read_lts(args.lts))
    else:
        algebra = _size_algebra()
    try:
        values = solve(pf.preproof, algebra)
    except NotWellFounded as exc:
        _err(f"not well-founded: cycle through nodes {' '.join(map(str, exc.cycle))}")
        return EXIT_NOT_WF
    except AlgebraFailure as exc:
        _err(str(exc))
        return EXIT_ALGEBRA
    for n, v in values.items():
        _out(f"{n}: {v}")
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise ProofFileError(f"expected comma-separated naturals, got {text!r}") from None


def cmd_ds(args) -> int:
    try:
        xs = StreamSpec(_int_list(args.prefix), _int_list(args.period))
    except ValueError as exc:
        raise ProofFileError(str(exc)) from None
    if args.abstract:
        c, t = ds_abstract_preproof(xs)
        sys.stdout.write(dump_proof(c, "ds"))
        return EXIT_OK
    try:
        out = ds_coalgebraic(args.n0, xs, args.n)
    except BudgetExceeded as exc:
        _err(str(exc))
        return EXIT_BUDGET
    _out(" ".join(str(v) for v in out))
    return EXIT_OK


def cmd_corpus(args) -> int:
    """Cross-check the GTC deciders on a seeded corpus of random pre-proofs."""
    rng = random.Random(args.seed)
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    disagreements = 0
    for k in range(args.count):
        c, t = random_preproof(rng, args.max_nodes, args.max_fml)
        sct = decide_gtc(c, t).holds
        row = {"sct": sct}
        if count_closed_walks(c, default_bound(c, t)) <= args.max_walks:
            row["brute"] = brute_force_gtc(c, t).holds
        try:
            row["lift"] = decide_gtc_via_lift(c, t).holds
        except LiftBudgetExceeded:
            pass
        agree = all(v == sct for v in row.values())
        disagreements += not agree
        fields = " ".join(f"{m}={'holds' if v else 'fails'}" for m, v in row.items())
        _out(f"{k} nodes={len(c)} {fields}" + ("" if agree else " DISAGREE"))
        if out_dir:
            (out_dir / f"preproof_{args.seed}_{k:04d}.proof").write_text(dump_proof(c, "custom", t), encoding="utf-8")
    _out(f"{args.count} pre-proofs, {disagreements} disagreements")
    return EXIT_OK if disagreements == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cyclic-proofs", description="Check cyclic pre-proofs and the global trace condition.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", help="validate a proof file")
    s.add_argument("path")
    s.add_argument("--dot", action="store_true", help="also print the labelled graph in DOT syntax")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("gtc", help="decide the global trace condition")
    s.add_argument("path")
    s.add_argument("--method", choices=("sct", "lift", "brute"), default="sct")
    s.add_argument("--bound", type=int, default=None, help="lasso length bound for --method brute")
    s.add_argument("--budget", type=int, default=10**6, help="lifted node budget for --method lift")
    s.add_argument("--max-walks", type=int, default=10**6, help="closed walk budget for --method brute")
    s.set_defaults(func=cmd_gtc)

    s = sub.add_parser("verify-cert", help="check the refutation certificate in a proof file")
    s.add_argument("path")
    s.set_defaults(func=cmd_verify_cert)

    s = sub.add_parser("mc", help="states of an LTS satisfying a closed formula")
    s.add_argument("formula")
    s.add_argument("lts")
    s.add_argument("--ann", help="nu approximant stages: N for all, or ADDRESS=N,... (address like 0.1, '-' for the root)")
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("valid", help="is a sequent valid on an LTS")
    s.add_argument("sequent", help="comma-separated formulas")
    s.add_argument("lts")
    s.add_argument("--var", action="append", help="treat this identifier as a free variable")
    s.add_argument("--budget", type=int, default=1 << 16, help="maximal number of valuations")
    s.set_defaults(func=cmd_valid)

    s = sub.add_parser("solve", help="evaluate a well-founded pre-proof in an algebra")
    s.add_argument("path")
    s.add_argument("--algebra", choices=("validity", "size"), default="validity")
    s.add_argument("--lts")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("ds", help="run-length outputs of the descending-sequence recursion")
    s.add_argument("--prefix", default="")
    s.add_argument("--period", required=True)
    s.add_argument("--n", type=int, default=10, help="number of outputs")
    s.add_argument("--n0", type=int, default=1, help="initial counter")
    s.add_argument("--abstract", action="store_true", help="print the finite abstract pre-proof instead")
    s.set_defaults(func=cmd_ds)

    s = sub.add_parser("corpus", help="cross-check GTC deciders on random pre-proofs")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--max-nodes", type=int, default=6)
    s.add_argument("--max-fml", type=int, default=3)
    s.add_argument("--max-walks", type=int, default=10**5, help="skip the brute-force oracle above this many closed walks")
    s.add_argument("--out", help="directory to write the generated proof files to")
    s.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ProofFileError, FormulaSyntaxError, LTSFormatError) as exc:
        _err(f"error: {exc}")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())

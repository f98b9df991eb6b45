"""Decide the global trace condition on the mu-calculus fixtures three ways.

Run with: python3 demos/gtc_three_ways.py
"""

from cyclic_proofs.mucalc.calculus import mu_trace_structure
from cyclic_proofs.mucalc.fixtures import FIXTURES, describe
from cyclic_proofs.ordinal import LiftBudgetExceeded, decide_gtc_via_lift, verify_refutation
from cyclic_proofs.trace import brute_force_gtc, decide_gtc


def main():
    print(f"{'fixture':<16} {'sct':<6} {'lift':<6} {'brute':<6} cert")
    for name, fx in FIXTURES.items():
        c = fx.preproof()
        t = mu_trace_structure(c)
        sct = decide_gtc(c, t)
        brute = brute_force_gtc(c, t, max_walks=10**5)
        cert = "-"
        try:
            lift = decide_gtc_via_lift(c, t)
        except LiftBudgetExceeded:
            # the lifted graph grows with gamma^formulas; sct has no such blowup
            lift_text = "budget"
        else:
            lift_text = str(lift.holds)
            if lift.certificate is not None:
                cert = "verified" if verify_refutation(c, t, lift.certificate) else "REJECTED"
        print(f"{name:<16} {sct.holds!s:<6} {lift_text:<6} {brute.holds!s:<6} {cert}")

    print("\nthe mu x.[a]x cycle, node by node:")
    c = FIXTURES["mu_box"].preproof()
    print(describe(c))
    print(decide_gtc(c, mu_trace_structure(c)).counterexample)


if __name__ == "__main__":
    main()

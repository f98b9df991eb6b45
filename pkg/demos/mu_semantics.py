"""Evaluate a few formulas on a small LTS, with approximants and validity.

Run with: python3 demos/mu_semantics.py
"""

from cyclic_proofs.mucalc.semantics import approximant_semantics, is_valid_sequent, parse_lts, semantics
from cyclic_proofs.mucalc.syntax import parse_formula

LTS_TEXT = """\
states 3
trans a 0 1
trans a 1 2
trans b 2 2
label p 1
"""


def main():
    K = parse_lts(LTS_TEXT)
    for text in ["nu x.[a]x", "mu x.[a]x", "nu x.<b>x", "mu x.(p | <a>x)", "nu x.(p & [a]x)"]:
        phi = parse_formula(text)
        print(f"{text:<18} {sorted(semantics(phi, K))}")

    phi = parse_formula("nu x.<a>x")
    print("\napproximants of", phi)
    for k in range(K.n + 1):
        print(f"  stage {k}: {sorted(approximant_semantics(phi, k, K))}")

    for text in ["p, ~p", "mu x.<a>x"]:
        phi = [parse_formula(s) for s in text.split(", ")]
        print(f"\n{text} valid on K: {is_valid_sequent(phi, K)}", end="")
    print()


if __name__ == "__main__":
    main()

"""Walk through the descending-sequence recursion and its finite abstraction.

Run with: python3 demos/descending_sequence.py
"""

from cyclic_proofs.ds import StreamSpec, ds_abstract_preproof, ds_coalgebraic, ds_reference
from cyclic_proofs.fileformat import dump_proof
from cyclic_proofs.trace import decide_gtc


def main():
    xs = StreamSpec([4, 2], [3, 7, 6, 5, 9])
    print("stream:", " ".join(map(str, xs.take(12))), "...")
    print("reference:  ", ds_reference(xs, 10))
    print("coalgebraic:", ds_coalgebraic(1, xs, 10))

    c, t = ds_abstract_preproof(xs)
    print(f"\nfinite abstraction: {len(c)} nodes, GTC holds = {decide_gtc(c, t).holds}")
    print(dump_proof(c, "ds"))


if __name__ == "__main__":
    main()

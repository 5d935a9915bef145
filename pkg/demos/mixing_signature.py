"""Consecutive hit times separate the mixing systems from a rotation.

For each system, random dyadic pairs (U, V) are probed up to horizon 64.
The rotation by 1/3 only returns to a small arc every third step, which
the verifier turns into an exact periodicity refutation.

    python3 demos/mixing_signature.py
"""

from __future__ import annotations

from fractions import Fraction as Q

from scrambled.hit_times import hit_set
from scrambled.metric_systems import get_system
from scrambled.region_algebra import interval_region
from scrambled.verifier import default_corpus, weak_mixing_signature


def main() -> None:
    for sid in ("doubling", "tent", "shift2", "rot:1/3"):
        system = get_system(sid)
        rep = weak_mixing_signature(system, default_corpus(system, 20), 64)
        runs = sorted(w["longest_run"] for w in rep.witnesses)
        print(f"{sid:8s} {rep.verdict:24s} longest runs: min {runs[0]}, median {runs[len(runs) // 2]}")
        for f in rep.failures[:1]:
            print(f"         witness: period {f['periodicity_witness']['period']}, "
                  f"residues {f['periodicity_witness']['residues']} for U={f['U']}, V={f['V']}")

    rot = get_system("rot:1/3")
    arc = interval_region(rot, [(Q(0), Q(1, 6))])
    print("N(U, U) for U = (0, 1/6) under rot:1/3:", hit_set(rot, arc, arc, 0, 20).times)


if __name__ == "__main__":
    main()

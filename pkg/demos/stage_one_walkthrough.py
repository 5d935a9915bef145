"""Walk through a one-stage construction on the doubling circle.

Prints every steering step (kind, time, targets), the four leaf boxes,
and the certificates that the verifier derives from the trace alone.

    python3 demos/stage_one_walkthrough.py
"""

from __future__ import annotations

from fractions import Fraction as Q

from scrambled.cantor_builder import BuilderConfig, build, leaf_boxes
from scrambled.region_algebra import diameter
from scrambled.verifier import reverify_trace, verify_scrambled_pair, verify_tracked_pair


def main() -> None:
    trace = build(BuilderConfig("doubling", 1))
    system = trace.system
    stage = trace.stages[0]
    print(f"stage 1: n = {stage.n}, box cap = {stage.cap}")
    print("seeds:", ", ".join(f"{a}: {b}" for (_, a), b in sorted(stage.seeds.items())))
    for st in stage.steps:
        targets = sorted({str(it.target) for it in st.items})
        extra = f" s={st.s}" if st.s else ""
        print(f"  step {st.index:2d} {st.kind:10s} k={st.time:3d}{extra}  targets {', '.join(targets)}")
    print(f"{len(trace.times())} times; M = {trace.m_times()}")

    leaves = leaf_boxes(trace)
    for b in leaves:
        print(f"leaf {b.address}: {b.geometry}  (diameter {diameter(system, b.geometry)})")

    print("trace re-verification:", reverify_trace(system, trace).verdict)
    a, b = leaves[0], leaves[1]
    rep = verify_scrambled_pair(system, a, b, trace)
    print(f"pair {a.address}/{b.address}: {rep.verdict}")
    for w in rep.witnesses:
        print(f"  {w['kind']}: k={w['time']} distance {float(w['distance']):.4f} vs bound {float(w['bound']):.4f}")
    rep = verify_tracked_pair(system, Q(1, 3), a, trace, 0)
    print(f"tracked point 1/3 against box {a.address}: {rep.verdict}")


if __name__ == "__main__":
    main()

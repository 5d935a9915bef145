"""Fixed-point-led construction on the full shift and its invariance certificates.

The first sync target is the fixed point (0); the later ones are points
far from their own iterates.  Certificates pair f^s(c) with f^t(d).

    python3 demos/invariant_shift.py [stages]
"""

from __future__ import annotations

import sys

from scrambled.cantor_builder import BuilderConfig, build
from scrambled.metric_systems import delta_lower
from scrambled.verifier import verify_invariant_scrambled


def main(stages: int = 3) -> None:
    config = BuilderConfig("shift2", stages, sync_mode="fixed-point")
    print("sync points:", ", ".join(map(str, config.sync_points)))
    low, per_n = delta_lower(config.system, config.rigidity_k)
    print(f"rigidity gap lower bound over n <= {config.rigidity_k}: {low}")
    trace = build(config)
    print("stage n values:", [sr.n for sr in trace.stages])
    for s, t in ((0, 0), (0, 1), (1, 2)):
        rep = verify_invariant_scrambled(config.system, trace, s, t)
        print(f"(s, t) = ({s}, {t}): {rep.verdict} over {rep.parameters['pairs']} pairs")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 3)

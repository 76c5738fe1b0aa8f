"""Phase scans of the two annulus differentials and the once-punctured disc.

On the ring-domain side of the annulus the saddle walls pile up at the ring
phase; on the reflected side there are exactly two of them.
"""

import argparse
import time

from saddlescope.differentials import QuadraticDifferential as Q
from saddlescope.differentials import accumulates_at, annulus_ring_domain, saddle_phase_scan

RING = Q((1, 4 + 1j, 1), ((0, 3),))
REFLECTED = Q((1, 0.6 + 0.8j, 1), ((0, 3),))
EGG = Q((0.7 + 0.2j, 0.4 - 0.3j, 1), ((0, 2),))


def show(name, res, t0):
    print(f"{name}: {len(res.walls)} walls, {len(res.inconclusive)} inconclusive, {time.perf_counter() - t0:.1f}s")
    for w in res.walls:
        extra = f" at {w.pole}" if w.pole else ""
        print(f"  theta*={w.theta:.10f}  {w.kind}{extra}  |Z|={w.length:.6f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=64)
    ap.add_argument("--ring-grid", type=int, default=8)
    args = ap.parse_args()

    t0 = time.perf_counter()
    show("annulus, reflected side", saddle_phase_scan(REFLECTED, grid=args.grid), t0)

    t0 = time.perf_counter()
    th, closed = annulus_ring_domain(RING)
    print(f"annulus, ring side: ring phase {th:.10f}, closed trajectory found: {closed is not None}")
    res = saddle_phase_scan(RING, grid=args.ring_grid, window=(th + 0.012, th + 0.06))
    show("annulus, ring side (window above the ring phase)", res, t0)
    print(f"  walls accumulate at the ring phase: {accumulates_at(res.walls, th)}")

    t0 = time.perf_counter()
    show("once-punctured disc", saddle_phase_scan(EGG, grid=args.grid), t0)


if __name__ == "__main__":
    main()

"""Count finite-length trajectories and stable objects phase by phase.

Rows cover the A1, Kronecker and affine A2 families at their walls and ring phases.
"""

import time

import numpy as np

from saddlescope.differentials import QuadraticDifferential as Q
from saddlescope.differentials import annulus_ring_domain, saddle_phase_scan
from saddlescope.stability import saddle_vs_stable

A1 = Q((1j, 0, 1))
RING = Q((1, 4 + 1j, 1), ((0, 3),))
REFLECTED = Q((1, 0.6 + 0.8j, 1), ((0, 3),))
AFFINE = Q(tuple(np.poly([0.5, 0.6j * np.exp(0.3j), 2.5 * np.exp(2j)])[::-1]), ((0, 4),))


def row(example, phi, theta):
    t0 = time.perf_counter()
    c = saddle_vs_stable(example, phi, theta)
    classes = " ".join(str(tuple(x["class"])) + ("*" if x["family_dim"] else "") for x in c.classes) or "-"
    print(
        f"{example:9} {theta:.8f}  saddles={c.saddles} rings={c.ring_domains}  "
        f"rigid={c.rigid} families={c.families}  {'agree' if c.agree else 'DISAGREE'}  {classes}"
        f"  ({time.perf_counter() - t0:.1f}s)"
    )


def main():
    print("classes marked * are one-parameter families")
    row("A1", A1, 0.0)
    th, _ = annulus_ring_domain(RING)
    row("Kronecker", RING, th)
    for w in saddle_phase_scan(RING, grid=8, window=(th + 0.03, th + 0.06)).walls[:2]:
        row("Kronecker", RING, w.theta)
    for w in saddle_phase_scan(REFLECTED).walls:
        row("Kronecker", REFLECTED, w.theta)
    row("Kronecker", REFLECTED, 0.3)
    th, _ = annulus_ring_domain(AFFINE)
    row("AffineA2", AFFINE, th)
    walls = saddle_phase_scan(AFFINE, grid=8, window=(th + 0.02, th + 0.2)).walls
    walls += saddle_phase_scan(AFFINE, grid=16, window=(th + 0.25, th + 0.75)).walls
    for w in walls:
        row("AffineA2", AFFINE, w.theta)


if __name__ == "__main__":
    main()

"""Reproducible example suites behind the ``examples`` subcommand.

Each check returns a :class:`Check`; a suite passes when all of its checks do.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import Config
from .differentials import (
    QuadraticDifferential,
    accumulates_at,
    annulus_ring_domain,
    critical_points,
    residues,
    saddle_phase_scan,
    standard_periods,
    strip_decomposition,
    wall_cross_check,
)
from .quivers import edge_lattice, flip_lattice_map, flip_lattice_map_curly, is_isometry, mutate, quiver
from .stability import (
    AFFINE_A2,
    KRONECKER,
    CentralCharge,
    a_n_spectrum,
    affine_a2_spectrum,
    jacobi_indecomposables_3punct,
    kronecker_spectrum,
    linear_a,
    stable_count,
)
from .surfaces import SelfFoldedFlip, annulus, flip, flip_reachable, polygon, punctured_polygon, tagged_flip_graph, SignedTriangulation

SUITES = ("an", "dn", "kronecker", "sphere3")


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'pass' if self.ok else 'FAIL'}] {self.name}" + (f": {self.detail}" if self.detail else "")


def _flip_mutation(seed, depth: int) -> tuple:
    count = 0
    for t in flip_reachable(seed, depth):
        q = quiver(t)
        for e in t.arcs:
            try:
                ft = flip(t, e)
            except SelfFoldedFlip:
                continue
            count += 1
            if quiver(ft) != mutate(q, e):
                return False, f"mismatch flipping {e}"
            for sign in "+-":
                m = flip_lattice_map(t, e, sign)
                if not is_isometry(m, edge_lattice(t).skew_form, edge_lattice(ft).skew_form) or abs(m.det) != 1:
                    return False, f"F_{sign} of {e} is not an isometry"
                if not (flip_lattice_map_curly(t, e, sign).matrix == m.matrix).all():
                    return False, f"basis formulas disagree for F_{sign} of {e}"
    return True, f"{count} flips"


def check_flips(name, seed, depth=4) -> Check:
    ok, detail = _flip_mutation(seed, depth)
    return Check(name, ok, detail)


def check_catalan(n: int) -> Check:
    g = tagged_flip_graph(SignedTriangulation(polygon(n + 3)))
    cat = math.comb(2 * (n + 1), n + 1) // (n + 2)
    regular = all(len(set(nbrs)) == n for _, nbrs in g.values())
    return Check(f"disc with {n + 3} marks: Catalan count", len(g) == cat and regular, f"{len(g)} nodes, expected {cat}")


def check_period(rng, count=5, config=None) -> Check:
    worst = 0.0
    for _ in range(count):
        c = rng.uniform(0.5, 2.0) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        phi = QuadraticDifferential((c, 0, 1), (), 0.0)
        theta = 0.0
        for k in range(20):
            try:
                z = list(standard_periods(phi.with_theta(theta), config=config).values())[0]
                break
            except Exception:
                theta += 0.05
        else:
            return Check("period of (z^2+c) dz^2", False, f"no saddle-free phase for c={c}")
        expect = math.pi * 1j * c
        if (expect * cmath.exp(-1j * math.pi * theta)).imag < 0:
            expect = -expect
        worst = max(worst, abs(z - expect))
    return Check("period of (z^2+c) dz^2 equals pi i c", worst < 1e-8, f"max error {worst:.2e}")


def check_strips(num, poles, theta=0.13, config=None) -> Check:
    phi = QuadraticDifferential(tuple(num), tuple(poles), theta)
    dec = strip_decomposition(phi, config, generic=False)
    n = critical_points(phi).hat_rank
    return Check(f"strip count for polar type {sorted(phi.polar_type)}", len(dec.strips) == n, f"{len(dec.strips)} strips, n={n}")


def check_oracle(name, q, Z, spectrum, classes, primes=(2, 3)) -> Check:
    listed = set(spectrum.classes())
    for d in classes:
        for p in primes:
            _, iso = stable_count(q, d, Z, p)
            if (iso > 0) != (d in listed):
                return Check(name, False, f"class {d} over F_{p}: {iso} stable classes")
            fam = spectrum.family(d)
            if iso and (fam == 1) != (iso > 1):
                return Check(name, False, f"class {d} over F_{p}: family mismatch ({iso} classes)")
    return Check(name, True, f"{len(classes)} classes over F_2 and F_3")


def _classes(rank, bound):
    return [d for d in itertools.product(range(bound + 1), repeat=rank) if 0 < sum(d) <= bound]


def suite_an(rng, cfg) -> list:
    out = [check_flips("pentagon flips", polygon(5), 6), check_flips("hexagon flips", polygon(6), 4)]
    q = quiver(polygon(5))
    out.append(Check("pentagon quiver is A_2", sorted(np.abs(q.matrix).ravel().tolist()) == [0, 0, 1, 1]))
    out += [check_catalan(n) for n in range(1, 5)]
    for orient, Z in ((">", (1j, 1 + 1j)), (">", (1 + 1j, 1j)), (">>", (1j, 1 + 1j, -1 + 1j))):
        Zc = CentralCharge(Z)
        out.append(check_oracle(f"A_{len(Z)} spectrum {orient} Z={Z}", linear_a(orient), Zc, a_n_spectrum(orient, Zc), _classes(len(Z), 3)))
    out.append(check_period(rng, 3, cfg))
    out.append(check_strips((1, 0, 0, 0, 0, 0.3 + 0.2j), (), config=cfg))
    return out


def suite_dn(rng, cfg) -> list:
    out = [check_flips(f"{k}-gon with puncture flips", punctured_polygon(k), 4) for k in (2, 3)]
    phi = QuadraticDifferential((0.7 + 0.2j, 0.4 - 0.3j, 1.0), ((0, 2),), 0.0)
    out.append(check_strips(phi.numerator, phi.poles, config=cfg))
    res = residues(phi)["P0"]
    tp = (cmath.phase(res) / math.pi) % 1.0
    try:
        w = wall_cross_check(phi, tp, cfg)
        out.append(Check("egg pop wall", w.kind == "pop", w.summary()))
    except Exception as e:
        out.append(Check("egg pop wall", False, str(e)))
    return out


def suite_kronecker(rng, cfg) -> list:
    out = [check_flips("annulus(1,1) flips", annulus(1, 1), 4), check_flips("annulus(2,1) flips", annulus(2, 1), 4)]
    b = quiver(annulus(1, 1)).matrix
    out.append(Check("annulus quiver is Kronecker", abs(int(b[0, 1])) == 2, str(b.tolist())))
    for Z in ((-1 + 1j, 1 + 1j), (1 + 1j, -1 + 1j)):
        Zc = CentralCharge(Z)
        out.append(check_oracle(f"Kronecker spectrum Z={Z}", KRONECKER, Zc, kronecker_spectrum(Zc), _classes(2, 3)))
    Zc = CentralCharge((-1 + 1j, 1 + 1j, 2j))
    ax = [d for d in _classes(3, 3) if abs(Zc(d).real) < 1e-12]
    out.append(check_oracle("affine A_2 spectrum", AFFINE_A2, Zc, affine_a2_spectrum(Zc), ax))
    flat = QuadraticDifferential((1.0, 0.6 + 0.8j, 1.0), ((0, 3),), 0.0)
    scan = saddle_phase_scan(flat, grid=24, config=cfg)
    out.append(Check("annulus, reflected side: two walls", len(scan.walls) == 2, f"{len(scan.walls)} walls"))
    try:
        w = wall_cross_check(flat, scan.walls[0].theta, cfg)
        out.append(Check("annulus flip wall", w.kind == "flip", w.summary()))
    except Exception as e:
        out.append(Check("annulus flip wall", False, str(e)))
    ring = QuadraticDifferential((1.0, 4 + 1j, 1.0), ((0, 3),), 0.0)
    th, closed = annulus_ring_domain(ring, cfg)
    scan = saddle_phase_scan(ring, grid=8, config=cfg, window=(th + 0.012, th + 0.06))
    acc = accumulates_at(scan.walls, th)
    out.append(Check("annulus, ring side: walls accumulate", acc and closed is not None, f"{len(scan.walls)} walls, ring phase {th:.6f}"))
    return out


def suite_sphere3(rng, cfg) -> list:
    out = []
    worst = 0.0
    for _ in range(3):
        a, b, c = (complex(*rng.normal(size=2)) for _ in range(3))
        phi = QuadraticDifferential((c, b, a), ((0, 2), (1, 2)), 0.0)
        res = residues(phi)
        expect = {"P0": np.sqrt(c), "P1": np.sqrt(a + b + c), "inf": np.sqrt(a)}
        for k, v in expect.items():
            r = 4j * math.pi * v
            worst = max(worst, min(abs(res[k] - r), abs(res[k] + r)))
    out.append(Check("three-punctured sphere residues", worst < 1e-8, f"max error {worst:.2e}"))
    found = jacobi_indecomposables_3punct()
    out.append(Check("Jacobi indecomposables", len(found) == 4, f"{len(found)} found"))
    return out


RUNNERS: dict[str, Callable] = {"an": suite_an, "dn": suite_dn, "kronecker": suite_kronecker, "sphere3": suite_sphere3}


def run_suite(name: str, seed: int = 0, config: Config | None = None) -> list:
    if name not in RUNNERS:
        raise KeyError(name)
    rng = np.random.default_rng(seed)
    return RUNNERS[name](rng, config or Config())

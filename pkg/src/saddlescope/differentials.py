"""Genus-zero quadratic differentials: critical points, residues and horizontal trajectories.

A differential is ``R(z) dz^2`` with ``R = P / prod (z - p_j)^{m_j}``.  Its
``theta`` field selects the foliation under study: trajectories of phase
``theta`` are the curves along which ``exp(-i pi theta) * int sqrt(R) dz`` is
real.  The point at infinity is handled in the chart ``u = 1/z``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .config import Config

INF = "inf"


class InvalidDifferential(ValueError):
    pass


class NonSimpleZero(InvalidDifferential):
    pass


class DegeneratePolarType(InvalidDifferential):
    pass


class UnsupportedDifferential(InvalidDifferential):
    pass


class OddOrderPole(ValueError):
    pass


class Inconclusive(RuntimeError):
    """The numerics could not certify an answer within the configured budget."""


class IntegrationFailure(RuntimeError):
    pass


def _horner(coeffs, x):
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _wrap(a: float) -> float:
    """Angle reduced to (-pi, pi]."""
    return math.pi - (math.pi - a) % (2 * math.pi)


@dataclass(frozen=True)
class QuadraticDifferential:
    numerator: tuple
    poles: tuple = ()
    theta: float = 0.0

    def __post_init__(self):
        num = [complex(c) for c in self.numerator]
        while num and num[-1] == 0:
            num.pop()
        if not num:
            raise InvalidDifferential("numerator is identically zero")
        if not all(cmath.isfinite(c) for c in num):
            raise InvalidDifferential("coefficients must be finite")
        poles = []
        for p in self.poles:
            z, m = (p["z"], p["order"]) if isinstance(p, Mapping) else p
            if int(m) != m or m < 1:
                raise InvalidDifferential(f"pole order must be a positive integer, got {m!r}")
            poles.append((complex(z), int(m)))
        locs = [z for z, _ in poles]
        if len(set(locs)) != len(locs):
            raise InvalidDifferential("repeated pole location")
        object.__setattr__(self, "numerator", tuple(num))
        object.__setattr__(self, "poles", tuple(poles))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def degree(self) -> int:
        return len(self.numerator) - 1

    @property
    def infinity_order(self) -> int:
        return self.degree - sum(m for _, m in self.poles) + 4

    def pole_orders(self) -> dict:
        """Orders keyed by pole name: ``P0, P1, ...`` for finite poles and ``inf``."""
        out = {f"P{i}": m for i, (_, m) in enumerate(self.poles)}
        if self.infinity_order > 0:
            out[INF] = self.infinity_order
        return out

    @property
    def polar_type(self) -> tuple:
        return tuple(sorted(self.pole_orders().values()))

    def with_theta(self, theta: float) -> "QuadraticDifferential":
        return replace(self, theta=theta)

    def rotated(self, dtheta: float) -> "QuadraticDifferential":
        return replace(self, theta=self.theta + dtheta)

    def __call__(self, z: complex) -> complex:
        den = 1 + 0j
        for p, m in self.poles:
            den *= (z - p) ** m
        return _horner(self.numerator, z) / den

    def to_dict(self) -> dict:
        return {
            "numerator": [[c.real, c.imag] for c in self.numerator],
            "poles": [{"z": [z.real, z.imag], "order": m} for z, m in self.poles],
            "theta": self.theta,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "QuadraticDifferential":
        def cx(v):
            if isinstance(v, (list, tuple)):
                return complex(v[0], v[1] if len(v) > 1 else 0.0)
            return complex(v)

        try:
            num = [cx(v) for v in d["numerator"]]
            poles = [(cx(p["z"]), p["order"]) for p in d.get("poles", [])]
        except (KeyError, TypeError, IndexError) as exc:
            raise InvalidDifferential(f"malformed differential: {exc}") from None
        return cls(tuple(num), tuple(poles), float(d.get("theta", 0.0)))


# -- critical points ----------------------------------------------------------


@dataclass(frozen=True)
class CriticalPointReport:
    zeros: tuple
    finite_poles: tuple
    infinity_order: int
    finite_critical: tuple  # zeros and simple poles
    infinite_critical: tuple  # names of poles of order >= 2
    hat_rank: int
    polar_type: tuple

    def to_dict(self) -> dict:
        return {
            "zeros": [[z.real, z.imag] for z in self.zeros],
            "finite_poles": [{"z": [z.real, z.imag], "order": m} for z, m in self.finite_poles],
            "infinity_order": self.infinity_order,
            "infinite_critical": list(self.infinite_critical),
            "hat_rank": self.hat_rank,
            "polar_type": list(self.polar_type),
        }


def _zeros(phi: QuadraticDifferential) -> tuple:
    if phi.degree == 0:
        return ()
    roots = np.roots(np.array(phi.numerator[::-1]))
    poly = np.polynomial.Polynomial(np.array(phi.numerator))
    dpoly = poly.deriv()
    out = []
    for r in roots:
        r = complex(r)
        for _ in range(3):
            d = complex(dpoly(r))
            if d == 0:
                break
            r -= complex(poly(r)) / d
        out.append(r)
    scale = max([1.0] + [abs(r) for r in out])
    sep = 1e-7 * scale
    for i in range(len(out)):
        for j in range(i):
            if abs(out[i] - out[j]) < sep:
                raise NonSimpleZero(f"zeros {out[j]:.6g} and {out[i]:.6g} are not separated")
        for p, _ in phi.poles:
            if abs(out[i] - p) < sep:
                raise NonSimpleZero(f"zero {out[i]:.6g} collides with the pole {p:.6g}")
    return tuple(sorted(out, key=lambda z: (round(z.real, 9), round(z.imag, 9))))


def critical_points(phi: QuadraticDifferential) -> CriticalPointReport:
    m_inf = phi.infinity_order
    if m_inf < 0:
        raise UnsupportedDifferential(
            f"infinity is a zero of order {-m_inf}; move it to a finite point first"
        )
    zeros = _zeros(phi)
    orders = phi.pole_orders()
    if not orders:
        raise InvalidDifferential("the differential has no poles")
    ptype = phi.polar_type
    if ptype in ((2, 2), (4,)):
        raise DegeneratePolarType(f"polar type {ptype} is excluded")
    simple = tuple(z for z, m in phi.poles if m == 1)
    if not zeros and not simple:
        raise InvalidDifferential("no finite critical point")
    n = -6 + sum(m + 1 for m in orders.values())
    infinite = tuple(k for k, m in orders.items() if m >= 2)
    return CriticalPointReport(zeros, phi.poles, m_inf, zeros + simple, infinite, n, ptype)


def hat_rank(phi: QuadraticDifferential) -> int:
    return -6 + sum(m + 1 for m in phi.pole_orders().values())


# -- charts ---------------------------------------------------------------------


class _Chart:
    """R in one coordinate chart as numerator / prod (x - loc)^m."""

    def __init__(self, num, poles, names):
        self.num = list(num)
        self.poles = [(complex(p), m) for p, m in poles]
        self.names = list(names)

    def R(self, x):
        den = 1 + 0j
        for p, m in self.poles:
            den *= (x - p) ** m
        return _horner(self.num, x) / den

    def leading(self, i) -> complex:
        """Coefficient c with R ~ c (x - p_i)^{-m_i}."""
        p, _ = self.poles[i]
        den = 1 + 0j
        for k, (q, m) in enumerate(self.poles):
            if k != i:
                den *= (p - q) ** m
        return _horner(self.num, p) / den


def _charts(phi: QuadraticDifferential):
    z_chart = _Chart(phi.numerator, phi.poles, [f"P{i}" for i in range(len(phi.poles))])
    m_inf = phi.infinity_order
    scale = 1 + 0j
    u_poles, names = [], []
    for i, (p, m) in enumerate(phi.poles):
        if p != 0:
            scale *= (-p) ** m
            u_poles.append((1 / p, m))
            names.append(f"P{i}")
    num = [c / scale for c in phi.numerator[::-1]]
    if m_inf > 0:
        u_poles.append((0j, m_inf))
        names.append(INF)
    return z_chart, _Chart(num, u_poles, names)


# -- residues -------------------------------------------------------------------


def _pole_lookup(phi: QuadraticDifferential, p):
    """Normalize a pole reference to its name."""
    if p == INF or p is None:
        return INF
    if isinstance(p, str):
        return p
    if isinstance(p, (int, np.integer)) and not isinstance(p, bool):
        return f"P{int(p)}"
    z = complex(p)
    for i, (q, _) in enumerate(phi.poles):
        if abs(q - z) < 1e-12 * max(1.0, abs(z)):
            return f"P{i}"
    raise ValueError(f"{p!r} is not a pole")


def _canonical_residue(r: complex) -> complex:
    a = cmath.phase(r)
    return -r if not (0 <= a < math.pi) else r


def double_pole_coefficient(phi: QuadraticDifferential, p) -> complex:
    """The constant r with R ~ r / (z - p)^2 (in the chart w = 1/z at infinity)."""
    name = _pole_lookup(phi, p)
    orders = phi.pole_orders()
    if orders.get(name) != 2:
        raise ValueError(f"{name} is not a double pole")
    zc, uc = _charts(phi)
    chart = uc if name == INF else zc
    return chart.leading(chart.names.index(name))


def _contour_residue(chart: _Chart, i: int, others, samples: int = 1024) -> complex:
    p, _ = chart.poles[i]
    d = min((abs(q - p) for q in others if q != p), default=1.0)
    rho = 0.5 * d
    t = 2 * np.pi * np.arange(samples) / samples
    pts = p + rho * np.exp(1j * t)
    vals = np.array([cmath.sqrt(chart.R(x)) for x in pts])
    for k in range(1, samples):
        if abs(vals[k] - vals[k - 1]) > abs(vals[k] + vals[k - 1]):
            vals[k] = -vals[k]
    if abs(vals[0] - vals[-1]) > abs(vals[0] + vals[-1]):
        raise OddOrderPole("square root does not return to itself around the pole")
    dz = 1j * rho * np.exp(1j * t) * (2 * np.pi / samples)
    return complex(2 * np.sum(vals * dz))


def residue(phi: QuadraticDifferential, p) -> complex:
    """Residue of ``phi`` at an even-order pole, normalized to argument in [0, pi)."""
    name = _pole_lookup(phi, p)
    orders = phi.pole_orders()
    if name not in orders:
        raise ValueError(f"{p!r} is not a pole")
    m = orders[name]
    if m % 2:
        raise OddOrderPole(f"{name} has odd order {m}")
    if m == 2:
        return _canonical_residue(4j * math.pi * cmath.sqrt(double_pole_coefficient(phi, name)))
    zc, uc = _charts(phi)
    zeros = _zeros(phi)
    if name == INF:
        others = [q for q, _ in uc.poles] + [1 / z for z in zeros if z != 0]
        return _canonical_residue(_contour_residue(uc, uc.names.index(INF), others))
    others = [q for q, _ in zc.poles] + list(zeros)
    return _canonical_residue(_contour_residue(zc, zc.names.index(name), others))


def residues(phi: QuadraticDifferential) -> dict:
    return {k: residue(phi, k) for k, m in phi.pole_orders().items() if m % 2 == 0}


# -- local structure at zeros --------------------------------------------------


def _dR(phi: QuadraticDifferential, z: complex) -> complex:
    num = np.polynomial.Polynomial(np.array(phi.numerator))
    den = 1 + 0j
    for p, m in phi.poles:
        den *= (z - p) ** m
    # at a zero of P the derivative of P/Q is P'/Q
    return complex(num.deriv()(z)) / den


def zero_ray_directions(phi: QuadraticDifferential, z0: complex, theta: float | None = None) -> tuple:
    """Unit directions of the three trajectories leaving ``z0``, in counterclockwise order."""
    theta = phi.theta if theta is None else theta
    a = cmath.phase(_dR(phi, z0)) / 2
    return tuple(cmath.exp(1j * (2 / 3) * (math.pi * theta - a + math.pi * k)) for k in range(3))


# -- trajectories -------------------------------------------------------------------


@dataclass(frozen=True)
class End:
    kind: str  # pole | near_zero | closed | budget | hit
    pole: str | None = None
    direction: int | None = None
    zero: int | None = None
    distance: float | None = None
    point: complex | None = None

    @property
    def label(self) -> str:
        if self.kind == "pole":
            return self.pole if self.direction is None else f"{self.pole}:{self.direction}"
        if self.kind == "near_zero":
            return f"zero{self.zero}"
        return self.kind


@dataclass(eq=False)
class Trajectory:
    theta: float
    start: tuple  # (zero index, ray index) or ("seed", point)
    samples: np.ndarray  # points in the z coordinate
    branch: np.ndarray  # sqrt(R) at the samples, continuous along the curve
    end: End
    approach: dict = field(default_factory=dict)  # zero index -> least flat distance
    arrival: tuple = ()  # angles at the stopping radius and at twice that radius
    hit: tuple | None = None  # (target index, segment index, point) for crossing runs

    @property
    def min_approach(self) -> float:
        return min(self.approach.values(), default=math.inf)


# Dormand-Prince 5(4) tableau
_C = (0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _segment_hits(a: complex, b: complex, poly: np.ndarray):
    """Indices and parameters where segment a-b crosses the polyline."""
    p, q = poly[:-1], poly[1:]
    d1 = b - a
    d2 = q - p
    den = d1.real * d2.imag - d1.imag * d2.real
    w = p - a
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w.real * d2.imag - w.imag * d2.real) / den
        u = (w.real * d1.imag - w.imag * d1.real) / den
    ok = (den != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    idx = np.nonzero(ok)[0]
    return [(int(i), float(t[i]), float(u[i])) for i in idx]


class Tracer:
    """Integrates trajectories of one differential, shared across rays and phases."""

    def __init__(self, phi: QuadraticDifferential, config: Config | None = None):
        self.phi = phi
        self.cfg = config or Config()
        self.report = critical_points(phi)
        self.zeros = self.report.zeros
        self.charts = _charts(phi)
        self.has_inf_chart = True
        self._zero_coef = [(2 / 3) * abs(_dR(phi, z)) ** 0.5 for z in self.zeros]
        crit = list(self.zeros) + [p for p, _ in phi.poles]
        self._zero_scale = []
        for z in self.zeros:
            d = min((abs(z - c) for c in crit if c != z), default=1.0)
            self._zero_scale.append(min(d, 1.0) if d > 0 else 1.0)
        # per chart: critical point list (loc, weight) and stop radii
        self._crit = []
        self._stop = []
        for ci, ch in enumerate(self.charts):
            zs = list(self.zeros) if ci == 0 else [1 / z for z in self.zeros if z != 0]
            pts = [(z, 1.0) for z in zs] + [(p, max(1.0, m / 2)) for p, m in ch.poles]
            self._crit.append(pts)
            radii = []
            for p, _ in ch.poles:
                d = min((abs(p - q) for q, _ in pts if q != p), default=1.0)
                radii.append(self.cfg.stop_radius * min(d, 1.0))
            self._stop.append(radii)
        self._lead = [[ch.leading(i) for i in range(len(ch.poles))] for ch in self.charts]

    # chart helpers
    def _to_z(self, ci, x):
        return x if ci == 0 else (1 / x if x != 0 else complex(math.inf))

    def _branch(self, ch, x, sref):
        s = cmath.sqrt(ch.R(x))
        if abs(s - sref) > abs(s + sref):
            s = -s
        return s

    def _direction_label(self, ci, i, theta, x) -> int | None:
        ch = self.charts[ci]
        p, m = ch.poles[i]
        if m < 3:
            return None
        name = ch.names[i]
        # use the pole's own coordinate: z - p for finite poles, u for infinity
        if name == INF:
            alpha = cmath.phase(x - p)
            c = self._lead[ci][i]
        else:
            k = int(name[1:])
            zp, _ = self.phi.poles[k]
            alpha = cmath.phase(self._to_z(ci, x) - zp)
            c = self._lead[0][self.charts[0].names.index(name)]
        j = (cmath.phase(c) / 2 - math.pi * theta - (m - 2) * alpha / 2) / math.pi
        return int(round(j)) % (m - 2)

    def pole_angle(self, name: str, z: complex) -> float:
        """Angle of a point around the named pole, in the pole's own coordinate."""
        if name == INF:
            return cmath.phase(1 / z)
        zp, _ = self.phi.poles[int(name[1:])]
        return cmath.phase(z - zp)

    def asymptotic_direction(self, name: str, j: int, theta: float) -> float:
        m = self.phi.pole_orders()[name]
        if name == INF:
            ch = self.charts[1]
            c = self._lead[1][ch.names.index(INF)]
        else:
            c = self._lead[0][self.charts[0].names.index(name)]
        return -2 * (math.pi * theta - cmath.phase(c) / 2 + math.pi * j) / (m - 2)

    def start_ray(self, zi: int, k: int, theta: float):
        """Starting chart point, branch and phase factor of ray ``k`` at zero ``zi``."""
        z0 = self.zeros[zi]
        v = zero_ray_directions(self.phi, z0, theta)[k]
        eps = self.cfg.start_offset * self._zero_scale[zi]
        x0 = z0 + eps * v
        omega = cmath.exp(1j * math.pi * theta)
        s0 = cmath.sqrt(self.charts[0].R(x0))
        d = omega * abs(s0) / s0
        if (d * v.conjugate()).real < 0:
            s0 = -s0
        return x0, s0, omega, eps

    def trace_ray(self, zi: int, k: int, theta: float | None = None, **kw) -> Trajectory:
        theta = self.phi.theta if theta is None else theta
        x0, s0, omega, eps = self.start_ray(zi, k, theta)
        z0 = self.zeros[zi]
        traj = self._run(0, x0, s0, omega, theta, own=(zi, eps), **kw)
        traj.start = (zi, k)
        traj.samples = np.concatenate([[z0], traj.samples])
        traj.branch = np.concatenate([[0j], traj.branch])
        return traj

    def trace_from(self, z: complex, direction: complex, theta: float | None = None, **kw) -> Trajectory:
        """Trajectory through a regular point, leaving it on the side of ``direction``."""
        theta = self.phi.theta if theta is None else theta
        omega = cmath.exp(1j * math.pi * theta)
        ci = 0
        if abs(z) > self.cfg.chart_radius:
            ci = 1
        ch = self.charts[ci]
        x = z if ci == 0 else 1 / z
        s = cmath.sqrt(ch.R(x))
        if ci == 0:
            d = omega * abs(s) / s
            if (d * direction.conjugate()).real < 0:
                s = -s
        else:
            d = -(omega * abs(s) / s) * z * z
            if (d * direction.conjugate()).real < 0:
                s = -s
        traj = self._run(ci, x, s, omega, theta, **kw)
        traj.start = ("seed", z)
        return traj

    def _run(self, ci, x, s, omega, theta, own=None, targets=None, seed_closure=False, max_length=None):
        cfg = self.cfg
        max_length = max_length or cfg.max_length
        ch = self.charts[ci]
        tol = cfg.tol
        pts = [self._to_z(ci, x)]
        brs = [s if ci == 0 else -s * x * x]
        approach = {}
        own_zi, own_eps = own if own else (None, 0.0)
        armed = own is None
        z_start = pts[0]
        length = 0.0
        steps = 0
        h = min(cfg.max_step, 0.1 * own_eps) if own else cfg.max_step * 0.1
        crossing_r2 = None
        end = None
        hit = None
        arrival = ()
        branch = self._branch
        k1 = omega * abs(s) / s
        while True:
            steps += 1
            if steps > cfg.max_steps or length > max_length:
                end = End("budget", point=pts[-1])
                break
            # step cap from the distance to critical points of this chart
            cap = cfg.max_step
            for c, w in self._crit[ci]:
                r = abs(x - c) / w
                if 0.5 * r < cap:
                    cap = 0.5 * r
            if h > cap:
                h = cap
            if h < 1e-15:
                raise IntegrationFailure(f"step underflow at {self._to_z(ci, x)}")
            # one Dormand-Prince step
            ks = [k1]
            for a_row in _A[1:]:
                xi = x + h * sum(a * kk for a, kk in zip(a_row, ks))
                si = branch(ch, xi, s)
                ks.append(omega * abs(si) / si)
            x5 = x + h * sum(a * kk for a, kk in zip(_A[6], ks[:6]))
            err = abs(h * sum(e * kk for e, kk in zip(_E, ks)))
            s5 = branch(ch, x5, s)
            if err > tol or abs(s5 - s) > 0.5 * abs(s):
                fac = 0.5 if err <= tol else max(0.2, 0.9 * (tol / err) ** 0.2)
                h *= fac
                continue
            x_old = x
            x, s, k1 = x5, s5, ks[6]
            length += h
            z = self._to_z(ci, x)
            z_old = pts[-1]
            pts.append(z)
            brs.append(s if ci == 0 else -s * x * x)
            h *= min(4.0, 0.9 * (tol / err) ** 0.2) if err > 0 else 4.0

            # closeness to zeros
            stop_zero = None
            for zi, zk in enumerate(self.zeros):
                dist = self._zero_coef[zi] * abs(z - zk) ** 1.5
                if zi == own_zi and not armed:
                    if dist > 100 * cfg.hysteresis * cfg.delta_saddle and abs(z - zk) > 4 * own_eps:
                        armed = True
                    continue
                if dist < approach.get(zi, math.inf):
                    approach[zi] = dist
                if dist < cfg.delta_saddle:
                    stop_zero = (zi, dist)
            if stop_zero is not None:
                end = End("near_zero", zero=stop_zero[0], distance=stop_zero[1], point=z)
                break

            # crossing a target polyline
            if targets is not None and length > 2 * own_eps:
                best = None
                for ti, poly in enumerate(targets):
                    for si_, t, u in _segment_hits(z_old, z, poly):
                        if best is None or t < best[0]:
                            best = (t, ti, si_, z_old + t * (z - z_old))
                if best is not None:
                    t, ti, si_, pt = best
                    pts[-1] = pt
                    brs[-1] = cmath.sqrt(self.phi(pt))
                    if abs(brs[-1] - brs[-2]) > abs(brs[-1] + brs[-2]):
                        brs[-1] = -brs[-1]
                    hit = (ti, si_, pt)
                    end = End("hit", point=pt)
                    break

            # closure of a seeded trajectory
            if seed_closure and length > 10 * cfg.max_step:
                a, b = z_old, z
                d = b - a
                t = 0.0 if d == 0 else max(0.0, min(1.0, ((z_start - a) * d.conjugate()).real / abs(d) ** 2))
                if abs(a + t * d - z_start) < 1e-6 * max(1.0, abs(z_start)):
                    end = End("closed", point=z_start)
                    pts[-1] = z_start
                    break

            # arrival at a pole
            stop = None
            for i, (p, m) in enumerate(ch.poles):
                r = abs(x - p)
                rho = self._stop[ci][i]
                if r < 2 * rho and crossing_r2 is None:
                    r_old = abs(x_old - p)
                    t = (r_old - 2 * rho) / (r_old - r) if r_old != r else 1.0
                    crossing_r2 = (i, x_old + t * (x - x_old))
                if r < rho:
                    r_old = abs(x_old - p)
                    t = (r_old - rho) / (r_old - r) if r_old != r else 1.0
                    stop = (i, m, x_old + t * (x - x_old))
                    break
            if stop is not None:
                i, m, xr = stop
                name = ch.names[i]
                j = self._direction_label(ci, i, theta, xr)
                zr = self._to_z(ci, xr)
                a1 = self.pole_angle(name, zr)
                a2 = a1
                if crossing_r2 is not None and crossing_r2[0] == i:
                    a2 = self.pole_angle(name, self._to_z(ci, crossing_r2[1]))
                arrival = (a1, a2)
                end = End("pole", pole=name, direction=j, point=zr)
                break

            # chart switch
            if ci == 0 and abs(x) > cfg.chart_radius:
                ci, x, s = 1, 1 / x, -s * x * x
            elif ci == 1 and abs(x) > 2 / cfg.chart_radius:
                ci, x, s = 0, 1 / x, -s * x * x
            else:
                continue
            ch = self.charts[ci]
            k1 = omega * abs(s) / s
            crossing_r2 = None
            h = min(h, 0.01 * abs(x))
        return Trajectory(theta, (), np.array(pts), np.array(brs), end, approach, arrival, hit)


def trace_ray(phi: QuadraticDifferential, z0, k: int, budget: float | None = None, config: Config | None = None) -> Trajectory:
    """Trace ray ``k`` from the zero ``z0`` (a zero or its index)."""
    tr = Tracer(phi, config)
    if isinstance(z0, (int, np.integer)):
        zi = int(z0)
    else:
        zi = min(range(len(tr.zeros)), key=lambda i: abs(tr.zeros[i] - complex(z0)))
    return tr.trace_ray(zi, k, max_length=budget)


# -- saddle-free test and strip decomposition ------------------------------------


class DecompositionMismatch(RuntimeError):
    pass


def separatrices(tracer: Tracer, theta: float) -> dict:
    """All rays leaving the zeros at phase ``theta``, keyed by (zero index, ray index)."""
    return {(zi, k): tracer.trace_ray(zi, k, theta) for zi in range(len(tracer.zeros)) for k in range(3)}


def _saddle_verdict(tracer: Tracer, rays: Mapping) -> bool:
    cfg = tracer.cfg
    orders = tracer.phi.pole_orders()
    for r in rays.values():
        if r.end.kind == "budget":
            raise Inconclusive(f"ray {r.start} exhausted its budget")
        if r.end.kind == "near_zero":
            return False
        if r.end.kind == "pole" and orders[r.end.pole] == 1:
            return False
    if min((r.min_approach for r in rays.values()), default=math.inf) <= cfg.hysteresis * cfg.delta_saddle:
        raise Inconclusive("a ray passes too close to a zero to certify saddle-freeness")
    return True


def is_saddle_free(phi: QuadraticDifferential, config: Config | None = None, theta: float | None = None):
    """Return (verdict, separatrix list) at the phase of ``phi`` (or ``theta``)."""
    tr = Tracer(phi, config)
    if not tr.report.infinite_critical:
        raise InvalidDifferential("no pole of order at least two")
    theta = phi.theta if theta is None else theta
    rays = separatrices(tr, theta)
    return _saddle_verdict(tr, rays), [rays[k] for k in sorted(rays)]


@dataclass(eq=False)
class Strip:
    name: str
    corners: tuple  # ((zero, k), (zero, k')): the sectors between rays k and k+1
    marks: tuple
    separatrices: tuple
    period: complex = 0j
    generic: Trajectory | None = None

    @property
    def degenerate(self) -> bool:
        return self.corners[0][0] == self.corners[1][0]

    @property
    def zeros(self) -> tuple:
        return tuple(sorted({c[0] for c in self.corners}))


@dataclass(eq=False)
class HalfPlane:
    name: str
    corner: tuple
    marks: tuple
    separatrices: tuple
    generic: Trajectory | None = None


@dataclass(eq=False)
class StripDecomposition:
    theta: float
    zeros: tuple
    rays: dict
    strips: list
    half_planes: list
    rotation: dict  # mark -> separatrix keys in counterclockwise order
    ring_free: bool = True

    def strip(self, name) -> Strip:
        return next(s for s in self.strips if s.name == name)

    def periods(self) -> dict:
        return {s.name: s.period for s in self.strips}


def _cyclic_equal(a: list, b: list) -> bool:
    if len(a) != len(b):
        return False
    if not a:
        return True
    try:
        i = b.index(a[0])
    except ValueError:
        return False
    return b[i:] + b[:i] == a


def _continue_branch(phi: QuadraticDifferential, a: complex, b: complex, s0: complex, samples: int = 64):
    """Points on the segment [a, b] with sqrt(phi) continued from the value s0 at a."""
    pts = a + (b - a) * np.linspace(0.0, 1.0, samples)
    vals = np.sqrt(np.array([phi(z) for z in pts], dtype=complex))
    prev = s0
    for i in range(samples):
        if abs(vals[i] - prev) > abs(vals[i] + prev):
            vals[i] = -vals[i]
        prev = vals[i]
    return pts, vals


def _transverse_order(tracer: Tracer, rays: Mapping, keys) -> list:
    """Counterclockwise order of rays entering one asymptotic direction of a pole of order >= 3.

    Neighbouring trajectories converge there faster than any angular
    resolution, so they are ordered by their flat transverse offset instead:
    a larger angle around the pole is to the right of the direction of travel.
    """
    ref = rays[keys[0]]
    forward = path_integral(tracer.phi, ref.samples[-2:], ref.branch[-2:])
    offsets = {}
    for k in keys:
        r = rays[k]
        if k == keys[0]:
            offsets[k] = 0.0
            continue
        pts, br = _continue_branch(tracer.phi, ref.samples[-1], r.samples[-1], ref.branch[-1])
        offsets[k] = (path_integral(tracer.phi, pts, br) * forward.conjugate()).imag / abs(forward)
    order = sorted(keys, key=lambda k: -offsets[k])
    vals = sorted(offsets.values())
    if any(b - a <= tracer.cfg.delta_saddle for a, b in zip(vals, vals[1:])):
        raise DecompositionMismatch("two separatrices arrive at the same height")
    return order


def _rotation_system(tracer: Tracer, rays: Mapping, theta: float) -> dict:
    orders = tracer.phi.pole_orders()
    groups: dict = {}
    for key, r in rays.items():
        groups.setdefault(r.end.label, []).append(key)
    rotation = {}
    for mark, keys in groups.items():
        r0 = rays[keys[0]].end
        m = orders[r0.pole]
        if m >= 3:
            order1 = _transverse_order(tracer, rays, keys)
        else:
            order1 = sorted(keys, key=lambda k: rays[k].arrival[0] % (2 * math.pi))
            order2 = sorted(keys, key=lambda k: rays[k].arrival[1] % (2 * math.pi))
            if not _cyclic_equal(order1, order2):
                raise DecompositionMismatch(f"arrival order at {mark} is unstable")
        rotation[mark] = order1
    return rotation


def _group_sectors(tracer: Tracer, rays: Mapping, rotation: Mapping):
    """Partner of each sector (or None for half-planes), read off the rotation system."""
    orders = tracer.phi.pole_orders()
    seen: dict = {}

    def note(sector, partner):
        seen.setdefault(sector, []).append(partner)

    for mark, keys in rotation.items():
        end = rays[keys[0]].end
        cyclic = orders[end.pole] == 2
        pairs = list(zip(keys, keys[1:]))
        if cyclic:
            pairs.append((keys[-1], keys[0]))
        else:
            zi, k = keys[0]
            note((zi, k), None)  # clockwise of the first arrival
            zi, k = keys[-1]
            note((zi, (k - 1) % 3), None)
        for (za, ka), (zb, kb) in pairs:
            right = (za, (ka - 1) % 3)
            left = (zb, kb)
            note(right, left)
            note(left, right)
    partner = {}
    for sector, got in seen.items():
        if len(got) != 2 or got[0] != got[1]:
            raise DecompositionMismatch(f"sector {sector} is bounded inconsistently: {got}")
        partner[sector] = got[0]
    n_sectors = 3 * len(tracer.zeros)
    if len(partner) != n_sectors:
        raise DecompositionMismatch("some sector is not bounded by arriving separatrices")
    return partner


def _complex_poly(phi: QuadraticDifferential):
    num = np.array(phi.numerator[::-1])
    poles = phi.poles

    def R(z):
        den = np.ones_like(z)
        for p, m in poles:
            den = den * (z - p) ** m
        return np.polyval(num, z) / den

    return R


_GL = {}


def _gauss(nodes: int):
    if nodes not in _GL:
        _GL[nodes] = np.polynomial.legendre.leggauss(nodes)
    return _GL[nodes]


def path_integral(phi: QuadraticDifferential, pts: np.ndarray, branch: np.ndarray, nodes: int = 10) -> complex:
    """Integral of sqrt(R) dz along a polyline, following the given branch samples.

    A zero branch value marks an endpoint sitting on a simple zero; that
    segment is integrated after the substitution z = z0 + (z1 - z0) t^2.
    """
    R = _complex_poly(phi)
    x, w = _gauss(nodes)
    t = (x + 1) / 2
    a, b = pts[:-1], pts[1:]
    sa, sb = branch[:-1], branch[1:]
    total = 0j
    reg = (sa != 0) & (sb != 0)
    if reg.any():
        A, B, SA, SB = a[reg], b[reg], sa[reg], sb[reg]
        z = A[:, None] + (B - A)[:, None] * t[None, :]
        v = np.sqrt(R(z).astype(complex))
        ref = SA[:, None] + (SB - SA)[:, None] * t[None, :]
        v = np.where(np.abs(v - ref) > np.abs(v + ref), -v, v)
        total += np.sum((v * w[None, :]).sum(axis=1) * (B - A) / 2)
    for i in np.nonzero(~reg)[0]:
        za, zb, s_a, s_b = a[i], b[i], sa[i], sb[i]
        if s_a == 0 and s_b == 0:
            raise ValueError("segment joins two zeros directly")
        flip = s_a != 0
        if flip:  # integrate from the zero end
            za, zb, s_a, s_b = zb, za, s_b, s_a
        z = za + (zb - za) * t**2
        v = np.sqrt(R(z).astype(complex))
        ref = t * s_b
        v = np.where(np.abs(v - ref) > np.abs(v + ref), -v, v)
        seg = np.sum(v * 2 * t * (zb - za) * w) / 2
        total += -seg if flip else seg
    return complex(total)


def horizontality_residual(phi: QuadraticDifferential, traj: Trajectory, config: Config | None = None, nodes: int = 10) -> float:
    """Largest relative deviation |Im I| / |I| over the segments of a traced polyline,
    where I = exp(-i pi theta) times the integral of sqrt(phi) along the segment.

    The flat length of a segment grows quickly near a pole, so the residual is
    taken relative to it.  Each segment is measured along the chord of the
    chart it was integrated in: z near the origin and w = 1/z far out.
    """
    cfg = config or Config()
    R = _complex_poly(phi)
    x, w = _gauss(nodes)
    t = (x + 1) / 2
    rot = cmath.exp(-1j * math.pi * traj.theta)
    worst = 0.0
    pts, br = traj.samples, traj.branch
    for i in range(1, len(pts) - 1):
        za, zb, sa, sb = pts[i], pts[i + 1], br[i], br[i + 1]
        if min(abs(za), abs(zb)) > cfg.chart_radius / 2:
            wa, wb = 1 / za, 1 / zb
            ws = wa + (wb - wa) * t
            z = 1 / ws
            dz = -(wb - wa) / ws**2
        else:
            z = za + (zb - za) * t
            dz = np.full_like(t, zb - za, dtype=complex)
        v = np.sqrt(R(z).astype(complex))
        ref = sa + (sb - sa) * t
        v = np.where(np.abs(v - ref) > np.abs(v + ref), -v, v)
        seg = rot * np.sum(v * dz * w) / 2
        if seg != 0:
            worst = max(worst, abs(seg.imag) / abs(seg))
    return worst


def _strip_period(tracer: Tracer, rays: Mapping, strip: Strip, theta: float, nodes: int = 10):
    """2 * int sqrt(phi) from one corner zero to the other through the strip."""
    attempts = [strip.corners, strip.corners[::-1]]
    for (z0, k0), (z1, k1) in attempts:
        tgt_keys = [(z1, k1), (z1, (k1 + 1) % 3)]
        targets = [rays[k].samples for k in tgt_keys]
        x0, s0, omega, eps = tracer.start_ray(z0, k0, theta + 0.5)
        v = tracer._run(0, x0, s0, omega, theta + 0.5, own=(z0, eps), targets=targets)
        if v.end.kind == "near_zero" and v.end.zero == z1:
            # the vertical ray runs into the partner zero itself
            pts = np.concatenate([[tracer.zeros[z0]], v.samples, [tracer.zeros[z1]]])
            br = np.concatenate([[0j], v.branch, [0j]])
            z = 2 * path_integral(tracer.phi, pts, br, nodes)
            if (z * cmath.exp(-1j * math.pi * theta)).imag < 0:
                z = -z
            return z
        if v.end.kind != "hit":
            continue
        ti, si, X = v.hit
        pts_a = np.concatenate([[tracer.zeros[z0]], v.samples])
        br_a = np.concatenate([[0j], v.branch])
        tg = rays[tgt_keys[ti]]
        sX = cmath.sqrt(tracer.phi(X))
        if abs(sX - tg.branch[si]) > abs(sX + tg.branch[si]) and tg.branch[si] != 0:
            sX = -sX
        if si == 0:  # crossing on the first segment: branch reference from the far vertex
            sX = cmath.sqrt(tracer.phi(X))
            if abs(sX - tg.branch[1]) > abs(sX + tg.branch[1]):
                sX = -sX
        pts_b = np.concatenate([tg.samples[: si + 1], [X]])
        br_b = np.concatenate([tg.branch[: si + 1], [sX]])
        sign = 1 if abs(br_a[-1] - sX) <= abs(br_a[-1] + sX) else -1
        ia = path_integral(tracer.phi, pts_a, br_a, nodes)
        ib = path_integral(tracer.phi, pts_b, br_b, nodes)
        z = 2 * (ia - sign * ib)
        if (z * cmath.exp(-1j * math.pi * theta)).imag < 0:
            z = -z
        return z
    raise DecompositionMismatch(f"no vertical crossing found for strip {strip.name}")


def _half_plane_name(marks) -> str:
    return f"h:{marks[0]}>{marks[1]}"


def strip_decomposition(
    phi: QuadraticDifferential,
    config: Config | None = None,
    theta: float | None = None,
    generic: bool = True,
    nodes: int = 10,
    tracer: Tracer | None = None,
) -> StripDecomposition:
    tr = tracer or Tracer(phi, config)
    theta = phi.theta if theta is None else theta
    orders = phi.pole_orders()
    if any(m == 1 for m in orders.values()):
        raise UnsupportedDifferential("strip decompositions need a complete differential (no simple poles)")
    rays = separatrices(tr, theta)
    if not _saddle_verdict(tr, rays):
        raise DecompositionMismatch(f"the differential has a saddle trajectory at phase {theta}")
    rotation = _rotation_system(tr, rays, theta)
    partner = _group_sectors(tr, rays, rotation)
    mark_of = {key: r.end.label for key, r in rays.items()}

    strips, halves, done = [], [], set()
    for sector in sorted(partner):
        if sector in done:
            continue
        zi, k = sector
        seps = ((zi, k), (zi, (k + 1) % 3))
        marks = (mark_of[seps[0]], mark_of[seps[1]])
        other = partner[sector]
        if other is None:
            halves.append(HalfPlane(_half_plane_name(marks), sector, marks, seps))
            done.add(sector)
            continue
        zj, kj = other
        seps = seps + ((zj, kj), (zj, (kj + 1) % 3))
        strips.append(Strip(f"a{len(strips)}", (sector, other), marks, seps))
        done.update({sector, other})
    n = tr.report.hat_rank
    if len(strips) != n:
        raise DecompositionMismatch(f"found {len(strips)} strips but the rank is {n}")
    expected_h = sum(m - 2 for m in orders.values() if m >= 3)
    if len(halves) != expected_h:
        raise DecompositionMismatch(f"found {len(halves)} half-planes, expected {expected_h}")
    for s in strips:
        s.period = _strip_period(tr, rays, s, theta, nodes)
    if generic:
        for s in strips:
            s.generic = _generic_in_sector(tr, s.corners[0], theta, s.period, s.marks)
        for h in halves:
            h.generic = _generic_in_sector(tr, h.corner, theta, None, h.marks)
    return StripDecomposition(theta, tr.zeros, rays, strips, halves, rotation)


def _generic_in_sector(tracer: Tracer, sector, theta, period, marks) -> Trajectory:
    """A generic trajectory crossing the sector, traced to both of its ends."""
    zi, k = sector
    z0 = tracer.zeros[zi]
    dirs = zero_ray_directions(tracer.phi, z0, theta)
    bis = dirs[k] * cmath.exp(1j * math.pi / 3)
    scale = 0.2 * tracer._zero_scale[zi]
    if period is not None:
        height = (period * cmath.exp(-1j * math.pi * theta)).imag / 2
        coef = tracer._zero_coef[zi]
        scale = min(scale, (0.25 * height / coef) ** (2 / 3))
    seed = z0 + scale * bis
    back = tracer.trace_from(seed, dirs[k], theta)
    fwd = tracer.trace_from(seed, dirs[(k + 1) % 3], theta)
    ends = (back.end.label, fwd.end.label)
    if ends != tuple(marks):
        raise DecompositionMismatch(f"generic trajectory in sector {sector} joins {ends}, expected {marks}")
    pts = np.concatenate([back.samples[::-1], fwd.samples[1:]])
    # the two halves leave the seed in opposite directions, so their branches differ by a sign
    br = np.concatenate([-back.branch[::-1], fwd.branch[1:]])
    return Trajectory(theta, ("seed", seed), pts, br, fwd.end, {}, (), None)


def standard_periods(phi: QuadraticDifferential, dec: StripDecomposition | None = None, config: Config | None = None) -> dict:
    dec = dec or strip_decomposition(phi, config, generic=False)
    return dec.periods()


# -- WKB triangulations -------------------------------------------------------------


def _surface_of(phi: QuadraticDifferential):
    from .surfaces import MarkedSurface

    orders = phi.pole_orders()
    punct = sum(1 for m in orders.values() if m == 2)
    boundary = tuple(m - 2 for _, m in sorted(orders.items()) if m >= 3)
    return MarkedSurface(0, punct, boundary)


def residue_signs(phi: QuadraticDifferential, theta: float | None = None) -> dict:
    """Sign at each double pole making exp(-i pi theta) * sign * Res lie in the upper half-plane."""
    theta = phi.theta if theta is None else theta
    out = {}
    for name, m in phi.pole_orders().items():
        if m == 2:
            r = residue(phi, name) * cmath.exp(-1j * math.pi * theta)
            out[name] = 1 if r.imag > 0 else -1
    return out


def wkb_triangulation(phi: QuadraticDifferential, config: Config | None = None, dec: StripDecomposition | None = None):
    """The ideal triangulation cut out by the separatrices, and its arc -> strip map."""
    from .surfaces import IdealTriangulation

    dec = dec or strip_decomposition(phi, config, generic=False)
    label = {}
    for s in dec.strips:
        for c in s.corners:
            label[c] = s.name
    for h in dec.half_planes:
        label[h.corner] = h.name
    mark_of = {key: r.end.label for key, r in dec.rays.items()}
    triangles, corners = [], []
    # Triangles are listed clockwise in the z-plane: with this orientation the
    # flip transport and the Kronecker juggle come out in their standard form.
    for zi in range(len(dec.zeros)):
        triangles.append(tuple(label[(zi, k)] for k in (2, 1, 0)))
        corners.append(tuple(mark_of[(zi, k)] for k in (2, 1, 0)))
    t = IdealTriangulation(
        _surface_of(phi),
        tuple(s.name for s in dec.strips),
        tuple(sorted(h.name for h in dec.half_planes)),
        tuple(triangles),
        tuple(corners),
    )
    return t, {s.name: s for s in dec.strips}


def wkb_signed(phi: QuadraticDifferential, config: Config | None = None, dec: StripDecomposition | None = None):
    from .surfaces import SignedTriangulation

    dec = dec or strip_decomposition(phi, config, generic=False)
    t, strips = wkb_triangulation(phi, config, dec)
    return SignedTriangulation(t, residue_signs(phi, dec.theta)), strips


# -- phase scans and walls ---------------------------------------------------------


class MismatchedWallKind(RuntimeError):
    pass


@dataclass(eq=False)
class WallEvent:
    theta: float
    kind: str  # flip | pop
    rays: tuple  # separatrices whose endpoints jump across the wall
    zeros: tuple  # zeros joined by the saddle
    pole: str | None = None  # encircled double pole of a pop wall
    period: complex = 0j  # Z of the saddle class, a positive multiple of exp(i pi theta)
    inconclusive: bool = False

    @property
    def length(self) -> float:
        return abs(self.period)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "kind": self.kind,
            "rays": [list(r) for r in self.rays],
            "zeros": list(self.zeros),
            "pole": self.pole,
            "length": self.length,
            "period": [self.period.real, self.period.imag],
        }


@dataclass(eq=False)
class ScanResult:
    walls: list
    inconclusive: list  # phase intervals whose labels could not be resolved
    evaluations: int

    def __iter__(self):
        return iter(self.walls)

    def __len__(self):
        return len(self.walls)


def _windings(tracer: Tracer, samples: np.ndarray) -> np.ndarray:
    """Turns made by a polyline around each finite critical point."""
    crit = list(tracer.zeros) + [p for p, _ in tracer.phi.poles]
    out = np.zeros(len(crit))
    for i, q in enumerate(crit):
        d = samples - q
        d = d[np.abs(d) > 0]
        if len(d) > 1:
            out[i] = np.sum(np.angle(d[1:] / d[:-1])) / (2 * math.pi)
    return out


def _labels(tracer: Tracer, theta: float, keys) -> tuple:
    """End labels of the separatrices together with their winding numbers.

    End labels alone miss walls where a ray sweeps across a zero but still
    reaches the same asymptotic direction; the windings then jump instead.
    """
    rays = [tracer.trace_ray(zi, k, theta) for zi, k in keys]
    return tuple(r.end.label for r in rays), np.array([_windings(tracer, r.samples) for r in rays])


_JUMP = 0.1  # turns; continuous drift over a refined interval stays far below this


def _changed(la, lb, nzeros: int) -> list:
    (ea, wa), (eb, wb) = la, lb
    out = []
    for i in range(len(ea)):
        if ea[i] != eb[i]:
            out.append(i)
            continue
        if ea[i] == "budget":
            continue
        diff = np.abs(wa[i] - wb[i])
        # a ray spiralling into a double pole winds around it without bound
        if ea[i].startswith("P") and ":" not in ea[i]:
            diff[nzeros + int(ea[i][1:])] = 0.0
        if diff.size and diff.max() > _JUMP:
            out.append(i)
    return out


def _saddle_period(tracer: Tracer, key, theta: float, target: int) -> complex:
    """Period of the saddle shadowed by ray ``key`` at a phase just off the wall."""
    r = tracer.trace_ray(*key, theta)
    zt = tracer.zeros[target]
    d = np.abs(r.samples[1:] - zt)
    i = int(np.argmin(d)) + 1
    pts = np.concatenate([r.samples[: i + 1], [zt]])
    br = np.concatenate([r.branch[: i + 1], [0j]])
    z = 2 * path_integral(tracer.phi, pts, br)
    if (z * cmath.exp(-1j * math.pi * theta)).real < 0:
        z = -z
    return z


def _classify_wall(tracer: Tracer, theta: float, keys, la, lb, changed, res) -> WallEvent:
    cfg = tracer.cfg
    ch_keys = [keys[i] for i in changed]
    inconclusive = any(la[i] == "budget" or lb[i] == "budget" for i in changed)
    # which zero does each changed ray approach at the wall?
    near = {}
    for key in ch_keys:
        r = tracer.trace_ray(*key, theta)
        if r.end.kind == "near_zero":
            near[key] = r.end.zero
        elif r.approach:
            near[key] = min(r.approach, key=r.approach.get)
    starts = {k[0] for k in ch_keys}
    targets = set(near.values())
    pole = None
    if len(starts) == 1 and targets <= starts:
        for name, rr in res.items():
            x = rr * cmath.exp(-1j * math.pi * theta)
            if abs(x.imag) <= 1e-5 * abs(rr):
                pole = name
    kind = "pop" if pole is not None else "flip"
    zeros = tuple(sorted(starts | targets))
    period = 0j
    if ch_keys and ch_keys[0] in near:
        key = ch_keys[0]
        try:
            period = _saddle_period(tracer, key, theta - 10 * cfg.refine_tol, near[key])
        except (ValueError, IntegrationFailure):
            period = 0j
    return WallEvent(theta % 1.0, kind, tuple(ch_keys), zeros, pole, period, inconclusive)


def saddle_phase_scan(
    phi: QuadraticDifferential,
    grid: int | None = None,
    refine_tol: float | None = None,
    config: Config | None = None,
    strict: bool = False,
    max_evaluations: int = 5000,
    window: tuple | None = None,
) -> ScanResult:
    """Locate the phases in [0, 1) (or in ``window``) at which some separatrix jumps."""
    cfg = config or Config()
    grid = grid or cfg.grid
    tol = refine_tol or cfg.refine_tol
    tr = Tracer(phi, cfg)
    if not tr.report.infinite_critical:
        raise InvalidDifferential("no pole of order at least two")
    keys = [(zi, k) for zi in range(len(tr.zeros)) for k in range(3)]
    res = residues(phi) if any(m == 2 for m in phi.pole_orders().values()) else {}
    res = {k: v for k, v in res.items() if phi.pole_orders()[k] == 2}
    lo, hi = window if window is not None else (0.0, 1.0)
    width = hi - lo
    offset = 0.0 if window is not None else 0.6180339887498949 / grid
    cache = {}
    count = [0]

    def lab(t):
        if t not in cache:
            count[0] += 1
            if count[0] > max_evaluations:
                raise Inconclusive("phase scan exceeded its evaluation budget")
            cache[t] = _labels(tr, t, keys)
        return cache[t]

    walls, bad = [], []
    stack = [(lo + offset + width * i / grid, lo + offset + width * (i + 1) / grid) for i in range(grid)]
    stack.reverse()
    while stack:
        a, b = stack.pop()
        la, lb = lab(a), lab(b)
        changed = _changed(la, lb, len(tr.zeros))
        if not changed:
            continue
        budget = any(la[0][i] == "budget" or lb[0][i] == "budget" for i in changed)
        if b - a < tol or (budget and b - a < 1e-6):
            w = _classify_wall(tr, (a + b) / 2, keys, la[0], lb[0], changed, res)
            (bad if w.inconclusive else walls).append(w)
            continue
        m = (a + b) / 2
        stack.append((m, b))
        stack.append((a, m))
    # pop walls sit exactly where a double-pole residue turns real; rays spiral
    # without bound nearby, so they are located from the residue instead
    walls = [w for w in walls if w.kind != "pop"]
    for name, rr in res.items():
        tp = (cmath.phase(rr) / math.pi) % 1.0
        inside = lo <= tp < hi or (window is None)
        if inside:
            walls.append(WallEvent(tp, "pop", (), (), name, complex(rr)))
    walls = _merge_walls(walls)
    if strict and bad:
        raise Inconclusive(f"{len(bad)} phase intervals could not be resolved")
    return ScanResult(walls, bad, count[0])


def _merge_walls(walls: list, gap: float = 1e-5) -> list:
    """Fuse the two jumps bracketing the thin band where a ray sits on a zero."""
    walls = sorted(walls, key=lambda w: w.theta)

    def same(u, v):
        # one saddle is shadowed by rays from both of its ends
        if set(u.rays) & set(v.rays):
            return True
        return u.kind == v.kind and abs(u.period - v.period) <= 1e-6 * max(abs(u.period), 1e-300)

    out = []
    for w in walls:
        if out and w.theta - out[-1][-1].theta < gap and same(w, out[-1][-1]):
            out[-1].append(w)
        else:
            out.append([w])
    if len(out) > 1 and out[0][0].theta + 1 - out[-1][-1].theta < gap and same(out[0][0], out[-1][-1]):
        first = out.pop(0)
        for w in first:
            w.theta += 1
        out[-1].extend(first)
    merged = []
    for group in out:
        w = group[0]
        if len(group) > 1:
            w.theta = (group[0].theta + group[-1].theta) / 2
            w.rays = tuple(sorted({r for g in group for r in g.rays}))
        w.theta %= 1.0
        merged.append(w)
    return sorted(merged, key=lambda w: w.theta)


def accumulates_at(walls: Sequence[WallEvent], target: float, min_walls: int = 5) -> bool:
    """Whether at least ``min_walls`` wall phases approach ``target`` from one side with shrinking gaps."""
    for sign in (1, -1):
        d = sorted(((sign * (w.theta - target)) % 1.0 for w in walls if (sign * (w.theta - target)) % 1.0 < 0.5), reverse=True)
        if len(d) < min_walls:
            continue
        tail = np.array(d[-min_walls:])
        gaps = -np.diff(tail)
        if np.all(gaps > 0) and np.all(np.diff(gaps) < 0):
            return True
    return False


def _match_arcs(a, b) -> dict | None:
    """Arc bijection a -> b when two triangulations agree up to arc labels."""
    ka, na = a.canonical()
    kb, nb = b.canonical()
    if ka != kb or a.surface != b.surface:
        return None
    inv = {v: k for k, v in nb.items()}
    return {arc: inv[i] for arc, i in na.items()}


@dataclass(eq=False)
class WallCheck:
    theta: float
    kind: str
    arc: str | None
    pole: str | None
    before: object
    after: object
    transport: object
    residual: float
    periods_before: dict
    periods_after: dict

    def summary(self) -> str:
        what = f"flip of {self.arc}" if self.kind == "flip" else f"pop at {self.pole}"
        return f"theta*={self.theta:.10f}: {what}, transport verified (residual {self.residual:.2e})"


def wall_cross_check(
    phi: QuadraticDifferential,
    theta_star: float,
    config: Config | None = None,
    delta: float | None = None,
    tol: float = 1e-6,
) -> WallCheck:
    """Compare the WKB data on both sides of a wall with the combinatorial transport."""
    from .quivers import flip_lattice_map, pop_lattice_map
    from .surfaces import SelfFoldedFlip, flip

    cfg = config or Config()
    delta = delta or cfg.wall_delta
    tr = Tracer(phi, cfg)
    lo, hi = theta_star - delta, theta_star + delta
    dec_lo = strip_decomposition(phi, cfg, theta=lo, generic=False, tracer=tr)
    dec_hi = strip_decomposition(phi, cfg, theta=hi, generic=False, tracer=tr)
    st_lo, _ = wkb_signed(phi.with_theta(lo), cfg, dec_lo)
    st_hi, _ = wkb_signed(phi.with_theta(hi), cfg, dec_hi)
    t_lo, t_hi = st_lo.triangulation, st_hi.triangulation
    z_lo, z_hi = dec_lo.periods(), dec_hi.periods()

    def residual(m, mapping):
        # z_hi expressed in the labels of the target of m
        zt = np.array([z_hi[mapping[a]] for a in m.target])
        zs = np.array([z_lo[a] for a in m.source])
        pulled = zt @ m.matrix
        return float(np.max(np.abs(pulled - zs)) / max(1.0, np.max(np.abs(zs))))

    # pop: same triangulation, a sign change at a valency-one puncture
    mapping = _match_arcs(t_lo, t_hi)
    if mapping is not None:
        flipped = [q for q in st_lo.sign if st_lo.sign[q] != st_hi.sign[q]]
        if len(flipped) == 1:
            q = flipped[0]
            m = pop_lattice_map(st_lo, q)
            r = residual(m, mapping)
            if r <= tol:
                return WallCheck(theta_star, "pop", None, q, st_lo, st_hi, m, r, z_lo, z_hi)
            raise MismatchedWallKind(f"pop transport residual {r:.3g} at {q}")
    best = None
    for e in t_lo.arcs:
        try:
            ft = flip(t_lo, e)
        except SelfFoldedFlip:
            continue
        mp = _match_arcs(ft, t_hi)
        if mp is None:
            continue
        m = flip_lattice_map(t_lo, e, "+")
        r = residual(m, mp)
        if best is None or r < best[1]:
            best = (e, r, m)
    if best is None:
        raise MismatchedWallKind("the triangulations on the two sides are not related by a flip or a pop")
    e, r, m = best
    if r > tol:
        raise MismatchedWallKind(f"flip of {e}: transport residual {r:.3g}")
    return WallCheck(theta_star, "flip", e, None, st_lo, st_hi, m, r, z_lo, z_hi)


# -- ring domains ---------------------------------------------------------------------


def loop_period(phi: QuadraticDifferential, center: complex = 0j, radius: float = 1.0, samples: int = 4096) -> complex:
    """2 * contour integral of sqrt(phi) along a circle, with a continuous branch."""
    t = 2 * np.pi * np.arange(samples) / samples
    pts = center + radius * np.exp(1j * t)
    R = _complex_poly(phi)
    vals = np.sqrt(R(pts).astype(complex))
    for k in range(1, samples):
        if abs(vals[k] - vals[k - 1]) > abs(vals[k] + vals[k - 1]):
            vals[k] = -vals[k]
    if abs(vals[0] - vals[-1]) > abs(vals[0] + vals[-1]):
        raise ValueError("the circle does not lift to a closed loop on the spectral cover")
    dz = 1j * radius * np.exp(1j * t) * (2 * np.pi / samples)
    return complex(2 * np.sum(vals * dz))


def ring_phase(phi: QuadraticDifferential, center: complex = 0j, radius: float = 1.0) -> float:
    return (cmath.phase(loop_period(phi, center, radius)) / math.pi) % 1.0


def find_closed_trajectory(phi: QuadraticDifferential, theta: float, seeds: Sequence[complex], config: Config | None = None):
    """First seed whose trajectory at phase ``theta`` closes up, with that trajectory."""
    tr = Tracer(phi, config)
    for z in seeds:
        t = tr.trace_from(complex(z), 1j * complex(z), theta, seed_closure=True)
        if t.end.kind == "closed":
            return z, t
    return None, None


def annulus_ring_domain(phi: QuadraticDifferential, config: Config | None = None, seeds: int = 12):
    """Ring phase and a closed trajectory around 0 for a differential with zeros inside and outside |z|=1.

    Seeds lie on the positive real axis between the moduli of the innermost
    and outermost zeros.
    """
    zs = sorted(critical_points(phi).zeros, key=abs)
    r0, r1 = abs(zs[0]), abs(zs[-1])
    radius = math.sqrt(r0 * r1)
    th = ring_phase(phi, 0j, radius)
    grid = np.exp(np.linspace(math.log(r0), math.log(r1), seeds + 2)[1:-1])
    hits = []
    for ang in (0.0, math.pi / 2, math.pi, 3 * math.pi / 2):
        z, t = find_closed_trajectory(phi, th, grid * cmath.exp(1j * ang), config)
        if t is not None:
            hits.append(t)
            break
    return th, (hits[0] if hits else None)


# -- residue monodromy ---------------------------------------------------------------


def residue_monodromy_demo(loops: int = 1, steps: int = 400, center: complex = 0j, radius: float = 1.0) -> dict:
    """Continue the double-pole residue of (z - a) dz^2 / z^2 as a runs around a circle.

    A second family (z - a)(z - 3) dz^2 / z^2 carries a saddle class from a to 3,
    whose period is continued along the same loop.
    """
    big = 2 * radius if abs(center) + 2 * radius < 3 else (3 - abs(center)) * 0.9
    gaps = (abs(abs(center) - radius), abs(abs(center) - big), abs(3 - center) - big)
    if big <= radius or min(gaps) < 1e-3 * radius:
        raise ValueError("the loop and its comparison circle must stay clear of the pole at 0 and the zero at 3")
    ss = np.linspace(0.0, float(loops), steps * loops + 1)
    a_path = center + radius * np.exp(2j * np.pi * ss)
    res = []
    prev = None
    for a in a_path:
        phi = QuadraticDifferential((-a, 1), ((0, 2),))
        r = 4j * math.pi * cmath.sqrt(double_pole_coefficient(phi, 0))
        if prev is not None and abs(r - prev) > abs(r + prev):
            r = -r
        res.append(r)
        prev = r
    per = []
    prev = None
    for s, a in zip(ss, a_path):
        per.append(_tracked_saddle_period(a, s, center, radius, prev))
        prev = per[-1]
    res2 = []
    prev = None
    for a in a_path:
        r = 4j * math.pi * cmath.sqrt(double_pole_coefficient(QuadraticDifferential((3 * a, -(a + 3), 1), ((0, 2),)), 0))
        if prev is not None and abs(r - prev) > abs(r + prev):
            r = -r
        res2.append(r)
        prev = r
    lines = [
        f"loop a = {center} + {radius} exp(2 pi i s), s in [0, {loops}]",
        f"Res_0 start {res[0]:.12f}",
        f"Res_0 end   {res[-1]:.12f}",
        f"sign flipped: {abs(res[-1] + res[0]) < 1e-9 * abs(res[0])}",
        f"saddle period start {per[0]:.12f}",
        f"saddle period end   {per[-1]:.12f}",
        f"period shift {per[-1] - per[0]:.12f} vs residue {res2[0]:.12f}",
    ]
    return {
        "residue_start": res[0],
        "residue_end": res[-1],
        "period_start": per[0],
        "period_end": per[-1],
        "shift": per[-1] - per[0],
        "shift_residue": res2[0],
        "transcript": "\n".join(lines),
    }


def _tracked_saddle_period(a: complex, s: float, center: complex, radius: float, prev: complex | None) -> complex:
    """Period of the class from the zero a to the zero 3 of (z - a)(z - 3)/z^2 along a deformed path."""
    phi = QuadraticDifferential((3 * a, -(a + 3), 1), ((0, 2),))
    # path: a -> radially to radius 2 (from the centre of the loop), back along |z - c| = 2 to angle 0, then to 3
    c = center
    big = 2 * radius if abs(c) + 2 * radius < 3 else (3 - abs(c)) * 0.9
    ang = 2 * math.pi * s
    p1 = c + big * cmath.exp(1j * ang)
    arc = c + big * np.exp(1j * np.linspace(ang, 0.0, max(8, int(abs(ang) * 40)) + 1))
    seg1 = a + (p1 - a) * np.linspace(0, 1, 41)
    seg2 = arc[1:]
    seg3 = (c + big) + (3 - (c + big)) * np.linspace(0, 1, 41)[1:]
    pts = np.concatenate([seg1, seg2, seg3])
    R = _complex_poly(phi)
    vals = np.sqrt(R(pts).astype(complex))
    for k in range(2, len(vals) - 1):
        if abs(vals[k] - vals[k - 1]) > abs(vals[k] + vals[k - 1]):
            vals[k] = -vals[k]
    vals[0] = vals[-1] = 0
    z = 2 * path_integral(phi, pts, vals)
    if prev is not None and abs(z - prev) > abs(z + prev):
        z = -z
    return z

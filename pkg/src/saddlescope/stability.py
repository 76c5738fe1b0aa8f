"""Central charges, King stability over small prime fields and stable spectra of example quivers."""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "CentralCharge",
    "FiniteRep",
    "RepQuiver",
    "StableClass",
    "StableSpectrum",
    "BudgetExceeded",
    "CollinearCharge",
    "PreconditionViolated",
    "KRONECKER",
    "AFFINE_A2",
    "JACOBI_3PUNCT",
    "linear_a",
    "king_stable",
    "geometrically_stable",
    "end_dimension",
    "subrepresentations",
    "representations",
    "stable_count",
    "brute_spectrum",
    "kronecker_spectrum",
    "affine_a2_spectrum",
    "a_n_spectrum",
    "jacobi_indecomposables_3punct",
    "saddle_vs_stable",
]

MAX_DIM = 6
MAX_FIELD = 3


class BudgetExceeded(ValueError):
    pass


class CollinearCharge(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


# -- central charges --------------------------------------------------------------


def _exact(z: complex) -> tuple:
    return Fraction(z.real), Fraction(z.imag)


def _in_upper(x, y) -> bool:
    return y > 0 or (y == 0 and x < 0)


def _cross(u, v):
    """Positive iff the phase of ``v`` exceeds that of ``u`` (both in the semi-closed upper half plane)."""
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class CentralCharge:
    values: tuple

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        for i, v in enumerate(vals):
            if v == 0:
                raise ValueError(f"basis vector {i} has zero charge")
            if not _in_upper(*_exact(v)):
                raise ValueError(f"Z(S{i + 1}) = {v} is not in the semi-closed upper half plane")

    def __len__(self):
        return len(self.values)

    def __call__(self, d: Sequence[int]) -> complex:
        return complex(sum(k * v for k, v in zip(d, self.values)))

    def exact(self, d: Sequence[int]) -> tuple:
        x = y = Fraction(0)
        for k, v in zip(d, self.values):
            a, b = _exact(v)
            x += k * a
            y += k * b
        return x, y

    def phase(self, d: Sequence[int]) -> float:
        if not any(d):
            raise ValueError("the zero class has no phase")
        z = self(d)
        p = cmath.phase(z) / math.pi
        return 1.0 if p <= 0 else p

    def compare(self, d1, d2) -> int:
        """Sign of phase(d2) - phase(d1), computed exactly."""
        c = _cross(self.exact(d1), self.exact(d2))
        return (c > 0) - (c < 0)

    def scaled(self, r: float) -> "CentralCharge":
        return CentralCharge(tuple(r * v for v in self.values))

    def swapped(self, i: int = 0, j: int = 1) -> "CentralCharge":
        v = list(self.values)
        v[i], v[j] = v[j], v[i]
        return CentralCharge(tuple(v))


# -- quivers and representations --------------------------------------------------


@dataclass(frozen=True)
class RepQuiver:
    """A quiver given by its vertex count, named arrows and (optionally) path relations.

    A relation ``(lhs, rhs)`` lists two paths, each a tuple of arrow names
    read in the order of travel; the representation must satisfy
    ``lhs == rhs`` as composite linear maps.  The empty path ``()`` on the
    right-hand side stands for zero.
    """

    vertices: int
    arrows: tuple  # (name, source, target)
    relations: tuple = ()

    def arrow(self, name):
        return next(a for a in self.arrows if a[0] == name)


KRONECKER = RepQuiver(2, (("a1", 0, 1), ("a2", 0, 1)))
AFFINE_A2 = RepQuiver(3, (("a", 0, 1), ("b", 0, 2), ("c", 2, 1)))
JACOBI_3PUNCT = RepQuiver(
    3,
    (("a", 0, 1), ("b", 1, 2), ("c", 2, 0)),
    ((("a",), ("a", "b", "c", "a")), (("b",), ("b", "c", "a", "b")), (("c",), ("c", "a", "b", "c"))),
)


def linear_a(orientation: str | int) -> RepQuiver:
    """Linear A_n quiver; ``orientation`` is a string over '>' (i -> i+1) and '<', or n for all '>'."""
    if isinstance(orientation, int):
        orientation = ">" * (orientation - 1)
    if set(orientation) - {"<", ">"}:
        raise ValueError("orientation must consist of '<' and '>'")
    n = len(orientation) + 1
    arrows = tuple((f"x{i}", i, i + 1) if o == ">" else (f"x{i}", i + 1, i) for i, o in enumerate(orientation))
    return RepQuiver(n, arrows)


@dataclass(frozen=True, eq=False)
class FiniteRep:
    quiver: RepQuiver
    dims: tuple
    maps: dict  # arrow name -> integer matrix of shape (dim target, dim source)
    p: int = 2

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.dims) != self.quiver.vertices:
            raise ValueError("dimension vector does not match the quiver")
        maps = {}
        for name, s, t in self.quiver.arrows:
            m = np.asarray(self.maps.get(name, np.zeros((self.dims[t], self.dims[s]))), dtype=np.int64) % self.p
            if m.shape != (self.dims[t], self.dims[s]):
                raise ValueError(f"arrow {name} needs shape {(self.dims[t], self.dims[s])}, got {m.shape}")
            maps[name] = m
        object.__setattr__(self, "maps", maps)

    def path(self, names) -> np.ndarray:
        _, s, _ = self.quiver.arrow(names[0])
        m = np.eye(self.dims[s], dtype=np.int64)
        for n in names:
            m = self.maps[n] @ m % self.p
        return m

    def satisfies_relations(self) -> bool:
        for lhs, rhs in self.quiver.relations:
            a = self.path(lhs)
            b = self.path(rhs) if rhs else np.zeros_like(a)
            if not (a == b).all():
                return False
        return True


# -- subspaces over F_p ------------------------------------------------------------


@lru_cache(maxsize=None)
def _subspaces(d: int, p: int) -> tuple:
    """All subspaces of F_p^d as (dimension, membership mask over vector codes, basis).

    Each subspace is produced once, from its reduced row echelon basis.
    """
    if d == 0:
        return ((0, np.ones(1, dtype=bool), np.zeros((0, 0), dtype=np.int64)),)
    weights = p ** np.arange(d - 1, -1, -1, dtype=np.int64)
    out = []
    for k in range(d + 1):
        coeffs = np.array(list(itertools.product(range(p), repeat=k)), dtype=np.int64).reshape(p**k, k)
        for pivots in itertools.combinations(range(d), k):
            # free entries: right of the row's pivot and outside the pivot columns
            free = [(r, c) for r, pc in enumerate(pivots) for c in range(pc + 1, d) if c not in pivots]
            for vals in itertools.product(range(p), repeat=len(free)):
                vecs = np.zeros((k, d), dtype=np.int64)
                for r, pc in enumerate(pivots):
                    vecs[r, pc] = 1
                for (r, c), v in zip(free, vals):
                    vecs[r, c] = v
                mask = np.zeros(p**d, dtype=bool)
                mask[(coeffs @ vecs % p) @ weights] = True
                out.append((k, mask, vecs))
    return tuple(out)


def _code(vecs: np.ndarray, p: int) -> np.ndarray:
    d = vecs.shape[-1]
    return vecs @ (p ** np.arange(d - 1, -1, -1, dtype=np.int64)) if d else np.zeros(vecs.shape[:-1], dtype=np.int64)


def subrepresentations(rep: FiniteRep):
    """Dimension vectors of all subrepresentations (with repetition), zero and rep itself included."""
    p = rep.p
    subs = [_subspaces(d, p) for d in rep.dims]
    arrows = rep.quiver.arrows
    # precompute images of each subspace basis under each arrow
    images = {}
    for name, s, t in arrows:
        m = rep.maps[name]
        images[name] = [_code((vecs @ m.T) % p, p) if len(vecs) else np.zeros(0, dtype=np.int64) for _, _, vecs in subs[s]]
    for choice in itertools.product(*[range(len(s)) for s in subs]):
        ok = True
        for name, s, t in arrows:
            img = images[name][choice[s]]
            if img.size and not subs[t][choice[t]][1][img].all():
                ok = False
                break
        if ok:
            yield tuple(subs[v][c][0] for v, c in enumerate(choice))


def _check_budget(dims, p):
    if sum(dims) > MAX_DIM:
        raise BudgetExceeded(f"total dimension {sum(dims)} exceeds {MAX_DIM}")
    if p > MAX_FIELD:
        raise BudgetExceeded(f"field size {p} exceeds {MAX_FIELD}")


def king_stable(rep: FiniteRep, Z: CentralCharge) -> str:
    """King stability verdict by exhaustive subrepresentation search: stable, strictly_semistable or unstable."""
    _check_budget(rep.dims, rep.p)
    if not any(rep.dims):
        raise ValueError("the zero representation has no stability verdict")
    full = rep.dims
    equal = False
    for d in subrepresentations(rep):
        if not any(d) or d == full:
            continue
        c = Z.compare(full, d)
        if c > 0:
            return "unstable"
        if c == 0:
            equal = True
    return "strictly_semistable" if equal else "stable"


def end_dimension(rep: FiniteRep) -> int:
    """Dimension over F_p of the endomorphism algebra."""
    p, dims = rep.p, rep.dims
    offs = np.cumsum([0] + [d * d for d in dims])
    rows = []
    for name, s, t in rep.quiver.arrows:
        m = rep.maps[name]
        # (m phi_s - phi_t m)[i, j] for every entry
        for i in range(dims[t]):
            for j in range(dims[s]):
                row = np.zeros(offs[-1], dtype=np.int64)
                for k in range(dims[s]):
                    row[offs[s] + k * dims[s] + j] += m[i, k]
                for k in range(dims[t]):
                    row[offs[t] + i * dims[t] + k] -= m[k, j]
                rows.append(row % p)
    if not rows:
        return int(offs[-1])
    return int(offs[-1]) - _rank_mod(np.array(rows), p)


def geometrically_stable(rep: FiniteRep, Z: CentralCharge) -> bool:
    """Stable with only scalar endomorphisms, so it stays stable over the algebraic closure."""
    return king_stable(rep, Z) == "stable" and end_dimension(rep) == 1


def representations(quiver: RepQuiver, dims: Sequence[int], p: int):
    """Every representation of ``quiver`` with dimension vector ``dims`` over F_p satisfying its relations."""
    _check_budget(dims, p)
    shapes = [(dims[t], dims[s]) for _, s, t in quiver.arrows]
    sizes = [a * b for a, b in shapes]
    for entries in itertools.product(range(p), repeat=sum(sizes)):
        maps, k = {}, 0
        for (name, _, _), shape, n in zip(quiver.arrows, shapes, sizes):
            maps[name] = np.array(entries[k : k + n], dtype=np.int64).reshape(shape)
            k += n
        rep = FiniteRep(quiver, tuple(dims), maps, p)
        if rep.satisfies_relations():
            yield rep


def _gl_order(n: int, p: int) -> int:
    out = 1
    for k in range(n):
        out *= p**n - p**k
    return out


def stable_count(quiver: RepQuiver, dims: Sequence[int], Z: CentralCharge, p: int):
    """(number of geometrically stable representations, number of isomorphism classes) over F_p.

    These have only scalar automorphisms, so every gauge orbit has size |G| / (p - 1).
    Stable representations with a larger (field) endomorphism algebra come
    from closed points of higher degree and are not counted.
    """
    n = sum(1 for r in representations(quiver, dims, p) if geometrically_stable(r, Z))
    g = 1
    for d in dims:
        g *= _gl_order(d, p)
    iso = Fraction(n * (p - 1), g)
    if iso.denominator != 1:
        raise ArithmeticError("stable representations do not form free orbits")
    return n, int(iso)


# -- spectra ----------------------------------------------------------------------


@dataclass(frozen=True)
class StableClass:
    dims: tuple
    phase: float
    family_dim: int  # 0 rigid, 1 a P^1 family

    def to_dict(self) -> dict:
        return {"class": list(self.dims), "phase": self.phase, "family_dim": self.family_dim}


@dataclass(frozen=True)
class StableSpectrum:
    entries: tuple
    simples: tuple = ()  # vertex simples reported apart from the main list

    def classes(self) -> list:
        return [e.dims for e in self.entries]

    def family(self, dims) -> int | None:
        for e in self.entries:
            if e.dims == tuple(dims):
                return e.family_dim
        return None

    def at_phase(self, phase: float, tol: float = 1e-9) -> list:
        return [e for e in self.entries if abs(e.phase - phase) <= tol]

    def to_list(self) -> list:
        return [e.to_dict() for e in self.entries]

    @classmethod
    def from_list(cls, data) -> "StableSpectrum":
        return cls(tuple(StableClass(tuple(int(x) for x in d["class"]), float(d["phase"]), int(d["family_dim"])) for d in data))


def _entry(Z: CentralCharge, d, fam=0) -> StableClass:
    return StableClass(tuple(d), Z.phase(d), fam)


def kronecker_spectrum(Z: CentralCharge, bound: int = 7) -> StableSpectrum:
    """Stable classes of the Kronecker quiver (arrows from vertex 1 to vertex 2) up to total dimension ``bound``."""
    if len(Z) != 2:
        raise ValueError("the Kronecker quiver has two vertices")
    c = _cross(Z.exact((0, 1)), Z.exact((1, 0)))
    if c == 0:
        raise CollinearCharge("Z(S1) and Z(S2) are collinear")
    out = [_entry(Z, (1, 0)), _entry(Z, (0, 1))]
    if c > 0:  # phase S1 > phase S2, i.e. Im Z(S1)/Z(S2) > 0
        out.append(_entry(Z, (1, 1), 1))
        n = 1
        while 2 * n + 1 <= bound:
            out += [_entry(Z, (n, n + 1)), _entry(Z, (n + 1, n))]
            n += 1
    return StableSpectrum(tuple(sorted(out, key=lambda e: (sum(e.dims), e.dims))))


def affine_a2_spectrum(Z: CentralCharge, rtol: float = 1e-12) -> StableSpectrum:
    """Stable classes on the imaginary axis for the affine A_2 quiver 1 -> 2, 1 -> 3 -> 2."""
    if len(Z) != 3:
        raise ValueError("the affine A_2 quiver has three vertices")
    z1, z2, z3 = Z.values
    scale = max(abs(z1), abs(z2), abs(z3))
    if abs((z1 + z2).real) > rtol * scale:
        raise PreconditionViolated("Z(S1) + Z(S2) is not imaginary")
    if abs(z3.real) > rtol * scale:
        raise PreconditionViolated("Z(S3) is not imaginary")
    if not (z1 / z2).imag > 0:
        raise PreconditionViolated("Im Z(S1)/Z(S2) must be positive")
    entries = (
        StableClass((1, 1, 0), 0.5, 0),
        StableClass((0, 0, 1), 0.5, 0),
        StableClass((1, 1, 1), 0.5, 1),
    )
    return StableSpectrum(entries, (_entry(Z, (1, 0, 0)), _entry(Z, (0, 1, 0))))


def a_n_spectrum(orientation: str | int, Z: CentralCharge, bound: int | None = None) -> StableSpectrum:
    """Stable interval modules of a linear A_n quiver."""
    q = linear_a(orientation)
    n = q.vertices
    if n > 6:
        raise BudgetExceeded("linear quivers are limited to n <= 6")
    if len(Z) != n:
        raise ValueError("charge has the wrong rank")
    bound = bound or n
    out = []
    for i in range(n):
        for j in range(i, n):
            if j - i + 1 > bound:
                continue
            d = tuple(1 if i <= k <= j else 0 for k in range(n))
            support = set(range(i, j + 1))
            stable = True
            # subrepresentations of a thin module: supports closed under arrows
            for r in range(1, j - i + 1):
                for sub in itertools.combinations(sorted(support), r):
                    s = set(sub)
                    if any(a in s and b in support and b not in s for _, a, b in q.arrows):
                        continue
                    e = tuple(1 if k in s else 0 for k in range(n))
                    if Z.compare(d, e) >= 0:
                        stable = False
                        break
                if not stable:
                    break
            if stable:
                out.append(_entry(Z, d))
    return StableSpectrum(tuple(out))


def brute_spectrum(quiver: RepQuiver, Z: CentralCharge, classes, primes=(2, 3)) -> StableSpectrum:
    """Stable classes among ``classes`` by exhaustive King stability over each prime field.

    A class is rigid when it carries exactly one stable isomorphism class over
    every field, and a one-parameter family when the count grows with p.
    """
    out = []
    for d in classes:
        counts = [stable_count(quiver, d, Z, p)[1] for p in primes]
        if not any(counts):
            continue
        if not all(counts):
            raise ArithmeticError(f"class {d} is stable over some prime fields only")
        out.append(_entry(Z, d, 0 if all(c == 1 for c in counts) else 1))
    return StableSpectrum(tuple(out))


# -- the three-punctured sphere ---------------------------------------------------


def _hom_space(m: FiniteRep, n: FiniteRep):
    """All morphisms m -> n as tuples of matrices (brute force over F_p)."""
    p = m.p
    shapes = [(n.dims[v], m.dims[v]) for v in range(m.quiver.vertices)]
    total = sum(a * b for a, b in shapes)
    out = []
    for entries in itertools.product(range(p), repeat=total):
        f, k = [], 0
        for a, b in shapes:
            f.append(np.array(entries[k : k + a * b], dtype=np.int64).reshape(a, b))
            k += a * b
        if all(((n.maps[name] @ f[s] - f[t] @ m.maps[name]) % p == 0).all() for name, s, t in m.quiver.arrows):
            out.append(f)
    return out


def _rank_mod(a: np.ndarray, p: int) -> int:
    a = a.copy() % p
    r = 0
    rows, cols = a.shape
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r] = a[r] * pow(int(a[r, c]), -1, p) % p
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        r += 1
    return r


def _invertible(f, dims, p) -> bool:
    return all(_rank_mod(x, p) == d for x, d in zip(f, dims))


def _nilpotent(f, p) -> bool:
    for x in f:
        if x.size and (np.linalg.matrix_power(x, x.shape[0]) % p).any():
            return False
    return True


def is_indecomposable(rep: FiniteRep) -> bool:
    """Local endomorphism ring: every endomorphism is invertible or nilpotent."""
    if not any(rep.dims):
        return False
    return all(_invertible(f, rep.dims, rep.p) or _nilpotent(f, rep.p) for f in _hom_space(rep, rep))


def _isomorphic(a: FiniteRep, b: FiniteRep) -> bool:
    return a.dims == b.dims and any(_invertible(f, a.dims, a.p) for f in _hom_space(a, b))


def jacobi_indecomposables_3punct(bound=(1, 1, 1), p: int = 2) -> list:
    """Isomorphism classes of indecomposable Jacobi-algebra representations with dimension at most ``bound``."""
    found = []
    for d in itertools.product(*[range(b + 1) for b in bound]):
        if not any(d):
            continue
        for rep in representations(JACOBI_3PUNCT, d, p):
            if is_indecomposable(rep) and not any(_isomorphic(rep, r) for r in found):
                found.append(rep)
    return found


# -- saddles versus stable objects ------------------------------------------------


@dataclass
class Comparison:
    example: str
    theta: float
    saddles: int  # non-closed saddle trajectories at phase theta
    closed_saddles: int
    ring_domains: int
    rigid: int  # rigid stable classes of phase theta
    families: int
    frame: float  # saddle-free phase whose heart was used
    charge: tuple
    classes: list = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return self.saddles == self.rigid and self.ring_domains == self.families

    def summary(self) -> str:
        verdict = "agree" if self.agree else "DISAGREE"
        return (
            f"{self.example} at theta={self.theta:.8f}: saddles={self.saddles} ring domains={self.ring_domains}"
            f" | rigid stables={self.rigid} families={self.families} -> {verdict}"
        )


EXAMPLES = ("A1", "Kronecker", "AffineA2")


def _heart(phi, theta, config):
    """A saddle-free phase away from theta with its WKB quiver and standard periods."""
    from .differentials import Inconclusive, IntegrationFailure, InvalidDifferential, wkb_signed
    from .quivers import quiver

    last = None
    for k in range(1, 40):
        frame = (theta + 0.0617 * k + 0.0011) % 1.0
        try:
            st, strips = wkb_signed(phi.with_theta(frame), config)
        except (Inconclusive, IntegrationFailure, InvalidDifferential, RuntimeError) as e:
            last = e
            continue
        q = quiver(st.triangulation)
        z = {a: strips[a].period for a in q.vertices}
        return frame, q, z
    raise RuntimeError(f"no saddle-free phase found near {theta}: {last}")


def _order_vertices(example: str, q):
    """Vertex order matching the quiver conventions of the closed-form spectra."""
    b = q.matrix
    n = len(q.vertices)
    if example == "A1":
        if n != 1:
            raise PreconditionViolated("A1 needs a rank one lattice")
        return [0], RepQuiver(1, ())
    if example == "Kronecker":
        if n != 2 or abs(b[0, 1]) != 2:
            raise PreconditionViolated("WKB quiver is not a Kronecker quiver")
        return ([0, 1] if b[0, 1] > 0 else [1, 0]), KRONECKER
    if example == "AffineA2":
        if n != 3:
            raise PreconditionViolated("affine A2 needs a rank three lattice")
        out = [int((b[i] > 0).sum()) for i in range(3)]
        inc = [int((b[:, i] > 0).sum()) for i in range(3)]
        if sorted(map(abs, b[np.triu_indices(3, 1)])) != [1, 1, 1] or (b > 0).sum() != 3:
            raise PreconditionViolated("WKB quiver is not of affine A2 type")
        src = next(i for i in range(3) if out[i] == 2)
        snk = next(i for i in range(3) if inc[i] == 2)
        mid = 3 - src - snk
        if (b > 0).sum(axis=1)[mid] != 1 or b[src, mid] <= 0:
            raise PreconditionViolated("WKB quiver has a cyclic orientation")
        return [src, snk, mid], AFFINE_A2
    raise ValueError(f"unknown example {example!r}; choose from {EXAMPLES}")


def _finite_trajectories(phi, theta, config):
    from .differentials import Inconclusive, Tracer, annulus_ring_domain, critical_points, ring_phase

    tr = Tracer(phi, config)
    to_other = to_self = 0
    for zi in range(len(tr.zeros)):
        for k in range(3):
            r = tr.trace_ray(zi, k, theta)
            if r.end.kind == "budget":
                raise Inconclusive(f"separatrix ({zi}, {k}) exhausted its budget at theta={theta}")
            if r.end.kind == "near_zero":
                if r.end.zero == zi:
                    to_self += 1
                else:
                    to_other += 1
    # every saddle trajectory is traced once from each of its two ends
    n_nonclosed, n_closed = to_other // 2, to_self // 2
    rings = 0
    finite_poles = [p for p, _ in phi.poles]
    if len(finite_poles) == 1 and finite_poles[0] == 0 and phi.infinity_order >= 2:
        zs = sorted(critical_points(phi).zeros, key=abs)
        rad = math.sqrt(abs(zs[0]) * abs(zs[-1]))
        th = ring_phase(phi, 0j, rad)
        if min(abs(th - theta % 1.0), 1 - abs(th - theta % 1.0)) < 1e-6:
            _, t = annulus_ring_domain(phi, config)
            rings = int(t is not None)
    return n_nonclosed, n_closed, rings


def saddle_vs_stable(example: str, phi, theta: float, config=None, phase_tol: float = 1e-6, bound: int = 6) -> Comparison:
    """Compare finite-length trajectories of phase ``theta`` with stable objects of the same phase.

    The central charge is read off the standard periods of a nearby saddle-free
    phase, whose WKB quiver fixes the heart.
    """
    from .config import Config

    cfg = config or Config()
    frame, q, z = _heart(phi, theta, cfg)
    order, rq = _order_vertices(example, q)
    verts = [q.vertices[i] for i in order]
    rot = cmath.exp(-1j * math.pi * frame)
    W = CentralCharge(tuple(z[v] * rot for v in verts))
    target = (theta - frame) % 1.0 or 1.0
    if example == "A1":
        spec = a_n_spectrum(1, W)
    elif example == "Kronecker":
        spec = kronecker_spectrum(W, bound)
    else:
        # classes of the target phase are multiples of the imaginary root or real roots near it
        cands = [d for d in itertools.product(range(bound + 1), repeat=3) if 0 < sum(d) <= min(bound, 4)]
        cands = [d for d in cands if abs(W.phase(d) - target) <= phase_tol]
        spec = brute_spectrum(rq, W, cands)
    hits = [e for e in spec.entries if abs(e.phase - target) <= phase_tol]
    nonclosed, closed, rings = _finite_trajectories(phi, theta, cfg)
    return Comparison(
        example,
        theta,
        nonclosed,
        closed,
        rings,
        sum(1 for e in hits if e.family_dim == 0),
        sum(1 for e in hits if e.family_dim == 1),
        frame,
        tuple(W.values),
        [e.to_dict() for e in hits],
    )

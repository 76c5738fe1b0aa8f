"""Edge lattices, quivers, potentials and lattice transport maps of triangulations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .surfaces import (
    IdealTriangulation,
    InvalidPop,
    SelfFoldedFlip,
    SignedTriangulation,
    flip,
    valency,
)

__all__ = [
    "EdgeLattice",
    "Quiver",
    "Potential",
    "LatticeMap",
    "DegenerateTriangulation",
    "c_matrix",
    "c_count",
    "edge_lattice",
    "quiver",
    "potential",
    "mutate",
    "flip_lattice_map",
    "flip_lattice_map_curly",
    "pop_lattice_map",
    "reflection",
    "arrow_counts",
    "is_isometry",
    "transport_periods",
]


class DegenerateTriangulation(ValueError):
    """Raised when a puncture has valency at most two."""


def _index(t: IdealTriangulation) -> dict:
    return {a: i for i, a in enumerate(t.arcs)}


def c_matrix(t: IdealTriangulation) -> np.ndarray:
    """Matrix of c(e, f) over the arcs of ``t``, with c(e, e) = -2 on the diagonal."""
    idx = _index(t)
    n = len(idx)
    c = np.zeros((n, n), dtype=np.int64)
    for sides in t.triangles:
        if len(set(sides)) == 2:
            f = next(s for s in sides if sides.count(s) == 2)
            e = next(s for s in sides if sides.count(s) == 1)
            if e in idx:
                c[idx[e], idx[f]] += 1
                c[idx[f], idx[e]] += 1
            continue
        # clockwise order of a counterclockwise triple (s0, s1, s2) is s0, s2, s1
        cw = (sides[0], sides[2], sides[1])
        for k in range(3):
            a, b = cw[k], cw[(k + 1) % 3]
            if a in idx and b in idx:
                c[idx[a], idx[b]] += 1
    np.fill_diagonal(c, -2)
    return c


def c_count(t: IdealTriangulation, e, f) -> int:
    idx = _index(t)
    return int(c_matrix(t)[idx[e], idx[f]])


@dataclass(frozen=True, eq=False)
class EdgeLattice:
    labels: tuple
    skew_form: np.ndarray
    change_of_basis: np.ndarray
    kappa: Mapping

    @property
    def rank(self) -> int:
        return len(self.labels)

    def curly_form(self) -> np.ndarray:
        """Skew form evaluated on the basis {e}."""
        p = self.change_of_basis
        return p.T @ self.skew_form @ p


def edge_lattice(t: IdealTriangulation) -> EdgeLattice:
    idx = _index(t)
    n = len(idx)
    c = c_matrix(t)
    off = c.copy()
    np.fill_diagonal(off, 0)
    skew = off.T - off
    p = np.eye(n, dtype=np.int64)
    kappa = {a: a for a in t.arcs}
    for e, f, _ in t.self_folded_pairs():
        p[idx[e], idx[f]] = 1
        kappa[f] = e
    return EdgeLattice(tuple(t.arcs), skew, p, kappa)


@dataclass(frozen=True, eq=False)
class Quiver:
    vertices: tuple
    matrix: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.matrix, dtype=np.int64)
        if b.shape != (len(self.vertices), len(self.vertices)):
            raise ValueError("matrix shape does not match the vertices")
        if not (b == -b.T).all():
            raise ValueError("exchange matrix must be skew-symmetric")
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "matrix", b)

    def arrows(self, i, j) -> int:
        """Number of arrows from vertex ``i`` to vertex ``j``."""
        a, b = self.vertices.index(i), self.vertices.index(j)
        return max(0, int(self.matrix[a, b]))

    def __eq__(self, other):
        if not isinstance(other, Quiver):
            return NotImplemented
        return self.vertices == other.vertices and (self.matrix == other.matrix).all()

    def __hash__(self):
        return hash((self.vertices, self.matrix.tobytes()))

    def to_dict(self) -> dict:
        return {"vertices": list(self.vertices), "matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Quiver":
        return cls(tuple(d["vertices"]), np.array(d["matrix"], dtype=np.int64))


def arrow_counts(t: IdealTriangulation) -> np.ndarray:
    """Matrix n(e, f) = max(0, <[kappa f], [kappa e]>)."""
    lat = edge_lattice(t)
    idx = _index(t)
    k = [idx[lat.kappa[a]] for a in t.arcs]
    s = lat.skew_form[np.ix_(k, k)]
    return np.maximum(0, s.T)


def quiver(t: IdealTriangulation) -> Quiver:
    n = arrow_counts(t)
    return Quiver(tuple(t.arcs), n - n.T)


def mutate(q: Quiver, k) -> Quiver:
    """Matrix mutation of ``q`` at vertex ``k``."""
    b = q.matrix
    i = q.vertices.index(k)
    col, row = b[:, i], b[i, :]
    out = b + np.sign(col)[:, None] * np.maximum(0, np.outer(col, row))
    out[i, :] = -b[i, :]
    out[:, i] = -b[:, i]
    return Quiver(q.vertices, out)


@dataclass(frozen=True)
class Potential:
    """Integer combination of cycles; arrows are named by (triangle, corner)."""

    terms: tuple

    def cycles(self) -> list:
        return [c for _, c in self.terms]

    def to_list(self) -> list:
        return [{"coefficient": k, "cycle": [list(a) for a in c]} for k, c in self.terms]


def corner_arrow(t: IdealTriangulation, tri: int, j: int) -> tuple:
    """Source and target arcs of the arrow sitting at corner ``j`` of a triangle."""
    s = t.triangles[tri]
    return s[(j + 1) % 3], s[j]


def potential(st: SignedTriangulation) -> Potential:
    """Sum of the triangle cycles minus the signed cycles around punctures."""
    t = st.triangulation
    for q in t.punctures:
        if valency(t, q) <= 2:
            raise DegenerateTriangulation(f"puncture {q!r} has valency {valency(t, q)}")
    arcs = set(t.arcs)
    terms = []
    for ti, sides in enumerate(t.triangles):
        if all(s in arcs for s in sides):
            terms.append((1, ((ti, 2), (ti, 1), (ti, 0))))
    sign = st.sign
    for q in t.punctures:
        start = next((ti, j) for ti, c in enumerate(t.corners) for j in range(3) if c[j] == q)
        cyc, cur = [], start
        while True:
            cyc.append(cur)
            ti, j = cur
            arc = t.triangles[ti][j]
            other = [s for s in t.slots(arc) if s != (ti, j)][0]
            cur = (other[0], (other[1] - 1) % 3)
            if cur == start:
                break
        terms.append((-sign[q], tuple(cyc)))
    return Potential(tuple(terms))


@dataclass(frozen=True, eq=False)
class LatticeMap:
    """Integer matrix whose column f is the image of [f] in the target basis."""

    source: tuple
    target: tuple
    matrix: np.ndarray

    @property
    def det(self) -> int:
        return int(round(np.linalg.det(self.matrix.astype(float))))

    def __matmul__(self, other: "LatticeMap") -> "LatticeMap":
        return LatticeMap(other.source, self.target, self.matrix @ other.matrix)

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x)


def flip_lattice_map(source: IdealTriangulation, e, sign: str = "+") -> LatticeMap:
    """Transport map of a flip in the [.] basis, with c read off the target."""
    if source.is_self_folded(e):
        raise SelfFoldedFlip(f"arc {e!r} is self-folded")
    target = flip(source, e)
    idx = _index(source)
    c = c_matrix(target)
    i = idx[e]
    m = np.eye(len(idx), dtype=np.int64)
    m[i, :] += c[i, :] if sign == "+" else c[:, i]
    return LatticeMap(source.arcs, target.arcs, m)


def flip_lattice_map_curly(source: IdealTriangulation, e, sign: str = "+") -> LatticeMap:
    """The same transport computed in the {.} bases, converted back to [.]."""
    if source.is_self_folded(e):
        raise SelfFoldedFlip(f"arc {e!r} is self-folded")
    target = flip(source, e)
    idx = _index(source)
    n = arrow_counts(target)
    i = idx[e]
    n[i, i] = -2
    m = np.eye(len(idx), dtype=np.int64)
    m[i, :] += n[i, :] if sign == "+" else n[:, i]
    p1 = edge_lattice(source).change_of_basis
    p2 = edge_lattice(target).change_of_basis
    full = p2 @ m @ np.rint(np.linalg.inv(p1)).astype(np.int64)
    return LatticeMap(source.arcs, target.arcs, full)


def pop_lattice_map(st: SignedTriangulation, q) -> LatticeMap:
    """Transport of a pop: exchange {e} and {f} for the self-folded pair at ``q``."""
    t = st.triangulation
    if valency(t, q) != 1:
        raise InvalidPop(f"puncture {q!r} has valency {valency(t, q)}")
    e, f, _ = next(x for x in t.self_folded_pairs() if x[2] == q)
    idx = _index(t)
    swap = np.eye(len(idx), dtype=np.int64)
    i, j = idx[e], idx[f]
    swap[[i, j]] = swap[[j, i]]
    p = edge_lattice(t).change_of_basis
    m = p @ swap @ np.rint(np.linalg.inv(p)).astype(np.int64)
    return LatticeMap(t.arcs, t.arcs, m)


def reflection(form: np.ndarray, i: int) -> np.ndarray:
    """Reflection x -> x - <x, v> v in the basis vector ``v = b_i`` of a skew form."""
    n = form.shape[0]
    r = np.eye(n, dtype=np.int64)
    r[i, :] -= form[:, i]
    return r


def is_isometry(m: LatticeMap, form_source: np.ndarray, form_target: np.ndarray) -> bool:
    return bool((m.matrix.T @ form_target @ m.matrix == form_source).all())


def transport_periods(m: LatticeMap, z_target: Sequence[complex]) -> np.ndarray:
    """Pull back periods along a lattice map: Z_source(x) = Z_target(F x)."""
    return np.asarray(z_target) @ m.matrix

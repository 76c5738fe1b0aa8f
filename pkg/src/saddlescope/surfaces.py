"""Marked bordered surfaces and their ideal, signed and tagged triangulations.

A triangulation is stored as an oriented combinatorial map.  Each triangle
is a triple of side labels listed counterclockwise, and ``corners[t][j]`` is
the marked point where side ``j`` ends and side ``j + 1`` begins.  Every arc
fills exactly two side slots and every boundary segment exactly one.  A
self-folded triangle has a repeated side, ``(e, f, f)`` up to rotation, with
``e`` the encircling loop and ``f`` the folded arc ending at the enclosed
puncture.
"""

from __future__ import annotations

import itertools
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

__all__ = [
    "MarkedSurface",
    "SurfaceClass",
    "IdealTriangulation",
    "SignedTriangulation",
    "TaggedArc",
    "TriangulationError",
    "SelfFoldedFlip",
    "InvalidPop",
    "UnsupportedSurface",
    "classify_surface",
    "arc_count",
    "flip",
    "valency",
    "pop",
    "tagged_arcs",
    "tagged_equal",
    "tagged_flip",
    "mcg_equivalent",
    "polygon",
    "punctured_polygon",
    "annulus",
    "three_punctured_sphere",
    "twice_punctured_torus",
    "flip_reachable",
    "tagged_flip_graph",
]


class TriangulationError(ValueError):
    """Raised when a combinatorial map violates the triangulation invariants."""


class SelfFoldedFlip(ValueError):
    """Raised when asked to flip the folded arc of a self-folded triangle."""


class InvalidPop(ValueError):
    """Raised when popping a puncture whose valency is not one."""


class UnsupportedSurface(ValueError):
    """Raised for surfaces outside the scope of an operation."""


@dataclass(frozen=True)
class MarkedSurface:
    genus: int
    punctures: int
    boundary: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(int(k) for k in self.boundary))
        if self.genus < 0 or self.punctures < 0:
            raise ValueError("genus and punctures must be non-negative")
        if any(k < 1 for k in self.boundary):
            raise ValueError("every boundary component needs a marked point")
        if self.marked_points < 1:
            raise ValueError("a marked surface needs at least one marked point")

    @property
    def marked_points(self) -> int:
        return self.punctures + sum(self.boundary)

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus - len(self.boundary)

    def to_dict(self) -> dict:
        return {"genus": self.genus, "punctures": self.punctures, "boundary": list(self.boundary)}


class SurfaceClass(str, Enum):
    AMENABLE = "amenable"
    EXCLUDED_NO_TRIANGULATION = "excluded_no_triangulation"
    EXCLUDED_ASSUMPTION = "excluded_assumption"
    SPECIAL_WEIWEN = "special_weiwen"
    SPECIAL_FREELY = "special_freely"
    CLOSED_ONE_PUNCTURE = "closed_one_puncture"


def classify_surface(s: MarkedSurface) -> SurfaceClass:
    """Return the unique class tag of a marked surface."""
    g, p, b = s.genus, s.punctures, sorted(s.boundary)
    sphere = g == 0 and not b
    disc = g == 0 and len(b) == 1
    if (sphere and p <= 2) or (disc and p == 0 and b[0] <= 2):
        return SurfaceClass.EXCLUDED_NO_TRIANGULATION
    if (sphere and 3 <= p <= 5) or (disc and p == 0 and b[0] == 3) or (disc and p == 1 and b[0] == 1):
        return SurfaceClass.EXCLUDED_ASSUMPTION
    if disc and ((p == 1 and b[0] in (2, 4)) or (p == 2 and b[0] == 2)):
        return SurfaceClass.SPECIAL_WEIWEN
    if (disc and p == 0 and b[0] == 4) or (g == 0 and p == 0 and b == [1, 1]):
        return SurfaceClass.SPECIAL_FREELY
    if not b and p == 1:
        return SurfaceClass.CLOSED_ONE_PUNCTURE
    return SurfaceClass.AMENABLE


def arc_count(s: MarkedSurface) -> int:
    """Number of arcs in any ideal triangulation of ``s``."""
    if classify_surface(s) is SurfaceClass.EXCLUDED_NO_TRIANGULATION:
        raise UnsupportedSurface(f"{s} admits no ideal triangulation")
    return 6 * s.genus - 6 + 3 * s.punctures + sum(k + 3 for k in s.boundary)


def _rotate(seq, r):
    return tuple(seq[r:]) + tuple(seq[:r])


@dataclass(frozen=True, eq=False)
class IdealTriangulation:
    surface: MarkedSurface
    arcs: tuple
    boundary_segments: tuple
    triangles: tuple
    corners: tuple

    def __post_init__(self):
        for name in ("arcs", "boundary_segments"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "triangles", tuple(tuple(t) for t in self.triangles))
        object.__setattr__(self, "corners", tuple(tuple(c) for c in self.corners))
        self._validate()

    # -- validation -------------------------------------------------------
    def _validate(self):
        if len(self.triangles) != len(self.corners):
            raise TriangulationError("triangles and corners differ in length")
        for t, c in zip(self.triangles, self.corners):
            if len(t) != 3 or len(c) != 3:
                raise TriangulationError(f"triangle {t} with corners {c} is not a triple")
        arcs, segs = set(self.arcs), set(self.boundary_segments)
        if len(arcs) != len(self.arcs) or len(segs) != len(self.boundary_segments):
            raise TriangulationError("duplicate side labels")
        if arcs & segs:
            raise TriangulationError("a label is both an arc and a boundary segment")
        uses = Counter(side for t in self.triangles for side in t)
        for a in self.arcs:
            if uses[a] != 2:
                raise TriangulationError(f"arc {a!r} fills {uses[a]} side slots, expected 2")
        for b in self.boundary_segments:
            if uses[b] != 1:
                raise TriangulationError(f"boundary segment {b!r} fills {uses[b]} slots, expected 1")
        unknown = set(uses) - arcs - segs
        if unknown:
            raise TriangulationError(f"unknown side labels {sorted(map(str, unknown))}")
        for a in self.arcs:
            (u1, v1), (u2, v2) = (self.side_ends(t, j) for t, j in self.slots(a))
            if (u1, v1) != (v2, u2):
                raise TriangulationError(f"arc {a!r} is glued inconsistently")
        for t in self.triangles:
            if len(set(t)) == 1:
                raise TriangulationError(f"degenerate triangle {t}")
        n = arc_count(self.surface)
        if len(self.arcs) != n:
            raise TriangulationError(f"{len(self.arcs)} arcs, expected {n}")
        if len(self.boundary_segments) != sum(self.surface.boundary):
            raise TriangulationError("boundary segment count does not match the surface")
        if len(self.punctures) != self.surface.punctures:
            raise TriangulationError("puncture count does not match the surface")
        v = len(self.vertices)
        chi = v - len(self.arcs) - len(self.boundary_segments) + len(self.triangles)
        if chi != self.surface.euler_characteristic:
            raise TriangulationError(f"Euler characteristic {chi} does not match the surface")
        if Counter(self._boundary_cycle_lengths()) != Counter(self.surface.boundary):
            raise TriangulationError("boundary components do not match the surface")

    def _boundary_cycle_lengths(self):
        succ = {}
        for b in self.boundary_segments:
            (t, j), = self.slots(b)
            u, v = self.side_ends(t, j)
            if u in succ:
                raise TriangulationError(f"marked point {u!r} starts two boundary segments")
            succ[u] = v
        seen, lengths = set(), []
        for start in succ:
            if start in seen:
                continue
            k, x = 0, start
            while x not in seen:
                seen.add(x)
                x = succ.get(x)
                k += 1
                if x is None:
                    raise TriangulationError("boundary segments do not close up")
            lengths.append(k)
        return lengths

    # -- basic structure --------------------------------------------------
    def slots(self, side) -> list[tuple[int, int]]:
        return [(ti, j) for ti, t in enumerate(self.triangles) for j, s in enumerate(t) if s == side]

    def side_ends(self, t: int, j: int) -> tuple:
        """Start and end marked point of side ``j`` of triangle ``t``."""
        c = self.corners[t]
        return c[(j - 1) % 3], c[j]

    @property
    def vertices(self) -> tuple:
        return tuple(sorted({v for c in self.corners for v in c}, key=str))

    @property
    def boundary_points(self) -> tuple:
        pts = set()
        for b in self.boundary_segments:
            (t, j), = self.slots(b)
            pts.update(self.side_ends(t, j))
        return tuple(sorted(pts, key=str))

    @property
    def punctures(self) -> tuple:
        bp = set(self.boundary_points)
        return tuple(v for v in self.vertices if v not in bp)

    def is_arc(self, side) -> bool:
        return side in set(self.arcs)

    def self_folded_pairs(self) -> list[tuple]:
        """List of (encircling, folded, puncture) for each self-folded triangle."""
        out = []
        for t, (sides, corners) in enumerate(zip(self.triangles, self.corners)):
            cnt = Counter(sides)
            if len(cnt) != 2:
                continue
            f = next(s for s, k in cnt.items() if k == 2)
            e = next(s for s, k in cnt.items() if k == 1)
            j = next(j for j in range(3) if sides[j] == f and sides[(j + 1) % 3] == f)
            out.append((e, f, corners[j]))
        return out

    def is_self_folded(self, arc) -> bool:
        return any(f == arc for _, f, _ in self.self_folded_pairs())

    def arc_ends(self, arc) -> tuple:
        t, j = self.slots(arc)[0]
        return self.side_ends(t, j)

    # -- equality and canonical forms -------------------------------------
    def labelled_key(self) -> frozenset:
        """Key that is invariant under reordering and rotating triangles."""
        out = []
        for sides, corners in zip(self.triangles, self.corners):
            rots = [(_rotate(sides, r), _rotate(corners, r)) for r in range(3)]
            out.append(min(rots, key=lambda x: tuple(map(str, x[0] + x[1]))))
        return frozenset(Counter(out).items())

    def __eq__(self, other):
        if not isinstance(other, IdealTriangulation):
            return NotImplemented
        return (
            self.surface == other.surface
            and set(self.arcs) == set(other.arcs)
            and set(self.boundary_segments) == set(other.boundary_segments)
            and self.labelled_key() == other.labelled_key()
        )

    def __hash__(self):
        return hash((self.surface, self.labelled_key()))

    def _traverse(self, t0: int, r0: int):
        """Breadth-first walk from a starting flag, naming arcs by discovery order."""
        names, seq = {}, []
        done = set()
        queue = deque([(t0, r0)])
        arcs = set(self.arcs)
        while queue:
            t, r = queue.popleft()
            if t in done:
                continue
            done.add(t)
            sides = _rotate(self.triangles[t], r)
            corners = _rotate(self.corners[t], r)
            row = []
            for j, s in enumerate(sides):
                if s in arcs:
                    if s not in names:
                        names[s] = len(names)
                    row.append(f"#{names[s]}")
                    for (t2, j2) in self.slots(s):
                        if t2 not in done:
                            queue.append((t2, j2))
                else:
                    row.append(f"b:{s}")
            seq.append((tuple(row), tuple(str(c) for c in corners)))
        return tuple(seq), names

    def canonical(self) -> tuple[tuple, dict]:
        """Arc-label-free canonical form and the arc naming that realizes it.

        Marked points and boundary segments keep their labels.  With boundary,
        the walk starts at the smallest boundary segment; on closed surfaces the
        smallest walk over all starting flags is used.
        """
        if self.boundary_segments:
            b = min(self.boundary_segments, key=str)
            (t, j), = self.slots(b)
            return self._traverse(t, j)
        best = None
        for t in range(len(self.triangles)):
            for r in range(3):
                cand = self._traverse(t, r)
                if best is None or cand[0] < best[0]:
                    best = cand
        return best

    def unlabelled_key(self) -> tuple:
        return self.canonical()[0]

    # -- editing ----------------------------------------------------------
    def relabel(self, mapping: Mapping) -> "IdealTriangulation":
        m = lambda s: mapping.get(s, s)
        return IdealTriangulation(
            self.surface,
            tuple(m(a) for a in self.arcs),
            self.boundary_segments,
            tuple(tuple(m(s) for s in t) for t in self.triangles),
            self.corners,
        )

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "surface": self.surface.to_dict(),
            "arcs": list(self.arcs),
            "boundary_segments": list(self.boundary_segments),
            "triangles": [list(t) for t in self.triangles],
            "corners": [list(c) for c in self.corners],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "IdealTriangulation":
        try:
            s = d["surface"]
            surface = MarkedSurface(int(s["genus"]), int(s["punctures"]), tuple(s.get("boundary", ())))
            return cls(surface, d["arcs"], d.get("boundary_segments", []), d["triangles"], d["corners"])
        except KeyError as exc:
            raise TriangulationError(f"missing field {exc}") from None
        except TypeError as exc:
            raise TriangulationError(str(exc)) from None


@dataclass(frozen=True)
class SignedTriangulation:
    triangulation: IdealTriangulation
    signs: Mapping = field(default_factory=dict)

    def __post_init__(self):
        signs = dict(self.signs) if self.signs else {q: 1 for q in self.triangulation.punctures}
        if set(signs) != set(self.triangulation.punctures):
            raise TriangulationError("signs must be given on exactly the punctures")
        if any(v not in (1, -1) for v in signs.values()):
            raise TriangulationError("signs must be +1 or -1")
        object.__setattr__(self, "signs", tuple(sorted(signs.items(), key=lambda kv: str(kv[0]))))

    @property
    def sign(self) -> dict:
        return dict(self.signs)

    def to_dict(self) -> dict:
        d = self.triangulation.to_dict()
        d["signs"] = {str(k): v for k, v in self.signs}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "SignedTriangulation":
        t = IdealTriangulation.from_dict(d)
        raw = d.get("signs") or {}
        lookup = {str(q): q for q in t.punctures}
        try:
            signs = {lookup[str(k)]: int(v) for k, v in raw.items()}
        except KeyError as exc:
            raise TriangulationError(f"sign given at non-puncture {exc}") from None
        return cls(t, signs or None)


def flip(t: IdealTriangulation, e) -> IdealTriangulation:
    """Replace arc ``e`` by the other diagonal of its quadrilateral; the label is kept."""
    if e not in set(t.arcs):
        raise KeyError(f"{e!r} is not an arc")
    (t1, j1), (t2, j2) = t.slots(e)
    if t1 == t2:
        raise SelfFoldedFlip(f"arc {e!r} is the folded side of a self-folded triangle")
    _, a, b = _rotate(t.triangles[t1], j1)
    x0, x1, x2 = _rotate(t.corners[t1], j1)
    _, c, d = _rotate(t.triangles[t2], j2)
    _, y1, _ = _rotate(t.corners[t2], j2)
    tris = list(t.triangles)
    cors = list(t.corners)
    tris[t1], cors[t1] = (e, b, c), (x1, x2, y1)
    tris[t2], cors[t2] = (e, d, a), (y1, x0, x1)
    return IdealTriangulation(t.surface, t.arcs, t.boundary_segments, tris, cors)


def valency(t: IdealTriangulation, q) -> int:
    """Number of arc ends at the puncture ``q``."""
    if q not in set(t.punctures):
        raise ValueError(f"{q!r} is not a puncture")
    return sum(c.count(q) for c in t.corners)


def pop(st: SignedTriangulation, q) -> SignedTriangulation:
    if valency(st.triangulation, q) != 1:
        raise InvalidPop(f"puncture {q!r} has valency {valency(st.triangulation, q)}")
    signs = st.sign
    signs[q] = -signs[q]
    return SignedTriangulation(st.triangulation, signs)


@dataclass(frozen=True, order=True)
class TaggedArc:
    """Underlying arc (by canonical index) with a tag flag at each end."""

    curve: int
    ends: tuple


def tagged_arcs(st: SignedTriangulation) -> tuple[tuple, frozenset]:
    """Return the arc-free key of the triangulation and its set of tagged arcs.

    Curves are named by their index in the canonical form, so two signed
    triangulations yield equal results exactly when their tagged arcs agree.
    """
    t = st.triangulation
    key, names = t.canonical()
    sign = st.sign
    loops = {e: (f, q) for e, f, q in t.self_folded_pairs()}
    out = []
    for a in t.arcs:
        if a in loops:
            f, q = loops[a]
            m = next(v for v in t.arc_ends(f) if v != q)
            ends = ((str(m), sign.get(m, 1) == -1), (str(q), sign[q] == 1))
            curve = names[f]
        else:
            u, v = t.arc_ends(a)
            ends = ((str(u), sign.get(u, 1) == -1), (str(v), sign.get(v, 1) == -1))
            curve = names[a]
        out.append(TaggedArc(curve, tuple(sorted(ends))))
    return key, frozenset(out)


def tagged_equal(a: SignedTriangulation, b: SignedTriangulation) -> bool:
    """Equal tagged triangulations: same arcs, signs differing only at valency one."""
    ta, tb = a.triangulation, b.triangulation
    if ta.surface != tb.surface or ta.unlabelled_key() != tb.unlabelled_key():
        return False
    sa, sb = a.sign, b.sign
    return all(sa[q] == sb[q] or valency(ta, q) == 1 for q in sa)


def tagged_key(st: SignedTriangulation) -> tuple:
    """Hashable key identifying the tagged triangulation of ``st``."""
    t = st.triangulation
    signs = tuple(sorted((str(q), 1 if valency(t, q) == 1 else s) for q, s in st.signs))
    return t.unlabelled_key(), signs


def tagged_flip(st: SignedTriangulation, arc) -> SignedTriangulation:
    """Flip the tagged arc in position ``arc``.

    A folded arc is handled by popping its puncture and flipping the
    encircling loop; the two labels are then exchanged so that every other
    position keeps its tagged arc.
    """
    t = st.triangulation
    for e, f, q in t.self_folded_pairs():
        if f == arc:
            popped = pop(st, q)
            ft = flip(t, e).relabel({e: f, f: e})
            return SignedTriangulation(ft, popped.sign)
    return SignedTriangulation(flip(t, arc), st.sign)


def mcg_equivalent(a: IdealTriangulation, b: IdealTriangulation) -> bool:
    """Whether the quivers of ``a`` and ``b`` are isomorphic as directed multigraphs."""
    if a.surface != b.surface:
        return False
    if classify_surface(a.surface) is SurfaceClass.SPECIAL_WEIWEN:
        raise UnsupportedSurface("quivers do not determine triangulations on this surface")
    from .quivers import quiver

    qa, qb = quiver(a).matrix, quiver(b).matrix
    n = len(qa)
    if sorted(map(sorted, qa.tolist())) != sorted(map(sorted, qb.tolist())):
        return False
    for perm in itertools.permutations(range(n)):
        p = list(perm)
        if (qa[p][:, p] == qb).all():
            return True
    return False


# -- seed triangulations -------------------------------------------------


def polygon(k: int) -> IdealTriangulation:
    """Fan triangulation of an unpunctured disc with ``k`` boundary marks."""
    if k < 3:
        raise UnsupportedSurface("a polygon needs at least 3 marks")
    v = [f"m{i}" for i in range(k)]
    seg = [f"s{i}" for i in range(k)]
    diag = {j: f"e{j - 2}" for j in range(2, k - 1)}
    side = lambda j: seg[0] if j == 1 else diag[j]
    back = lambda j: seg[k - 1] if j == k - 1 else diag[j]
    tris, cors = [], []
    for j in range(1, k - 1):
        tris.append((side(j), seg[j], back(j + 1)))
        cors.append((v[j], v[j + 1], v[0]))
    return IdealTriangulation(MarkedSurface(0, 0, (k,)), list(diag.values()), seg, tris, cors)


def punctured_polygon(k: int) -> IdealTriangulation:
    """Once-punctured disc with ``k`` marks, triangulated by spokes to the puncture."""
    if k < 1:
        raise UnsupportedSurface("need at least one boundary mark")
    if k == 1:
        raise UnsupportedSurface("the once-punctured monogon is not handled")
    v = [f"m{i}" for i in range(k)]
    seg = [f"s{i}" for i in range(k)]
    spoke = [f"e{i}" for i in range(k)]
    tris, cors = [], []
    for i in range(k):
        j = (i + 1) % k
        tris.append((spoke[i], seg[i], spoke[j]))
        cors.append((v[i], v[j], "p0"))
    return IdealTriangulation(MarkedSurface(0, 1, (k,)), spoke, seg, tris, cors)


def annulus(k1: int, k2: int, moves: Iterable[str] | None = None) -> IdealTriangulation:
    """Annulus with ``k1`` outer and ``k2`` inner marks, bridged by arcs.

    ``moves`` is a word in ``"o"`` and ``"i"`` saying in which order the
    bridging triangles use outer or inner boundary segments.
    """
    moves = list(moves) if moves is not None else ["o"] * k1 + ["i"] * k2
    if sorted(moves) != sorted(["o"] * k1 + ["i"] * k2):
        raise ValueError("moves must use each boundary segment once")
    out = [f"m{i}" for i in range(k1)]
    inn = [f"n{j}" for j in range(k2)]
    so = [f"s{i}" for i in range(k1)]
    si = [f"t{j}" for j in range(k2)]
    arcs = [f"e{i}" for i in range(k1 + k2)]
    tris, cors = [], []
    i = j = 0
    for step, mv in enumerate(moves):
        old, new = arcs[step], arcs[(step + 1) % len(arcs)]
        if mv == "o":
            tris.append((so[i % k1], new, old))
            cors.append((out[(i + 1) % k1], inn[j % k2], out[i % k1]))
            i += 1
        else:
            tris.append((new, si[j % k2], old))
            cors.append((inn[(j + 1) % k2], inn[j % k2], out[i % k1]))
            j += 1
    return IdealTriangulation(MarkedSurface(0, 0, (k1, k2)), arcs, so + si, tris, cors)


def three_punctured_sphere() -> IdealTriangulation:
    """Two triangles glued along three arcs; every puncture has valency two."""
    tris = [("e0", "e1", "e2"), ("e2", "e1", "e0")]
    cors = [("p1", "p2", "p0"), ("p2", "p1", "p0")]
    return IdealTriangulation(MarkedSurface(0, 3, ()), ["e0", "e1", "e2"], [], tris, cors)


def twice_punctured_torus() -> IdealTriangulation:
    """Square torus with a puncture at the corner and one at the centre."""
    arcs = ["a", "b", "u0", "u1", "u2", "u3"]
    tris = [("a", "u1", "u0"), ("b", "u2", "u1"), ("a", "u3", "u2"), ("b", "u0", "u3")]
    cors = [("p", "q", "p")] * 4
    return IdealTriangulation(MarkedSurface(1, 2, ()), arcs, [], tris, cors)


# -- exploration ---------------------------------------------------------


def flip_reachable(seed: IdealTriangulation, depth: int) -> list[IdealTriangulation]:
    """All labelled triangulations reachable from ``seed`` by at most ``depth`` flips."""
    seen = {seed: 0}
    order = [seed]
    queue = deque([seed])
    while queue:
        t = queue.popleft()
        if seen[t] >= depth:
            continue
        for e in t.arcs:
            if t.is_self_folded(e):
                continue
            u = flip(t, e)
            if u not in seen:
                seen[u] = seen[t] + 1
                order.append(u)
                queue.append(u)
    return order


def tagged_flip_graph(seed: SignedTriangulation, limit: int = 100000) -> dict:
    """Breadth-first exploration of the tagged flip graph.

    Returns a mapping from tagged key to ``(representative, neighbour keys)``.
    """
    graph = {}
    queue = deque([seed])
    graph[tagged_key(seed)] = None
    while queue:
        st = queue.popleft()
        k = tagged_key(st)
        nbrs = []
        for a in st.triangulation.arcs:
            nb = tagged_flip(st, a)
            nk = tagged_key(nb)
            nbrs.append(nk)
            if nk not in graph:
                if len(graph) >= limit:
                    raise RuntimeError("tagged flip graph exceeds the exploration limit")
                graph[nk] = None
                queue.append(nb)
        graph[k] = (st, nbrs)
    return graph


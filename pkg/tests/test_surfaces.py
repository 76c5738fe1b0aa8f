import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddlescope.surfaces import (
    IdealTriangulation,
    InvalidPop,
    MarkedSurface,
    SelfFoldedFlip,
    SignedTriangulation,
    SurfaceClass,
    TriangulationError,
    UnsupportedSurface,
    annulus,
    arc_count,
    classify_surface,
    flip,
    flip_reachable,
    mcg_equivalent,
    polygon,
    pop,
    punctured_polygon,
    tagged_arcs,
    tagged_equal,
    tagged_flip,
    tagged_flip_graph,
    three_punctured_sphere,
    twice_punctured_torus,
    valency,
)


def self_folded_digon():
    """Once-punctured disc with two marks, triangulated by a loop around the puncture."""
    return flip(punctured_polygon(2), "e0")


SEEDS = [polygon(5), polygon(6), annulus(1, 1), annulus(2, 1), punctured_polygon(2), punctured_polygon(3)]


# -- classification and counts ---------------------------------------------------------


@pytest.mark.parametrize(
    "surface, tag",
    [
        ((0, 0, (5,)), SurfaceClass.AMENABLE),
        ((0, 1, (1,)), SurfaceClass.EXCLUDED_ASSUMPTION),
        ((1, 1, ()), SurfaceClass.CLOSED_ONE_PUNCTURE),
        ((0, 4, ()), SurfaceClass.EXCLUDED_ASSUMPTION),
        ((0, 2, ()), SurfaceClass.EXCLUDED_NO_TRIANGULATION),
        ((0, 1, (2,)), SurfaceClass.SPECIAL_WEIWEN),
        ((0, 0, (1, 1)), SurfaceClass.SPECIAL_FREELY),
        ((1, 2, ()), SurfaceClass.AMENABLE),
    ],
)
def test_classify_surface(surface, tag):
    assert classify_surface(MarkedSurface(*surface)) is tag


@pytest.mark.parametrize("surface, n", [((0, 0, (5,)), 2), ((0, 0, (1, 1)), 2), ((0, 3, ()), 3), ((1, 2, ()), 6)])
def test_arc_count(surface, n):
    assert arc_count(MarkedSurface(*surface)) == n


def test_arc_count_rejects_untriangulable():
    with pytest.raises(UnsupportedSurface):
        arc_count(MarkedSurface(0, 0, (2,)))


def test_marked_surface_validation():
    with pytest.raises(ValueError):
        MarkedSurface(0, 0, (0,))
    with pytest.raises(ValueError):
        MarkedSurface(0, 0, ())


def test_constructed_triangulations_have_n_arcs():
    for t in SEEDS + [three_punctured_sphere(), twice_punctured_torus(), self_folded_digon()]:
        assert len(t.arcs) == arc_count(t.surface)


def test_triangle_arity_is_validated():
    d = polygon(5).to_dict()
    d["triangles"][0] = d["triangles"][0][:2]
    with pytest.raises(TriangulationError):
        IdealTriangulation.from_dict(d)


def test_arc_must_fill_two_slots():
    d = polygon(5).to_dict()
    d["triangles"][0][2] = "s4"
    with pytest.raises(TriangulationError):
        IdealTriangulation.from_dict(d)


# -- flips -----------------------------------------------------------------------------


@pytest.mark.parametrize("seed", SEEDS, ids=lambda t: str(t.surface.boundary) + f"p{t.surface.punctures}")
def test_flip_is_an_involution(seed):
    for t in flip_reachable(seed, 3):
        for e in t.arcs:
            try:
                ft = flip(t, e)
            except SelfFoldedFlip:
                continue
            assert ft != t
            assert flip(ft, e) == t
            assert len(ft.arcs) == len(t.arcs)


def test_annulus_flips_give_an_equivalent_triangulation():
    a = annulus(1, 1)
    for e in a.arcs:
        b = flip(a, e)
        assert b != a
        assert mcg_equivalent(a, b)


def test_flip_at_self_folded_edge_raises():
    t = self_folded_digon()
    ((e, f, q),) = t.self_folded_pairs()
    with pytest.raises(SelfFoldedFlip):
        flip(t, f)
    # the encircling edge can be flipped
    assert flip(t, e).self_folded_pairs() == []


def test_hexagon_flip_graph_is_connected():
    found = {t.unlabelled_key() for t in flip_reachable(polygon(6), 10)}
    # all 14 triangulations of a hexagon, each appearing in 6 rotations at most
    g = tagged_flip_graph(SignedTriangulation(polygon(6)))
    assert len(g) == 14
    assert len(found) >= 3


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(range(len(SEEDS))), st.lists(st.integers(0, 10), min_size=1, max_size=12))
def test_random_flip_sequences_keep_arc_count(i, moves):
    t = SEEDS[i]
    n = arc_count(t.surface)
    for m in moves:
        e = t.arcs[m % len(t.arcs)]
        try:
            t = flip(t, e)
        except SelfFoldedFlip:
            continue
        assert len(t.arcs) == n


# -- valency, pops, tags -----------------------------------------------------------------


def test_valency_examples():
    t = self_folded_digon()
    assert valency(t, "p0") == 1
    s3 = three_punctured_sphere()
    assert [valency(s3, q) for q in s3.punctures] == [2, 2, 2]
    for k in (2, 3, 4, 5):
        t = punctured_polygon(k)
        assert valency(t, "p0") == k


def test_valency_handshake_on_torus():
    t = twice_punctured_torus()
    # every marked point is a puncture, so half-edges at punctures count each arc twice
    assert sum(valency(t, q) for q in t.punctures) == 2 * len(t.arcs)


def test_pop_involution_and_preservation():
    st0 = SignedTriangulation(self_folded_digon())
    once = pop(st0, "p0")
    assert once.triangulation == st0.triangulation
    assert once.sign["p0"] == -1
    assert pop(once, "p0") == st0


def test_pop_at_valency_two_raises():
    with pytest.raises(InvalidPop):
        pop(SignedTriangulation(punctured_polygon(2)), "p0")


def test_tagged_arcs_plain_without_self_folded():
    _, arcs = tagged_arcs(SignedTriangulation(punctured_polygon(3)))
    assert len(arcs) == 3
    assert all(not tagged for a in arcs for _, tagged in a.ends)


def test_tagged_arcs_at_self_folded_triangle():
    st0 = SignedTriangulation(self_folded_digon())
    _, arcs = tagged_arcs(st0)
    assert len(arcs) == 2
    assert len({a.curve for a in arcs}) == 1
    tags = sorted(dict(a.ends)["p0"] for a in arcs)
    assert tags == [False, True]
    assert tagged_arcs(pop(st0, "p0")) == tagged_arcs(st0)


def test_tagged_equal_examples():
    st0 = SignedTriangulation(self_folded_digon())
    assert tagged_equal(st0, st0)
    assert tagged_equal(st0, pop(st0, "p0"))
    pp = punctured_polygon(2)
    assert not tagged_equal(SignedTriangulation(pp, {"p0": 1}), SignedTriangulation(pp, {"p0": -1}))


def test_tagged_arcs_separate_pop_classes():
    # all signed triangulations of the once-punctured digon, compared pairwise
    pool = [SignedTriangulation(t, {"p0": s}) for t in flip_reachable(punctured_polygon(2), 4) for s in (1, -1)]
    for a, b in itertools.combinations(pool, 2):
        same = tagged_arcs(a) == tagged_arcs(b)
        assert same == tagged_equal(a, b)


def test_tagged_flip_matches_flip_on_ordinary_arcs():
    st0 = SignedTriangulation(punctured_polygon(3))
    for e in st0.triangulation.arcs:
        assert tagged_flip(st0, e).triangulation == flip(st0.triangulation, e)


@pytest.mark.parametrize("seed", [punctured_polygon(2), punctured_polygon(4), self_folded_digon()])
def test_tagged_flip_is_involutive(seed):
    st0 = SignedTriangulation(seed)
    for e in seed.arcs:
        assert tagged_equal(tagged_flip(tagged_flip(st0, e), e), st0)


def test_punctured_square_tagged_graph_is_regular():
    g = tagged_flip_graph(SignedTriangulation(punctured_polygon(4)))
    n = arc_count(MarkedSurface(0, 1, (4,)))
    assert n == 4
    assert all(len(set(nbrs)) == n for _, nbrs in g.values())


# -- mapping class comparison ----------------------------------------------------------------


def test_mcg_equivalent_examples():
    p = polygon(5)
    assert mcg_equivalent(p, p)
    assert all(mcg_equivalent(p, t) for t in flip_reachable(p, 3))


def test_mcg_equivalent_distinguishes_hexagon_types():
    # a fan and a zig-zag of the hexagon have A_3 quivers of different orientation type
    hexes = flip_reachable(polygon(6), 4)
    classes = []
    for t in hexes:
        if not any(mcg_equivalent(t, c) for c in classes):
            classes.append(t)
    assert len(classes) >= 2


def test_mcg_rejects_exceptional_surfaces():
    with pytest.raises(UnsupportedSurface):
        mcg_equivalent(punctured_polygon(2), punctured_polygon(2))


def test_signed_triangulation_validates_signs():
    with pytest.raises(TriangulationError):
        SignedTriangulation(punctured_polygon(2), {"p0": 2})
    with pytest.raises(TriangulationError):
        SignedTriangulation(polygon(5), {"p0": 1})


def test_pentagon_triangulations_are_all_equivalent():
    # the fan and the zig-zag of a pentagon differ by a rotation
    pent = flip_reachable(polygon(5), 4)
    assert len(pent) >= 5
    assert all(mcg_equivalent(pent[0], t) for t in pent[1:])

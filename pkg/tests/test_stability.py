import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddlescope.differentials import QuadraticDifferential as Q
from saddlescope.stability import (
    AFFINE_A2,
    JACOBI_3PUNCT,
    KRONECKER,
    BudgetExceeded,
    CentralCharge,
    CollinearCharge,
    FiniteRep,
    PreconditionViolated,
    StableSpectrum,
    _subspaces,
    a_n_spectrum,
    affine_a2_spectrum,
    end_dimension,
    geometrically_stable,
    is_indecomposable,
    jacobi_indecomposables_3punct,
    king_stable,
    kronecker_spectrum,
    linear_a,
    representations,
    saddle_vs_stable,
    stable_count,
    subrepresentations,
)

A2 = linear_a(2)
# Z(S1) has larger phase than Z(S2): the side with infinitely many Kronecker stables
KR_WILD = CentralCharge((-1 + 0.1j, 1j))
KR_TAME = CentralCharge((1j, -1 + 0.1j))


def gaussian_binomial_sum(d, p):
    total = 0
    for k in range(d + 1):
        num = den = 1
        for i in range(k):
            num *= p ** (d - i) - 1
            den *= p ** (i + 1) - 1
        total += num // den
    return total


# -- charges ---------------------------------------------------------------------------


def test_charge_validation():
    with pytest.raises(ValueError):
        CentralCharge((1j, -1j))
    with pytest.raises(ValueError):
        CentralCharge((0, 1j))
    # the negative real axis belongs to the semi-closed upper half plane
    assert CentralCharge((-1, 1j)).phase((1, 0)) == 1.0


def test_exact_phase_comparison():
    z = CentralCharge((1j, 2j, -1 + 1j))
    assert z.compare((1, 0, 0), (0, 1, 0)) == 0
    assert z.compare((1, 0, 0), (0, 0, 1)) == 1
    assert z.compare((0, 0, 1), (1, 0, 0)) == -1


# -- subspaces and King stability ---------------------------------------------------------


@pytest.mark.parametrize("d", range(5))
@pytest.mark.parametrize("p", [2, 3])
def test_subspace_enumeration_counts(d, p):
    subs = _subspaces(d, p)
    assert len(subs) == gaussian_binomial_sum(d, p)
    assert len({m.tobytes() for _, m, _ in subs}) == len(subs)


def test_king_a2_examples():
    rep = FiniteRep(A2, (1, 1), {"x0": [[1]]})
    assert king_stable(rep, CentralCharge((-1 + 1j, 1j))) == "stable"
    assert king_stable(rep, CentralCharge((1j, -1 + 1j))) == "unstable"
    assert king_stable(rep, CentralCharge((1j, 2j))) == "strictly_semistable"
    split = FiniteRep(A2, (1, 1), {"x0": [[0]]})
    assert king_stable(split, CentralCharge((-1 + 1j, 1j))) == "unstable"


def test_subrepresentations_of_a2():
    rep = FiniteRep(A2, (1, 1), {"x0": [[1]]})
    assert sorted(set(subrepresentations(rep))) == [(0, 0), (0, 1), (1, 1)]


def test_end_dimension():
    assert end_dimension(FiniteRep(A2, (1, 1), {"x0": [[1]]})) == 1
    assert end_dimension(FiniteRep(A2, (1, 1), {"x0": [[0]]})) == 2
    assert end_dimension(FiniteRep(KRONECKER, (2, 0), {})) == 4


def test_budget_limits():
    with pytest.raises(BudgetExceeded):
        list(representations(KRONECKER, (4, 3), 2))
    with pytest.raises(BudgetExceeded):
        list(representations(KRONECKER, (1, 1), 5))


def test_rep_shape_validation():
    with pytest.raises(ValueError):
        FiniteRep(KRONECKER, (1, 2), {"a1": [[1, 1]]})
    with pytest.raises(ValueError):
        FiniteRep(KRONECKER, (1,), {})


# -- counts and spectra ----------------------------------------------------------------------


@pytest.mark.parametrize("p", [2, 3])
def test_kronecker_counts(p):
    assert stable_count(KRONECKER, (1, 1), KR_WILD, p) == (p * p - 1, p + 1)
    assert stable_count(KRONECKER, (1, 2), KR_WILD, p)[1] == 1
    assert stable_count(KRONECKER, (2, 1), KR_WILD, p)[1] == 1
    assert stable_count(KRONECKER, (1, 1), KR_TAME, p)[1] == 0


def test_kronecker_spectrum_sides():
    assert kronecker_spectrum(KR_TAME).classes() == [(0, 1), (1, 0)]
    spec = kronecker_spectrum(KR_WILD, bound=5)
    assert spec.classes() == [(0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 3), (3, 2)]
    assert spec.family((1, 1)) == 1
    assert spec.family((1, 2)) == 0
    assert spec.family((2, 2)) is None


def test_kronecker_collinear():
    with pytest.raises(CollinearCharge):
        kronecker_spectrum(CentralCharge((1j, 2j)))


charges = st.tuples(
    st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.floats(0.5, 2), st.floats(0.5, 2)
).filter(lambda t: abs(t[0] - t[1]) > 1e-3)


def _charge(t):
    a, b, r, s = t
    return CentralCharge((r * np.exp(1j * np.pi * a), s * np.exp(1j * np.pi * b)))


@settings(max_examples=40)
@given(charges, st.floats(0.1, 10))
def test_kronecker_spectrum_is_scale_invariant(t, r):
    z = _charge(t)
    assert kronecker_spectrum(z).classes() == kronecker_spectrum(z.scaled(r)).classes()


@settings(max_examples=40)
@given(charges)
def test_kronecker_duality(t):
    # swapping the vertices and mirroring Z -> -conj(Z) is the duality of the Kronecker quiver
    z = _charge(t)
    dual = CentralCharge(tuple(-np.conj(v) for v in z.swapped().values))
    got = sorted(kronecker_spectrum(dual).classes())
    assert got == sorted((b, a) for a, b in kronecker_spectrum(z).classes())


def test_affine_a2_spectrum():
    z = CentralCharge((-1 + 1j, 1 + 2j, 0.5j))
    spec = affine_a2_spectrum(z)
    assert spec.classes() == [(1, 1, 0), (0, 0, 1), (1, 1, 1)]
    assert spec.family((1, 1, 1)) == 1
    assert [e.dims for e in spec.simples] == [(1, 0, 0), (0, 1, 0)]


@pytest.mark.parametrize(
    "z",
    [(-1 + 1j, 1.5 + 2j, 0.5j), (-1 + 1j, 1 + 2j, 0.1 + 0.5j), (1 + 1j, -1 + 2j, 0.5j)],
)
def test_affine_a2_preconditions(z):
    with pytest.raises(PreconditionViolated):
        affine_a2_spectrum(CentralCharge(z))


def test_a_n_spectra():
    # a straight A_3 with decreasing phases has all six intervals stable
    z = CentralCharge((np.exp(0.9j * np.pi), np.exp(0.5j * np.pi), np.exp(0.1j * np.pi)))
    assert len(a_n_spectrum(3, z).entries) == 6
    # reversed phases leave only the simples
    z = CentralCharge(tuple(reversed(z.values)))
    assert a_n_spectrum(3, z).classes() == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    with pytest.raises(ValueError):
        linear_a("<x")


def test_spectrum_round_trip():
    spec = kronecker_spectrum(KR_WILD)
    assert StableSpectrum.from_list(spec.to_list()).entries == spec.entries


# -- the Jacobi algebra of the three-punctured sphere ------------------------------------


def test_jacobi_indecomposables():
    reps = jacobi_indecomposables_3punct()
    assert sorted(r.dims for r in reps) == [(0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)]
    (full,) = [r for r in reps if r.dims == (1, 1, 1)]
    # the cycle abc acts as the identity
    assert (full.path(("a", "b", "c")) == np.eye(1)).all()


def test_jacobi_relations():
    zero = FiniteRep(JACOBI_3PUNCT, (1, 1, 1), {})
    assert zero.satisfies_relations()
    assert not is_indecomposable(zero)
    one = FiniteRep(JACOBI_3PUNCT, (1, 1, 1), {"a": [[1]], "b": [[1]], "c": [[0]]})
    assert not one.satisfies_relations()


# -- geometric comparison ----------------------------------------------------------------------


def test_a1_saddle_matches_stable():
    cmp = saddle_vs_stable("A1", Q((1j, 0, 1)), 0.0)
    assert cmp.saddles == 1 and cmp.rigid == 1 and cmp.agree


def test_wrong_example_is_rejected():
    with pytest.raises(PreconditionViolated):
        saddle_vs_stable("Kronecker", Q((1j, 0, 1)), 0.0)


def test_geometric_stability_excludes_field_extensions():
    # over F_2 a (2, 2) Kronecker module with an irreducible quadratic action is stable
    # but has a two-dimensional endomorphism field
    rep = FiniteRep(KRONECKER, (2, 2), {"a1": np.eye(2, dtype=int), "a2": [[0, 1], [1, 1]]})
    assert king_stable(rep, KR_WILD) == "stable"
    assert end_dimension(rep) == 2
    assert not geometrically_stable(rep, KR_WILD)


def test_affine_quiver_shape():
    assert AFFINE_A2.vertices == 3 and len(AFFINE_A2.arrows) == 3


# -- small closed-form examples ------------------------------------------------------------


def test_kronecker_rep_stability_examples():
    rep = FiniteRep(KRONECKER, (1, 1), {"a1": [[1]], "a2": [[0]]})
    assert king_stable(rep, CentralCharge((-1 + 1j, 1 + 1j))) == "stable"
    assert king_stable(rep, CentralCharge((1 + 1j, -1 + 1j))) == "unstable"


@settings(max_examples=20)
@given(charges)
def test_simples_are_always_stable(t):
    z = _charge(t)
    for d in ((1, 0), (0, 1)):
        assert king_stable(FiniteRep(KRONECKER, d, {}), z) == "stable"


def test_kronecker_spectra_at_ratio_plus_and_minus_i():
    spec = kronecker_spectrum(CentralCharge((-1 + 1j, 1 + 1j)))
    assert {(1, 0), (0, 1), (1, 2), (2, 1), (2, 3), (3, 2)} <= set(spec.classes())
    assert spec.family((1, 1)) == 1
    assert kronecker_spectrum(CentralCharge((1 + 1j, -1 + 1j))).classes() == [(0, 1), (1, 0)]


def test_affine_a2_imaginary_axis_classes():
    z = CentralCharge((-1 + 1j, 1 + 1j, 2j))
    spec = affine_a2_spectrum(z)
    assert {e.dims: e.family_dim for e in spec.entries} == {(1, 1, 0): 0, (0, 0, 1): 0, (1, 1, 1): 1}
    for p in (2, 3):
        assert king_stable(FiniteRep(AFFINE_A2, (1, 1, 0), {"a": [[1]]}, p), z) == "stable"
        assert king_stable(FiniteRep(AFFINE_A2, (1, 1, 1), {"a": [[1]], "b": [[1]], "c": [[1]]}, p), z) == "stable"
        assert king_stable(FiniteRep(AFFINE_A2, (1, 1, 1), {"a": [[1]]}, p), z) != "stable"
        assert stable_count(AFFINE_A2, (1, 1, 1), z, p)[1] == p


def test_a2_spectra():
    assert a_n_spectrum(2, CentralCharge((1j, 1 + 1j))).classes() == [(1, 0), (1, 1), (0, 1)]
    assert a_n_spectrum(2, CentralCharge((1 + 1j, 1j))).classes() == [(1, 0), (0, 1)]
    assert a_n_spectrum(1, CentralCharge((1j,))).classes() == [(1,)]

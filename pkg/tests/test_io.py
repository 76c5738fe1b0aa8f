import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddlescope.differentials import QuadraticDifferential
from saddlescope.io import ParseError, dumps, load_differential, load_quiver, load_spectrum, load_triangulation
from saddlescope.quivers import quiver
from saddlescope.stability import CentralCharge, kronecker_spectrum
from saddlescope.surfaces import SignedTriangulation, annulus, flip, flip_reachable, punctured_polygon


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else dumps(obj))
    return p


TRIS = flip_reachable(punctured_polygon(3), 2) + [annulus(2, 1)]


@settings(max_examples=20)
@given(st.sampled_from(range(len(TRIS))), st.sampled_from([1, -1]))
def test_triangulation_round_trip(i, s):
    t = TRIS[i]
    st0 = SignedTriangulation(t, {q: s for q in t.punctures})
    assert SignedTriangulation.from_dict(json.loads(dumps(st0))) == st0


@settings(max_examples=40)
@given(st.lists(st.complex_numbers(max_magnitude=5), min_size=2, max_size=6), st.floats(0, 1))
def test_differential_round_trip(coeffs, theta):
    if coeffs[-1] == 0:
        coeffs[-1] = 1
    phi = QuadraticDifferential(tuple(coeffs), ((0, 2), (1 + 1j, 3)), theta)
    assert QuadraticDifferential.from_dict(json.loads(dumps(phi))) == phi


def test_quiver_and_spectrum_files(tmp_path):
    q = quiver(flip(annulus(1, 1), "e0"))
    assert load_quiver(write(tmp_path, "q.json", q)) == q
    spec = kronecker_spectrum(CentralCharge((-1 + 0.1j, 1j)))
    assert load_spectrum(write(tmp_path, "s.json", spec)).entries == spec.entries


def test_shipped_data_files(data):
    assert len(load_triangulation(data / "annulus11.json").triangulation.arcs) == 2
    phi = load_differential(data / "z2_plus_1.json")
    assert phi.numerator == (1, 0, 1)


def test_json_syntax_error_has_line_and_column(tmp_path):
    p = write(tmp_path, "bad.json", '{\n  "numerator": [1, 0,\n}')
    with pytest.raises(ParseError, match=r"bad\.json:3:1:"):
        load_differential(p)


def test_validation_error_points_at_the_key(tmp_path):
    d = SignedTriangulation(annulus(1, 1)).to_dict()
    d["triangles"][0] = d["triangles"][0][:2]
    p = write(tmp_path, "t.json", json.dumps(d, indent=2))
    line = json.dumps(d, indent=2).splitlines().index('  "triangles": [') + 1
    with pytest.raises(ParseError, match=rf"t\.json:{line}:"):
        load_triangulation(p)


def test_bad_differential_reports_file(tmp_path):
    p = write(tmp_path, "d.json", json.dumps({"numerator": [[1, 0]], "poles": [{"z": [0, 0], "order": 0}]}))
    with pytest.raises(ParseError, match="d.json"):
        load_differential(p)
    with pytest.raises(ParseError):
        load_differential(write(tmp_path, "e.json", "[1, 2]"))


def test_missing_file():
    with pytest.raises(ParseError):
        load_quiver("/nonexistent/q.json")

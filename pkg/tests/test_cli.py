import json
import subprocess
import sys

import pytest

from saddlescope.cli import main
from saddlescope.surfaces import SignedTriangulation, flip, punctured_polygon


def run(capsys, *argv):
    try:
        code = main(list(map(str, argv)))
    except SystemExit as e:
        code = e.code
    out, err = capsys.readouterr()
    return code, out, err


def test_quiver(capsys, data):
    code, out, _ = run(capsys, "quiver", data / "annulus11.json", "--json")
    assert code == 0
    assert "seed: 0" in out
    assert '"matrix"' in out
    assert "self-folded pairs: none" in out


def test_quiver_reports_potential(capsys, data):
    code, out, _ = run(capsys, "quiver", data / "punctured_triangle.json")
    assert code == 0 and "potential: 1 cycles" in out


def test_flip_and_mutate(capsys, data, tmp_path):
    out_file = tmp_path / "f.json"
    code, out, _ = run(capsys, "flip", data / "annulus11.json", "e0", "--out", out_file)
    assert code == 0 and out_file.exists()
    code, out, _ = run(capsys, "mutate", out_file, "e0")
    assert code == 0
    mutated = json.loads(out[out.index("{"):])
    assert mutated["matrix"] == [[0, 2], [-2, 0]]


def test_mutate_unknown_vertex(capsys, data):
    code, _, err = run(capsys, "mutate", data / "annulus11.json", "zz")
    assert code == 2 and "zz" in err


def test_flip_of_self_folded_arc_is_a_domain_error(capsys, data, tmp_path):
    f = tmp_path / "sf.json"
    f.write_text(json.dumps(SignedTriangulation(flip(punctured_polygon(2), "e0")).to_dict()))
    code, _, err = run(capsys, "flip", f, "e1")
    assert code == 1 and "SelfFoldedFlip" in err


def test_analyze_saddle_free(capsys, data, tmp_path):
    svg = tmp_path / "p.svg"
    code, out, _ = run(capsys, "analyze", data / "z2_plus_1.json", "--theta", "0.1", "--plot", svg)
    assert code == 0
    assert "saddle-free: yes" in out and "strips: 1  half-planes: 4" in out
    assert svg.read_text().startswith("<svg")


def test_analyze_with_saddle(capsys, data):
    code, out, _ = run(capsys, "analyze", data / "z2_plus_1.json", "--theta", "0.5")
    assert code == 0 and "saddle-free: no" in out


def test_periods(capsys, data):
    code, out, _ = run(capsys, "periods", data / "z2_plus_1.json", "--theta", "0.1")
    assert code == 0 and "|Z|=3.14159265" in out


def test_plot(capsys, data, tmp_path):
    code, out, _ = run(capsys, "plot", data / "egg.json", tmp_path / "egg.svg")
    assert code == 0 and (tmp_path / "egg.svg").exists()


def test_scan(capsys, data):
    code, out, _ = run(capsys, "scan", data / "z2_plus_1.json", "--grid", "16")
    assert code == 0
    assert "1 walls" in out and "0.4999999" in out


def test_wallcheck(capsys, data):
    code, out, _ = run(capsys, "wallcheck", data / "annulus_reflected.json", "--theta", "0.60906806")
    assert code == 0 and "transport verified" in out


def test_stables(capsys):
    code, out, _ = run(capsys, "stables", "kronecker", "--charge=-1+0.1j,1j", "--bound", "3")
    assert code == 0
    classes = {tuple(e["class"]): e["family_dim"] for e in json.loads(out[out.index("["):])}
    assert classes[(1, 1)] == 1 and (1, 2) in classes
    code, out, _ = run(capsys, "stables", "jacobi")
    assert code == 0 and "4 indecomposables" in out
    code, out, _ = run(capsys, "stables", "a:><", "--charge=1j,-1+1j,1+1j")
    assert code == 0


def test_stables_errors(capsys):
    assert run(capsys, "stables", "kronecker", "--charge=1j,2j")[0] == 1
    assert run(capsys, "stables", "kronecker", "--charge=1j,zz")[0] == 2
    assert run(capsys, "stables", "nonsense")[0] == 2


def test_examples(capsys):
    code, out, _ = run(capsys, "examples", "sphere3")
    assert code == 0 and "suite sphere3: pass" in out
    assert run(capsys, "examples", "nope")[0] == 2


def test_usage_errors(capsys, data, tmp_path):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "quiver")[0] == 2
    assert run(capsys, "quiver", tmp_path / "missing.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = run(capsys, "analyze", bad)
    assert code == 2 and "bad.json:1" in err


def test_domain_error_exit_code(capsys, tmp_path):
    f = tmp_path / "odd.json"
    f.write_text(json.dumps({"numerator": [[1, 0]], "poles": [{"z": [0, 0], "order": 2}]}))
    code, _, err = run(capsys, "analyze", f)
    assert code == 1 and "DegeneratePolarType" in err


def test_inconclusive_exit_code(capsys, data, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"max_length": 0.5}))
    code, _, err = run(capsys, "analyze", data / "z2_plus_1.json", "--theta", "0.1", "--config", cfg)
    assert code == 3 and "inconclusive" in err


def test_config_from_environment(capsys, data, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 17}))
    monkeypatch.setenv("SADDLESCOPE_CONFIG", str(cfg))
    code, out, _ = run(capsys, "quiver", data / "pentagon.json")
    assert code == 0 and "seed: 17" in out
    code, out, _ = run(capsys, "quiver", data / "pentagon.json", "--seed", "5")
    assert "seed: 5" in out


def test_bad_config(capsys, data, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "quiver", data / "pentagon.json", "--config", cfg)[0] == 2


@pytest.mark.slow
def test_module_entry_point(data):
    r = subprocess.run([sys.executable, "-m", "saddlescope", "quiver", str(data / "pentagon.json")], capture_output=True, text=True)
    assert r.returncode == 0 and "exchange matrix" in r.stdout


def test_pentagon_quiver_is_a2(capsys, data):
    code, out, _ = run(capsys, "quiver", data / "pentagon.json")
    assert code == 0 and "    0   1\n   -1   0" in out


def test_analyze_reports_saddles_at_theta_zero(capsys, data):
    code, out, _ = run(capsys, "analyze", data / "z2_plus_i.json", "--theta", "0")
    assert code == 0 and "saddle-free: no" in out and out.count("saddle at theta=0.0") == 2


def test_sphere3_periods(capsys, data):
    code, out, _ = run(capsys, "periods", data / "sphere3.json")
    assert code == 0 and "n = 3" in out
    assert out.count("residue ") == 3 and out.count("|Z|=") == 3


@pytest.mark.slow
@pytest.mark.parametrize("suite", ["an", "kronecker"])
def test_example_suites(capsys, suite):
    code, out, _ = run(capsys, "examples", suite)
    assert code == 0 and f"suite {suite}: pass" in out


@pytest.mark.slow
def test_ring_side_accumulates(capsys, data):
    code, out, _ = run(capsys, "scan", data / "annulus_ring.json", "--window", "0.5535", "0.6", "--grid", "8")
    assert code == 0 and "accumulate: yes" in out

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from spherecone import cli
from spherecone import complex as cx


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def join10_file(tmp_path, capsys):
    path = tmp_path / "join10.json"
    assert run(capsys, "build", "join-double", "--n", "10", "--out", str(path))[0] == 0
    return path


# -- build -------------------------------------------------------------------------


def test_build_join_double(join10_file, capsys):
    c = cx.deserialize(join10_file.read_text())
    assert cx.area(c) == pytest.approx(20.0, abs=1e-9)
    code, out, err = run(capsys, "build", "join-double", "--n", "10")
    assert code == 0
    assert cx.deserialize(out) == c
    assert "area 20" in err and "deg" in err


def test_build_octahedron_residual(capsys):
    code, out, err = run(capsys, "build", "octahedron")
    assert code == 0
    assert abs(cx.gauss_bonnet_check(cx.deserialize(out))) <= 1e-12
    assert "Gauss-Bonnet residual" in err


def test_build_triangle_double_labels(capsys):
    code, out, _ = run(capsys, "build", "triangle-double", "--eps", "0.2")
    assert code == 0
    assert set(cx.deserialize(out).labels) == {"p", "x", "y", "y'"}


@pytest.mark.parametrize("argv", [("build", "join-double", "--n", "-1"), ("build", "triangle-double", "--eps", "2"), ("build", "octahedron", "--n", "3")])
def test_build_bad_parameters(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_out_dir_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path / "runs"))
    assert run(capsys, "build", "octahedron", "--out", "oct.json")[0] == 0
    assert (tmp_path / "runs" / "oct.json").is_file()


# -- analyze ---------------------------------------------------------------------------


def test_analyze_round_join_double(tmp_path, capsys):
    path = tmp_path / "jpi.json"
    run(capsys, "build", "join-double", "--n", repr(math.pi), "--out", str(path))
    code, out, _ = run(capsys, "analyze", str(path), "--depths", "3,4,5")
    assert code == 0
    doc = json.loads(out)
    assert doc["diameter"]["extrapolated_diameter"] == pytest.approx(math.pi, abs=5e-3)
    assert doc["version"] and doc["config"]["depths"] == [3, 4, 5]


def test_analyze_growth_table(join10_file, capsys):
    code, out, _ = run(capsys, "analyze", str(join10_file), "--growth", "p", "--format", "table")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["r", "boundary_over_r", "two_area_over_r2"]
    assert len(rows) > 2


def test_analyze_corrupted_file(join10_file, capsys):
    join10_file.write_text(join10_file.read_text()[:-40])
    assert run(capsys, "analyze", str(join10_file))[0] == 2


def test_analyze_missing_file(tmp_path, capsys):
    assert run(capsys, "analyze", str(tmp_path / "nope.json"))[0] == 2


def test_analyze_resource_limit(join10_file, capsys):
    code, _, err = run(capsys, "analyze", str(join10_file), "--max-nodes", "100")
    assert code == 3 and "resources" in err


def test_analyze_unknown_growth_vertex(join10_file, capsys):
    assert run(capsys, "analyze", str(join10_file), "--growth", "q")[0] == 2


def test_depth_and_depths_conflict(join10_file, capsys):
    assert run(capsys, "analyze", str(join10_file), "--depth", "3", "--depths", "3,4,5")[0] == 2


# -- conformal --------------------------------------------------------------------------------


def test_conformal_round_area(capsys):
    code, out, _ = run(capsys, "conformal", "round", "area")
    assert code == 0
    assert json.loads(out)["area"]["value"] == pytest.approx(4 * math.pi, abs=1e-6)


def test_conformal_romney_growth_table(capsys):
    code, out, _ = run(capsys, "conformal", "romney", "romney-growth", "0.2", "0.1", "0.05", "--format", "table")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["r", "rho", "ball_area", "ratio", "quadrature_area"]
    ratios = [float(r[3]) for r in rows[1:]]
    assert ratios == sorted(ratios) and len(ratios) == 3


def test_conformal_flat_residual(capsys):
    code, out, _ = run(capsys, "conformal", "flat", "residual")
    assert code == 0
    assert json.loads(out)["residual"]["max"] == 1.0


def test_conformal_curvature_points(capsys):
    code, out, err = run(capsys, "conformal", "round", "curvature", "0.5,0.5", "2,0")
    assert code == 0
    doc = json.loads(out)
    assert [p["K"] for p in doc["points"]] == pytest.approx([1.0, 1.0], abs=1e-12)
    assert "sign" in doc["note"]


def test_conformal_diagnose(capsys):
    code, out, _ = run(capsys, "conformal", "round", "diagnose")
    assert json.loads(out)["diagnostic"]["verdict"] == "incompleteness-witness"


def test_conformal_grid_file(tmp_path, capsys):
    from spherecone import conformal as cf

    path = tmp_path / "g.json"
    cf.save_grid(cf.finger_metric(2), path)
    code, out, _ = run(capsys, "conformal", str(path), "circles", "0.5", "1.0")
    assert code == 0
    lengths = [c["length"] for c in json.loads(out)["circles"]]
    assert lengths == pytest.approx([4 * math.pi * r / (1 + r * r) for r in (0.5, 1.0)], rel=1e-6)


@pytest.mark.parametrize(
    "argv",
    [
        ("conformal", "sphere", "area"),
        ("conformal", "round", "romney-growth"),
        ("conformal", "romney", "romney-growth", "0.9"),
        ("conformal", "missing.json", "area"),
    ],
)
def test_conformal_input_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


# -- verify -----------------------------------------------------------------------------------------


def test_verify_prop_diameter(capsys):
    code, out, _ = run(capsys, "verify", "prop-diameter", "--eps", "0.2")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "pass" and doc["anchor"]["quote"] and doc["version"]
    assert doc["tolerances"]["diameter_margin"] == 0.05


def test_verify_corollary_failure(capsys):
    code, out, _ = run(capsys, "verify", "corollary", "--eps", "0.01", "--n", "10")
    assert code == 1
    doc = json.loads(out)
    assert doc["verdict"] == "fail" and doc["values"]["N_required"] > 10


def test_verify_not_applicable_exits_zero(capsys):
    code, out, _ = run(capsys, "verify", "theorem-complete", "--profile", "flat")
    assert code == 0 and json.loads(out)["verdict"] == "not-applicable"


def test_verify_tolerance_override(capsys):
    code, out, _ = run(capsys, "verify", "prop-area", "--n", "3", "--tolerance", "identity=1e-6")
    assert code == 0
    assert json.loads(out)["tolerances"]["identity"] == 1e-6


@pytest.mark.parametrize(
    "argv",
    [
        ("verify", "prop-area", "--tolerance", "bogus=1"),
        ("verify", "prop-area", "--n", "-2"),
        ("verify", "prop-diameter", "--eps", "0.8"),
        ("verify", "theorem-complete", "--profile", "sphere"),
    ],
)
def test_verify_input_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_verify_resource_error(capsys):
    assert run(capsys, "verify", "prop-diameter", "--max-nodes", "50")[0] == 3


def test_verify_table_format(capsys):
    code, out, _ = run(capsys, "verify", "smoothing", "--format", "table")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["claim", "check", "computed", "target", "tolerance", "relation", "passed"]
    assert all(r[0] == "smoothing" for r in rows[1:])


def test_verify_all(capsys):
    code, out, _ = run(capsys, "verify", "all")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "pass"
    assert [r["claim_id"] for r in doc["reports"]] == [
        "prop-diameter", "prop-area", "corollary", "theorem-complete", "angle-growth", "smoothing"
    ]


def test_verify_output_is_deterministic(capsys):
    first = run(capsys, "verify", "prop-area", "--n", "5")[1]
    assert run(capsys, "verify", "prop-area", "--n", "5")[1] == first


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "no-such-suite"])
    assert exc.value.code == 2


def test_entry_point_module():
    proc = subprocess.run(
        [sys.executable, "-m", "spherecone.cli", "verify", "prop-area", "--n", "10"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["values"]["area"] == pytest.approx(20.0)
    assert "PASS" in proc.stderr

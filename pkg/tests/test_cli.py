import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from anisogeo import cli
from anisogeo import report as rp
from anisogeo.specfile import DEFAULT_SUITES, SpecFileError, loads

SPECS = Path(__file__).resolve().parent.parent / "specs"

SPHERE = """schema_version = 1
[space]
class = "finsler"
n = 2
fundamental = "sqrt(y1^2 + sin(x1)^2*y2^2)"
[points]
coords = [[0.7, 0.3, 1.0, 0.5]]
"""


def run(tmp_path, text, command, fmt="json", **kw):
    spec = tmp_path / "spec.toml"
    spec.write_text(text, encoding="utf-8")
    out, err = io.StringIO(), io.StringIO()
    status = cli.run(str(spec), command, None, fmt, stdout=out, stderr=err, **kw)
    return status, out.getvalue(), err.getvalue()


# ---------------------------------------------------------------------------
# spec files


def test_spec_defaults():
    spec = loads(SPHERE)
    assert spec.connection == "canonical"
    assert spec.checks == DEFAULT_SUITES
    assert spec.coordinate_names() == ["x1", "x2", "y1", "y2"]
    assert spec.points == [(0.7, 0.3, 1.0, 0.5)]


def test_spec_without_trailing_newline():
    assert loads(SPHERE.rstrip("\n")).space.n == 2


def test_covector_coordinates():
    spec = loads('schema_version = 1\n[space]\nclass = "hamilton"\nn = 2\nfundamental = "p1^2 + p2^2"\n')
    assert spec.coordinate_names() == ["x1", "x2", "p1", "p2"]


@pytest.mark.parametrize("text, msg", [
    ("[space]\n", "schema_version is required"),
    ("schema_version = 2\n", "unsupported schema_version"),
    ("schema_version = 1\nfoo = 1\n", "unknown key"),
    ('schema_version = 1\n[space]\nclass = "finsler"\nn = 2\n', "fundamental"),
    ('schema_version = 1\n[space]\nclass = "blob"\nn = 2\n', "unknown space class"),
    ('schema_version = 1\n[space]\nclass = "finsler"\nn = 2\nfundamental = "y1"\nconnection = "x"\n',
     "unknown connection"),
    ('schema_version = 1\n[space]\nclass = "riemann"\nn = 2\nmetric = [["1"]]\n', "2x2"),
    (SPHERE + "[checks]\nsuites = [\"nope\"]\n", "unknown check suite"),
    (SPHERE.replace("[[0.7, 0.3, 1.0, 0.5]]", "[[0.7, 0.3]]"), "4 coordinates"),
    ("schema_version = 1\n[clifford]\np = 1\n", "go together"),
    ("schema_version = 1\n[clifford]\nmetric_diag = [1, 2]\n", "non-empty list"),
    ("schema_version = 1\n[clifford]\nsigma_n = 3\nmetric_diag = [1, 1]\n", "disagrees"),
    ("schema_version = 1\nnot toml at all\n", "malformed"),
])
def test_spec_errors(text, msg):
    with pytest.raises(SpecFileError, match=msg):
        loads(text)


def test_grid_points_are_lexicographic():
    spec = loads(SPHERE + """[grid]
base = [0.5, 0.0, 1.0, 0.5]
[[grid.axes]]
coordinate = "x1"
start = 0.0
stop = 1.0
count = 3
[[grid.axes]]
coordinate = "y2"
start = -1.0
stop = 1.0
count = 2
""")
    pts = spec.grid.points()
    assert len(pts) == 6
    assert [(p[0], p[3]) for p in pts] == [(0.0, -1.0), (0.0, 1.0), (0.5, -1.0), (0.5, 1.0), (1.0, -1.0), (1.0, 1.0)]
    assert all(p[1] == 0.0 and p[2] == 1.0 for p in pts)


# ---------------------------------------------------------------------------
# serialization


def test_empty_report_json():
    data = rp.emit_report(rp.empty_report(), "json")
    assert json.loads(data) == {"points": [], "residuals": {}, "diagnostics": {}}
    assert data.decode().index('"diagnostics"') < data.decode().index('"points"') < data.decode().index('"residuals"')


def test_float_formatting_17_digits():
    data = rp.emit_report({"x": 0.1, "y": -0.0, "z": 1e-300, "w": 2.0}, "json").decode()
    assert '"x": 0.10000000000000001' in data
    assert '"y": 0' in data and '"w": 2' in data
    assert json.loads(data)["z"] == 1e-300


def test_unsupported_format():
    with pytest.raises(rp.UnsupportedFormatError):
        rp.emit_report(rp.empty_report(), "yaml")
    with pytest.raises(rp.UnsupportedFormatError):
        rp.emit_report(rp.empty_report(), "csv-grid")


def test_tensor_table_labels():
    t = rp.tensor_table("i,j,k", [[[1.0]]])
    assert t == {"indices": "i,j,k", "shape": [1, 1, 1], "values": [[[1.0]]]}
    with pytest.raises(ValueError):
        rp.tensor_table("i,j", [1.0])


# ---------------------------------------------------------------------------
# commands


def test_sphere_eval_scalar(tmp_path):
    status, out, _ = run(tmp_path, SPHERE, "eval")
    assert status == 0
    rep = json.loads(out)
    p = rep["points"][0]
    assert p["scalars"]["scalar_curvature"] == pytest.approx(2.0, abs=1e-4)
    assert p["tensors"]["curvature.R_h"]["indices"] == "i,h,j,k"
    assert p["tensors"]["connection.C_v"]["indices"] == "a,b,c"
    assert set(rep["diagnostics"]["metric_eigen_range"]) == {"g_min", "g_max", "h_min", "h_max"}


def test_check_reports_metricity_with_tolerance(tmp_path):
    status, out, _ = run(tmp_path, SPHERE, "check")
    assert status == 0
    res = json.loads(out)["residuals"]
    assert set(res["metricity_canonical"]) == {"value", "tolerance", "pass"}
    assert res["metricity_canonical"]["pass"] is True
    assert {"frame_duality", "torsion_antisymmetry", "curvature_antisymmetry", "phi_trace",
            "bianchi_first", "bianchi_second"} <= set(res)


def test_flat_check_all_zero(tmp_path):
    status, out, _ = run(tmp_path, (SPECS / "flat.toml").read_text(), "check")
    assert status == 0
    res = json.loads(out)["residuals"]
    assert all(r["value"] < 1e-30 for r in res.values())


def test_check_failure_exit_status(tmp_path):
    status, out, _ = run(tmp_path, (SPECS / "randers.toml").read_text(), "check", tolerance_scale=1e-30)
    assert status == 1
    assert any(not r["pass"] for r in json.loads(out)["residuals"].values())


def test_berwald_check_uses_family_key(tmp_path):
    text = SPHERE.replace('fundamental', 'connection = "berwald"\nfundamental')
    status, out, _ = run(tmp_path, text, "check")
    assert status == 0
    assert "metricity_berwald" in json.loads(out)["residuals"]


def test_inspect_bad_variable_reports_offset(tmp_path):
    status, _, err = run(tmp_path, SPHERE.replace("y2^2", "y3^2"), "inspect")
    assert status == 2
    assert "y3" in err and "byte" in err


def test_inspect_echoes_canonical_expressions(tmp_path):
    status, out, _ = run(tmp_path, SPHERE, "inspect")
    assert status == 0
    space = json.loads(out)["spec"]["space"]
    assert space["fundamental"] == "sqrt(((y1^2)+((sin(x1)^2)*(y2^2))))"


def test_domain_error_exit(tmp_path):
    text = SPHERE.replace("[[0.7, 0.3, 1.0, 0.5]]", "[[0.7, 0.3, 0.0, 0.0]]")
    status, _, err = run(tmp_path, text, "eval")
    assert status == 3
    assert "domain error" in err


def test_missing_spec_is_io_error():
    err = io.StringIO()
    assert cli.run("/nonexistent/spec.toml", "inspect", stderr=err) == 4


def test_unwritable_output_is_io_error(tmp_path):
    spec = tmp_path / "s.toml"
    spec.write_text(SPHERE)
    assert cli.run(str(spec), "inspect", str(tmp_path / "missing" / "out.json"), stderr=io.StringIO()) == 4


def test_grid_csv(tmp_path):
    status, out, _ = run(tmp_path, (SPECS / "sphere_grid.toml").read_text(), "grid", fmt="csv-grid")
    assert status == 0
    lines = out.strip().split("\n")
    assert lines[0].startswith("x1,x2,y1,y2,scalar_curvature,")
    assert len(lines) == 1 + 6
    for row in lines[1:]:
        assert float(row.split(",")[4]) == pytest.approx(2.0, abs=1e-8)


def test_grid_needs_grid_section(tmp_path):
    assert run(tmp_path, SPHERE, "grid")[0] == 2


def test_csv_grid_rejected_for_eval(tmp_path):
    assert run(tmp_path, SPHERE, "eval", fmt="csv-grid")[0] == 2


def test_clifford_report(tmp_path):
    status, out, _ = run(tmp_path, (SPECS / "clifford.toml").read_text(), "clifford")
    assert status == 0
    rep = json.loads(out)
    assert rep["algebra"]["dimension"] == 8
    assert rep["sigma"]["N"] == 4
    assert rep["residuals"]["anticommutation"]["value"] == 0
    assert rep["residuals"]["chevalley_multiplicativity"]["value"] == 0


def test_clifford_escalation_in_diagnostics(tmp_path):
    status, out, _ = run(tmp_path, "schema_version = 1\n[clifford]\nmetric_diag = [1, 1, 1]\n", "clifford")
    rep = json.loads(out)
    assert rep["diagnostics"]["escalations"]
    assert rep["sigma"]["N"] == 4 and rep["sigma"]["printed_N"] == 2


def test_classification_in_clifford_report(tmp_path):
    status, out, _ = run(tmp_path, "schema_version = 1\n[clifford]\np = 2\nq = 0\n", "clifford")
    assert json.loads(out)["algebra"]["classification"] == "H"


def test_text_format(tmp_path):
    status, out, _ = run(tmp_path, SPHERE, "check", fmt="text")
    assert status == 0
    assert "PASS  metricity_canonical" in out


def test_timing_is_opt_in(tmp_path):
    _, out, _ = run(tmp_path, SPHERE, "check")
    assert "timing_seconds" not in out
    _, out, _ = run(tmp_path, SPHERE, "check", timing=True)
    assert "timing_seconds" in json.loads(out)["diagnostics"]


def test_bad_tolerance_scale(tmp_path):
    assert run(tmp_path, SPHERE, "check", tolerance_scale=-1.0)[0] == 2


def test_console_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "anisogeo", "check", "--spec", str(SPECS / "sphere.toml"),
                           "--out", str(out)], capture_output=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["residuals"]["metricity_canonical"]["pass"]
    proc = subprocess.run([sys.executable, "-m", "anisogeo", "frobnicate", "--spec", "x"], capture_output=True)
    assert proc.returncode == 2


@pytest.mark.parametrize("name", ["sphere", "flat", "randers", "hamilton", "general"])
def test_shipped_specs_pass(tmp_path, name):
    err = io.StringIO()
    assert cli.run(str(SPECS / f"{name}.toml"), "check", str(tmp_path / "o.json"), stderr=err) == 0, err.getvalue()

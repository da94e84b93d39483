"""Scenario front end: exit codes, report determinism, CSV output."""

import hashlib
import json
from fractions import Fraction

import pytest

from cylcoh.cli import main


def _write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return p


def _run(tmp_path, payload, extra=(), name="scen.json"):
    p = _write(tmp_path, name, payload)
    code = main(["--scenario", str(p), "--out", str(tmp_path)] + list(extra))
    report_path = tmp_path / payload.get("report", p.stem + ".report.json")
    report = json.loads(report_path.read_text()) if report_path.exists() else None
    return code, report, report_path


BOX33 = {"kind": "box", "bounds": [[0.0, 1.0], [0.0, 1.0]], "grid": [33, 33]}


def test_rejects_invalid_json(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["--scenario", str(p)]) == 1
    assert "schema error" in capsys.readouterr().err


def test_rejects_unknown_command(tmp_path, capsys):
    code, _, _ = _run(tmp_path, {"command": "frobnicate"})
    assert code == 1
    assert "schema error" in capsys.readouterr().err


def test_rejects_missing_fields(tmp_path, capsys):
    code, _, _ = _run(tmp_path, {"command": "vanish", "n": 4, "k": 3})
    assert code == 1
    assert "schema error" in capsys.readouterr().err


def test_vanish_powerlaw(tmp_path):
    sc = {
        "command": "vanish",
        "n": 4,
        "k": 3,
        "p": 2,
        "q": "5/2",
        "interval": [0.0, 1.0],
        "warp": {"kind": "powerlaw", "lam": 2.0},
        "fiber": "sphere",
    }
    code, report, _ = _run(tmp_path, sc)
    assert code == 0
    assert report["verdict"] == "VANISHES"
    assert report["conditional"] is False, "sphere table settles the de Rham flag"
    assert report["failed"] == []


def test_vanish_infinite_b_refuses(tmp_path):
    sc = {
        "command": "vanish",
        "n": 4,
        "k": 3,
        "p": 2,
        "q": 2,
        "interval": [0.0, "inf"],
        "warp": {"kind": "powerlaw", "lam": 2.0, "pivot": 0.0},
        "hdr_zero": True,
    }
    code, report, _ = _run(tmp_path, sc)
    assert code == 2
    assert report["verdict"] == "HYPOTHESES-FAIL"
    assert any("b is infinite" in f for f in report["failed"])


def test_vanish_asymptotic_flag(tmp_path):
    sc = {
        "command": "vanish",
        "n": 4,
        "k": 3,
        "p": 2,
        "q": "5/2",
        "warp": {"kind": "powerlaw", "lam": 2.0},
        "hdr_zero": True,
        "asymptotic": True,
    }
    code, report, _ = _run(tmp_path, sc)
    assert code == 0
    assert report["delegated"] is True and report["m"] == 5


def test_report_byte_identical(tmp_path):
    sc = {
        "command": "vanish",
        "n": 4,
        "k": 3,
        "p": 2,
        "q": "5/2",
        "warp": {"kind": "powerlaw", "lam": 2.0},
        "hdr_zero": True,
    }
    _, _, path1 = _run(tmp_path, sc, name="a.json")
    first = hashlib.md5(path1.read_bytes()).hexdigest()
    _, _, path2 = _run(tmp_path, sc, name="a.json")
    assert hashlib.md5(path2.read_bytes()).hexdigest() == first


def test_region_csv_rows(tmp_path):
    sc = {
        "command": "region",
        "n": 4,
        "k": 3,
        "lambda": 2,
        "p": 2,
        "resolution": 8,
    }
    code, report, _ = _run(tmp_path, sc)
    assert code == 0
    csv_path = tmp_path / "scen.csv"
    lines = csv_path.read_text().strip().split("\n")
    assert lines[0] == "inv_p,inv_q,k,verdict"
    rows = [ln.split(",") for ln in lines[1:]]
    assert rows, "expected member rows at resolution 8"
    assert all(r[3] == "member" for r in rows)
    assert ["1/2", "1/2", "3", "member"] in rows
    for r in rows:
        assert Fraction(r[1]) > Fraction(3, 8), f"1/q must clear the window: {r}"
        assert Fraction(r[0]) < Fraction(5, 8)
    # the q-interval at p=2 is reported exactly
    qiv = report["regions"]["3"]["q_interval"]
    assert qiv["lo"] == "2" and qiv["hi"] == "8/3"
    assert report["member_rows"] == len(rows)


def test_region_members_nest_under_refinement(tmp_path):
    base = {"command": "region", "n": 4, "k": 3, "lambda": 2}

    def members(resolution, name):
        sc = dict(base, resolution=resolution)
        _run(tmp_path, sc, name=name)
        lines = (tmp_path / (name[:-5] + ".csv")).read_text().strip().split("\n")
        return {tuple(ln.split(",")[:2]) for ln in lines[1:]}

    coarse = members(8, "r8.json")
    fine = members(16, "r16.json")
    assert coarse and coarse <= fine


def test_region_empty_is_header_only(tmp_path):
    sc = {"command": "region", "n": 4, "k": 3, "lambda": "9/10"}
    code, report, _ = _run(tmp_path, sc)
    assert code == 0
    assert report["member_rows"] == 0
    assert report["regions"]["3"]["empty"] is True
    assert (tmp_path / "scen.csv").read_text() == "inv_p,inv_q,k,verdict\n"


def test_glue_small_scenario(tmp_path):
    sc = {
        "command": "glue",
        "surface": "cylinder-s1",
        "grid": [33, 32],
        "degree": 1,
        "count": 1,
        "amplitude": 3e-6,
        "tolerance": 1e-4,
        "seed": 5,
    }
    code, report, _ = _run(tmp_path, sc)
    assert code == 0
    assert report["pass"] is True
    assert report["residual_max"] <= 1e-4
    assert report["runs"][0]["stages"] == 1


def test_glue_divergent_beta_refuses(tmp_path):
    sc = {
        "command": "glue",
        "surface": "cylinder-s1",
        "grid": [33, 32],
        "degree": 1,
        "count": 1,
        "amplitude": 3e-6,
        "beta": {"kind": "powerlaw", "lam": 2.0, "pivot": 1.0},
    }
    code, report, _ = _run(tmp_path, sc)
    assert code == 2
    assert report["verdict"] == "HYPOTHESES-FAIL"
    assert "||beta||_{L^q[a,b)} divergent" in report["refusal"]


def test_homotopy_identity_scenario(tmp_path):
    sc = {
        "command": "homotopy-check",
        "domain": BOX33,
        "degree": 1,
        "count": 2,
        "amplitude": 5e-5,
        "tolerance": 1e-4,
        "seed": 1,
    }
    code, report, _ = _run(tmp_path, sc)
    assert code == 0
    assert report["pass"] is True
    assert len(report["residuals"]) == 2


def test_homotopy_inadmissible_weight_refuses(tmp_path):
    sc = {
        "command": "homotopy-check",
        "domain": {"kind": "box", "bounds": [[0.0, 1.0]], "grid": [33]},
        "degree": 1,
        "mode": "averaged",
        "weight": {"kind": "powerlaw", "lam": 1.0, "pivot": 1.0},
    }
    code, report, _ = _run(tmp_path, sc)
    assert code == 2
    assert "inadmissible centering weight" in report["refusal"]


def test_grid_scale_flag(tmp_path):
    sc = {
        "command": "homotopy-check",
        "domain": BOX33,
        "degree": 1,
        "count": 1,
        "amplitude": 5e-5,
        "tolerance": 1e-3,
    }
    code, report, _ = _run(tmp_path, sc, extra=["--grid-scale", "0.5"])
    assert code == 0
    assert report["domain"]["grid"] == [17, 17]


def test_constant_routes(tmp_path):
    dom1d = {"kind": "box", "bounds": [[0.0, 1.0]], "grid": [65]}
    sc = {"command": "constant", "domain": dom1d, "k": 1, "p": 2, "q": 2}
    code, report, _ = _run(tmp_path, sc, name="c_box.json")
    assert code == 0
    assert report["finite"] is True
    assert abs(report["C1"] - (2.0 - 2.0**0.5)) <= 2e-4

    sc = dict(sc, route="corollary")
    code, report, _ = _run(tmp_path, sc, name="c_cor.json")
    assert code == 0 and report["finite"] is True

    sc = {
        "command": "constant",
        "domain": dom1d,
        "k": 1,
        "p": 2,
        "q": 2,
        "route": "cylinder",
        "beta": {"kind": "powerlaw", "lam": 2.0, "pivot": 1.0},
    }
    code, report, _ = _run(tmp_path, sc, name="c_cyl.json")
    assert code == 2
    assert report["verdict"] == "HYPOTHESES-FAIL"
    assert "||beta||_{L^q[a,b)} divergent" in report["hypothesis_failures"]

import csv
import io
import json

import pytest

from app.cli import EXIT_INVALID, EXIT_OK, EXIT_USAGE, main


@pytest.fixture
def line3_file(tmp_path, line3_doc):
    path = tmp_path / "line3.json"
    path.write_text(json.dumps(line3_doc))
    return path


def test_scenario_then_check_conditions(tmp_path):
    world = tmp_path / "annulus.json"
    out = tmp_path / "conditions.json"
    assert main(["scenario", "annulus", "--out", str(world)]) == EXIT_OK
    assert main(["check-thm1", "--world", str(world), "--grid-k", "2", "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["conditions_hold"] is True
    assert report["witness"]["names"] == ["f", "f_prime"]


def test_bounds_csv_on_stdout(capsys):
    assert main(["bounds", "--n", "1000", "--d", "3", "--delta", "0.05"]) == EXIT_OK
    rows = {r["bound"]: r for r in csv.DictReader(io.StringIO(capsys.readouterr().out))}
    assert float(rows["vc_growth"]["value"]) == pytest.approx(0.2021, abs=1e-4)
    assert rows["confidence_term"]["formula"] == "sqrt(ln(1/delta) / (2n))"


def test_bounds_json(tmp_path):
    out = tmp_path / "bounds.json"
    assert main(["bounds", "--n", "100", "--u-star", "1", "--out", str(out)]) == EXIT_OK
    table = json.loads(out.read_text())
    assert table["linear_hinge_serm"] < table["linear_hinge_prior"]


def test_config_file_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 1000, "d": 3}))
    assert main(["bounds", "--n", "10", "--config", str(cfg)]) == EXIT_OK
    rows = {r["bound"]: r for r in csv.DictReader(io.StringIO(capsys.readouterr().out))}
    assert float(rows["vc_growth"]["value"]) == pytest.approx(0.2021, abs=1e-4)


def test_invalid_delta_exits_with_error(capsys):
    assert main(["bounds", "--n", "10", "--delta", "2"]) == EXIT_INVALID
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "INVALID_DELTA"


def test_bounds_reject_fewer_samples_than_dimensions(capsys):
    assert main(["bounds", "--n", "1", "--d", "3"]) == EXIT_INVALID
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "INVALID_ARGUMENT"
    assert err["details"] == {"n": 1, "d": 3}


def test_risk_with_unknown_dataset_point(tmp_path, line3_file, capsys):
    ds = tmp_path / "d.csv"
    ds.write_text("point,label\nx7,1\n")
    assert main(["risk", "--world", str(line3_file), "--dataset", str(ds)]) == EXIT_INVALID
    assert '"INVALID_DATASET"' in capsys.readouterr().err


def test_risk_with_dataset(tmp_path, line3_file):
    ds = tmp_path / "d.csv"
    ds.write_text("point,label\nx0,-1\nx1,1\n")
    out = tmp_path / "risk.json"
    assert main(["risk", "--world", str(line3_file), "--dataset", str(ds), "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["strategic_risk"] == pytest.approx(0.3)
    assert report["empirical_strategic_risk"] == pytest.approx(0.5)


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["serm"]) == EXIT_USAGE


def test_serm_from_dataset_file(tmp_path, line3_file):
    ds = tmp_path / "d.csv"
    ds.write_text("point,label\nx0,-1\nx1,1\nx2,1\n")
    out = tmp_path / "serm.json"
    assert main(["serm-rand", "--world", str(line3_file), "--dataset", str(ds), "--grid-k", "4",
                 "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["deterministic"]["hypothesis"] == "f2"
    assert report["randomised"]["objective"] == 0.0
    assert report["n"] == 3


def test_rademacher_is_reproducible(tmp_path, line3_file):
    outs = [tmp_path / "a.json", tmp_path / "b.json"]
    for out in outs:
        assert main(["rademacher", "--world", str(line3_file), "--n", "30", "--sigma-draws", "100",
                     "--dataset-draws", "3", "--seed", "5", "--out", str(out)]) == EXIT_OK
    assert outs[0].read_bytes() == outs[1].read_bytes()
    assert json.loads(outs[0].read_text())["estimate"]["seed"] == 5


def test_validate_reports_violations(tmp_path, line3_doc):
    line3_doc["distribution"][0]["prob"] = 0.5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(line3_doc))
    out = tmp_path / "report.json"
    assert main(["validate", "--world", str(path), "--out", str(out)]) == EXIT_INVALID
    report = json.loads(out.read_text())
    assert report["valid"] is False
    assert "MASS_NOT_NORMALISED" in {v["code"] for v in report["violations"]}


def test_validate_accepts_line3(tmp_path, line3_file):
    out = tmp_path / "report.json"
    assert main(["validate", "--world", str(line3_file), "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["valid"] is True


def test_render_writes_svg(tmp_path):
    world = tmp_path / "annulus.json"
    svg = tmp_path / "annulus.svg"
    assert main(["scenario", "annulus", "--angular-bins", "16", "--radial-bins", "8", "--cost-scale", "2",
                 "--out", str(world)]) == EXIT_OK
    assert main(["render", "--world", str(world), "--sets", "G,G2", "--out", str(svg)]) == EXIT_OK
    assert "G(f_prime)" in svg.read_text()

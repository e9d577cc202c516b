import csv
import json
from pathlib import Path

import jsonschema
import pytest
from click.testing import CliRunner

from sphere_blasso.cli import main
from sphere_blasso.config import dump_config
from sphere_blasso.instances import fig1_config, fig4_config

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)


@pytest.fixture(scope="module")
def fig1_yaml(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "fig1.yaml"
    cfg = fig1_config()
    text = dump_config(cfg).replace("tol_sat: 0.01", "tol_sat: 0.001")
    path.write_text(text)
    return path


@pytest.fixture(scope="module")
def fig1_solved(fig1_yaml, tmp_path_factory):
    out = tmp_path_factory.mktemp("solve")
    res = run("solve", fig1_yaml, "-o", out)
    return res, out


def test_regions_reports_ten(fig1_yaml, tmp_path):
    res = run("regions", fig1_yaml, "-o", tmp_path)
    assert res.exit_code == 0
    assert res.output.startswith("10 regions")
    data = json.loads((tmp_path / "regions.json").read_text())
    jsonschema.validate(data, schema("regions"))
    assert data["full_regions"] == 10 and data["cover_count"] == 10


def test_solve_three_atoms(fig1_solved):
    res, out = fig1_solved
    assert res.exit_code == 0
    data = json.loads((out / "solution.json").read_text())
    jsonschema.validate(data, schema("solution"))
    assert len(data["atoms"]) == 3 and data["certified"]
    assert data["lambda"] == 0.03
    assert (out / "solution.svg").read_text().startswith("<svg")


def test_certificate_csv(fig1_solved):
    _, out = fig1_solved
    rows = list(csv.reader((out / "certificate.csv").open()))
    assert rows[0] == ["theta", "w1", "w2", "eta"]
    assert len(rows) == 3601
    assert max(abs(float(r[3])) for r in rows[1:]) <= 1 + 1e-2


def test_solve_is_byte_identical(fig1_yaml, fig1_solved, tmp_path):
    _, first = fig1_solved
    assert run("solve", fig1_yaml, "-o", tmp_path).exit_code == 0
    for name in ("solution.json", "certificate.csv", "solution.svg"):
        assert (tmp_path / name).read_bytes() == (first / name).read_bytes()


def test_certify_and_conditions(fig1_yaml, fig1_solved, tmp_path):
    _, out = fig1_solved
    res = run("certify", fig1_yaml, out / "solution.json", "-o", tmp_path)
    data = json.loads((tmp_path / "certify.json").read_text())
    jsonschema.validate(data, schema("certify"))
    assert data["lc"]["holds"]
    assert res.exit_code == (0 if all(r["holds"] for r in data["nd"]) else 1)
    res = run("conditions", fig1_yaml, out / "solution.json", "-o", tmp_path)
    assert res.exit_code == 0
    jsonschema.validate(json.loads((tmp_path / "conditions.json").read_text()),
                        schema("conditions"))


def test_empty_config_exits_2(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    res = CliRunner().invoke(main, ["solve", str(path), "-o", str(tmp_path)])
    assert res.exit_code == 2
    assert "error" in res.output


def test_bad_field_exits_2(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("points: [[1, 0]]\nlabels: [1]\nlambda: -3\n")
    res = CliRunner().invoke(main, ["regions", str(path)])
    assert res.exit_code == 2
    assert "lambda" in res.output


def test_unreadable_solution_exits_2(fig1_yaml, tmp_path):
    bad = tmp_path / "s.json"
    bad.write_text("{}")
    res = CliRunner().invoke(main, ["certify", str(fig1_yaml), str(bad), "-o", str(tmp_path)])
    assert res.exit_code == 2


def test_sweep_csv(tmp_path):
    cfg = fig1_config()
    text = dump_config(cfg) + "sweep:\n  lambdas: [1.0, 0.01]\n"
    text = text.replace("particles: 2000", "particles: 300").replace("max_iters: 20000",
                                                                      "max_iters: 3000")
    path = tmp_path / "c.yaml"
    path.write_text(text)
    res = run("sweep-lambda", path, "-o", tmp_path)
    rows = list(csv.reader((tmp_path / "atoms_vs_lambda.csv").open()))
    assert rows[0] == ["lambda", "atom_count", "objective", "certified"]
    assert [float(r[0]) for r in rows[1:]] == [1.0, 0.01]
    assert all(int(r[1]) <= 10 for r in rows[1:])
    assert res.exit_code in (0, 1)
    assert (tmp_path / "atoms_vs_lambda.svg").exists()


def test_stability_csv(tmp_path):
    text = dump_config(fig4_config()).replace(
        "stability:\n", "stability:\n  noise_levels: [0.0005, 0.001, 0.0015]\n")
    path = tmp_path / "c.yaml"
    path.write_text(text)
    res = run("stability", path, "-o", tmp_path)
    assert res.exit_code == 0
    rows = list(csv.reader((tmp_path / "stability.csv").open()))
    assert rows[0] == ["noise_norm", "atom_index", "L_c", "L_w"]
    labels = [r[0] for r in rows[1:]]
    for tag in ("slope_c_0", "slope_w_1", "r2_c_0", "r2_w_1"):
        assert tag in labels
    assert len([l for l in labels if not l.startswith(("slope", "r2"))]) == 2 * 4
    for key in "cw":
        assert (tmp_path / f"stability_L{key}.svg").exists()

import json

import pytest
from click.testing import CliRunner
from conftest import config_path

import fiber_cli
from fiber_cli import EXIT_CHECK_FAILURE, EXIT_DEGENERATE, EXIT_PASS, EXIT_USAGE, cli
from models import CheckResult, VerifyReport


@pytest.fixture
def runner(tmp_path, monkeypatch):
    monkeypatch.setenv("FIBERS_OUTPUT_DIR", str(tmp_path))
    monkeypatch.delenv("FIBERS_THREADS", raising=False)
    return CliRunner()


def _write_config(tmp_path, name, **overrides):
    config = json.loads(open(config_path("heisenberg3_default.json")).read())
    config.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def test_verify_writes_sorted_report(runner, tmp_path):
    result = runner.invoke(cli, ["verify", config_path("heisenberg3_default.json")])
    assert result.exit_code == EXIT_PASS, result.output
    report_path = tmp_path / "reports" / "heisenberg3_verify.json"
    text = report_path.read_text()
    data = json.loads(text)
    assert data["pass"] is True
    assert all("pass" in check for check in data["checks"])
    assert text == json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def test_verify_output_is_independent_of_threads(runner, tmp_path):
    config = config_path("heisenberg3_default.json")
    one = tmp_path / "one.json"
    eight = tmp_path / "eight.json"
    assert runner.invoke(cli, ["verify", config, "--output", str(one), "--threads", "1"]).exit_code == EXIT_PASS
    assert runner.invoke(cli, ["verify", config, "--output", str(eight), "--threads", "8"]).exit_code == EXIT_PASS
    assert one.read_bytes() == eight.read_bytes()


def test_verify_failure_exit_code(runner, monkeypatch):
    failing = VerifyReport(
        group="heisenberg3", S=8, q=8, seed=0, mode="frame", passed=False,
        checks=[CheckResult(check="sumid", lhs=1.0, rhs=2.0, rel_err=0.5, tolerance=1e-9, passed=False)],
    )
    monkeypatch.setattr(fiber_cli, "run_verify", lambda config, threads: failing)
    result = runner.invoke(cli, ["verify", config_path("heisenberg3_default.json")])
    assert result.exit_code == EXIT_CHECK_FAILURE
    assert "sumid" in result.output


def test_bounds_with_csv(runner, tmp_path):
    csv_path = tmp_path / "bounds.csv"
    result = runner.invoke(cli, [
        "bounds", config_path("heisenberg3_riesz.json"),
        "--output", str(tmp_path / "bounds.json"), "--csv", str(csv_path),
    ])
    assert result.exit_code == EXIT_PASS, result.output
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "sigma_1,rank,lower,upper"
    assert len(lines) == 1 + 8
    report = json.loads((tmp_path / "bounds.json").read_text())
    assert report["mode"] == "riesz"
    assert 0 < report["lower"] <= report["upper"]


def test_degenerate_riesz_system(runner):
    result = runner.invoke(cli, ["bounds", config_path("heisenberg3_duplicate_riesz.json")])
    assert result.exit_code == EXIT_DEGENERATE
    assert "sigma" in result.output


def test_fully_masked_layout_is_a_usage_error(runner, tmp_path):
    path = _write_config(tmp_path, "masked.json", tolerances={"pf_eps": 10.0})
    result = runner.invoke(cli, ["bounds", path])
    assert result.exit_code == EXIT_USAGE


@pytest.mark.parametrize("overrides", [
    {"group": "heisenberg5"},
    {"S": 1},
    {"generators": []},
    {"mode": "tight"},
])
def test_invalid_config_is_a_usage_error(runner, tmp_path, overrides):
    path = _write_config(tmp_path, "invalid.json", **overrides)
    assert runner.invoke(cli, ["verify", path]).exit_code == EXIT_USAGE


def test_missing_config(runner, tmp_path):
    result = runner.invoke(cli, ["bounds", str(tmp_path / "nope.json")])
    assert result.exit_code == EXIT_USAGE


def test_demo_on_wrong_group(runner):
    result = runner.invoke(cli, ["demo", config_path("heisenberg3_default.json"), "sis_not_left_invariant"])
    assert result.exit_code == EXIT_USAGE


def test_sis_demo(runner, tmp_path):
    result = runner.invoke(cli, ["demo", config_path("twostep6_application.json"), "sis_not_left_invariant"])
    assert result.exit_code == EXIT_PASS, result.output
    report = json.loads((tmp_path / "reports" / "sis_not_left_invariant.json").read_text())
    assert report["pass"] is True
    assert report["demo"] == "sis_not_left_invariant"


def test_coeffs_report(runner, tmp_path):
    out = tmp_path / "coeffs.json"
    result = runner.invoke(cli, ["coeffs", config_path("heisenberg3_default.json"), "--output", str(out)])
    assert result.exit_code == EXIT_PASS, result.output
    assert len(json.loads(out.read_text())["coefficients"]) == 72


def test_export_then_import(runner, tmp_path):
    field = tmp_path / "phi.sizf"
    config = config_path("heisenberg3_default.json")
    assert runner.invoke(cli, ["export", config, str(field)]).exit_code == EXIT_PASS
    assert field.exists()

    result = runner.invoke(cli, ["import", config, str(field)])
    assert result.exit_code == EXIT_PASS, result.output
    assert "masked_slots: 1" in result.output

    wrong = runner.invoke(cli, ["import", config_path("threestep5_default.json"), str(field)])
    assert wrong.exit_code == EXIT_USAGE
    assert "byte offset" in wrong.output


def test_verify_report_on_stdout_is_plain_json(runner):
    result = runner.invoke(cli, ["verify", config_path("threestep5_default.json")])
    assert result.exit_code == EXIT_PASS, result.output
    report = json.loads(result.stdout)
    assert report["group"] == "threestep5"
    assert report["pass"] is True
    assert "VERIFICATION" in result.stderr


def test_bounds_report_on_stdout_is_plain_json(runner, tmp_path):
    config = json.loads(open(config_path("abelian_bspline.json")).read())
    del config["output"]
    path = tmp_path / "bspline.json"
    path.write_text(json.dumps(config))

    result = runner.invoke(cli, ["bounds", str(path)])
    assert result.exit_code == EXIT_PASS, result.output
    report = json.loads(result.stdout)
    assert report["mode"] == "frame"
    assert len(report["fibers"]) == 64
    assert "🧮" in result.stderr

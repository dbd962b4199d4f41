import json

import pytest
from click.testing import CliRunner

from fafkit import __version__
from fafkit.cli import main


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def _data_lines(text: str) -> list[str]:
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_named_states_prints_csv(runner):
    result = runner.invoke(main, ["named-states", "--theta-grid", "0:pi:3"])
    assert result.exit_code == 0, result.output
    lines = _data_lines(result.stdout)
    assert lines[0] == "experiment,theta,metric,value,uncertainty"
    assert len(lines) == 1 + 9
    assert "-0.0" not in result.stdout


def test_output_file_and_stderr_log(runner, tmp_path):
    out = tmp_path / "pe.csv"
    result = runner.invoke(main, ["pe-check", "--N", "8,10", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert result.stdout == ""
    assert "wrote" in result.stderr and " s" in result.stderr
    assert len(_data_lines(out.read_text())) == 1 + 4


def test_seed_determinism(runner):
    args = ["circuit-faf", "--N", "16", "--depth", "3", "--samples", "8"]
    first = runner.invoke(main, [*args, "--seed", "4"])
    again = runner.invoke(main, [*args, "--seed", "4", "--workers", "2"])
    other = runner.invoke(main, [*args, "--seed", "5"])
    assert first.exit_code == again.exit_code == other.exit_code == 0
    assert first.stdout == again.stdout
    assert _data_lines(first.stdout) != _data_lines(other.stdout)


def test_config_file_with_flag_override(runner, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"experiment": "rmps-faf", "params": {"N": 12, "r": [1, 2], "samples": 4}, "seed": 7}))
    result = runner.invoke(main, ["rmps-faf", "--config", str(config), "--r", "1"])
    assert result.exit_code == 0, result.output
    assert "# seed: 7" in result.stdout
    assert len(_data_lines(result.stdout)) == 1 + 2


def test_config_for_another_experiment_is_a_config_error(runner, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"experiment": "pe-check"}))
    result = runner.invoke(main, ["gs-scan", "--config", str(config)])
    assert result.exit_code == 2


@pytest.mark.parametrize(
    "args",
    [
        ["gs-scan", "--h-z", "0:1"],
        ["circuit-faf", "--samples", "1", "--N", "8", "--depth", "2"],
        ["pe-check", "--seed", "-3"],
        ["pe-check", "--lam", "0.7"],
        ["named-states", "--workers", "0"],
        ["pe-check", "--config", "/nonexistent/run.json"],
    ],
)
def test_config_errors_exit_with_code_2(runner, args):
    result = runner.invoke(main, args)
    assert result.exit_code == 2, result.output


def test_invariant_failure_exits_with_code_1(runner):
    result = runner.invoke(main, ["commutant-check", "--specs", "1-1", "--N", "3", "--trials", "1", "--tol", "-1"])
    assert result.exit_code == 1
    assert "invariant failure" in result.stderr


def test_commutant_check_passes(runner):
    result = runner.invoke(main, ["commutant-check", "--specs", "1-1,2-2", "--N", "3", "--trials", "2"])
    assert result.exit_code == 0, result.output
    assert len(_data_lines(result.stdout)) == 1 + 2


def test_gs_and_spectrum_scans(runner):
    gs = runner.invoke(main, ["gs-scan", "--model", "impurity", "--N", "6", "--h-z", "0.5,1.5", "--k", "1", "--bc", "open"])
    assert gs.exit_code == 0, gs.output
    assert len(_data_lines(gs.stdout)) == 1 + 2
    spec = runner.invoke(main, ["spectrum-scan", "--N", "6", "--k", "1,2"])
    assert spec.exit_code == 0, spec.output
    assert len(_data_lines(spec.stdout)) == 1 + 32 * 2


def test_tfim_correlators(runner):
    result = runner.invoke(main, ["tfim-correlators", "--N", "6"])
    assert result.exit_code == 0, result.output


def test_dynamics(runner):
    result = runner.invoke(main, ["dynamics", "--N", "6", "--t-max", "200"])
    assert result.exit_code == 0, result.output
    assert "faf_1_gamma" in result.stdout


def test_verify_paper_goldens(runner):
    result = runner.invoke(main, ["verify", "--suite", "paper-goldens"])
    assert result.exit_code == 0, result.output
    assert "1/1 passed" in result.stdout
    assert "PASS" in result.stdout

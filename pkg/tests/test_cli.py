from unittest.mock import patch

import pytest
from click.testing import CliRunner

from lamlen import __version__
from lamlen.cli import build_config, main
from lamlen.errors import InvalidConfigError, OutputError


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(autouse=True)
def isolated_config(temp_config):
    with patch("lamlen.cli.config", temp_config):
        yield temp_config


@patch("lamlen.cli.run_experiment")
def test_cli_experiment__passed(mock_run, runner, passing_report, tmp_path):
    mock_run.return_value = passing_report

    result = runner.invoke(main, ["--seed", "7", "--out", str(tmp_path), "experiment", "e1"])

    assert result.exit_code == 0
    cfg = mock_run.call_args[0][0]
    assert cfg.experiment == "E1"
    assert cfg.seed == 7
    assert cfg.output_dir == str(tmp_path)
    assert "✔ E1 passed" in result.output
    assert "ks_P" in result.output


@patch("lamlen.cli.run_experiment")
def test_cli_experiment__failed(mock_run, runner, failing_report, tmp_path):
    mock_run.return_value = failing_report

    result = runner.invoke(main, ["--out", str(tmp_path), "experiment", "E1"])

    assert result.exit_code == 2
    assert "✗ E1 failed (ks_P)" in result.output


@patch("lamlen.cli.run_experiment")
def test_cli_experiment__options_reach_config(mock_run, runner, passing_report, tmp_path):
    mock_run.return_value = passing_report

    result = runner.invoke(
        main,
        ["--out", str(tmp_path), "--range", "0.5", "1.5", "experiment", "E4", "--scheme", "uniform", "--raw"],
    )

    assert result.exit_code == 0
    cfg = mock_run.call_args[0][0]
    assert cfg.window == (0.5, 1.5)
    assert cfg.scheme == "uniform"
    assert cfg.raw is True


@pytest.mark.parametrize("error,code", [(InvalidConfigError("bad window"), 3), (OutputError("read-only"), 4)])
@patch("lamlen.cli.run_experiment")
def test_cli_experiment__errors(mock_run, runner, tmp_path, error, code):
    mock_run.side_effect = error

    result = runner.invoke(main, ["--out", str(tmp_path), "experiment", "E1"])

    assert result.exit_code == code
    assert f"✗ {error}" in result.output


def test_cli_experiment__invalid_samples(runner, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(main, ["--samples", "0", "--out", str(out), "experiment", "E1"])

    assert result.exit_code == 3
    assert "samples must be positive" in result.output
    assert not out.exists()


def test_cli_experiment__unknown_id(runner):
    result = runner.invoke(main, ["experiment", "E9"])
    assert result.exit_code != 0


def test_build_config__precedence(isolated_config):
    isolated_config.config["seed"] = 11

    assert build_config("E1", {}).seed == 11
    assert build_config("E1", {"seed": 3}).seed == 3
    assert build_config("E1", {"preset": "ci"}).samples == 1_000_000
    assert build_config("E1", {"preset": "ci", "samples": 10}).samples == 10
    assert build_config("E2", {}, length_budget=50.0).length_budget == 50.0


def test_build_config__unknown_preset():
    with pytest.raises(InvalidConfigError):
        build_config("E1", {"preset": "no-such-preset"})


def test_cli_density(runner):
    result = runner.invoke(main, ["density", "P", "--at", "1.0", "--at", "2.0"])

    assert result.exit_code == 0
    assert "P: " in result.output
    assert "cdf" in result.output


def test_cli_density__outside_domain(runner):
    result = runner.invoke(main, ["density", "P", "--at=-1"])

    assert result.exit_code == 5
    assert "✗" in result.output


def test_cli_moment(runner):
    result = runner.invoke(main, ["moment", "--n", "1"])

    assert result.exit_code == 0
    assert "1.0961" in result.output
    assert "ln 3" in result.output


def test_cli_moment__bad_order(runner):
    result = runner.invoke(main, ["moment", "--n=-1", "--kind", "M"])
    assert result.exit_code == 5


def test_cli_chord(runner):
    result = runner.invoke(main, ["chord", "--u=-0.5", "--v", "1.5"])

    assert result.exit_code == 0
    assert "1.0986" in result.output


def test_cli_chord__cusp(runner):
    result = runner.invoke(main, ["chord", "--u", "0.5", "--v", "inf"])

    assert result.exit_code == 0
    assert "inf" in result.output


def test_cli_trace(runner):
    result = runner.invoke(main, ["trace", "--u=-0.3", "--v", "2.718281828", "--budget", "20", "--triangles"])

    assert result.exit_code == 0
    assert "Segments:" in result.output
    assert "Stopped by:" in result.output


def test_cli_trace__decimal_endpoint(runner):
    result = runner.invoke(main, ["trace", "--u=-0.5", "--v", "1.3", "--budget", "100"])

    assert result.exit_code == 0
    assert "cusp_exit" in result.output
    assert "Step budget" not in result.output


def test_cli_trace__step_budget(runner, isolated_config):
    isolated_config.config["step_budget"] = 3

    result = runner.invoke(main, ["trace", "--u=-0.3", "--v", "2.718281828", "--budget", "100"])

    assert result.exit_code == 0
    assert "step_budget" in result.output
    assert "Step budget of 3 triangles reached" in result.output


def test_cli_trace__farey_edge(runner):
    result = runner.invoke(main, ["trace", "--u", "0", "--v", "inf"])

    assert result.exit_code == 8
    assert "edge of the Farey tessellation" in result.output


def test_cli_closed_geodesic(runner):
    result = runner.invoke(main, ["closed-geodesic", "--word", "LR"])

    assert result.exit_code == 0
    assert "trace 3" in result.output
    assert "Segments per period: 2" in result.output


@pytest.mark.parametrize("word,code", [("L", 7), ("LX", 6)])
def test_cli_closed_geodesic__bad_word(runner, word, code):
    result = runner.invoke(main, ["closed-geodesic", "--word", word])
    assert result.exit_code == code


def test_cli_presets(runner):
    result = runner.invoke(main, ["presets"])

    assert result.exit_code == 0
    assert "ci" in result.output
    assert "quick" in result.output


def test_cli_config_show(runner):
    result = runner.invoke(main, ["config", "show"])

    assert result.exit_code == 0
    assert "seed" in result.output


def test_cli_config_set(runner, isolated_config):
    result = runner.invoke(main, ["config", "set", "seed", "9"])

    assert result.exit_code == 0
    assert "✔ seed = 9" in result.output
    assert isolated_config.get("seed") == 9
    assert isolated_config.config_path.exists()


def test_cli_config_set__unknown_key(runner):
    result = runner.invoke(main, ["config", "set", "colour", "blue"])

    assert result.exit_code == 3
    assert "Unknown configuration key" in result.output


def test_cli_version(runner):
    result = runner.invoke(main, ["--version"])

    assert result.exit_code == 0
    assert __version__ in result.output

"""Tests for the forge command."""

import json

import pytest

from nmlab.core import constants as K
from nmlab.core.datasets import load_json
from nmlab.core.exceptions import InvalidInputError
from nmlab.core.exit_codes import ExitCode
from nmlab.core.tinynet import Sigmoid221Params


@pytest.fixture
def w_zero_file(write_weights):
    return write_weights(K.W_ZERO, "w_zero.json")


@pytest.mark.unit
class TestForgeCommand:
    def test_budget_exhausted(self, cli_runner, w_zero_file):
        result = cli_runner("forge", "-w", str(w_zero_file), "-d", "sigmoid10", "--max-iters", "1")
        assert result.exit_code == ExitCode.GENERAL_ERROR
        data = json.loads(result.stdout)
        assert data["converged"] is False
        assert data["iterations"] <= 1
        assert len(data["dataset"]["points"]) == 10

    def test_converged_saddle_exits_two(self, cli_runner, write_weights):
        path = write_weights(Sigmoid221Params.zeros())
        result = cli_runner("forge", "-w", str(path), "-d", "fxor", "--target-gradnorm", "1000")
        assert result.exit_code == ExitCode.SADDLE
        data = json.loads(result.stdout)
        assert data["converged"] is True
        assert data["certificate"]["classification"] == "saddle"

    def test_converged_non_critical_exits_one(self, cli_runner, w_zero_file):
        result = cli_runner(
            "forge", "-w", str(w_zero_file), "-d", "sigmoid10", "--target-gradnorm", "1000"
        )
        assert result.exit_code == ExitCode.GENERAL_ERROR

    def test_random_start_and_output_file(self, cli_runner, w_zero_file, temp_dir):
        out = temp_dir / "forged.json"
        result = cli_runner(
            "forge", "-w", str(w_zero_file), "--random-points", "6", "--seed", "1",
            "--max-iters", "2", "--out", str(out),
        )
        assert result.exit_code == ExitCode.GENERAL_ERROR
        forged = load_json(out)
        assert forged.n == 6
        assert forged.y.tolist() == [1.0, 1.0, 1.0, 0.0, 0.0, 0.0]

    def test_perturbed_start(self, cli_runner, w_zero_file):
        result = cli_runner(
            "forge", "-w", str(w_zero_file), "-d", "sigmoid10", "--perturb", "0.05", "--max-iters", "0"
        )
        data = json.loads(result.stdout)
        xs = [p["x"] for p in data["dataset"]["points"]]
        assert xs[0] != [2.8, 0.4]
        assert abs(xs[0][0] - 2.8) <= 0.05

    def test_needs_exactly_one_start(self, cli_runner, w_zero_file):
        neither = cli_runner("forge", "-w", str(w_zero_file))
        both = cli_runner("forge", "-w", str(w_zero_file), "-d", "sigmoid10", "--random-points", "4")
        assert isinstance(neither.exception, InvalidInputError)
        assert isinstance(both.exception, InvalidInputError)

    def test_invalid_settings(self, cli_runner, w_zero_file):
        result = cli_runner("forge", "-w", str(w_zero_file), "-d", "sigmoid10", "--step-size", "-1")
        assert isinstance(result.exception, InvalidInputError)
        assert "Invalid forge settings" in result.exception.message

    def test_config_section(self, cli_runner, w_zero_file, temp_dir):
        config_file = temp_dir / "config.toml"
        config_file.write_text("[forge]\nmax_iters = 0\n", encoding="utf-8")
        result = cli_runner("--config", str(config_file), "forge", "-w", str(w_zero_file), "-d", "sigmoid10")
        assert json.loads(result.stdout)["iterations"] == 0


@pytest.mark.slow
def test_forge_w_hat_from_perturbed_sigmoid10(cli_runner, w_hat_file):
    result = cli_runner("forge", "-w", str(w_hat_file), "-d", "sigmoid10", "--perturb", "0.05")
    assert result.exit_code == ExitCode.SUCCESS

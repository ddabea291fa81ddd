"""Tests for the config commands."""

import pytest

CONFIG = """\
threads = 2

[table1]
trials = 40

[profiles.quick]
trials = 3
max_steps = 100

[profiles.sgd]
stochastic = true
"""


@pytest.fixture
def config_file(temp_dir):
    path = temp_dir / "config.toml"
    path.write_text(CONFIG, encoding="utf-8")
    return path


@pytest.mark.unit
class TestConfigShow:
    def test_defaults(self, cli_runner):
        result = cli_runner("config", "show")
        assert result.exit_code == 0
        assert "threads: 1 (default)" in result.stdout
        assert "Active Profile: none" in result.stdout
        assert "tol_grad: 1e-05 (default)" in result.stdout

    def test_sources(self, cli_runner, config_file):
        result = cli_runner("--config", str(config_file), "-j", "4", "-P", "quick", "config", "show")
        assert result.exit_code == 0
        assert "threads: 4 (cli: --threads)" in result.stdout
        assert "trials: 3 (profile: quick)" in result.stdout
        assert "Active Profile: quick" in result.stdout
        assert f"Config File: {config_file}" in result.stdout

    def test_env_threads(self, cli_runner, monkeypatch):
        monkeypatch.setenv("NMLAB_THREADS", "5")
        result = cli_runner("config", "show")
        assert "threads: 5 (env: NMLAB_THREADS)" in result.stdout


@pytest.mark.unit
class TestConfigProfiles:
    def test_none_configured(self, cli_runner):
        result = cli_runner("config", "profiles")
        assert result.exit_code == 0
        assert "No profiles configured." in result.stdout

    def test_lists_profiles(self, cli_runner, config_file):
        result = cli_runner("--config", str(config_file), "-P", "sgd", "config", "profiles")
        assert result.exit_code == 0
        assert "  quick" in result.stdout
        assert "* sgd (active)" in result.stdout
        assert "max_steps: 100" in result.stdout

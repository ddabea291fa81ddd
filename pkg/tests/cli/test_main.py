"""Tests for the CLI entry point and global options."""

import pytest

from nmlab import __version__
from nmlab.cli.main import app


@pytest.mark.unit
class TestCliHelp:
    def test_help_flag(self, runner):
        result = runner.invoke(app, ["--help"])
        assert result.exit_code == 0
        assert "tiny neural networks" in result.stdout

    def test_no_args_shows_help(self, runner):
        result = runner.invoke(app, [])
        assert result.exit_code == 0
        assert "Usage" in result.stdout

    @pytest.mark.parametrize(
        "command",
        ["verify", "certify", "table1", "forge", "sample-grid", "dataset", "blindspot", "schema", "config"],
    )
    def test_commands_registered(self, runner, command):
        result = runner.invoke(app, [command, "--help"])
        assert result.exit_code == 0


@pytest.mark.unit
class TestCliVersion:
    def test_version_flag(self, runner):
        result = runner.invoke(app, ["--version"])
        assert result.exit_code == 0
        assert f"nmlab {__version__}" in result.stdout

    def test_version_short_flag(self, runner):
        result = runner.invoke(app, ["-V"])
        assert result.exit_code == 0
        assert f"nmlab {__version__}" in result.stdout


@pytest.mark.unit
class TestGlobalOptions:
    def test_verbose_flag_accepted(self, runner):
        result = runner.invoke(app, ["--verbose", "dataset", "list"])
        assert result.exit_code == 0

    def test_json_logs_accepted(self, runner):
        result = runner.invoke(app, ["--log-format", "json", "dataset", "list"])
        assert result.exit_code == 0

    def test_invalid_format_rejected(self, runner):
        result = runner.invoke(app, ["--format", "xml", "dataset", "list"])
        assert result.exit_code == 2

    def test_unknown_command_fails(self, runner):
        result = runner.invoke(app, ["nonexistent-command"])
        assert result.exit_code != 0

    def test_malformed_config_file(self, runner, temp_dir):
        config_file = temp_dir / "config.toml"
        config_file.write_text("threads = [", encoding="utf-8")
        result = runner.invoke(app, ["--config", str(config_file), "dataset", "list"])
        assert result.exit_code != 0
        assert result.exception.exit_code == 78

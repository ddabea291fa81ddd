"""Tests for the table1 command."""

import json

import pytest

from nmlab.core.exceptions import ConfigError, OutputError

SMALL = ("--trials", "2", "--h-min", "2", "--h-max", "2", "--max-steps", "5")


@pytest.mark.unit
class TestTable1Command:
    def test_writes_outputs(self, cli_runner, temp_dir):
        out = temp_dir / "run"
        result = cli_runner("-f", "json", "table1", "--out", str(out), *SMALL)
        assert result.exit_code == 0
        rows = json.loads(result.stdout)
        assert len(rows) == 8
        assert set(rows[0]) == {
            "h",
            "dataset",
            "activation",
            "optimizer",
            "trials",
            "successes",
            "fraction",
        }
        assert (out / "table1.csv").read_text(encoding="utf-8").startswith("h,dataset,activation")
        table = json.loads((out / "table1.json").read_text(encoding="utf-8"))
        assert table["config"]["trials"] == 2
        assert len(table["cells"]) == 8

    def test_provenance(self, cli_runner, temp_dir):
        out = temp_dir / "run"
        cli_runner("table1", "--out", str(out), *SMALL)
        provenance = json.loads((out / "table1.provenance.json").read_text(encoding="utf-8"))
        assert provenance["tool"].startswith("nmlab ")
        assert provenance["profile"] is None
        assert provenance["config"]["max_steps"] == 5
        assert provenance["sources"]["table1.trials"] == "cli: --trials"
        assert provenance["sources"]["table1.adam_lr"] == "default"
        assert "splitmix64" in provenance["init_scheme"]

    def test_reproducible(self, cli_runner, temp_dir):
        for name in ("a", "b"):
            result = cli_runner("table1", "--out", str(temp_dir / name), "--seed", "3", *SMALL)
            assert result.exit_code == 0
        first = (temp_dir / "a" / "table1.csv").read_text(encoding="utf-8")
        second = (temp_dir / "b" / "table1.csv").read_text(encoding="utf-8")
        assert first == second

    def test_profile(self, cli_runner, temp_dir):
        config_file = temp_dir / "config.toml"
        config_file.write_text("[profiles.quick]\ntrials = 1\nmax_steps = 3\n", encoding="utf-8")
        out = temp_dir / "run"
        result = cli_runner(
            "--config", str(config_file), "-P", "quick",
            "table1", "--out", str(out), "--h-min", "2", "--h-max", "2",
        )
        assert result.exit_code == 0
        provenance = json.loads((out / "table1.provenance.json").read_text(encoding="utf-8"))
        assert provenance["profile"] == "quick"
        assert provenance["config"]["trials"] == 1
        assert provenance["sources"]["table1.max_steps"] == "profile: quick"

    def test_unknown_profile(self, cli_runner, temp_dir):
        result = cli_runner("-P", "missing", "table1", "--out", str(temp_dir / "run"), *SMALL)
        assert isinstance(result.exception, ConfigError)

    def test_inverted_h_range(self, cli_runner, temp_dir):
        result = cli_runner(
            "table1", "--out", str(temp_dir / "run"), "--h-min", "4", "--h-max", "2"
        )
        assert isinstance(result.exception, ConfigError)

    def test_out_is_a_file(self, cli_runner, temp_dir):
        blocker = temp_dir / "file"
        blocker.write_text("", encoding="utf-8")
        result = cli_runner("table1", "--out", str(blocker), *SMALL)
        assert isinstance(result.exception, OutputError)
        assert result.exception.exit_code == 73

    def test_out_required(self, cli_runner):
        result = cli_runner("table1", *SMALL)
        assert result.exit_code == 2

"""Tests for the dataset commands."""

import pytest

from nmlab.core.datasets import builtin, parse_json
from nmlab.core.exceptions import DatasetParseError


@pytest.mark.unit
class TestDatasetList:
    def test_csv(self, cli_runner):
        result = cli_runner("-f", "csv", "dataset", "list")
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0] == "name,task,points,dim"
        assert "d1,regression,5,1" in lines
        assert "sigmoid10,classification,10,2" in lines

    def test_group_help(self, cli_runner):
        result = cli_runner("dataset")
        assert result.exit_code == 0
        assert "export" in result.stdout


@pytest.mark.unit
class TestDatasetExport:
    def test_stdout(self, cli_runner):
        result = cli_runner("dataset", "export", "d2")
        assert result.exit_code == 0
        assert parse_json(result.stdout) == builtin("d2")

    def test_file(self, cli_runner, temp_dir):
        out = temp_dir / "xor.json"
        result = cli_runner("dataset", "export", "xor", "--out", str(out))
        assert result.exit_code == 0
        assert parse_json(out.read_text(encoding="utf-8")) == builtin("xor")

    def test_unknown_name(self, cli_runner):
        result = cli_runner("dataset", "export", "mnist")
        assert result.exit_code == 2


@pytest.mark.unit
class TestDatasetValidate:
    def test_valid_file(self, cli_runner, temp_dir):
        out = temp_dir / "d3.json"
        cli_runner("dataset", "export", "d3", "--out", str(out))
        result = cli_runner("dataset", "validate", str(out))
        assert result.exit_code == 0
        assert "OK: 6 regression points in 1 dimension(s)" in result.stdout

    def test_invalid_label_names_line(self, cli_runner, temp_dir):
        path = temp_dir / "bad.json"
        path.write_text(
            '{\n  "task": "classification",\n  "d": 1,\n  "points": [\n'
            '    {"x": [0.0], "y": 1.0},\n    {"x": [1.0], "y": 0.5}\n  ]\n}\n',
            encoding="utf-8",
        )
        result = cli_runner("dataset", "validate", str(path))
        assert isinstance(result.exception, DatasetParseError)
        assert result.exception.line == 6
        assert result.exception.exit_code == 64

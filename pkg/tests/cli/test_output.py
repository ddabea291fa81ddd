"""Tests for output format selection, TTY detection and JSON emission."""

import json

import pytest

from nmlab.cli.output import OutputFormat, get_formatter, resolve_format, write_model
from nmlab.core.exit_codes import ExitCode
from nmlab.core.verify import ClaimId, ClaimStatus, VerificationReport
from nmlab.formatters.csv import CSVFormatter
from nmlab.formatters.json import JSONFormatter
from nmlab.formatters.table import TableFormatter


@pytest.mark.unit
def test_output_format_enum_values():
    assert [f.value for f in OutputFormat] == ["table", "json", "csv"]


@pytest.mark.unit
def test_resolve_format_explicit():
    assert resolve_format("json") == "json"
    assert resolve_format("csv", default="table") == "csv"


@pytest.mark.unit
def test_resolve_format_config_default(monkeypatch):
    monkeypatch.setattr("nmlab.cli.output.detect_tty", lambda: False)
    assert resolve_format(None, default="json") == "json"


@pytest.mark.unit
def test_resolve_format_tty_defaults_to_table(monkeypatch):
    monkeypatch.setattr("nmlab.cli.output.detect_tty", lambda: True)
    assert resolve_format(None) == "table"


@pytest.mark.unit
def test_resolve_format_non_tty_defaults_to_csv(monkeypatch):
    monkeypatch.setattr("nmlab.cli.output.detect_tty", lambda: False)
    assert resolve_format(None) == "csv"


@pytest.mark.unit
def test_get_formatter_types():
    assert isinstance(get_formatter("table"), TableFormatter)
    assert isinstance(get_formatter("json"), JSONFormatter)
    assert isinstance(get_formatter("csv"), CSVFormatter)


@pytest.mark.unit
def test_get_formatter_passes_options():
    assert get_formatter("json", compact=True).compact is True
    assert get_formatter("csv", no_header=True).no_header is True


@pytest.mark.unit
def test_write_model(capsys):
    report = VerificationReport(claim=ClaimId.PROP1, status=ClaimStatus.CONFIRMED, summary="ok")
    write_model(report)
    data = json.loads(capsys.readouterr().out)
    assert data["claim"] == "prop1"
    assert data["status"] == "confirmed"
    assert report.exit_code == ExitCode.SUCCESS

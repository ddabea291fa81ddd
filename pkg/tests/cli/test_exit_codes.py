"""Tests for exit code mapping through run()."""

from unittest.mock import patch

import pytest

from nmlab.cli.main import run
from nmlab.core.exceptions import (
    ConfigError,
    NmlabError,
    NonSmoothPointError,
    OutputError,
    SchemaError,
)
from nmlab.core.exit_codes import ExitCode


def _run_with(side_effect):
    with patch("nmlab.cli.main.app", side_effect=side_effect):
        with pytest.raises(SystemExit) as exc_info:
            run()
    return exc_info.value.code


@pytest.mark.unit
@pytest.mark.parametrize(
    ("error", "code"),
    [
        (NmlabError("failed"), ExitCode.GENERAL_ERROR),
        (SchemaError("bad weights"), ExitCode.INPUT_ERROR),
        (NonSmoothPointError(2, 0), ExitCode.INPUT_ERROR),
        (OutputError("read-only"), ExitCode.CANT_CREATE),
        (ConfigError("bad config"), ExitCode.CONFIG_ERROR),
    ],
)
def test_run_maps_nmlab_errors(error, code):
    assert _run_with(error) == code


@pytest.mark.unit
def test_run_error_message_on_stderr(capsys):
    _run_with(SchemaError("Weight file not found: w.json"))
    assert "Error: Weight file not found: w.json" in capsys.readouterr().err


@pytest.mark.unit
def test_run_keyboard_interrupt():
    assert _run_with(KeyboardInterrupt()) == ExitCode.INTERRUPTED


@pytest.mark.unit
def test_run_unexpected_error_is_reported():
    with patch("nmlab.cli.main.sentry_sdk.capture_exception") as capture:
        assert _run_with(RuntimeError("boom")) == ExitCode.GENERAL_ERROR
    capture.assert_called_once()


@pytest.mark.unit
def test_run_passes_system_exit_through():
    assert _run_with(SystemExit(3)) == 3

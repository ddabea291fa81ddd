"""Tests for the exception hierarchy and exit codes."""

import pytest

from nmlab.core.exceptions import (
    ArchitectureError,
    ConfigError,
    DatasetParseError,
    InvalidInputError,
    NmlabError,
    NonSmoothPointError,
    NotDecentError,
    OutputError,
    SchemaError,
    UnsupportedConfigurationError,
)
from nmlab.core.exit_codes import ExitCode


@pytest.mark.unit
class TestExitCodes:
    def test_exit_code_values(self):
        assert ExitCode.SUCCESS == 0
        assert ExitCode.GENERAL_ERROR == 1
        assert ExitCode.SADDLE == 2
        assert ExitCode.NOT_CRITICAL == 3
        assert ExitCode.DEGENERATE == 4
        assert ExitCode.INPUT_ERROR == 64
        assert ExitCode.CANT_CREATE == 73
        assert ExitCode.CONFIG_ERROR == 78
        assert ExitCode.INTERRUPTED == 130

    def test_exit_code_is_int(self):
        for code in ExitCode:
            assert isinstance(code, int)


@pytest.mark.unit
class TestNmlabError:
    def test_base_exception(self):
        err = NmlabError("test error")
        assert str(err) == "test error"
        assert err.message == "test error"
        assert err.exit_code == ExitCode.GENERAL_ERROR

    def test_is_exception(self):
        assert issubclass(NmlabError, Exception)


@pytest.mark.unit
class TestInputErrors:
    @pytest.mark.parametrize(
        "cls",
        [SchemaError, NotDecentError, ArchitectureError, UnsupportedConfigurationError],
    )
    def test_input_family(self, cls):
        err = cls("bad input")
        assert isinstance(err, InvalidInputError)
        assert err.exit_code == ExitCode.INPUT_ERROR

    def test_dataset_parse_error_line(self):
        err = DatasetParseError("expected a number", line=7)
        assert err.line == 7
        assert err.message == "line 7: expected a number"
        assert err.exit_code == ExitCode.INPUT_ERROR

    def test_dataset_parse_error_without_line(self):
        err = DatasetParseError("empty file")
        assert err.line is None
        assert err.message == "empty file"

    def test_non_smooth_point(self):
        err = NonSmoothPointError(2, unit=0)
        assert err.point_index == 2
        assert err.unit == 0
        assert "datapoint 2 (unit 0)" in err.message

    def test_non_smooth_point_without_unit(self):
        assert "(unit" not in NonSmoothPointError(4).message


@pytest.mark.unit
class TestOtherErrors:
    def test_output_error(self):
        err = OutputError("cannot write")
        assert err.exit_code == ExitCode.CANT_CREATE
        assert isinstance(err, NmlabError)

    def test_config_error(self):
        err = ConfigError("bad profile")
        assert err.exit_code == ExitCode.CONFIG_ERROR
        assert not isinstance(err, InvalidInputError)

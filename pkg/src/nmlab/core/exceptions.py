"""Exception hierarchy for nmlab.

All exceptions carry an exit_code for CLI return value mapping.
"""

from nmlab.core.exit_codes import ExitCode


class NmlabError(Exception):
    """Base exception for all nmlab errors."""

    exit_code: int = ExitCode.GENERAL_ERROR

    def __init__(self, message: str) -> None:
        self.message = message
        super().__init__(message)


class InvalidInputError(NmlabError):
    """Non-finite values, shape mismatches, empty datasets, bad arguments."""

    exit_code: int = ExitCode.INPUT_ERROR


class DatasetParseError(InvalidInputError):
    """Malformed dataset file."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(InvalidInputError):
    """Weight file does not match any known architecture schema."""


class NonSmoothPointError(InvalidInputError):
    """A datapoint sits on a ReLU kink where the loss is not differentiable."""

    def __init__(self, point_index: int, unit: int | None = None) -> None:
        self.point_index = point_index
        self.unit = unit
        where = f"datapoint {point_index}"
        if unit is not None:
            where += f" (unit {unit})"
        super().__init__(f"Loss is not smooth here: {where} lies on an activation boundary")


class NotDecentError(InvalidInputError):
    """Every input group has the global label mean; no better model exists."""


class ArchitectureError(InvalidInputError):
    """Parameters do not have the shape an operation requires."""


class UnsupportedConfigurationError(InvalidInputError):
    """Too many boundary datapoints for exact case enumeration."""


class OutputError(NmlabError):
    """Output directory or file cannot be written."""

    exit_code: int = ExitCode.CANT_CREATE


class ConfigError(NmlabError):
    """Malformed config, unknown profile, invalid values."""

    exit_code: int = ExitCode.CONFIG_ERROR

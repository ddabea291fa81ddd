"""Output format selection, TTY auto-detection and JSON emission."""

from __future__ import annotations

import sys
from enum import StrEnum
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from pydantic import BaseModel

    from nmlab.core.models import ResultTable
    from nmlab.formatters.base import Formatter


class OutputFormat(StrEnum):
    TABLE = "table"
    JSON = "json"
    CSV = "csv"


def detect_tty() -> bool:
    return sys.stdout.isatty()


def resolve_format(format_flag: str | None, default: str | None = None) -> str:
    """Determine the output format.

    Explicit --format wins, then the config file's default_format.
    Otherwise table for a TTY and csv for pipes.
    """
    if format_flag is not None:
        return format_flag
    if default is not None:
        return default
    return "table" if detect_tty() else "csv"


def get_formatter(
    format_flag: str | None = None,
    *,
    default: str | None = None,
    compact: bool = False,
    no_header: bool = False,
) -> Formatter:
    # Import here to trigger registry population from formatter modules.
    import nmlab.formatters.csv  # noqa: F401
    import nmlab.formatters.json  # noqa: F401
    import nmlab.formatters.table  # noqa: F401
    from nmlab.formatters.base import registry

    fmt_name = resolve_format(format_flag, default)
    kwargs: dict[str, object] = {}
    if fmt_name == "json":
        kwargs["compact"] = compact
    elif fmt_name == "csv":
        kwargs["no_header"] = no_header
    return registry.get(fmt_name, **kwargs)


def write_output(formatter: Formatter, result: ResultTable) -> None:
    for line in formatter.format(result):
        sys.stdout.write(line + "\n")


def write_model(model: BaseModel) -> None:
    """Dump a report model as indented JSON on stdout."""
    sys.stdout.write(model.model_dump_json(indent=2) + "\n")

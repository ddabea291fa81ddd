"""Rich table formatter for terminals."""

from __future__ import annotations

import shutil
from io import StringIO
from typing import TYPE_CHECKING, Any

from rich.console import Console
from rich.table import Table

from nmlab.formatters.base import plain_value, registry

if TYPE_CHECKING:
    from collections.abc import Iterator

    from nmlab.core.models import ResultTable

_NO_RESULTS = "No results"


def _display(value: Any, precision: int) -> str:
    value = plain_value(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.{precision}g}"
    return str(value)


class TableFormatter:
    def __init__(self, precision: int = 6) -> None:
        self.precision = precision

    def format(self, result: ResultTable) -> Iterator[str]:
        if not result.rows:
            yield _NO_RESULTS
            return

        table = Table(title=result.title, show_edge=True, pad_edge=True)
        for col in result.columns:
            justify = "right" if col.kind == "number" else "left"
            table.add_column(col.name, justify=justify, no_wrap=True)
        for row in result.rows:
            table.add_row(*(_display(v, self.precision) for v in row))

        buf = StringIO()
        term_width = shutil.get_terminal_size((120, 24)).columns
        Console(file=buf, force_terminal=True, width=term_width).print(table)
        yield buf.getvalue().rstrip("\n")


registry.register("table", TableFormatter)

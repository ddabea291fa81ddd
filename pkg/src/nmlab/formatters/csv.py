"""CSV formatter (RFC 4180) for result tables."""

from __future__ import annotations

import csv
from io import StringIO
from typing import TYPE_CHECKING

from nmlab.formatters.base import cell_text, registry

if TYPE_CHECKING:
    from collections.abc import Iterator

    from nmlab.core.models import ResultTable


def _write_row(values: list[str]) -> str:
    buf = StringIO()
    csv.writer(buf).writerow(values)
    return buf.getvalue().rstrip("\r\n")


class CSVFormatter:
    def __init__(self, no_header: bool = False) -> None:
        self.no_header = no_header

    def format(self, result: ResultTable) -> Iterator[str]:
        if not self.no_header:
            yield _write_row([col.name for col in result.columns])
        for row in result.rows:
            yield _write_row([cell_text(v) for v in row])


registry.register("csv", CSVFormatter)

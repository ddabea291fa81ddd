"""JSON formatter: one object per row, keyed by column name."""

from __future__ import annotations

import json
from typing import TYPE_CHECKING

from nmlab.formatters.base import plain_value, registry

if TYPE_CHECKING:
    from collections.abc import Iterator

    from nmlab.core.models import ResultTable


class JSONFormatter:
    def __init__(self, compact: bool = False) -> None:
        self.compact = compact

    def format(self, result: ResultTable) -> Iterator[str]:
        rows = [
            {col.name: plain_value(val) for col, val in zip(result.columns, row, strict=True)}
            for row in result.rows
        ]
        if self.compact:
            yield json.dumps(rows, default=str)
        else:
            yield json.dumps(rows, indent=2, default=str)


registry.register("json", JSONFormatter)

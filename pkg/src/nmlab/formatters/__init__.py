"""Output formatters for nmlab result tables."""

from nmlab.formatters.base import Formatter, FormatterRegistry, registry
from nmlab.formatters.csv import CSVFormatter
from nmlab.formatters.json import JSONFormatter
from nmlab.formatters.table import TableFormatter

__all__ = [
    "CSVFormatter",
    "Formatter",
    "FormatterRegistry",
    "JSONFormatter",
    "TableFormatter",
    "registry",
]

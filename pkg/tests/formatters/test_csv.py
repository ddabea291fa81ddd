"""Tests for CSVFormatter."""

import numpy as np
import pytest

from nmlab.core.models import ColumnMeta, ResultTable
from nmlab.formatters.csv import CSVFormatter


def _make_result(rows=None):
    if rows is None:
        rows = [(2, "xor", 0.25), (3, "fxor", 1.0)]
    return ResultTable(
        columns=[
            ColumnMeta(name="h", kind="number"),
            ColumnMeta(name="dataset"),
            ColumnMeta(name="fraction", kind="number"),
        ],
        rows=rows,
    )


@pytest.mark.unit
def test_csv_header_and_rows():
    lines = list(CSVFormatter().format(_make_result()))
    assert lines == ["h,dataset,fraction", "2,xor,0.25", "3,fxor,1.0"]


@pytest.mark.unit
def test_csv_no_header():
    lines = list(CSVFormatter(no_header=True).format(_make_result()))
    assert lines[0] == "2,xor,0.25"


@pytest.mark.unit
def test_csv_quotes_commas():
    lines = list(CSVFormatter().format(_make_result(rows=[(1, "a,b", 0.0)])))
    assert lines[1] == '1,"a,b",0.0'


@pytest.mark.unit
def test_csv_numpy_values_and_none():
    lines = list(CSVFormatter(no_header=True).format(_make_result(rows=[(np.int64(4), None, np.float64(0.1))])))
    assert lines == ["4,,0.1"]


@pytest.mark.unit
def test_csv_empty_result_has_header_only():
    assert list(CSVFormatter().format(_make_result(rows=[]))) == ["h,dataset,fraction"]

"""Tests for JSONFormatter."""

import json

import numpy as np
import pytest

from nmlab.core.models import ColumnMeta, ResultTable
from nmlab.formatters.json import JSONFormatter


def _make_result(rows=None):
    if rows is None:
        rows = [(0.0, 1.0, 0.5)]
    return ResultTable(
        columns=[ColumnMeta(name=n, kind="number") for n in ("x", "y", "output")],
        rows=rows,
    )


@pytest.mark.unit
def test_json_rows_keyed_by_column():
    data = json.loads("".join(JSONFormatter().format(_make_result())))
    assert data == [{"x": 0.0, "y": 1.0, "output": 0.5}]


@pytest.mark.unit
def test_json_compact_is_one_line():
    lines = list(JSONFormatter(compact=True).format(_make_result()))
    assert len(lines) == 1
    assert "\n" not in lines[0]


@pytest.mark.unit
def test_json_pretty_is_indented():
    output = "".join(JSONFormatter().format(_make_result()))
    assert '\n  {' in output


@pytest.mark.unit
def test_json_numpy_values():
    data = json.loads("".join(JSONFormatter().format(_make_result(rows=[(np.float64(1.5), np.int64(2), 0.0)]))))
    assert data == [{"x": 1.5, "y": 2, "output": 0.0}]


@pytest.mark.unit
def test_json_empty_result():
    assert json.loads("".join(JSONFormatter().format(_make_result(rows=[])))) == []

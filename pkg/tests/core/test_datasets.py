"""Tests for builtin datasets, dataset JSON and label statistics."""

import numpy as np
import pytest

from nmlab.core.datasets import (
    BuiltinName,
    Dataset,
    Task,
    builtin,
    dumps,
    input_groups,
    is_decent,
    load_json,
    mean_label,
    parse_json,
    resolve_dataset,
    save_json,
)
from nmlab.core.exceptions import DatasetParseError, InvalidInputError, OutputError

_RAGGED = (
    "{\n"
    '  "task": "regression",\n'
    '  "d": 1,\n'
    '  "points": [\n'
    '    {"x": [1.0], "y": 2.0},\n'
    '    {"x": [1.0, 2.0], "y": 1.0}\n'
    "  ]\n"
    "}\n"
)


@pytest.mark.unit
class TestBuiltins:
    @pytest.mark.parametrize(
        ("name", "n", "d", "task"),
        [
            (BuiltinName.SIGMOID10, 10, 2, Task.CLASSIFICATION),
            (BuiltinName.D1, 5, 1, Task.REGRESSION),
            (BuiltinName.D2, 6, 1, Task.REGRESSION),
            (BuiltinName.D3, 6, 1, Task.REGRESSION),
            (BuiltinName.XOR, 4, 2, Task.CLASSIFICATION),
            (BuiltinName.FXOR, 4, 2, Task.CLASSIFICATION),
        ],
    )
    def test_shapes(self, name, n, d, task):
        data = builtin(name)
        assert (data.n, data.d, data.task) == (n, d, task)

    def test_name_is_case_insensitive(self):
        assert builtin("XOR") == builtin(BuiltinName.XOR)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            builtin("nope")

    def test_sigmoid10_is_balanced(self, sigmoid10):
        assert sigmoid10.y.sum() == 5

    def test_arrays_are_read_only(self, d1):
        with pytest.raises(ValueError):
            d1.x[0, 0] = 1.0

    def test_resolve_builtin(self):
        assert resolve_dataset("d2") == builtin(BuiltinName.D2)


@pytest.mark.unit
class TestDatasetValidation:
    def test_empty(self):
        with pytest.raises(InvalidInputError, match="at least one point"):
            Dataset(x=np.empty((0, 1)), y=np.empty(0), task=Task.REGRESSION)

    def test_label_count_mismatch(self):
        with pytest.raises(InvalidInputError):
            Dataset(x=np.zeros((3, 1)), y=np.zeros(2), task=Task.REGRESSION)

    def test_non_finite(self):
        with pytest.raises(InvalidInputError, match="finite"):
            Dataset(x=np.array([[np.inf]]), y=np.zeros(1), task=Task.REGRESSION)

    def test_classification_labels(self):
        with pytest.raises(InvalidInputError, match="expected 0 or 1"):
            Dataset(x=np.zeros((1, 2)), y=np.array([0.5]), task=Task.CLASSIFICATION)

    def test_with_inputs_keeps_labels(self, sigmoid10):
        moved = sigmoid10.with_inputs(sigmoid10.x + 1.0)
        np.testing.assert_array_equal(moved.y, sigmoid10.y)
        assert moved.task == sigmoid10.task


@pytest.mark.unit
class TestDatasetJson:
    def test_dump_and_parse(self, sigmoid10):
        assert parse_json(dumps(sigmoid10)) == sigmoid10

    def test_one_point_per_line(self, d1):
        lines = dumps(d1).splitlines()
        assert lines[4] == '    {"x": [5.0], "y": 2.0},'

    def test_malformed_json_reports_line(self):
        with pytest.raises(DatasetParseError) as exc_info:
            parse_json('{\n  "task": "regression",\n  "d": 1,\n  oops\n}')
        assert exc_info.value.line == 4

    def test_ragged_point_reports_line(self):
        with pytest.raises(DatasetParseError, match="expected d=1") as exc_info:
            parse_json(_RAGGED)
        assert exc_info.value.line == 6
        assert exc_info.value.message.startswith("line 6:")

    def test_non_finite_value(self):
        text = '{"task": "regression", "d": 1, "points": [{"x": [NaN], "y": 0.0}]}'
        with pytest.raises(DatasetParseError):
            parse_json(text)

    def test_bad_classification_label(self):
        text = '{"task": "classification", "d": 1, "points": [{"x": [0.0], "y": 2.0}]}'
        with pytest.raises(DatasetParseError, match="0 or 1"):
            parse_json(text)

    def test_no_points(self):
        with pytest.raises(DatasetParseError, match="at least one point"):
            parse_json('{"task": "regression", "d": 1, "points": []}')

    def test_byte_order_mark_accepted(self, temp_dir, d2):
        path = temp_dir / "d2.json"
        path.write_text("\ufeff" + dumps(d2), encoding="utf-8")
        assert load_json(path) == d2

    def test_save_and_load(self, temp_dir, d3):
        path = temp_dir / "d3.json"
        save_json(d3, path)
        assert load_json(path) == d3

    def test_missing_file(self, temp_dir):
        with pytest.raises(InvalidInputError, match="not found"):
            load_json(temp_dir / "missing.json")

    def test_unwritable_destination(self, temp_dir, d1):
        with pytest.raises(OutputError):
            save_json(d1, temp_dir)


@pytest.mark.unit
class TestLabelStatistics:
    def test_mean_label(self, d1):
        assert mean_label(d1) == pytest.approx(0.6)

    def test_groups_keep_dataset_order(self):
        d = Dataset(x=np.array([1.0, 2.0, 1.0]), y=np.array([0.0, 1.0, 2.0]), task=Task.REGRESSION)
        assert sorted(input_groups(d).values()) == [[0, 2], [1]]

    def test_d1_is_decent_at_first_point(self, d1):
        assert is_decent(d1) == (True, 0)

    def test_constant_inputs_are_not_decent(self):
        d = Dataset(x=np.full(4, 2.0), y=np.array([1.0, 2.0, 4.0, 5.0]), task=Task.REGRESSION)
        assert is_decent(d) == (False, None)

    def test_group_with_global_mean_is_skipped(self):
        # group x=0 has mean 1 (the global mean); group x=1 differs
        d = Dataset(
            x=np.array([0.0, 0.0, 1.0, 2.0]),
            y=np.array([0.0, 2.0, 3.0, -1.0]),
            task=Task.REGRESSION,
        )
        assert is_decent(d) == (True, 2)


@pytest.mark.unit
class TestLabelStatisticProperties:
    def test_mean_label_minimizes_constant_fit(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(1, 12))
            d = Dataset(x=rng.normal(size=n), y=rng.normal(size=n), task=Task.REGRESSION)
            best = float(np.sum((mean_label(d) - d.y) ** 2))
            for c in rng.normal(scale=3.0, size=100):
                assert best <= float(np.sum((c - d.y) ** 2)) + 1e-12

    def test_decency_ignores_point_order(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            n = int(rng.integers(2, 9))
            x = rng.integers(0, 3, size=n).astype(float)
            y = rng.integers(0, 3, size=n).astype(float)
            d = Dataset(x=x, y=y, task=Task.REGRESSION)
            order = rng.permutation(n)
            shuffled = Dataset(x=x[order], y=y[order], task=Task.REGRESSION)
            decent, r = is_decent(d)
            assert is_decent(shuffled)[0] == decent
            if decent:
                members = input_groups(d)[d.x[r].tobytes()]
                assert float(np.mean(d.y[members])) != pytest.approx(mean_label(d))

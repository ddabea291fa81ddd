"""Canonical datasets, the JSON interchange format, and the decency predicate.

A Dataset is an immutable (N x d) input matrix plus N labels. Builtins
carry the exact constants of the worked examples; ``load_json`` and
``save_json`` round-trip any dataset exactly.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, FiniteFloat, ValidationError

from nmlab.core.exceptions import DatasetParseError, InvalidInputError, OutputError

if TYPE_CHECKING:
    from collections.abc import Sequence


class Task(StrEnum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


class BuiltinName(StrEnum):
    SIGMOID10 = "sigmoid10"
    D1 = "d1"
    D2 = "d2"
    D3 = "d3"
    XOR = "xor"
    FXOR = "fxor"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Points (x_i, y_i) with a task kind. Arrays are read-only copies."""

    x: np.ndarray
    y: np.ndarray
    task: Task

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=np.float64, copy=True)
        y = np.array(self.y, dtype=np.float64, copy=True)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or y.ndim != 1:
            msg = f"Dataset expects x of shape (N, d) and y of shape (N,), got {x.shape} and {y.shape}"
            raise InvalidInputError(msg)
        if x.shape[0] == 0:
            msg = "Dataset must contain at least one point"
            raise InvalidInputError(msg)
        if x.shape[0] != y.shape[0]:
            msg = f"Dataset has {x.shape[0]} inputs but {y.shape[0]} labels"
            raise InvalidInputError(msg)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            msg = "Dataset values must be finite"
            raise InvalidInputError(msg)
        if self.task == Task.CLASSIFICATION:
            bad = np.flatnonzero((y != 0.0) & (y != 1.0))
            if bad.size:
                msg = f"Classification label at point {int(bad[0])} is {y[bad[0]]!r}, expected 0 or 1"
                raise InvalidInputError(msg)
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "task", Task(self.task))

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def d(self) -> int:
        return int(self.x.shape[1])

    def with_inputs(self, x: np.ndarray) -> Dataset:
        """Same labels and task, new inputs (labels are never moved)."""
        return Dataset(x=x.reshape(self.x.shape), y=self.y, task=self.task)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.task == other.task
            and self.x.shape == other.x.shape
            and bool(np.array_equal(self.x, other.x))
            and bool(np.array_equal(self.y, other.y))
        )

    def __hash__(self) -> int:
        return hash((self.task, self.x.tobytes(), self.y.tobytes()))

    def __repr__(self) -> str:
        return f"Dataset(task={self.task.value}, n={self.n}, d={self.d})"


def _classification(points: Sequence[tuple[Sequence[float], float]]) -> Dataset:
    return Dataset(
        x=np.array([p[0] for p in points]),
        y=np.array([p[1] for p in points]),
        task=Task.CLASSIFICATION,
    )


def _regression(points: Sequence[tuple[float, float]]) -> Dataset:
    return Dataset(
        x=np.array([[p[0]] for p in points]),
        y=np.array([p[1] for p in points]),
        task=Task.REGRESSION,
    )


def builtin(name: BuiltinName | str) -> Dataset:
    """Return one of the canonical datasets by name."""
    key = BuiltinName(str(name).lower())
    if key == BuiltinName.SIGMOID10:
        # interleaved configuration that deadlocks the 2-2-1 sigmoid net
        return _classification(
            [
                ((2.8, 0.4), 1),
                ((3.1, 4.3), 1),
                ((0.1, -3.4), 1),
                ((-4.2, -3.3), 1),
                ((-0.5, 0.2), 1),
                ((-2.7, -0.4), 0),
                ((-3.0, -4.3), 0),
                ((-0.1, 3.4), 0),
                ((4.2, 3.2), 0),
                ((0.4, -0.1), 0),
            ]
        )
    if key == BuiltinName.D1:
        return _regression([(5, 2), (4, 1), (3, 0), (1, -3), (-1, 3)])
    if key == BuiltinName.D2:
        return _regression([(-1, 5), (0, 0), (1, -1), (10, -3), (11, -4), (12, -5)])
    if key == BuiltinName.D3:
        return _regression([(-1, 3), (0, 0), (1, -1), (10, -3), (11, -4), (12, -6)])
    if key == BuiltinName.XOR:
        return _classification(
            [((0.0, 0.0), 1), ((1.0, 1.0), 1), ((0.0, 1.0), 0), ((1.0, 0.0), 0)]
        )
    return _classification(
        [((1.0, 0.0), 1), ((0.2, 0.6), 1), ((0.0, 1.0), 0), ((0.6, 0.2), 0)]
    )


def resolve_dataset(spec: str) -> Dataset:
    """Accept a builtin name or a path to a dataset JSON file."""
    if spec.lower() in {b.value for b in BuiltinName}:
        return builtin(spec)
    return load_json(Path(spec))


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


class PointModel(BaseModel):
    x: list[FiniteFloat]
    y: FiniteFloat


class DatasetFile(BaseModel):
    """On-disk dataset schema."""

    task: Task
    d: int
    points: list[PointModel]


_POINT_KEY = re.compile(r'"x"\s*:')


def _line_of_point(text: str, index: int) -> int | None:
    for i, match in enumerate(_POINT_KEY.finditer(text)):
        if i == index:
            return text.count("\n", 0, match.start()) + 1
    return None


def to_model(d: Dataset) -> DatasetFile:
    return DatasetFile(
        task=d.task,
        d=d.d,
        points=[
            PointModel(x=[float(v) for v in row], y=float(label))
            for row, label in zip(d.x, d.y, strict=True)
        ],
    )


def parse_json(text: str) -> Dataset:
    """Parse dataset JSON text; errors carry the offending line."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise DatasetParseError(f"Malformed JSON: {e.msg}", line=e.lineno) from e

    try:
        model = DatasetFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = first["loc"]
        line = None
        if len(loc) >= 2 and loc[0] == "points" and isinstance(loc[1], int):
            line = _line_of_point(text, loc[1])
        where = ".".join(str(part) for part in loc)
        raise DatasetParseError(f"Invalid dataset at {where}: {first['msg']}", line=line) from e

    if model.d < 1:
        raise DatasetParseError(f"Dimension d must be >= 1, got {model.d}")
    if not model.points:
        raise DatasetParseError("Dataset must contain at least one point")
    for i, point in enumerate(model.points):
        if len(point.x) != model.d:
            msg = f"Point {i} has {len(point.x)} coordinates, expected d={model.d}"
            raise DatasetParseError(msg, line=_line_of_point(text, i))
        if model.task == Task.CLASSIFICATION and point.y not in (0.0, 1.0):
            msg = f"Point {i} has label {point.y!r}; classification labels must be 0 or 1"
            raise DatasetParseError(msg, line=_line_of_point(text, i))

    return from_model(model)


def from_model(model: DatasetFile) -> Dataset:
    if not model.points:
        raise InvalidInputError("Dataset must contain at least one point")
    if len({len(p.x) for p in model.points}) != 1:
        raise InvalidInputError("All points must have the same dimension")
    return Dataset(
        x=np.array([p.x for p in model.points], dtype=np.float64),
        y=np.array([p.y for p in model.points], dtype=np.float64),
        task=model.task,
    )


def dumps(d: Dataset) -> str:
    """Serialize with one point per line; floats use shortest round-trip repr."""
    lines = [
        "{",
        f'  "task": "{d.task.value}",',
        f'  "d": {d.d},',
        '  "points": [',
    ]
    rows = [
        "    " + json.dumps({"x": [float(v) for v in row], "y": float(label)})
        for row, label in zip(d.x, d.y, strict=True)
    ]
    lines.append(",\n".join(rows))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_json(path: Path) -> Dataset:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise InvalidInputError(f"Dataset file not found: {path}") from e
    return parse_json(text.removeprefix("\ufeff"))


def save_json(d: Dataset, path: Path) -> None:
    try:
        path.write_text(dumps(d), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write dataset to {path}: {e}") from e


# ---------------------------------------------------------------------------
# Label statistics and decency
# ---------------------------------------------------------------------------


def mean_label(d: Dataset) -> float:
    return math.fsum(d.y.tolist()) / d.n


def input_groups(d: Dataset) -> dict[bytes, list[int]]:
    """Indices of points sharing bitwise-identical inputs, in dataset order."""
    groups: dict[bytes, list[int]] = {}
    for i, row in enumerate(d.x):
        groups.setdefault(row.tobytes(), []).append(i)
    return groups


def _group_mean(d: Dataset, indices: list[int]) -> float:
    return math.fsum(float(d.y[i]) for i in indices) / len(indices)


def is_decent(d: Dataset) -> tuple[bool, int | None]:
    """Return (True, r) when the input group of point r has a non-global mean.

    r is the first such index in dataset order (0-based).
    """
    overall = mean_label(d)
    tol = 1e-12 * (1.0 + abs(overall))
    groups = input_groups(d)
    for i, row in enumerate(d.x):
        members = groups[row.tobytes()]
        if members[0] != i:
            continue
        if abs(_group_mean(d, members) - overall) > tol:
            return True, i
    return False, None

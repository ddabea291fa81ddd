"""Shared result and file models.

``ResultTable`` is the tabular shape every formatter consumes. The weight
file models describe the JSON interchange format for parameter points:
``{"arch": "sigmoid221" | "relu_reg" | "two_h1" | "deep_relu", "params": {...}}``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, FiniteFloat, TypeAdapter, ValidationError

from nmlab.core.exceptions import NmlabError, OutputError, SchemaError
from nmlab.core.tinynet import (
    Activation,
    DeepReluParams,
    ReluRegParams,
    Sigmoid221Params,
    TwoH1Params,
)


class ColumnMeta(BaseModel):
    """Metadata for a single result column."""

    name: str
    kind: str = "text"


class ResultTable(BaseModel):
    """Rows of plain values under named columns."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    columns: list[ColumnMeta]
    rows: list[tuple[Any, ...]]
    title: str | None = None

    @property
    def row_count(self) -> int:
        return len(self.rows)


# ---------------------------------------------------------------------------
# Weight files
# ---------------------------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Sigmoid221Fields(_Strict):
    w00: FiniteFloat
    w01: FiniteFloat
    b0: FiniteFloat
    w10: FiniteFloat
    w11: FiniteFloat
    b1: FiniteFloat
    v0: FiniteFloat
    v1: FiniteFloat
    c: FiniteFloat


class Sigmoid221Weights(_Strict):
    arch: Literal["sigmoid221"]
    params: Sigmoid221Fields

    def to_params(self) -> Sigmoid221Params:
        return Sigmoid221Params(**self.params.model_dump())


class ReluRegFields(_Strict):
    w: list[FiniteFloat] = Field(min_length=1)
    b: list[FiniteFloat] = Field(min_length=1)
    v: list[FiniteFloat] = Field(min_length=1)
    c: FiniteFloat


class ReluRegWeights(_Strict):
    arch: Literal["relu_reg"]
    params: ReluRegFields

    def to_params(self) -> ReluRegParams:
        f = self.params
        return ReluRegParams(w=np.array(f.w), b=np.array(f.b), v=np.array(f.v), c=f.c)


class TwoH1Fields(_Strict):
    activation: Activation
    W1: list[Annotated[list[FiniteFloat], Field(min_length=2, max_length=2)]] = Field(min_length=1)
    b1: list[FiniteFloat]
    v: list[FiniteFloat]
    c: FiniteFloat


class TwoH1Weights(_Strict):
    arch: Literal["two_h1"]
    params: TwoH1Fields

    def to_params(self) -> TwoH1Params:
        f = self.params
        return TwoH1Params(
            activation=f.activation,
            W1=np.array(f.W1),
            b1=np.array(f.b1),
            v=np.array(f.v),
            c=f.c,
        )


class LayerFields(_Strict):
    W: list[list[FiniteFloat]] = Field(min_length=1)
    b: list[FiniteFloat] = Field(min_length=1)


class DeepReluFields(_Strict):
    layers: list[LayerFields] = Field(min_length=1)


class DeepReluWeights(_Strict):
    arch: Literal["deep_relu"]
    params: DeepReluFields

    def to_params(self) -> DeepReluParams:
        layers = []
        for n, layer in enumerate(self.params.layers, start=1):
            if len({len(row) for row in layer.W}) != 1:
                msg = f"Layer {n}: ragged weight matrix"
                raise SchemaError(msg)
            layers.append((np.array(layer.W), np.array(layer.b)))
        return DeepReluParams(layers=tuple(layers))


WeightFile = Annotated[
    Sigmoid221Weights | ReluRegWeights | TwoH1Weights | DeepReluWeights,
    Field(discriminator="arch"),
]
WEIGHT_FILE_ADAPTER: TypeAdapter[
    Sigmoid221Weights | ReluRegWeights | TwoH1Weights | DeepReluWeights
] = TypeAdapter(WeightFile)

AnyParams = Sigmoid221Params | ReluRegParams | TwoH1Params | DeepReluParams


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    where = ".".join(str(part) for part in err["loc"]) or "<root>"
    return f"{where}: {err['msg']}"


def parse_weights(text: str) -> AnyParams:
    """Parse weight-file JSON into a parameter object.

    Any mismatch with the known architecture schemas raises SchemaError.
    """
    try:
        model = WEIGHT_FILE_ADAPTER.validate_json(text)
    except ValidationError as exc:
        msg = f"Weight file does not match any architecture schema ({_first_error(exc)})"
        raise SchemaError(msg) from exc
    try:
        return model.to_params()
    except SchemaError:
        raise
    except NmlabError as exc:
        # shape inconsistencies surface from the parameter constructors
        msg = f"Weight file has inconsistent shapes: {exc.message}"
        raise SchemaError(msg) from exc


def load_weights(path: Path) -> AnyParams:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        msg = f"Weight file not found: {path}"
        raise SchemaError(msg) from exc
    except OSError as exc:
        msg = f"Cannot read weight file {path}: {exc.strerror}"
        raise SchemaError(msg) from exc
    return parse_weights(text)


def to_weight_model(
    p: AnyParams,
) -> Sigmoid221Weights | ReluRegWeights | TwoH1Weights | DeepReluWeights:
    if isinstance(p, Sigmoid221Params):
        fields = {name: getattr(p, name) for name in p.FLAT_NAMES}
        return Sigmoid221Weights(arch="sigmoid221", params=Sigmoid221Fields(**fields))
    if isinstance(p, ReluRegParams):
        return ReluRegWeights(
            arch="relu_reg",
            params=ReluRegFields(w=p.w.tolist(), b=p.b.tolist(), v=p.v.tolist(), c=p.c),
        )
    if isinstance(p, TwoH1Params):
        return TwoH1Weights(
            arch="two_h1",
            params=TwoH1Fields(
                activation=p.activation,
                W1=p.W1.tolist(),
                b1=p.b1.tolist(),
                v=p.v.tolist(),
                c=p.c,
            ),
        )
    return deep_weights(p)


def deep_weights(p: DeepReluParams) -> DeepReluWeights:
    return DeepReluWeights(
        arch="deep_relu",
        params=DeepReluFields(
            layers=[LayerFields(W=W.tolist(), b=b.tolist()) for W, b in p.layers]
        ),
    )


def dump_weights(p: AnyParams) -> str:
    return to_weight_model(p).model_dump_json(indent=2)


def save_weights(p: AnyParams, path: Path) -> None:
    try:
        path.write_text(dump_weights(p) + "\n", encoding="utf-8")
    except OSError as exc:
        msg = f"Cannot write weight file {path}: {exc.strerror}"
        raise OutputError(msg) from exc

from __future__ import annotations

import json
from enum import StrEnum
from typing import Annotated, Any

import typer
from pydantic import BaseModel

from nmlab.core.blindspot import BlindSpotReport
from nmlab.core.certify import Certificate, ReluProofReport
from nmlab.core.datasets import DatasetFile
from nmlab.core.forge import ForgeResult
from nmlab.core.models import WEIGHT_FILE_ADAPTER
from nmlab.core.optim import ConvergenceTable
from nmlab.core.verify import VerificationReport


class SchemaName(StrEnum):
    CERTIFICATE = "certificate"
    PROOF = "proof"
    FORGE = "forge"
    VERIFY = "verify"
    BLINDSPOT = "blindspot"
    TABLE = "table"
    DATASET = "dataset"
    WEIGHTS = "weights"


_MODELS: dict[SchemaName, type[BaseModel]] = {
    SchemaName.CERTIFICATE: Certificate,
    SchemaName.PROOF: ReluProofReport,
    SchemaName.FORGE: ForgeResult,
    SchemaName.VERIFY: VerificationReport,
    SchemaName.BLINDSPOT: BlindSpotReport,
    SchemaName.TABLE: ConvergenceTable,
    SchemaName.DATASET: DatasetFile,
}


def json_schema(name: SchemaName) -> dict[str, Any]:
    if name == SchemaName.WEIGHTS:
        return WEIGHT_FILE_ADAPTER.json_schema()
    return _MODELS[name].model_json_schema()


def schema_command(
    name: Annotated[SchemaName, typer.Argument(help="Which output or input format")],
) -> None:
    """Print the JSON Schema of an nmlab file or report format."""
    typer.echo(json.dumps(json_schema(name), indent=2, sort_keys=True))

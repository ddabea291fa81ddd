from __future__ import annotations

import sys
from typing import Annotated

import typer
from pydantic import TypeAdapter

from nmlab.cli.commands._shared import output_result
from nmlab.cli.output import write_model
from nmlab.core.constants import PROBE_DIRECTIONS
from nmlab.core.exceptions import InvalidInputError
from nmlab.core.models import ColumnMeta, ResultTable
from nmlab.core.verify import ClaimId, VerificationReport, verify

_REPORTS = TypeAdapter(list[VerificationReport])


def _claims(claim: str) -> list[ClaimId]:
    if claim == "all":
        return list(ClaimId)
    try:
        return [ClaimId(claim)]
    except ValueError:
        available = ", ".join(["all", *(c.value for c in ClaimId)])
        msg = f"Unknown claim '{claim}'. Available: {available}"
        raise InvalidInputError(msg) from None


def _summary(reports: list[VerificationReport]) -> ResultTable:
    return ResultTable(
        title="Verification",
        columns=[ColumnMeta(name=n) for n in ("claim", "status", "corrections", "summary")],
        rows=[
            (r.claim.value, r.status.value, len(r.corrections), r.summary)
            for r in reports
        ],
    )


def verify_command(
    ctx: typer.Context,
    claim: Annotated[
        str,
        typer.Argument(help="thm1|prop1|prop2|prop3|blindspot|lemma1|all"),
    ] = "all",
    directions: Annotated[
        int,
        typer.Option("--directions", min=0, help="Random directions per escape probe"),
    ] = PROBE_DIRECTIONS,
    summary: Annotated[
        bool,
        typer.Option("--summary", help="Print a status table instead of JSON reports"),
    ] = False,
) -> None:
    """
    Re-check the embedded minima and constructions.

    Every constant is built in, so no input files are needed. Exits 0
    unless some claim comes back failed.
    """
    reports = [verify(c, n_directions=directions) for c in _claims(claim)]

    if summary:
        output_result(ctx, _summary(reports))
    elif len(reports) == 1:
        write_model(reports[0])
    else:
        sys.stdout.write(_REPORTS.dump_json(reports, indent=2).decode() + "\n")

    code = max(r.exit_code for r in reports)
    if code:
        raise typer.Exit(code)

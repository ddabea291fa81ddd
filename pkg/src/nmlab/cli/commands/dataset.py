"""Builtin dataset listing, export and dataset-file validation."""

from __future__ import annotations

import sys
from pathlib import Path  # noqa: TC003
from typing import Annotated

import typer

from nmlab.cli.commands._shared import output_result
from nmlab.core.datasets import BuiltinName, builtin, dumps, load_json, save_json
from nmlab.core.models import ColumnMeta, ResultTable

dataset_app = typer.Typer(help="Builtin datasets and dataset files")


@dataset_app.callback(invoke_without_command=True)
def dataset_callback(ctx: typer.Context) -> None:
    if not ctx.invoked_subcommand:
        typer.echo(ctx.get_help())
        raise typer.Exit()


@dataset_app.command("list")
def dataset_list(ctx: typer.Context) -> None:
    """List the builtin datasets."""
    rows = []
    for name in BuiltinName:
        d = builtin(name)
        rows.append((name.value, d.task.value, d.n, d.d))
    output_result(
        ctx,
        ResultTable(
            columns=[
                ColumnMeta(name="name"),
                ColumnMeta(name="task"),
                ColumnMeta(name="points", kind="number"),
                ColumnMeta(name="dim", kind="number"),
            ],
            rows=rows,
        ),
    )


@dataset_app.command("export")
def dataset_export(
    name: Annotated[BuiltinName, typer.Argument(help="Builtin dataset name")],
    out: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="Write to this file instead of stdout"),
    ] = None,
) -> None:
    """Write a builtin dataset as dataset JSON."""
    d = builtin(name)
    if out is None:
        sys.stdout.write(dumps(d))
    else:
        save_json(d, out)


@dataset_app.command("validate")
def dataset_validate(
    path: Annotated[Path, typer.Argument(help="Dataset JSON file")],
) -> None:
    """Check a dataset file; errors name the offending line."""
    d = load_json(path)
    typer.echo(f"OK: {d.n} {d.task.value} points in {d.d} dimension(s)")

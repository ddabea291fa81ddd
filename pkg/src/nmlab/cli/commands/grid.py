from __future__ import annotations

from pathlib import Path  # noqa: TC003
from typing import Annotated

import numpy as np
import structlog
import typer

from nmlab.cli.commands._shared import output_result, write_text
from nmlab.core.datasets import resolve_dataset
from nmlab.core.exceptions import ArchitectureError, InvalidInputError
from nmlab.core.models import load_weights
from nmlab.core.optim import sample_grid
from nmlab.core.tinynet import Sigmoid221Params, TwoH1Params
from nmlab.formatters.csv import CSVFormatter


def parse_bounds(text: str) -> tuple[float, float, float, float]:
    """'x_min,x_max,y_min,y_max' -> four floats."""
    try:
        parts = tuple(float(v) for v in text.split(","))
    except ValueError:
        parts = ()
    if len(parts) != 4:
        msg = f"Bounds must be 'x_min,x_max,y_min,y_max', got '{text}'"
        raise InvalidInputError(msg)
    return parts[0], parts[1], parts[2], parts[3]


def sample_grid_command(
    ctx: typer.Context,
    weights: Annotated[
        Path,
        typer.Option("--weights", "-w", help="2-input classifier weight file"),
    ],
    bounds: Annotated[
        str,
        typer.Option("--bounds", "-b", help="x_min,x_max,y_min,y_max"),
    ] = "-5,5,-5,5",
    res: Annotated[int, typer.Option("--res", "-r", help="Points per axis")] = 50,
    out: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="Write the grid CSV here instead of stdout"),
    ] = None,
    linearity: Annotated[
        bool,
        typer.Option("--linearity", help="Log the R^2 of the best affine fit"),
    ] = False,
    dataset: Annotated[
        str | None,
        typer.Option("--dataset", "-d", help="Restrict the affine fit to this dataset's box"),
    ] = None,
) -> None:
    """
    Sample a classifier's output probability on a regular grid.

    Rows are (x, y, output) with y as the outer loop.
    """
    p = load_weights(weights)
    if not isinstance(p, Sigmoid221Params | TwoH1Params):
        msg = "sample-grid needs a sigmoid221 or two_h1 weight file"
        raise ArchitectureError(msg)

    grid = sample_grid(p, parse_bounds(bounds), res)
    result = grid.to_result_table()

    if linearity:
        box = None
        if dataset is not None:
            x = resolve_dataset(dataset).x
            lo, hi = np.min(x, axis=0), np.max(x, axis=0)
            box = (float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))
        structlog.get_logger().info("affine fit", r2=grid.affine_r2(box), box=box)

    if out is None:
        output_result(ctx, result)
    else:
        write_text(out, "\n".join(CSVFormatter().format(result)) + "\n")

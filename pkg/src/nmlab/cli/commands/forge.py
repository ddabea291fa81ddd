from __future__ import annotations

from pathlib import Path  # noqa: TC003
from typing import Annotated, Any

import typer
from pydantic import ValidationError

from nmlab.cli.commands._shared import get_resolved_config
from nmlab.cli.output import write_model
from nmlab.core.certify import Classification
from nmlab.core.datasets import resolve_dataset, save_json
from nmlab.core.exceptions import InvalidInputError
from nmlab.core.exit_codes import ExitCode
from nmlab.core.forge import ForgeConfig, ForgeResult, forge, perturb_dataset, random_dataset
from nmlab.core.models import load_weights


def forge_exit_code(result: ForgeResult) -> ExitCode:
    """0 for a converged minimum (or degenerate point), 2 for a converged saddle."""
    if not result.converged or result.certificate is None:
        return ExitCode.GENERAL_ERROR
    verdict = result.certificate.classification
    if verdict in (Classification.LOCAL_MINIMUM, Classification.DEGENERATE):
        return ExitCode.SUCCESS
    if verdict == Classification.SADDLE:
        return ExitCode.SADDLE
    return ExitCode.GENERAL_ERROR


def forge_command(
    ctx: typer.Context,
    weights: Annotated[
        Path,
        typer.Option("--weights", "-w", help="Fixed weights the data is moved around"),
    ],
    dataset: Annotated[
        str | None,
        typer.Option("--dataset", "-d", help="Starting dataset: builtin name or JSON file"),
    ] = None,
    perturb: Annotated[
        float | None,
        typer.Option("--perturb", help="Add uniform(-EPS, EPS) noise to every input coordinate"),
    ] = None,
    random_points: Annotated[
        int | None,
        typer.Option("--random-points", help="Start from N random points instead"),
    ] = None,
    seed: Annotated[int, typer.Option("--seed", "-s", help="Seed for --perturb/--random-points")] = 0,
    step_size: Annotated[float | None, typer.Option("--step-size", help="Initial step")] = None,
    max_iters: Annotated[int | None, typer.Option("--max-iters", help="Iteration budget")] = None,
    target_gradnorm: Annotated[
        float | None,
        typer.Option("--target-gradnorm", help="Stop once the weight gradient norm drops below"),
    ] = None,
    fd_step: Annotated[
        float | None,
        typer.Option("--fd-step", help="Finite-difference step over data coordinates"),
    ] = None,
    out: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="Write the forged dataset here"),
    ] = None,
) -> None:
    """
    Move datapoints (labels fixed) until the given weights become critical.

    Prints the forge result as JSON. Exit 0 when it converged to a local
    minimum or degenerate point, 2 when it converged to a saddle, 1 otherwise.
    """
    resolved = get_resolved_config(ctx)
    overrides: dict[str, Any] = {
        key: value
        for key, value in {
            "step_size": step_size,
            "max_iters": max_iters,
            "target_gradnorm": target_gradnorm,
            "fd_step": fd_step,
        }.items()
        if value is not None
    }
    try:
        cfg = ForgeConfig.model_validate(resolved.forge.model_dump() | overrides)
    except ValidationError as exc:
        msg = f"Invalid forge settings: {exc.errors()[0]['msg']}"
        raise InvalidInputError(msg) from exc

    p = load_weights(weights)
    if dataset is not None and random_points is None:
        d0 = resolve_dataset(dataset)
    elif random_points is not None and dataset is None:
        d0 = random_dataset(random_points, seed)
    else:
        msg = "Give exactly one of --dataset or --random-points"
        raise InvalidInputError(msg)
    if perturb is not None:
        d0 = perturb_dataset(d0, perturb, seed)

    result = forge(
        p,
        d0,
        cfg,
        tol_grad=resolved.certify.tol_grad,
        tol_eig_rel=resolved.certify.tol_eig_rel,
    )
    if out is not None:
        save_json(result.final_dataset(), out)
    write_model(result)

    code = forge_exit_code(result)
    if code:
        raise typer.Exit(code)

from __future__ import annotations

from pathlib import Path  # noqa: TC003
from typing import Annotated

import typer

from nmlab.cli.commands._shared import get_resolved_config, load_inputs
from nmlab.cli.output import write_model
from nmlab.core.certify import Classification, certify_relu_min_exact, classify_critical
from nmlab.core.exceptions import ArchitectureError
from nmlab.core.exit_codes import ExitCode
from nmlab.core.tinynet import LossKind, ReluRegParams

VERDICT_EXIT_CODES: dict[Classification, ExitCode] = {
    Classification.LOCAL_MINIMUM: ExitCode.SUCCESS,
    Classification.SADDLE: ExitCode.SADDLE,
    Classification.NOT_CRITICAL: ExitCode.NOT_CRITICAL,
    Classification.DEGENERATE: ExitCode.DEGENERATE,
}


def certify_command(
    ctx: typer.Context,
    weights: Annotated[
        Path,
        typer.Option("--weights", "-w", help="Weight file (JSON, tagged by arch)"),
    ],
    dataset: Annotated[
        str,
        typer.Option("--dataset", "-d", help="Builtin dataset name or dataset JSON file"),
    ],
    loss: Annotated[
        LossKind | None,
        typer.Option("--loss", help="nll|mse (default follows the architecture)"),
    ] = None,
    exact: Annotated[
        bool,
        typer.Option("--exact", help="Case-analysis proof for one-layer ReLU regression"),
    ] = False,
    tol_grad: Annotated[
        float | None,
        typer.Option("--tol-grad", help="Gradient infinity-norm tolerance"),
    ] = None,
    tol_eig_rel: Annotated[
        float | None,
        typer.Option("--tol-eig-rel", help="Relative eigenvalue tolerance"),
    ] = None,
) -> None:
    """
    Classify a parameter point as minimum, saddle, degenerate or not critical.

    Prints the certificate as JSON. Exit codes: 0 local minimum, 2 saddle,
    3 not critical, 4 degenerate. With --exact the ReLU proof report is
    printed instead and the exit code is 0 iff it certifies.
    """
    p, d = load_inputs(weights, dataset)

    if exact:
        if not isinstance(p, ReluRegParams):
            msg = "--exact needs a relu_reg weight file"
            raise ArchitectureError(msg)
        report = certify_relu_min_exact(p, d)
        write_model(report)
        if not report.certified:
            raise typer.Exit(ExitCode.GENERAL_ERROR)
        return

    tolerances = get_resolved_config(ctx).certify
    certificate = classify_critical(
        p,
        d,
        loss,
        tol_grad=tol_grad if tol_grad is not None else tolerances.tol_grad,
        tol_eig_rel=tol_eig_rel if tol_eig_rel is not None else tolerances.tol_eig_rel,
        fd_step=tolerances.fd_step,
    )
    write_model(certificate)
    code = VERDICT_EXIT_CODES[certificate.classification]
    if code:
        raise typer.Exit(code)

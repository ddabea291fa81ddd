from __future__ import annotations

from pathlib import Path  # noqa: TC003
from typing import Annotated

import typer

from nmlab.cli.commands._shared import load_inputs
from nmlab.cli.output import write_model
from nmlab.core.blindspot import analyze, saturated_training_probe
from nmlab.core.exceptions import ArchitectureError
from nmlab.core.tinynet import DeepReluParams


def blindspot_command(
    weights: Annotated[
        Path,
        typer.Option("--weights", "-w", help="deep_relu weight file"),
    ],
    dataset: Annotated[
        str,
        typer.Option("--dataset", "-d", help="Builtin regression dataset or dataset JSON file"),
    ],
    seed: Annotated[int, typer.Option("--seed", "-s", help="Seed for the separating direction")] = 0,
    probe: Annotated[
        bool,
        typer.Option("--probe", help="Train from the point and report the saturated-layer probe"),
    ] = False,
    steps: Annotated[
        int,
        typer.Option("--steps", min=0, help="Probe training steps"),
    ] = 5000,
) -> None:
    """
    Detect saturated layers and construct a point that beats the mean predictor.

    Prints the analysis as JSON. With --probe and a saturated start it
    also carries the saturated training probe.
    """
    p, d = load_inputs(weights, dataset)
    if not isinstance(p, DeepReluParams):
        msg = "blindspot needs a deep_relu weight file"
        raise ArchitectureError(msg)

    report = analyze(p, d, seed)
    if probe and report.saturated_layers:
        report.probe = saturated_training_probe(p, d, steps=steps)
    write_model(report)

"""Shared CLI plumbing for command modules.

Config resolution, input loading and output helpers.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

from nmlab.cli.output import get_formatter, write_output
from nmlab.core.config import load_config, resolve_config
from nmlab.core.datasets import resolve_dataset
from nmlab.core.exceptions import OutputError
from nmlab.core.models import load_weights

if TYPE_CHECKING:
    import typer

    from nmlab.core.config import ResolvedConfig
    from nmlab.core.datasets import Dataset
    from nmlab.core.models import AnyParams, ResultTable


def get_resolved_config(ctx: typer.Context, **table1_overrides: Any) -> ResolvedConfig:
    obj = ctx.ensure_object(dict)
    config = load_config(obj.get("config_file"))
    return resolve_config(
        config,
        profile_name=obj.get("profile"),
        threads=obj.get("threads"),
        **table1_overrides,
    )


def output_result(ctx: typer.Context, result: ResultTable) -> None:
    obj = ctx.ensure_object(dict)
    default = None
    if obj.get("format") is None:
        default = load_config(obj.get("config_file")).default_format
    formatter = get_formatter(
        obj.get("format"),
        default=default,
        compact=obj.get("compact", False),
        no_header=obj.get("no_header", False),
    )
    write_output(formatter, result)


def load_inputs(weights: Path, dataset: str) -> tuple[AnyParams, Dataset]:
    return load_weights(weights), resolve_dataset(dataset)


def ensure_dir(path: Path) -> Path:
    """Create an output directory, mapping failures to OutputError."""
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        msg = f"Cannot create output directory {path}: {exc.strerror}"
        raise OutputError(msg) from exc
    return path


def write_text(path: Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        msg = f"Cannot write {path}: {exc.strerror}"
        raise OutputError(msg) from exc

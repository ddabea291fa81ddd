"""nmlab entry point and command registration."""

from __future__ import annotations

import atexit
from pathlib import Path  # noqa: TC003
from typing import Annotated

import sentry_sdk
import typer

from nmlab.__about__ import __version__
from nmlab.cli.commands.blindspot import blindspot_command
from nmlab.cli.commands.certify import certify_command
from nmlab.cli.commands.config import config_app
from nmlab.cli.commands.dataset import dataset_app
from nmlab.cli.commands.forge import forge_command
from nmlab.cli.commands.grid import sample_grid_command
from nmlab.cli.commands.schema import schema_command
from nmlab.cli.commands.table1 import table1_command
from nmlab.cli.commands.verify import verify_command
from nmlab.cli.output import OutputFormat  # noqa: TC001
from nmlab.core.config import load_config
from nmlab.core.exceptions import NmlabError
from nmlab.core.exit_codes import ExitCode
from nmlab.core.logging import setup_logging
from nmlab.core.monitoring import setup_sentry

app = typer.Typer(
    help="nmlab - certify, forge and construct local minima of tiny neural networks",
    invoke_without_command=True,
)

app.add_typer(config_app, name="config")
app.add_typer(dataset_app, name="dataset")
app.command("verify")(verify_command)
app.command("certify")(certify_command)
app.command("table1")(table1_command)
app.command("forge")(forge_command)
app.command("sample-grid")(sample_grid_command)
app.command("blindspot")(blindspot_command)
app.command("schema")(schema_command)


def version_callback(value: bool) -> None:
    if value:
        typer.echo(f"nmlab {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    ctx: typer.Context,
    version: Annotated[
        bool,
        typer.Option(
            "--version",
            "-V",
            help="Show version and exit",
            callback=version_callback,
            is_eager=True,
        ),
    ] = False,
    verbose: Annotated[
        bool,
        typer.Option("--verbose", help="Enable verbose logging"),
    ] = False,
    log_format: Annotated[
        str | None,
        typer.Option("--log-format", help="Log rendering: console|json"),
    ] = None,
    config_file: Annotated[
        Path | None,
        typer.Option("--config", help="Path to config file"),
    ] = None,
    profile: Annotated[
        str | None,
        typer.Option("--profile", "-P", help="Named experiment profile"),
    ] = None,
    threads: Annotated[
        int | None,
        typer.Option("--threads", "-j", help="Worker processes for table1"),
    ] = None,
    format: Annotated[
        OutputFormat | None,
        typer.Option("--format", "-f", help="Summary output format: table|json|csv"),
    ] = None,
    compact: Annotated[
        bool,
        typer.Option("--compact", help="Compact JSON output (no indentation)"),
    ] = False,
    no_header: Annotated[
        bool,
        typer.Option("--no-header", help="Suppress header row in CSV output"),
    ] = False,
) -> None:
    """nmlab - certify, forge and construct local minima of tiny neural networks."""
    if log_format is None:
        log_format = load_config(config_file).log_format
    setup_logging(verbose, log_format)
    setup_sentry()

    transaction = sentry_sdk.start_transaction(op="cli", name=ctx.invoked_subcommand or "nmlab")
    transaction.__enter__()

    def cleanup() -> None:
        if transaction.status is None:
            transaction.set_status("ok")
        transaction.__exit__(None, None, None)
        sentry_sdk.flush(timeout=2)

    atexit.register(cleanup)

    ctx.ensure_object(dict)
    ctx.obj["_sentry_transaction"] = transaction
    ctx.obj["verbose"] = verbose
    ctx.obj["config_file"] = config_file
    ctx.obj["profile"] = profile
    ctx.obj["threads"] = threads
    ctx.obj["format"] = format.value if format else None
    ctx.obj["compact"] = compact
    ctx.obj["no_header"] = no_header

    if ctx.invoked_subcommand is None:
        typer.echo(ctx.get_help())
        raise typer.Exit()


def run() -> None:
    """Entry point with global error handling."""
    try:
        app()
    except NmlabError as e:
        typer.echo(f"Error: {e.message}", err=True)
        raise SystemExit(e.exit_code) from None
    except SystemExit:
        raise
    except KeyboardInterrupt:
        raise SystemExit(ExitCode.INTERRUPTED) from None
    except Exception as e:
        sentry_sdk.capture_exception(e)
        typer.echo(f"Error: {e}", err=True)
        raise SystemExit(ExitCode.GENERAL_ERROR) from None

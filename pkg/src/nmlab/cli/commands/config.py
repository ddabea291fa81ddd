"""Configuration management CLI commands."""

from __future__ import annotations

from typing import TYPE_CHECKING

import typer

from nmlab.cli.commands._shared import get_resolved_config
from nmlab.core.config import DEFAULT_CONFIG_PATH, load_config

if TYPE_CHECKING:
    from pathlib import Path

config_app = typer.Typer(help="Configuration management commands")


@config_app.callback(invoke_without_command=True)
def config_callback(ctx: typer.Context) -> None:
    if not ctx.invoked_subcommand:
        typer.echo(ctx.get_help())
        raise typer.Exit()


@config_app.command("show")
def config_show(ctx: typer.Context) -> None:
    """Display resolved configuration with source attribution."""
    resolved = get_resolved_config(ctx)
    sources = resolved.sources

    typer.echo("General:")
    typer.echo(f"  threads: {resolved.threads} ({sources['threads']})")
    typer.echo(f"  log_format: {resolved.log_format} ({sources['log_format']})")
    typer.echo(f"  format: {resolved.default_format or 'auto'}")

    sections = (
        ("table1", resolved.table1.model_dump(mode="json")),
        ("forge", resolved.forge.model_dump(mode="json")),
        ("certify", resolved.certify.model_dump(mode="json")),
    )
    for title, values in sections:
        typer.echo("")
        typer.echo(f"{title}:")
        for key, value in values.items():
            source = sources.get(f"{title}.{key}")
            suffix = f" ({source})" if source else ""
            typer.echo(f"  {key}: {value}{suffix}")

    typer.echo("")
    typer.echo(f"Active Profile: {resolved.active_profile or 'none'}")
    config_path: Path | None = ctx.obj.get("config_file")
    typer.echo(f"Config File: {config_path or DEFAULT_CONFIG_PATH}")


@config_app.command("profiles")
def config_profiles(ctx: typer.Context) -> None:
    """List named experiment profiles."""
    config_path: Path | None = ctx.obj.get("config_file")
    app_config = load_config(config_path)
    active_profile = ctx.obj.get("profile") or app_config.default_profile

    if not app_config.profiles:
        typer.echo("No profiles configured.")
        typer.echo(f"Add profiles to: {config_path or DEFAULT_CONFIG_PATH}")
        return

    typer.echo("Available Profiles:")
    typer.echo("")
    for name, profile in sorted(app_config.profiles.items()):
        is_active = name == active_profile
        marker = "* " if is_active else "  "
        label = " (active)" if is_active else ""
        typer.echo(f"{marker}{name}{label}")
        for key in sorted(profile.model_fields_set):
            typer.echo(f"      {key}: {getattr(profile, key)}")
        typer.echo("")

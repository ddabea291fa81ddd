"""Configuration management for nmlab.

Handles the TOML config file, environment variables, named experiment
profiles and precedence resolution.

Precedence order (highest to lowest):
1. CLI flags (--threads, --trials, --seed, ...)
2. Environment variables (NMLAB_THREADS, NMLAB_PROFILE); NMLAB_THREADS also caps --threads
3. Named profile (--profile or NMLAB_PROFILE)
4. Config file sections
5. Built-in defaults
"""

from __future__ import annotations

import os
import tomllib
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError

from nmlab.core.certify import DEFAULT_TOL_EIG_REL, DEFAULT_TOL_GRAD
from nmlab.core.exceptions import ConfigError
from nmlab.core.forge import ForgeConfig
from nmlab.core.optim import ExperimentConfig
from nmlab.core.tinynet import HESSIAN_STEP

DEFAULT_CONFIG_PATH = Path.home() / ".config" / "nmlab" / "config.toml"

THREADS_ENV = "NMLAB_THREADS"
PROFILE_ENV = "NMLAB_PROFILE"

# keys a [table1] section or a profile may set
TABLE1_KEYS = (
    "trials",
    "seed",
    "h_min",
    "h_max",
    "max_steps",
    "gd_lr_sigmoid",
    "gd_lr_relu",
    "adam_lr",
    "adam_beta1",
    "adam_beta2",
    "adam_eps",
    "stochastic",
)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Table1Section(_Section):
    trials: int | None = Field(default=None, ge=1)
    seed: int | None = Field(default=None, ge=0)
    h_min: int | None = Field(default=None, ge=1)
    h_max: int | None = Field(default=None, ge=1)
    max_steps: int | None = Field(default=None, ge=1)
    gd_lr_sigmoid: PositiveFloat | None = None
    gd_lr_relu: PositiveFloat | None = None
    adam_lr: PositiveFloat | None = None
    adam_beta1: float | None = Field(default=None, ge=0.0, lt=1.0)
    adam_beta2: float | None = Field(default=None, ge=0.0, lt=1.0)
    adam_eps: PositiveFloat | None = None
    stochastic: bool | None = None


class ForgeSection(_Section):
    step_size: PositiveFloat | None = None
    max_iters: int | None = Field(default=None, ge=0)
    target_gradnorm: PositiveFloat | None = None
    fd_step: PositiveFloat | None = None


class CertifySection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    tol_grad: PositiveFloat = DEFAULT_TOL_GRAD
    tol_eig_rel: PositiveFloat = DEFAULT_TOL_EIG_REL
    fd_step: PositiveFloat = HESSIAN_STEP


class AppConfig(_Section):
    threads: int = Field(default=1, ge=1)
    default_format: str | None = None
    log_format: str = "console"
    default_profile: str | None = None
    table1: Table1Section = Table1Section()
    forge: ForgeSection = ForgeSection()
    certify: CertifySection = CertifySection()
    profiles: dict[str, Table1Section] = {}


class ResolvedConfig(BaseModel):
    threads: int = 1
    default_format: str | None = None
    log_format: str = "console"
    active_profile: str | None = None
    table1: ExperimentConfig = ExperimentConfig()
    forge: ForgeConfig = ForgeConfig()
    certify: CertifySection = CertifySection()
    sources: dict[str, str] = {}


def load_config(config_path: Path | None = None) -> AppConfig:
    """Load configuration from a TOML file.

    Returns default AppConfig if the file doesn't exist.
    Raises ConfigError on malformed TOML or invalid values.
    """
    if config_path is None:
        config_path = DEFAULT_CONFIG_PATH

    if not config_path.exists():
        return AppConfig()

    try:
        with open(config_path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        msg = f"Malformed TOML in {config_path}: {e}"
        raise ConfigError(msg) from e

    try:
        return AppConfig.model_validate(data)
    except ValidationError as e:
        msg = f"Invalid configuration in {config_path}: {e}"
        raise ConfigError(msg) from e


def _apply(
    target: dict[str, Any],
    sources: dict[str, str],
    section: BaseModel,
    prefix: str,
    origin: str,
) -> None:
    for key in section.model_fields_set:
        value = getattr(section, key)
        if value is None:
            continue
        target[key] = value
        sources[f"{prefix}.{key}"] = origin


def _env_threads() -> int | None:
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return None
    try:
        threads = int(value)
    except ValueError:
        msg = f"Invalid {THREADS_ENV} value: '{value}'. Must be an integer"
        raise ConfigError(msg) from None
    if threads < 1:
        msg = f"Invalid {THREADS_ENV} value: {threads}. Must be >= 1"
        raise ConfigError(msg)
    return threads


def resolve_config(
    config: AppConfig,
    profile_name: str | None = None,
    threads: int | None = None,
    **table1_overrides: Any,
) -> ResolvedConfig:
    """Resolve configuration using the precedence chain.

    CLI > env > profile > config file > built-in defaults. Keyword
    overrides name ExperimentConfig fields; None means "not given".
    """
    sources: dict[str, str] = {"threads": "default", "log_format": "default"}
    table1: dict[str, Any] = {}
    forge: dict[str, Any] = {}
    for key in TABLE1_KEYS:
        sources[f"table1.{key}"] = "default"
    for key in ("step_size", "max_iters", "target_gradnorm", "fd_step"):
        sources[f"forge.{key}"] = "default"
    for key in ("tol_grad", "tol_eig_rel", "fd_step"):
        sources[f"certify.{key}"] = "default"

    # Layer 1: config file sections
    resolved_threads = config.threads
    if "threads" in config.model_fields_set:
        sources["threads"] = "config"
    if "log_format" in config.model_fields_set:
        sources["log_format"] = "config"
    _apply(table1, sources, config.table1, "table1", "config")
    _apply(forge, sources, config.forge, "forge", "config")
    for key in config.certify.model_fields_set:
        sources[f"certify.{key}"] = "config"

    # Layer 2: named profile
    effective_profile = profile_name or os.environ.get(PROFILE_ENV) or config.default_profile
    if effective_profile:
        if effective_profile not in config.profiles:
            available = ", ".join(sorted(config.profiles)) if config.profiles else "none"
            msg = f"Unknown profile: '{effective_profile}'. Available profiles: {available}"
            raise ConfigError(msg)
        profile = config.profiles[effective_profile]
        _apply(table1, sources, profile, "table1", f"profile: {effective_profile}")

    # Layer 3: environment
    env_threads = _env_threads()
    if env_threads is not None:
        resolved_threads = env_threads
        sources["threads"] = f"env: {THREADS_ENV}"

    # Layer 4: CLI flags (highest priority); NMLAB_THREADS still caps --threads
    if threads is not None:
        if threads < 1:
            msg = f"Invalid --threads value: {threads}. Must be >= 1"
            raise ConfigError(msg)
        if env_threads is not None and env_threads < threads:
            resolved_threads = env_threads
            sources["threads"] = f"cli: --threads, capped by env: {THREADS_ENV}"
        else:
            resolved_threads = threads
            sources["threads"] = "cli: --threads"
    for key, value in table1_overrides.items():
        if value is None:
            continue
        if key not in ExperimentConfig.model_fields:
            msg = f"Unknown experiment setting: '{key}'"
            raise ConfigError(msg)
        table1[key] = value
        sources[f"table1.{key}"] = f"cli: --{key.replace('_', '-')}"

    try:
        experiment = ExperimentConfig(**table1)
        forge_cfg = ForgeConfig(**forge)
    except ValidationError as e:
        msg = f"Invalid experiment configuration: {e}"
        raise ConfigError(msg) from e

    return ResolvedConfig(
        threads=resolved_threads,
        default_format=config.default_format,
        log_format=config.log_format,
        active_profile=effective_profile,
        table1=experiment,
        forge=forge_cfg,
        certify=config.certify,
        sources=sources,
    )

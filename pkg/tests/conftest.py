"""Shared test fixtures for nmlab."""

from pathlib import Path
from tempfile import TemporaryDirectory

import pytest
from typer.testing import CliRunner

from nmlab.cli.main import app
from nmlab.core import constants as K
from nmlab.core.datasets import BuiltinName, builtin
from nmlab.core.models import save_weights


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch, tmp_path):
    """Keep the user's config file and NMLAB_* variables out of every test."""
    monkeypatch.setattr("nmlab.core.config.DEFAULT_CONFIG_PATH", tmp_path / "absent.toml")
    for var in ("NMLAB_THREADS", "NMLAB_PROFILE", "NMLAB_SENTRY_DSN"):
        monkeypatch.delenv(var, raising=False)


@pytest.fixture
def runner():
    """Typer CLI test runner with stderr kept out of result.stdout."""
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        # newer Click always separates the streams
        return CliRunner()


@pytest.fixture
def cli_runner(runner):
    """Invoke the CLI app with the given arguments."""

    def invoke(*args: str, **kwargs):
        return runner.invoke(app, list(args), **kwargs)

    return invoke


@pytest.fixture
def temp_dir():
    """Temporary directory for test files."""
    with TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def sigmoid10():
    return builtin(BuiltinName.SIGMOID10)


@pytest.fixture
def d1():
    return builtin(BuiltinName.D1)


@pytest.fixture
def d2():
    return builtin(BuiltinName.D2)


@pytest.fixture
def d3():
    return builtin(BuiltinName.D3)


@pytest.fixture
def write_weights(temp_dir):
    """Save a parameter object as a weight file and return its path."""

    def write(p, name: str = "weights.json") -> Path:
        path = temp_dir / name
        save_weights(p, path)
        return path

    return write


@pytest.fixture
def w_hat_file(write_weights):
    return write_weights(K.W_HAT, "w_hat.json")

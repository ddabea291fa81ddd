"""Module entry point for python -m nmlab."""

from nmlab.cli.main import run

if __name__ == "__main__":
    run()

"""Exit codes for nmlab commands.

Certification verdicts map onto 0/2/3/4; usage, output and config
failures use the sysexits.h values.
"""

from enum import IntEnum


class ExitCode(IntEnum):
    """Exit codes for nmlab commands."""

    SUCCESS = 0
    GENERAL_ERROR = 1
    SADDLE = 2
    NOT_CRITICAL = 3
    DEGENERATE = 4
    INPUT_ERROR = 64
    CANT_CREATE = 73
    CONFIG_ERROR = 78
    INTERRUPTED = 130

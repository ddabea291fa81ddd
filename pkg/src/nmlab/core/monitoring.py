"""Opt-in Sentry integration for error tracking and performance spans.

Nothing is sent unless NMLAB_SENTRY_DSN is set in the environment.
"""

import os

import sentry_sdk

from nmlab.__about__ import __version__

SENTRY_DSN_ENV = "NMLAB_SENTRY_DSN"


def setup_sentry(environment: str = "local") -> bool:
    """Initialize Sentry when a DSN is configured. Returns True if enabled."""
    dsn = os.environ.get(SENTRY_DSN_ENV)
    if not dsn:
        return False
    sentry_sdk.init(
        dsn=dsn,
        traces_sample_rate=1.0,
        environment=environment,
        release=__version__,
        attach_stacktrace=True,
        send_default_pii=False,
    )
    return True

"""Python front end for the SynCron discrete-event simulator."""

import json

from ._syncron import (  # noqa: F401
    MESSAGE_BYTES,
    STATS_SCHEMA_VERSION,
    CodecError,
    ConfigError,
    DeadlockError,
    ProtocolError,
    decode_message,
    encode_message,
    setting_keys,
    verify_trace,
)
from ._syncron import run as _run


def run(**settings):
    """Run one simulation.

    Keyword names are setting keys with dots replaced by double underscores
    (``latency__link_latency_ns=200``) or unique bare keys (``scheme="hier"``).
    Returns the parsed stats.json document.
    """
    flat = {k.replace("__", "."): str(v).lower() if isinstance(v, bool) else str(v) for k, v in settings.items()}
    return json.loads(_run(flat))

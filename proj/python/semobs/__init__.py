"""Semantic observer harness.

Sliding-window anomaly decisions from a pluggable vision-language backend,
debounced fail-safe handoffs under a latency watchdog, exact metric scoring
and ISO-26262-style safety gating. The heavy lifting lives in the compiled
`_semobs` extension; this package re-exports it.
"""

try:
    from ._semobs import *  # noqa: F401,F403
    from ._semobs import __version__, cli  # noqa: F401
except ImportError:  # development builds put the extension on PYTHONPATH directly
    from _semobs import *  # noqa: F401,F403
    from _semobs import __version__, cli  # noqa: F401

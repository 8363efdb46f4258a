"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback.
Callers go through :func:`kernels` at call time so :func:`use` takes effect
immediately (the benchmark and the cross-backend tests rely on that).
"""

import logging

from . import _fallback

logger = logging.getLogger(__name__)

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - exercised when the extension is not built
    _compiled = None
    logger.debug("compiled kernels unavailable; using numpy fallback")

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _compiled if _compiled is not None else _fallback


def available():
    """Names of the importable backends."""
    return sorted(_BACKENDS)


def use(name):
    """Switch the active backend to ``"compiled"`` or ``"python"``."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available()})")
    _active = _BACKENDS[name]


def name():
    return "compiled" if _active is _compiled else "python"


def kernels():
    return _active

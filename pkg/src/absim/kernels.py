"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
twin. Setting ``ABSIM_PURE_PYTHON=1`` forces the fallback.
"""
import logging
import os

from absim import _kernels_py

log = logging.getLogger(__name__)


def _select():
    if os.environ.get("ABSIM_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py
    try:
        from absim import _kernels
    except ImportError:
        log.debug("compiled kernel unavailable, using pure-Python fallback")
        return _kernels_py
    return _kernels


def available_backends():
    """All importable backends, compiled first."""
    out = []
    try:
        from absim import _kernels
        out.append(_kernels)
    except ImportError:
        pass
    out.append(_kernels_py)
    return out


kern = _select()
BACKEND = kern.BACKEND

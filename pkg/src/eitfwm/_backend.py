"""Selects the stepping core: compiled extension when importable, numpy otherwise.

Set ``EITFWM_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _mbcore_py

if os.environ.get("EITFWM_PURE_PYTHON") == "1":
    _compiled = None
else:
    try:
        from . import _mbcore as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
run_segment = (_compiled or _mbcore_py).run_segment


def get_run_segment(name=None):
    """Return the stepper for ``name`` ('cython', 'python' or None for the default)."""
    if name is None:
        return run_segment
    if name == "python":
        return _mbcore_py.run_segment
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled core eitfwm._mbcore is not available")
        return _compiled.run_segment
    raise ValueError(f"unknown backend {name!r}")

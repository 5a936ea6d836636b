"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``BNCTRL_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

fallback = _fallback
try:
    if os.environ.get("BNCTRL_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _ext as compiled
except ImportError:
    compiled = None

impl = compiled if compiled is not None else fallback
NAME = "cython" if compiled is not None else "python"

bnb_solve = impl.bnb_solve
find_cycles = impl.find_cycles

OPTIMAL, INFEASIBLE, TIMEOUT = _fallback.OPTIMAL, _fallback.INFEASIBLE, _fallback.TIMEOUT

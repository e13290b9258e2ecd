"""Pick the compiled kernels when importable, else the numpy fallback.

Set ``EOCSIREN_PURE=1`` to force the fallback (used by the benchmark and
the kernel-agreement tests).
"""
import os

from . import _fallback

fallback = _fallback

if os.environ.get("EOCSIREN_PURE"):
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

active = compiled if compiled is not None else fallback
name = "compiled" if compiled is not None else "numpy"

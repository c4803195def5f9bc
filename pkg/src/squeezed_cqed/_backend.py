"""Pick the compiled stepper when available.

Set ``SQUEEZED_CQED_PURE_PYTHON=1`` to force the pure-Python fallback.
"""
import os

from . import _integrate_py

BACKEND = "python"
dopri5_advance = _integrate_py.dopri5_advance
rk4_advance = _integrate_py.rk4_advance

if os.environ.get("SQUEEZED_CQED_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:  # not built; keep the fallback
        _kernels = None
    else:
        BACKEND = "cython"
        dopri5_advance = _kernels.dopri5_advance
        rk4_advance = _kernels.rk4_advance


def get(name: str = "auto"):
    """Return ``(dopri5_advance, rk4_advance)`` for 'auto', 'cython' or 'python'."""
    if name == "python" or (name == "auto" and BACKEND == "python"):
        return _integrate_py.dopri5_advance, _integrate_py.rk4_advance
    if name in ("cython", "auto"):
        from . import _kernels as k
        return k.dopri5_advance, k.rk4_advance
    raise ValueError(f"unknown backend {name!r}")

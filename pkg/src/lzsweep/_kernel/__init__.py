"""Propagation kernel backend selection.

The compiled Cython kernel is used when importable; otherwise the
pure-Python fallback takes over.  Override with the environment variable
LZSWEEP_KERNEL = cython | python | auto (default auto).  Both backends
implement the identical algorithm; benchmarks/bench_kernels.py compares
them.
"""

import os

from . import _pykernel

STATUS_OK = _pykernel.STATUS_OK
STATUS_UNDERFLOW = _pykernel.STATUS_UNDERFLOW
STATUS_DRIFT = _pykernel.STATUS_DRIFT

_choice = os.environ.get("LZSWEEP_KERNEL", "auto").lower()

if _choice not in ("auto", "cython", "python"):
    raise ImportError(f"LZSWEEP_KERNEL must be auto|cython|python, got {_choice!r}")

if _choice == "python":
    BACKEND = "python"
    _impl = _pykernel
else:
    try:
        from . import _cykernel as _impl
        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        BACKEND = "python"
        _impl = _pykernel

propagate_pure = _impl.propagate_pure
propagate_bloch = _impl.propagate_bloch


def get_backend(name: str = "auto"):
    """Return (module, label) for an explicitly requested backend; used by
    tests and the benchmark to compare implementations."""
    if name == "python":
        return _pykernel, "python"
    if name == "cython":
        from . import _cykernel
        return _cykernel, "cython"
    if name == "auto":
        return _impl, BACKEND
    raise ValueError(f"unknown kernel backend {name!r}")

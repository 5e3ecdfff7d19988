"""Kernel backend selection.

The compiled extension (`conebilliards._speedups`) is used when available;
otherwise the pure-Python reference implementation takes over.  Set
``BILLIARD_KERNEL=python`` to force the fallback or ``BILLIARD_KERNEL=compiled``
to fail loudly when the extension is missing.  Both backends produce
bit-identical results (see tests/test_backend_parity.py and benchmarks/).
"""

import os

from . import _kernels_py

_choice = os.environ.get("BILLIARD_KERNEL", "").strip().lower()
if _choice in ("python", "py"):
    _impl = _kernels_py
elif _choice in ("compiled", "cython", "c"):
    from . import _speedups as _impl
elif _choice == "":
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _kernels_py
else:
    raise RuntimeError(f"unknown BILLIARD_KERNEL value: {_choice!r}")

BACKEND = _impl.BACKEND

implicit_value = _impl.implicit_value
implicit_gradient = _impl.implicit_gradient
intersections = _impl.intersections
reflect_step = _impl.reflect_step
trace_terminal = _impl.trace_terminal

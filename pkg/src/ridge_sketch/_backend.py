"""Pick compiled kernels when available.

Set ``RIDGE_SKETCH_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("RIDGE_SKETCH_PURE_PYTHON") != "1":
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py


def get_kernels(name=None):
    """Return the kernel module for ``"compiled"``, ``"python"`` or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")

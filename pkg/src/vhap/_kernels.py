"""Kernel lane selection.

Two interchangeable implementations of the hot loops exist:

* ``vhap._native``  — Cython extension, used when importable,
* ``vhap._reference`` — numpy, always available.

Both lanes perform the same IEEE-754 double operations in the same order,
so their outputs are bit-identical (the extension is built with
``-ffp-contract=off`` to keep it that way). Set ``VHAP_PURE_PYTHON=1`` to
force the numpy lane for the ``auto`` selection.
"""

from __future__ import annotations

import os

from vhap import _reference

_compiled = None
if not os.environ.get("VHAP_PURE_PYTHON"):
    try:
        from vhap import _native as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None


def has_compiled() -> bool:
    return _compiled is not None


def get_backend(name: str = "auto"):
    """Resolve a kernel module by lane name: auto, compiled, or python."""
    if name == "auto":
        return _compiled if _compiled is not None else _reference
    if name in ("python", "reference"):
        return _reference
    if name in ("compiled", "native"):
        if _compiled is None:
            raise RuntimeError(
                "compiled kernels unavailable (extension not built); "
                "reinstall with a C compiler or use backend='python'"
            )
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def backend_name(backend=None) -> str:
    if backend is None:
        backend = get_backend()
    return "compiled" if backend is _compiled and backend is not None else "python"

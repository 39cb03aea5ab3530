"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy fallback.
Set ATOMPURSUIT_KERNELS=python (or =compiled) to force a backend; forcing the
compiled one raises if the extension is missing.
"""

import os

from . import _scan_py

_REQUEST = os.environ.get("ATOMPURSUIT_KERNELS", "auto").strip().lower()

if _REQUEST in ("auto", "compiled", "c"):
    try:
        from . import _scan as _impl

        BACKEND = "compiled"
    except ImportError:
        if _REQUEST != "auto":
            raise ImportError(
                "ATOMPURSUIT_KERNELS=%s but the compiled extension is not built" % _REQUEST
            )
        _impl = _scan_py
        BACKEND = "python"
elif _REQUEST in ("python", "py"):
    _impl = _scan_py
    BACKEND = "python"
else:
    raise ImportError("unrecognized ATOMPURSUIT_KERNELS value: %r" % _REQUEST)

scan_min = _impl.scan_min
scan_min_subset = _impl.scan_min_subset
simplex_pivot_loop = _impl.simplex_pivot_loop


def available_backends():
    """Names of backends importable right now."""
    names = ["python"]
    try:
        from . import _scan  # noqa: F401

        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return the kernel module for `name` ('compiled' or 'python')."""
    if name == "python":
        return _scan_py
    if name == "compiled":
        from . import _scan

        return _scan
    raise ValueError("unknown backend: %r" % name)

"""Select the update-kernel implementation at import time.

The compiled extension is preferred when present; the numpy fallback keeps
the package fully functional from a source checkout. ``ATNMF_BACKEND``
forces the choice: ``c`` (fail if the extension is missing), ``python``,
or ``auto`` (default).
"""

import os

from . import _kernels_py
from .errors import InvalidConfigError


def _load():
    choice = os.environ.get("ATNMF_BACKEND", "auto").strip().lower() or "auto"
    if choice == "auto":
        try:
            from . import _kernels_c
            return _kernels_c
        except ImportError:
            return _kernels_py
    if choice in ("c", "compiled", "ext"):
        from . import _kernels_c
        return _kernels_c
    if choice in ("py", "python", "numpy"):
        return _kernels_py
    raise InvalidConfigError(f"ATNMF_BACKEND must be 'auto', 'c', or 'python', got {choice!r}")


kernels = _load()


def backend_name():
    """Name of the active kernel implementation ('c' or 'python')."""
    return kernels.BACKEND

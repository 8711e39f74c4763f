"""Kernel backend selection.

The compiled extension is preferred when it imports; setting
``PORISM_BACKEND=python`` forces the pure-Python kernels, and
``PORISM_BACKEND=cython`` makes a missing extension a hard error
(useful in CI to guarantee the compiled path is exercised).
"""

import os

_requested = os.environ.get("PORISM_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _kernels_py as kernels
elif _requested == "cython":
    from . import _kernels as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND

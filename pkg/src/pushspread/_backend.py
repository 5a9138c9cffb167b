"""Kernel backend selection.

The compiled extension is used when importable; setting the environment
variable ``PUSHSPREAD_PURE=1`` forces the pure-Python kernels.
"""

import os

if os.environ.get("PUSHSPREAD_PURE", "") not in ("", "0"):
    from . import _pykernels as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        from . import _pykernels as kernels

BACKEND = kernels.BACKEND

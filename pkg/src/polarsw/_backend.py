"""Kernel backend selection.

The compiled extension is used when importable; ``POLARSW_PURE=1`` forces the
numpy fallback. Both expose ``butterfly``, ``sc``, ``scl`` and ``sys_solve``.
"""

import os

from . import _pykernels

if os.environ.get("POLARSW_PURE", "") not in ("", "0"):
    kernels = _pykernels
    NAME = "python"
else:
    try:
        from . import _ckernels as kernels
    except ImportError:
        kernels = _pykernels
        NAME = "python"
    else:
        NAME = "cython"

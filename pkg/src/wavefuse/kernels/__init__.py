"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``WAVEFUSE_DISABLE_NUMBA`` is unset or falsy. Setting it to ``1``
forces the numpy implementations. The choice is made once, at import.
"""

import os

from . import _numpy as numpy_kernels

DISABLE_ENV = "WAVEFUSE_DISABLE_NUMBA"


def _numba_requested():
    return os.environ.get(DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes", "on")


try:
    from . import _numba as numba_kernels
except ImportError:  # numba missing or broken
    numba_kernels = None

USING_NUMBA = numba_kernels is not None and _numba_requested()
backend = numba_kernels if USING_NUMBA else numpy_kernels
BACKEND_NAME = "numba" if USING_NUMBA else "numpy"

filter_down = backend.filter_down
upsample_filter = backend.upsample_filter
jacobi_eigh = backend.jacobi_eigh
train_epoch = backend.train_epoch

__all__ = [
    "BACKEND_NAME",
    "USING_NUMBA",
    "filter_down",
    "upsample_filter",
    "jacobi_eigh",
    "train_epoch",
    "numpy_kernels",
    "numba_kernels",
]

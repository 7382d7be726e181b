"""Select the compiled kernels when available, else the numpy fallback.

Set ``IIDS_KERNELS=python`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("IIDS_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py
    else:
        BACKEND = "cython"
else:
    _impl = _kernels_py

best_split = _impl.best_split
apply_tree = _impl.apply_tree
MIN_GAIN = _kernels_py.MIN_GAIN

"""Backend selection for the hot kernels.

The compiled ``_kernels`` extension is used when it imports; otherwise the
pure-Python ``_kernels_py`` module is used. Setting ``SENSORCONTRACT_PURE=1``
forces the fallback. Both backends produce bit-identical results.
"""

import os

from . import _kernels_py

if os.environ.get("SENSORCONTRACT_PURE", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

mix64 = _impl.mix64
stream_key = _impl.stream_key
uniform01 = _impl.uniform01
tree_payoffs = _impl.tree_payoffs
tree_payoffs_batch = _impl.tree_payoffs_batch
simulate_block = _impl.simulate_block


def backends():
    """Map of every importable backend name to its module."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels
        found["cython"] = _kernels
    except ImportError:
        pass
    return found

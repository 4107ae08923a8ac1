"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the NumPy
fallback. Setting ``LATKPP_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("LATKPP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback

ive_sequence = _impl.ive_sequence
sturm_count = _impl.sturm_count
sturm_largest = _impl.sturm_largest
power_iterate = _impl.power_iterate
rk4_lattice = _impl.rk4_lattice


def backends():
    """Map of available backend names to kernel modules."""
    out = {"python": _fallback}
    try:
        from . import _core

        out["cython"] = _core
    except ImportError:
        pass
    return out

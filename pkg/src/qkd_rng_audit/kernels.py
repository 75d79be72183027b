"""Backend selection for the protocol pipeline kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``QKD_RNG_AUDIT_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the pure-Python twin in ``_fallback`` is used.
"""

import os

from . import _fallback

VIEW_BITS_MAX = 62


def _load():
    if os.environ.get("QKD_RNG_AUDIT_PURE_PYTHON", "") not in ("", "0"):
        return _fallback, "python"
    try:
        from . import _kernels
    except ImportError:
        return _fallback, "python"
    return _kernels, "cython"


_impl, BACKEND = _load()
toeplitz_hash = _impl.toeplitz_hash
pipeline_batch = _impl.pipeline_batch


def backends():
    """Every importable backend as a ``{name: module}`` mapping."""
    out = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out


def view_bits(n: int, k: int, toeplitz: bool) -> int:
    """Width of the packed public-view code produced by ``pipeline_batch``."""
    return 4 * n + (n + k - 1 if toeplitz else 0)

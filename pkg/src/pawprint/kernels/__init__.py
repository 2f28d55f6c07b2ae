"""Hot numeric kernels with a compiled core and a pure-NumPy fallback.

The compiled extension is preferred when present; set PAWPRINT_KERNELS to
``native`` or ``fallback`` to force one side (``native`` raises if the
extension was not built). ``IMPLEMENTATION`` records which one loaded.
"""

import os

_requested = os.environ.get("PAWPRINT_KERNELS", "auto")
if _requested not in ("auto", "native", "fallback"):
    raise RuntimeError(
        f"PAWPRINT_KERNELS must be auto, native or fallback, got {_requested!r}"
    )

if _requested == "fallback":
    from . import fallback as _impl

    IMPLEMENTATION = "fallback"
else:
    try:
        from . import _native as _impl

        IMPLEMENTATION = "native"
    except ImportError:
        if _requested == "native":
            raise
        from . import fallback as _impl

        IMPLEMENTATION = "fallback"

resize_bilinear = _impl.resize_bilinear
rotate_bilinear = _impl.rotate_bilinear
lbp_code_map = _impl.lbp_code_map
convolve_valid = _impl.convolve_valid
lp_pool = _impl.lp_pool
divisive_normalize = _impl.divisive_normalize
dcd_epoch = _impl.dcd_epoch
householder_tridiag = _impl.householder_tridiag
tql_implicit = _impl.tql_implicit

__all__ = [
    "IMPLEMENTATION",
    "resize_bilinear",
    "rotate_bilinear",
    "lbp_code_map",
    "convolve_valid",
    "lp_pool",
    "divisive_normalize",
    "dcd_epoch",
    "householder_tridiag",
    "tql_implicit",
]

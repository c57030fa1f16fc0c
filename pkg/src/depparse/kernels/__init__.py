"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension is used when importable; set DEPPARSE_PURE_PYTHON=1
to force the fallback. Both backends implement the same contracts (see
pure.py); they agree to float rounding, not bitwise, so determinism
guarantees hold per backend.
"""

import os

from . import pure

if os.environ.get("DEPPARSE_PURE_PYTHON"):
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

NEG = pure.NEG
conv1d_forward = _impl.conv1d_forward
conv1d_backward = _impl.conv1d_backward
chu_liu_edmonds = _impl.chu_liu_edmonds

__all__ = [
    "BACKEND",
    "NEG",
    "chu_liu_edmonds",
    "conv1d_backward",
    "conv1d_forward",
    "pure",
]

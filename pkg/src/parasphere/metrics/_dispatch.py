"""Backend selection: compiled kernels when available, pure Python otherwise.

Set PARASPHERE_PURE_PYTHON=1 to force the fallback (read once at import).
"""

import os

_forced_pure = os.environ.get("PARASPHERE_PURE_PYTHON", "") not in ("", "0")

if _forced_pure:
    from . import _editpure as _impl
    BACKEND = "pure"
else:
    try:
        from . import _editcore as _impl
        BACKEND = "cython"
    except ImportError:
        from . import _editpure as _impl
        BACKEND = "pure"

levenshtein = _impl.levenshtein
ted_kernel = _impl.ted_kernel


def backend_name() -> str:
    return BACKEND

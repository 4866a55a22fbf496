"""Pick the compiled kernels when available, else the numpy fallback.

Set ``NBSR_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("NBSR_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

score = _impl.score
update = _impl.update
bucket = _impl.bucket

"""Select the pivoting kernel: compiled if available, pure Python otherwise.

Set ``LUKPROB_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("LUKPROB_PURE_PYTHON") == "1":
    from ._kernels_py import normalize, pivot
    BACKEND = "python"
else:
    try:
        from ._kernels import normalize, pivot
        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import normalize, pivot
        BACKEND = "python"

__all__ = ["BACKEND", "normalize", "pivot"]

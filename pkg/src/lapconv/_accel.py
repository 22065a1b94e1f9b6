"""Select the compiled kernel core when available, else the numpy fallback.

Set ``LAPCONV_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
impl = _fallback

if not os.environ.get("LAPCONV_PURE_PYTHON"):
    try:
        from . import _core as impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        impl = _fallback

__all__ = ["BACKEND", "impl"]

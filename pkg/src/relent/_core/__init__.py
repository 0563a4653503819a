"""Numerical core with backend selection.

The solver inner loops funnel through three kernels: Hermitian
eigendecomposition, a relative-entropy-style objective evaluated against a
fixed eigensystem, and a golden-section line search along matrix segments.
A Cython extension implements them with direct LAPACK calls; a pure-NumPy
fallback with identical semantics is selected when the extension is missing
or when ``RELENT_PURE_PYTHON=1`` is set.
"""

import os

from . import fallback

_impl = fallback
if os.environ.get("RELENT_PURE_PYTHON", "0").strip() in ("", "0"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = fallback

eigh = _impl.eigh
relent_fixed = _impl.relent_fixed
line_search_dir = _impl.line_search_dir


def backend():
    """Name of the active backend: 'compiled' or 'fallback'."""
    return "fallback" if _impl is fallback else "compiled"

"""Hot-loop kernels with a compiled core and a NumPy fallback.

The compiled extension (``_fast``, built from Cython) is preferred when
present; otherwise the pure NumPy reference (``_ref``) is used.  Both
produce bit-identical results.  Set ``WRISTCHANNEL_PURE_PYTHON=1`` to force
the fallback, e.g. for benchmarking one against the other.
"""

import os

from . import _ref

if os.environ.get("WRISTCHANNEL_PURE_PYTHON", "0") not in ("0", ""):
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _fast as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _ref
        BACKEND = "python"

sample_entropy_counts = _impl.sample_entropy_counts
best_split_column = _impl.best_split_column
still_run_bounds = _impl.still_run_bounds
exam_trials = _impl.exam_trials

__all__ = [
    "BACKEND",
    "sample_entropy_counts",
    "best_split_column",
    "still_run_bounds",
    "exam_trials",
]

"""Kernel backend selection.

The compiled extension is preferred; the numpy/fsum reference backend is the
fallback.  Set LCENTROPY_BACKEND=python (or =compiled) to force a choice.
"""

import os

_requested = os.environ.get("LCENTROPY_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _ref as _impl
elif _requested == "compiled":
    from . import _fast as _impl  # raises ImportError if not built
else:
    try:
        from . import _fast as _impl
    except ImportError:
        from . import _ref as _impl

BACKEND = _impl.BACKEND

sum_comp = _impl.sum_comp
dot_comp = _impl.dot_comp
xlogx_sum = _impl.xlogx_sum
abs_step_sum = _impl.abs_step_sum
min_overlap_sum = _impl.min_overlap_sum
first_moment = _impl.first_moment
second_central_moment = _impl.second_central_moment
convolve_direct = _impl.convolve_direct
quad_xlogx = _impl.quad_xlogx

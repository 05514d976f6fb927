"""Kernel backend selection: compiled extension if available, numpy otherwise.

Set ``RETOUCHQ_FORCE_NUMPY=1`` to skip the extension (used by the benchmark
and the backend-equivalence tests).
"""

import os

if os.environ.get("RETOUCHQ_FORCE_NUMPY"):
    from . import _npimpl as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _cyext as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _npimpl as _impl

        BACKEND = "numpy"

srgb_to_lab = _impl.srgb_to_lab
lab_to_srgb = _impl.lab_to_srgb
mean_lab_distance = _impl.mean_lab_distance
mean_lab_distance_lab = _impl.mean_lab_distance_lab
lab_histogram = _impl.lab_histogram
luminance = _impl.luminance
adam_step = _impl.adam_step

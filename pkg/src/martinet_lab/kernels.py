"""Backend dispatch for the numeric kernels.

Two interchangeable implementations exist: a numba-jitted one
(``_kernels_numba``) and a pure-numpy reference (``_kernels_numpy``).
The jitted backend is used by default when numba imports cleanly; set the
environment variable LAB_NO_NUMBA to any non-empty value to force the
numpy path (useful for debugging and for the benchmark comparison).
"""

import os

from . import _kernels_numpy

NUMBA_ENABLED = False

if not os.environ.get("LAB_NO_NUMBA"):
    try:
        from . import _kernels_numba as _backend
        NUMBA_ENABLED = True
    except ImportError:
        _backend = _kernels_numpy
else:
    _backend = _kernels_numpy


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"


holonomy_trapz = _backend.holonomy_trapz
holonomy_cumsum = _backend.holonomy_cumsum
polyline_length = _backend.polyline_length
length_and_grad = _backend.length_and_grad
holonomy_and_grad = _backend.holonomy_and_grad
rk4_angle = _backend.rk4_angle
rk4_hamiltonian = _backend.rk4_hamiltonian
winding_numbers = _backend.winding_numbers
segment_intersections = _backend.segment_intersections

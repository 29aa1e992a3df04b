import math

import numpy as np
import pytest

from martinet_lab.core import PlanarCurve, StructureParams


@pytest.fixture
def params():
    return StructureParams(b=5)


@pytest.fixture
def params7():
    return StructureParams(b=7)


def unit_square(n_per_side=1024):
    """CCW unit square boundary as a closed polyline."""
    u = np.linspace(0.0, 1.0, n_per_side + 1)
    x1 = np.concatenate((u, np.ones(n_per_side), u[::-1][1:],
                         np.zeros(n_per_side)))
    x2 = np.concatenate((np.zeros(n_per_side + 1), u[1:], np.ones(n_per_side),
                         u[::-1][1:]))
    t = np.arange(len(x1), dtype=float)
    return PlanarCurve(t=t, x1=x1, x2=x2)


def circle(center, r, n=256, ccw=True, phase=0.0):
    ang = np.linspace(0.0, 2.0 * math.pi, n + 1)
    if not ccw:
        ang = ang[::-1]
    x1 = center[0] + r * np.cos(ang + phase)
    x2 = center[1] + r * np.sin(ang + phase)
    return PlanarCurve(t=np.arange(n + 1, dtype=float), x1=x1, x2=x2)

import numpy as np
import pytest

from trimiga.nurbs import KnotVector, NurbsCurve, NurbsSurface
from trimiga.shapes import (
    EXACT_ARC_WEIGHT,
    hole_arc_curve,
    identity_region,
    outer_polyline_curve,
    plate_with_hole_region,
    unit_square_surface,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240615)


@pytest.fixture
def plate_region():
    """Quarter plate with the as-printed arc weight 0.707."""
    return plate_with_hole_region()


@pytest.fixture
def exact_plate_region():
    """Quarter plate with the exact circular-arc weight sqrt(1/2)."""
    return plate_with_hole_region(arc_weight=EXACT_ARC_WEIGHT)


@pytest.fixture
def poly_plate_region():
    """Quarter plate with all trim weights 1 (polynomial map)."""
    return plate_with_hole_region(arc_weight=1.0)


@pytest.fixture
def square_region():
    return identity_region()


@pytest.fixture
def arc_curve():
    return hole_arc_curve()


@pytest.fixture
def polyline_curve():
    return outer_polyline_curve()


@pytest.fixture
def bilinear_surface():
    return unit_square_surface()


@pytest.fixture
def curved_surface(rng):
    """Rational biquadratic surface: genuinely 3D, curved, and fold-free.

    The in-plane control net stays monotone in both directions so the patch
    never folds over itself; z and the weights wobble freely.
    """
    kv = KnotVector([0, 0, 0, 0.5, 1, 1, 1], 2)
    net = 0.3 * rng.random((4, 4, 3))
    net[..., 0] += np.arange(4)[:, None]
    net[..., 1] += np.arange(4)[None, :]
    weights = 0.5 + rng.random((4, 4))
    return NurbsSurface(kv, kv, net, weights)


def segment(p0, p1):
    kv = KnotVector([0, 0, 1, 1], 1)
    return NurbsCurve(kv, [p0, p1])

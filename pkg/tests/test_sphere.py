import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caradomains.sphere import (
    HALF_PI, INF, Disc, DiscComplement, Point, Polygon, as_point, invert, sph_diam, sph_diam_bounds,
    sph_dist, sph_dist_array,
)

coord = st.floats(-50, 50, allow_nan=False)
points = st.builds(complex, coord, coord)
sphere_points = st.one_of(points, st.just(INF))


def test_zero_to_infinity_is_quarter_turn(oracle):
    assert sph_dist(0j, INF) == HALF_PI
    assert sph_dist(0j, INF) == oracle["sph_dist_0_inf"]


def test_known_distances(oracle):
    assert sph_dist(0j, 1 + 0j) == pytest.approx(oracle["sph_dist_0_1"], abs=1e-15)
    assert sph_dist(0j, 2 + 0j) == pytest.approx(oracle["sph_dist_0_2"], abs=1e-15)
    assert sph_dist(1 + 0j, 1j) == pytest.approx(oracle["sph_dist_1_i"], abs=1e-15)
    assert sph_dist(3 + 4j, 3 + 4j) == 0.0


def test_invert():
    assert invert(2 + 0j) == 0.5
    assert invert(0j) is INF
    assert invert(INF) == 0
    assert sph_dist(invert(1 + 0j), invert(1j)) == pytest.approx(sph_dist(1 + 0j, 1j), abs=1e-15)


def test_as_point_coercions():
    assert as_point("inf") is INF
    assert as_point([1, 2]) == 1 + 2j
    with pytest.raises(ValueError):
        as_point(complex(math.inf, 0))


@given(sphere_points, sphere_points)
def test_symmetric_and_bounded(p, q):
    d = sph_dist(p, q)
    assert 0.0 <= d <= HALF_PI + 1e-15
    assert d == pytest.approx(sph_dist(q, p), abs=1e-15)


@given(sphere_points, sphere_points, sphere_points)
def test_triangle_inequality(p, q, w):
    assert sph_dist(p, w) <= sph_dist(p, q) + sph_dist(q, w) + 1e-12


@given(sphere_points, sphere_points)
def test_inversion_is_isometry(p, q):
    assert sph_dist(invert(p), invert(q)) == pytest.approx(sph_dist(p, q), abs=1e-12)


@given(st.lists(points, min_size=1, max_size=20), sphere_points)
def test_array_form_matches_scalar(zs, q):
    arr = sph_dist_array(np.array(zs), q)
    assert np.allclose(arr, [sph_dist(z, q) for z in zs], atol=1e-14)


def test_diameters(oracle):
    assert sph_diam([Disc(0j, 1.0), DiscComplement(0j, 1.0)]) == pytest.approx(HALF_PI)
    assert sph_diam(Point(3 + 0j)) == 0.0
    t = np.exp(2j * np.pi * np.arange(64) / 64)
    lo, hi = sph_diam_bounds(Polygon(tuple(t)), 1e-3)
    assert lo <= oracle["sph_dist_1_minus1"] + 1e-12 and hi >= lo
    assert hi == pytest.approx(oracle["sph_dist_1_minus1"], abs=1e-3)


@settings(max_examples=40)
@given(points, st.floats(0.01, 20))
def test_disc_diameter_is_cap_diameter(c, r):
    # diameter of a disc is the spherical distance between the farthest pair of boundary points on its
    # line through the origin; compare with brute force on the boundary circle
    d = sph_diam(Disc(c, r))
    t = np.exp(2j * np.pi * np.arange(720) / 720)
    z = c + r * t
    brute = max(float(np.max(sph_dist_array(z, w))) for w in z[::8])
    assert d >= brute - 1e-9
    assert d <= HALF_PI + 1e-15

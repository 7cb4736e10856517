import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caradomains.curves import circle
from caradomains.domains import PointedDomain, annulus, builtin_family, unit_disc
from caradomains.hyperbolic import (
    DistInterval, abs_log, density, density_bounds, dist_point_to_curve, hyp_dist, hyp_length,
)
from caradomains.sphere import DiscComplement

E2PI = math.exp(2 * math.pi)


def test_disc_density_at_centre():
    d = density(unit_disc(), 0j)
    assert d.lower == d.upper == 2.0


def test_annulus_density_on_equator(oracle):
    R = E2PI
    d = density(annulus(1, R), math.sqrt(R))
    assert d.lower == pytest.approx(oracle["annulus_density_sqrtR_e2pi"], rel=1e-12)
    assert d.width <= 0.005 * d.upper


@pytest.mark.parametrize("key,R", [("e", math.e), ("e_pi", math.exp(math.pi)), ("e_2pi", E2PI)])
def test_equator_length(oracle, key, R):
    L = hyp_length(annulus(1, R), circle(0j, math.sqrt(R), 256))
    exact = oracle["equator_length"][key]
    # an inscribed polygon is longer than the geodesic it approximates
    assert exact <= L.upper
    assert abs(L.mid - exact) <= 0.01 * exact
    assert L.width <= 0.01 * exact


def test_circle_in_disc(oracle):
    L = hyp_length(unit_disc(), circle(0j, 0.5, 512))
    assert L.lower <= oracle["disc_circle_half"] * (1 + 1e-4)
    assert L.upper >= oracle["disc_circle_half"] * (1 - 1e-4)


def test_degenerate_curve_has_zero_length():
    L = hyp_length(unit_disc(), np.array([0.1 + 0.1j, 0.1 + 0.1j]), closed=False)
    assert (L.lower, L.upper) == (0.0, 0.0)


def test_disc_distance(oracle):
    d = hyp_dist(unit_disc(), 0j, 0.5 + 0j)
    exact = oracle["disc_dist_0_half"]
    assert d.contains(exact, 1e-12)
    assert d.upper <= 1.02 * exact
    assert hyp_dist(unit_disc(), 0.3j, 0.3j).upper == 0.0


def test_half_equator_bound():
    R = 16.0
    d = hyp_dist(annulus(1, R), 4 + 0j, -4 + 0j)
    assert d.lower <= math.pi**2 / math.log(R) * 1.001


def test_point_to_curve(oracle):
    U = annulus(1, 9.0, basepoint=2 + 0j)
    d = dist_point_to_curve(U, 2 + 0j, circle(0j, 3.0, 256))
    exact = oracle["radial_A9_2_3"]
    assert d.contains(exact, 1e-9)
    assert d.upper <= 1.05 * exact
    on = dist_point_to_curve(annulus(1, 9.0), 3 + 0j, circle(0j, 3.0, 256))
    assert on.lower == 0.0 and on.upper <= 0.05


def test_abs_log_interval():
    assert abs_log(DistInterval(0.5, 2.0)).lower == 0.0
    iv = abs_log(DistInterval(2.0, 4.0))
    assert iv.lower == pytest.approx(math.log(2)) and iv.upper == pytest.approx(math.log(4))


QUAD = builtin_family("inverse_symmetric_quad")(3)
in_quad = st.builds(complex, st.floats(-4, 4), st.floats(-4, 4)).filter(lambda z: bool(QUAD.contains(z)))


@settings(max_examples=50, deadline=None)
@given(in_quad)
def test_density_bracket_well_formed(z):
    d = density(QUAD, z)
    assert 0 < d.lower <= d.upper


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 0.95), st.floats(0, 2 * math.pi))
def test_domain_monotonicity(r, t):
    # D(0,1) is inside D(0,2), so its density is larger everywhere in D(0,1)
    z = r * complex(math.cos(t), math.sin(t))
    small = density(unit_disc(), z)
    big = density(PointedDomain(0j, (DiscComplement(0j, 2.0),)), z)
    assert small.lower >= big.upper * (1 - 1e-12)
    lo, hi = density_bounds(unit_disc(), np.array([z]))
    assert lo[0] <= hi[0]


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8), st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_disc_distance_brackets_closed_form(a, b, c, d):
    z, w = complex(a, b), complex(c, d)
    if abs(z) > 0.95 or abs(w) > 0.95:
        return
    exact = 2 * math.atanh(abs((z - w) / (1 - z.conjugate() * w)))
    iv = hyp_dist(unit_disc(), z, w)
    assert iv.lower <= exact * (1 + 1e-9) + 1e-12
    assert iv.upper >= exact * (1 - 1e-9) - 1e-12

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caradomains.carabounds import (
    MapSpec, cara_bound, condition4_certificate, family_bound, first_term, hyperbolic_lipschitz,
    length_distance, trend, uniform_perfectness,
)
from caradomains.domains import DomainFamily, annulus, builtin_family, unit_disc

E_PI, E_2PI = math.exp(math.pi), math.exp(2 * math.pi)


def test_disc_first_term_uses_hemisphere_diameter():
    # delta#(0) = pi/4 and the closed exterior of the unit disc is a hemisphere of diameter pi/2
    t = first_term(unit_disc())
    assert t.lower == pytest.approx(abs(math.log(math.pi**2 / 8)), abs=1e-12)
    assert t.width <= 1e-12


def test_simply_connected_terms_are_zero():
    ld = length_distance(unit_disc())
    for iv in (ld.L, ld.D, ld.L_E, ld.D_E):
        assert (iv.lower, iv.upper) == (0.0, 0.0)


@pytest.fixture(scope="module")
def annulus_report():
    return cara_bound(annulus(1, E_2PI, basepoint=E_PI), seeds=1)


def test_annulus_length_term(oracle, annulus_report):
    rep = annulus_report
    assert rep.L.contains(oracle["annulus_L_e2pi"], 0.02 * oracle["annulus_L_e2pi"])
    assert rep.D.upper <= 0.05
    assert rep.L_E == rep.L and rep.D_E == rep.D


def test_bound_is_the_sum(annulus_report):
    rep = annulus_report
    assert rep.bound.lower == pytest.approx(rep.first_term.lower + rep.L.lower + rep.D.lower)
    assert rep.bound.upper == pytest.approx(rep.first_term.upper + rep.L.upper + rep.D.upper)
    assert rep.finite


def test_shrinking_component_grows_bound():
    F = builtin_family("disc_nibble")
    fb = family_bound(F, [4, 40])
    assert fb.reports[40].bound.lower > fb.reports[4].bound.upper
    assert fb.trends()["bound"] == "increasing"


def test_constant_family_sup_equals_member():
    U = annulus(1, 4)
    F = DomainFamily("const", lambda m: U, (1, None), {}, 2)
    fb = family_bound(F, [1, 2, 3])
    assert fb.sup_bound == fb.reports[1].bound


def test_invalid_members_are_listed():
    fb = family_bound(builtin_family("merging_components"), [1, 2])
    assert fb.failures == {} or all(isinstance(v, str) for v in fb.failures.values())
    F = DomainFamily("bad", lambda m: annulus(1, 4, basepoint=0.5), (1, None), {}, 2)
    assert list(family_bound(F, [1]).failures) == [1]


def test_condition4_examples():
    U = annulus(1, 16, basepoint=4)
    assert condition4_certificate(U, 0.05, 0.1, seeds=1).status == "pass"
    bad = condition4_certificate(U, math.pi, 0.1, seeds=1)
    assert bad.status == "fail" and bad.items["c"]["status"] == "fail"


def test_condition4_simply_connected():
    cert = condition4_certificate(unit_disc(), 0.5, 0.5)
    assert cert.items["b"]["status"] == "pass"
    assert cert.items["c"]["lower"] == pytest.approx(math.pi / 4)
    assert cert.status == "pass"
    assert condition4_certificate(unit_disc(), 0.9, 0.5).status == "fail"


def test_condition4_rejects_bad_thresholds():
    with pytest.raises(ValueError):
        condition4_certificate(unit_disc(), 0.0, 1.0)


def test_uniform_perfectness():
    assert uniform_perfectness(unit_disc()).K2 <= 2.1
    assert math.isfinite(uniform_perfectness(annulus(1, E_2PI)).K2)
    F = builtin_family("disc_nibble")
    ks = [uniform_perfectness(F(m)).K2 for m in (4, 16, 64)]
    # round nibbles stay uniformly perfect: bounded, not increasing
    assert max(ks) < 3.0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_power_maps_are_local_isometries(d):
    R = 4.0
    U = annulus(1, R, basepoint=2)
    V = annulus(1, R**d, basepoint=2.0**d)
    rep = hyperbolic_lipschitz(MapSpec.power(d), U, V, 1.0, n=60)
    assert abs(rep.M - 1) <= max(2 * rep.width, 1e-9)
    assert abs(rep.K - 1) <= max(2 * rep.width, 1e-9)


def test_schwarz_contraction():
    V = unit_disc()
    rep = hyperbolic_lipschitz(MapSpec((0.0, 0.5)), unit_disc(), V, 1.0, n=40)
    assert rep.M < 1


def test_lipschitz_checks_basepoints():
    with pytest.raises(ValueError):
        hyperbolic_lipschitz(MapSpec.power(2), unit_disc(0.5), unit_disc(0.5), 1.0)


def test_mapspec_roundtrip():
    f = MapSpec.from_json({"num": [[0, 0], [1, 0]], "den": [1, [0.5, 0]]})
    assert MapSpec.from_json(f.to_json()) == f
    assert f.deriv(np.array([0.0 + 0j]))[0] == pytest.approx(1.0)


def test_trend_labels():
    from caradomains.hyperbolic import DistInterval as I
    assert trend([I(1, 1.1), I(2, 2.1), I(3, 3.1)]) == "increasing"
    assert trend([I(3, 3.1), I(2, 2.1), I(1, 1.1)]) == "decreasing"


@settings(max_examples=25, deadline=None)
@given(st.floats(1.5, 50), st.floats(0.05, 0.95))
def test_annulus_first_term_closed_form(R, frac):
    # delta# of a point of A(0,1,R) is its spherical distance to the nearer circle; the complement
    # (closed unit disc plus |z| >= R) has spherical diameter pi/2 because it contains 0 and infinity
    r = math.exp(frac * math.log(R))
    U = annulus(1, R, basepoint=r)
    d = min(math.atan2(r - 1, 1 + r), math.atan2(R - r, 1 + r * R))
    assert first_term(U).mid == pytest.approx(abs(math.log(d * math.pi / 2)), rel=1e-9, abs=1e-12)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caradomains.curves import ClosedCurve
from caradomains.domains import PointedDomain, annulus, unit_disc
from caradomains.extremal import (ExtremalError, annulus_between, candidate_valid, collar_modulus,
                                  containment_check, curve_containment_check, radius_about,
                                  separating_annulus_max)
from caradomains.sphere import Disc, DiscComplement, Point

SYM_E = (Disc(-3 + 0j, 1.0), Disc(3 + 0j, 1.0))
SYM_F = (Disc(0j, 1.0), DiscComplement(0j, 5.0))


def subdisc(c: float, r: float) -> PointedDomain:
    return PointedDomain(complex(c), (DiscComplement(complex(c), r),))


@pytest.fixture(scope="module")
def symmetric():
    return separating_annulus_max(SYM_E, SYM_F)


def test_concentric_modulus_exact(oracle):
    res = separating_annulus_max((Disc(0j, 1.0),), (DiscComplement(0j, 4.0),))
    assert res.candidate.kind == "round"
    assert res.lo == pytest.approx(oracle["ring_modulus_1_4"], rel=1e-9)
    assert res.lo <= res.hi
    assert res.hi == pytest.approx(oracle["ring_modulus_1_4"], rel=0.02)


def test_symmetric_instance_reflects(symmetric):
    c = symmetric.candidate
    assert candidate_valid(c, SYM_E, SYM_F)
    rc = c.reflect()
    assert candidate_valid(rc, SYM_E, SYM_F)
    assert rc.modulus == c.modulus
    np.testing.assert_array_equal(rc.equator.array, -c.equator.array)


def test_symmetric_instance_has_no_round_candidate(symmetric):
    assert all(c.kind != "round" for c in symmetric.candidates)
    assert 0 < symmetric.lo <= symmetric.hi


def test_eccentric_pair_bracket():
    res = separating_annulus_max((Disc(0.5 + 0j, 0.5),), (DiscComplement(0j, 4.0),), seeds=1)
    assert res.lo <= res.hi * (1 + 1e-12)


def test_rejects_point_sets_and_overlap():
    with pytest.raises(ExtremalError):
        separating_annulus_max((Point(0j),), (DiscComplement(0j, 2.0),))
    with pytest.raises(ExtremalError):
        separating_annulus_max((Disc(0j, 1.0),), (Disc(0.5 + 0j, 1.0), DiscComplement(0j, 5.0)))


def test_collar_modulus_decreasing():
    L = np.linspace(0.1, 30, 50)
    m = [collar_modulus(x) for x in L]
    assert all(a > b for a, b in zip(m, m[1:]))
    assert collar_modulus(math.inf) == 0.0


def test_half_disc_contained_in_disc():
    rep = containment_check(subdisc(0, 0.5), unit_disc(), 3.0)
    assert rep.passed
    assert set(rep.items) == {"1_radius", "2_delta_ratio", "3_length", "4_distance"}


def test_domain_in_itself_fails_radius():
    rep = containment_check(unit_disc(), unit_disc(), 3.0)
    assert rep.items["1_radius"]["status"] == "fail"
    assert rep.status == "fail"


@pytest.mark.parametrize("eps", ["0.1", "0.05", "0.03", "0.01"])
def test_shrinking_subdisc_radius_matches_oracle(eps, oracle):
    e = float(eps)
    lo, hi, _ = radius_about(unit_disc(), subdisc(1 - 2 * e, e))
    want = oracle["subdisc_radius"][eps]
    assert lo <= want <= hi
    assert lo == pytest.approx(want, rel=1e-6)


def test_shrinking_subdisc_fails_item_one():
    rep = containment_check(subdisc(0.98, 0.01), unit_disc(), 3.0)
    assert rep.items["1_radius"]["status"] == "fail"


def test_tangent_subdisc_is_infinite():
    lo, hi, info = radius_about(unit_disc(), subdisc(0.95, 0.05))
    assert lo == hi == math.inf


def test_not_contained_rejected():
    with pytest.raises(ExtremalError):
        containment_check(subdisc(0.5, 1.0), unit_disc(), 3.0)


def test_curve_containment_equator_and_hugging():
    A = annulus(1.0, 16.0).with_basepoint(4 + 0j)
    t = 2 * np.pi * np.arange(256) / 256
    assert curve_containment_check(ClosedCurve.from_array(4 * np.exp(1j * t)), 4 + 0j, A, 5.0).status == "pass"
    assert curve_containment_check(ClosedCurve.from_array(1.05 * np.exp(1j * t)), 1.05 + 0j, A, 5.0).status \
        == "fail"


def test_annulus_between_engines(oracle):
    V, W = subdisc(0, 4.0), subdisc(0.5, 0.5)
    ex = annulus_between(W, V, engine="exact")
    assert ex.modulus.lower == pytest.approx(oracle["ring_modulus_half_in_4"], rel=1e-10)
    me = annulus_between(W, V, engine="meridian", seeds=1)
    assert me.modulus.lower <= oracle["ring_modulus_half_in_4"] <= me.modulus.upper * (1 + 1e-9)
    assert me.modulus.lower == pytest.approx(oracle["ring_modulus_half_in_4"], rel=1e-3)
    assert ex.domain.contains_point(ex.domain.basepoint)


def test_annulus_between_requires_strict_inclusion():
    with pytest.raises(ExtremalError):
        annulus_between(subdisc(0, 1.0), subdisc(0, 1.0))
    with pytest.raises(ValueError):
        annulus_between(subdisc(0, 0.5), subdisc(0, 1.0), engine="bogus")


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.8), st.floats(0.0, 0.9), st.floats(1.5, 6.0))
def test_eccentric_exact_modulus_matches_closed_form(r, frac, R):
    c = frac * (R - r) * 0.9
    if c < 1e-3:
        want = math.log(R / r) / (2 * math.pi)
    else:
        import oracles
        want = oracles.eccentric_ring_modulus(c, r, R)
    got = annulus_between(subdisc(c, r), subdisc(0, R)).modulus.lower
    assert got == pytest.approx(want, rel=1e-6, abs=1e-9)

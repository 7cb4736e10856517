import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caradomains.curves import (
    ClosedCurve, OnCurveError, circle, is_simple, resample_closed, winding_number, winding_numbers,
)


def test_unit_circle_windings():
    c = circle(0j, 1.0, 64)
    assert winding_number(c, 0j) == 1
    assert winding_number(c, 2 + 0j) == 0
    assert winding_number(c.reversed(), 0j) == -1


def test_doubled_square():
    sq = [0, 1, 1 + 1j, 1j]
    assert winding_number(np.array(sq + sq, dtype=complex), 0.5 + 0.5j) == 2


def test_on_curve_raises():
    with pytest.raises(OnCurveError):
        winding_number(np.array([0, 1, 1 + 1j, 1j]), 0.5 + 0j)


def test_json_roundtrip_and_schema():
    c = circle(1 + 1j, 2.0, 16)
    assert ClosedCurve.from_json(c.to_json()) == c
    with pytest.raises(ValueError):
        ClosedCurve.from_json({"points": []})


def test_simplicity():
    assert is_simple(circle(0j, 1.0, 32))
    bowtie = np.array([0, 1 + 1j, 1, 1j], dtype=complex)
    assert not is_simple(bowtie)


@settings(max_examples=60)
@given(st.integers(1, 4), st.floats(0.1, 5), st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2 * math.pi))
def test_winding_counts_turns(k, r, x, y, t):
    c = complex(x, y)
    n = 40 * k
    z = c + r * np.exp(1j * (t + 2 * np.pi * k * np.arange(n) / n))
    assert winding_numbers(z, [c, c + 3 * r])[0] == k
    assert winding_numbers(z, [c + 3 * r])[0] == 0


@settings(max_examples=40)
@given(st.integers(8, 64), st.integers(3, 100))
def test_resample_stays_on_curve(n, m):
    z = circle(0j, 1.0, n).array
    w = np.abs(np.roll(z, -1) - z)
    out = resample_closed(z, w, m)
    assert len(out) == m
    assert np.all(np.abs(out) <= 1 + 1e-12)
    assert np.all(np.abs(out) >= math.cos(math.pi / n) - 1e-12)

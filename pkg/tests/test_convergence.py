import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caradomains.convergence import (
    cara_limit, classify_family, hausdorff_dist, tends_to_infinity, tends_to_zero,
)
from caradomains.domains import DomainFamily, annulus, builtin_family
from caradomains.sphere import Disc, DiscComplement, Polygon


def test_disc_hausdorff(oracle):
    d = hausdorff_dist(Disc(0j, 1.0), Disc(0j, 2.0), "euclidean")
    assert d.lower == d.upper == pytest.approx(oracle["hausdorff_D01_D02"], abs=1e-9)
    d = hausdorff_dist(Disc(0j, 1.0), Disc(3 + 0j, 1.0), "euclidean")
    assert d.contains(oracle["hausdorff_D01_D31"], 1e-9)
    K = Disc(1j, 0.3)
    assert hausdorff_dist(K, K).upper == 0.0


def test_polygon_hausdorff_brackets_disc_value():
    t = np.exp(2j * np.pi * np.arange(256) / 256)
    P = Polygon(tuple(t))
    d = hausdorff_dist(P, Disc(3 + 0j, 1.0), "euclidean", res=1e-2)
    assert d.lower <= 3.0 + 1e-9 and d.upper >= 3.0 - 1e-3


def test_unknown_metric():
    with pytest.raises(ValueError):
        hausdorff_dist(Disc(0j, 1.0), Disc(0j, 2.0), "taxicab")


@settings(max_examples=50)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 3), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 3))
def test_hausdorff_is_a_metric_on_discs(x1, y1, r1, x2, y2, r2):
    A, B = Disc(complex(x1, y1), r1), Disc(complex(x2, y2), r2)
    for metric in ("euclidean", "spherical"):
        ab, ba = hausdorff_dist(A, B, metric), hausdorff_dist(B, A, metric)
        assert ab.lower == pytest.approx(ba.lower, abs=1e-12)
        assert ab.lower >= 0
    if (x1, y1, r1) != (x2, y2, r2):
        assert hausdorff_dist(A, B, "euclidean").lower > 0
    assert hausdorff_dist(A, B, "spherical").upper <= math.pi / 2 + 1e-12


def test_trend_predicates():
    ms = [4, 8, 16, 32, 64]
    assert tends_to_zero(ms, [1 / m for m in ms])
    assert not tends_to_zero(ms, [1 + 1 / m for m in ms])
    assert tends_to_infinity(ms, [math.log(m) ** 2 for m in ms]) or tends_to_infinity(ms, [float(m) for m in ms])
    assert not tends_to_infinity(ms, [2 - 1 / m for m in ms])


def test_constant_sequence_is_its_own_limit():
    U = annulus(1, 4)
    F = DomainFamily("const", lambda m: U, (1, None), {}, 2)
    lim = cara_limit(F, [1, 2, 3])
    assert lim.kind == "nondegenerate" and lim.limit == U


def test_disc_nibble_limit_is_the_disc():
    lim = cara_limit(builtin_family("disc_nibble"), [8, 16, 32, 64])
    assert lim.descriptor() == "connectivity-drop(2->1)"
    assert lim.limit.n == 1
    K = lim.limit.components[0]
    assert isinstance(K, DiscComplement) and K.radius == pytest.approx(1.0, abs=1e-6)
    assert lim.limit.basepoint == 0
    kinds = {w.kind for w in lim.witnesses}
    assert "vanishing-diameter" in kinds


def test_fig6_limit_degenerates():
    lim = cara_limit(builtin_family("slit_annulus_fig6", {"per_arc": 32}), [8, 16, 32, 64])
    assert lim.kind in ("connectivity-drop", "point")


def test_merging_components():
    lim = cara_limit(builtin_family("merging_components"), [4, 8, 16, 32])
    assert lim.kind == "connectivity-drop"
    assert any(w.kind == "merging" for w in lim.witnesses)


def test_tail_too_short():
    with pytest.raises(ValueError):
        cara_limit(builtin_family("disc_nibble"), [4, 8])


def test_classify_concentric_is_bounded():
    v = classify_family(builtin_family("concentric_annulus"), [1, 2, 4, 8])
    assert v.verdict == "bounded-evidence"
    assert v.csv().splitlines()[0].startswith("m,bound.lower")


def test_classify_disc_nibble_is_unbounded():
    v = classify_family(builtin_family("disc_nibble"), [4, 8, 16, 32])
    assert v.verdict == "unbounded"
    assert v.limit.kind == "connectivity-drop"
    lengths = [x["upper"] for x in v.measurements["length[0|1]"]]
    # the vanishing class has decreasing length that levels off at a positive value
    assert all(b < a for a, b in zip(lengths, lengths[1:]))
    assert lengths[-1] > 10
    D = [x["lower"] for x in v.measurements["D"]]
    assert all(b > a for a, b in zip(D, D[1:]))

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from caradomains.curves import ClosedCurve, winding_numbers
from caradomains.domains import SchemaError
from caradomains.meshcurve import (GridCycle, InstanceError, SeparationInstance, build_mesh_cycle,
                                   decompose_cycle, disc_instance, length_bound, mesh_curve, part_winding,
                                   random_instance, sample_probes, square_bound)
from caradomains.sphere import Disc, DiscComplement

CIRCLE = 2 * np.pi * np.arange(160) / 160


@pytest.fixture(scope="module")
def disc_result():
    inst = disc_instance()
    return inst, mesh_curve(inst)


def test_disc_example_windings_and_counts(disc_result, oracle):
    inst, res = disc_result
    assert res.windings_ok
    assert res.square_bound == pytest.approx(oracle["square_bound_05_2pi"], rel=1e-12)
    assert res.squares <= 100
    assert res.squares <= res.square_bound
    assert res.length.upper <= res.bound
    assert res.length.lower <= res.length.upper
    assert res.edge_dist_E >= inst.r / 4 - 1e-12
    assert res.edge_dist_F > 0


def test_disc_example_curve_separates(disc_result):
    inst, res = disc_result
    w = winding_numbers(res.curve.array, [0j, 3 + 0j, -2.5j])
    assert list(w) == [1, 0, 0]


def test_guide_curve_too_long_rejected():
    with pytest.raises(InstanceError, match="length"):
        disc_instance(R=2.0).check()


def test_guide_curve_too_close_rejected():
    with pytest.raises(InstanceError, match="clearance"):
        disc_instance(E_radius=0.8).check()


def test_square_bound_closed_form(oracle):
    assert square_bound(0.5, 2.0) == pytest.approx(oracle["square_bound_05_2"], rel=1e-12)


def test_length_bound_grows_with_R():
    assert length_bound(0.5, 10.0) > length_bound(0.5, 2 * math.pi) > 0


def test_single_small_disc_single_part():
    G = build_mesh_cycle(disc_instance(E_radius=0.02))
    parts = decompose_cycle(G)
    assert len(parts) == 1
    assert G.cancelled() and G.boundary_ok()


def test_translation_moves_cycle_rigidly():
    inst = disc_instance()
    a = 10.0 + 0j
    G0 = build_mesh_cycle(inst)
    G1 = build_mesh_cycle(inst.translate(a))
    assert G0.edges == G1.edges
    assert G0.squares == G1.squares
    assert G1.origin == pytest.approx(G0.origin + a)


def test_scaling_keeps_combinatorics():
    inst = disc_instance()
    G0 = build_mesh_cycle(inst)
    G1 = build_mesh_cycle(inst.scale(2.0))
    assert len(G0.squares) == len(G1.squares)
    assert len(G0.edges) == len(G1.edges)


def _cycle_from_squares(squares):
    from collections import defaultdict
    net = defaultdict(int)
    for i, j in squares:
        c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
        for a, b in zip(c, c[1:] + c[:1]):
            net[(a, b)] += 1
    edges = {e: m - net.get((e[1], e[0]), 0) for e, m in net.items() if m > net.get((e[1], e[0]), 0)}
    return GridCycle(1.0, 0j, frozenset(squares), edges)


def test_decompose_single_square():
    G = _cycle_from_squares([(0, 0)])
    parts = decompose_cycle(G)
    assert len(parts) == 1 and len(parts[0]) == 4


def test_decompose_two_separate_blocks():
    G = _cycle_from_squares([(0, 0), (1, 0), (5, 5)])
    parts = decompose_cycle(G)
    assert len(parts) == 2
    assert sorted(len(p) for p in parts) == [4, 6]


def test_decompose_corner_touching_squares():
    # the shared corner is 4-valent; left-turn priority splits it into two loops
    G = _cycle_from_squares([(0, 0), (1, 1)])
    parts = decompose_cycle(G)
    assert len(parts) == 2


def test_decompose_annulus_of_squares_gives_hole():
    ring = [(i, j) for i in range(3) for j in range(3) if (i, j) != (1, 1)]
    G = _cycle_from_squares(ring)
    parts = decompose_cycle(G)
    assert len(parts) == 2
    w = [int(part_winding(p, G, [1.5 + 1.5j])[0]) for p in parts]
    assert sorted(w) == [-1, 1]
    assert int(G.winding([1.5 + 1.5j])[0]) == 0


def test_malformed_cycle_rejected():
    G = GridCycle(1.0, 0j, frozenset(), {((0, 0), (1, 0)): 1})
    with pytest.raises(ValueError):
        decompose_cycle(G)


def test_two_E_discs_each_wound_once():
    inst = SeparationInstance((Disc(-0.5 + 0j, 0.1), Disc(0.5 + 0j, 0.1)), (DiscComplement(0j, 2.0),),
                              ClosedCurve.from_array(np.exp(1j * CIRCLE)), 0.3, 2 * math.pi * 1.0001)
    res = mesh_curve(inst)
    assert len(res.parts) == 2
    assert len(res.join.connectors) == 2
    assert list(winding_numbers(res.curve.array, [-0.5 + 0j, 0.5 + 0j, 3 + 0j])) == [1, 1, 0]
    assert res.join.min_dist_F_connectors > 0


def test_single_part_needs_no_connector(disc_result):
    _, res = disc_result
    assert res.join.parts == 1
    assert res.join.connectors == []


def test_ring_of_discs_drops_empty_hole():
    E = tuple(Disc(complex(np.exp(2j * np.pi * k / 12)), 0.12) for k in range(12))
    g = 1.75
    inst = SeparationInstance(E, (DiscComplement(0j, 2.5),), ClosedCurve.from_array(g * np.exp(1j * CIRCLE)),
                              0.5, 2 * math.pi * g * 1.0001)
    res = mesh_curve(inst)
    assert len(res.parts) == 2
    assert res.join.dropped == 1
    assert res.windings_ok
    # the hole held no F, so the output is the outer boundary and winds once about 0
    assert int(winding_numbers(res.curve.array, [0j])[0]) == 1


def test_instance_json_roundtrip():
    inst = disc_instance()
    back = SeparationInstance.from_json(inst.to_json())
    assert back.to_json() == inst.to_json()


def test_instance_schema_pointers():
    bad = disc_instance().to_json()
    bad["E"][0] = {"type": "disc", "center": [0, 0]}
    bad["r"] = -1
    with pytest.raises(SchemaError) as ei:
        SeparationInstance.from_json(bad)
    ptrs = [p for p, _ in ei.value.errors]
    assert any(p.startswith("/E/0") for p in ptrs)
    assert "/r" in ptrs


def test_infinity_in_E_rejected():
    inst = disc_instance()
    bad = SeparationInstance((DiscComplement(0j, 5.0),), inst.F, inst.gamma, inst.r, inst.R)
    with pytest.raises(InstanceError):
        bad.check()


@settings(max_examples=12, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 10_000))
def test_random_instances_certified(seed):
    inst = random_instance(np.random.default_rng(seed))
    G = build_mesh_cycle(inst)
    parts = decompose_cycle(G)
    probes, want = sample_probes(inst.E, inst.F)
    total = sum(np.asarray(part_winding(p, G, probes)) for p in parts)
    assert np.array_equal(total, G.winding(probes))
    assert np.array_equal(G.winding(probes), want)
    res = mesh_curve(inst)
    assert res.windings_ok
    assert res.squares <= res.square_bound
    assert res.length.upper <= res.bound

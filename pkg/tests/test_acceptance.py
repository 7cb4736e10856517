"""Acceptance gate: one PASS/FAIL line per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v`` (about four minutes).  The
lines are printed outside pytest's capture so they appear in the log.
"""
import json
import math
import time

import numpy as np
import pytest

from caradomains.carabounds import MapSpec, cara_bound, condition4_certificate, family_bound, hyperbolic_lipschitz
from caradomains.cli import run
from caradomains.convergence import classify_family
from caradomains.curves import winding_numbers
from caradomains.domains import DomainFamily, PointedDomain, annulus, builtin_family, unit_disc
from caradomains.extremal import annulus_between, candidate_valid, containment_check, separating_annulus_max
from caradomains.hyperbolic import density
from caradomains.meridians import canonical_class, find_meridian
from caradomains.meshcurve import disc_instance, mesh_curve, random_instance, sample_probes
from caradomains.sphere import INF, Disc, DiscComplement, sph_dist


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str) -> bool:
        with capsys.disabled():
            print(f"\ncriterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def test_criterion_01_spherical_normalization(report):
    t = time.perf_counter()
    reps = 1000
    for _ in range(reps):
        d = sph_dist(0j, INF)
    per_call = (time.perf_counter() - t) / reps
    ok = d == math.pi / 2 and per_call < 1e-3
    assert report(1, ok, f"sph_dist(0, inf) = {d!r}, {per_call * 1e6:.1f} us per call")


def test_criterion_02_annulus_oracles(report, oracle):
    t = time.perf_counter()
    worst_len, worst_dens = 0.0, 0.0
    for key, R in (("e", math.e), ("e_pi", math.exp(math.pi)), ("e_2pi", math.exp(2 * math.pi)),
                   ("e_4pi", math.exp(4 * math.pi))):
        U = annulus(1, R)
        want = oracle["equator_length"][key]
        assert want == pytest.approx(2 * math.pi**2 / math.log(R), rel=1e-10)
        m = find_meridian(U, canonical_class([0], 2, 1))
        worst_len = max(worst_len, abs(m.length.lower - want) / want, abs(m.length.upper - want) / want)
        for z in math.sqrt(R) * np.exp(1j * np.array([0.0, 1.1, 2.9])):
            d = density(U, complex(z))
            worst_dens = max(worst_dens, (d.upper - d.lower) / d.lower)
    dt = time.perf_counter() - t
    ok = worst_len <= 0.01 and worst_dens <= 0.005 and dt < 60
    assert report(2, ok, f"max meridian error {worst_len:.2e}, max density width {worst_dens:.2e}, {dt:.1f} s")


def test_criterion_03_bound_assembly(report, oracle):
    # Known red: the closed exterior of the unit disc is a hemisphere, so the first
    # term is |log(pi^2/8)| rather than 2 log(4/pi); see the decision ledger.
    rep = cara_bound(unit_disc())
    target = oracle["disc_bound"]
    clause1 = abs(rep.bound.lower - target) <= 1e-6 and abs(rep.bound.upper - target) <= 1e-6
    zero = all((iv.lower, iv.upper) == (0.0, 0.0) for iv in (rep.L, rep.D))
    ok = clause1 and zero
    assert report(3, ok, f"(D,0) bound = [{rep.bound.lower:.7f}, {rep.bound.upper:.7f}] vs 2log(4/pi) = "
                         f"{target:.7f}; n=1 L = D = 0: {zero}")


def test_criterion_04_mesh_curve_certificate(report):
    t = time.perf_counter()
    bad = []
    for seed in range(20):
        inst = random_instance(np.random.default_rng(seed))
        res = mesh_curve(inst)
        probes, want = sample_probes(inst.E, inst.F)
        w = np.asarray(winding_numbers(res.curve.array, probes))
        if not (np.all(w[want == 1] == 1) and np.all(w[want == 0] == 0)):
            bad.append((seed, "winding"))
        if res.squares > (2 * inst.R / inst.r + 2) ** 2:
            bad.append((seed, "squares"))
        if res.length.upper > res.bound:
            bad.append((seed, "length"))
    dt = time.perf_counter() - t
    ok = not bad and dt < 120
    assert report(4, ok, f"20 instances, violations {bad}, {dt:.1f} s")


_VERDICTS: dict = {}


def _classify(name: str, sample):
    if name not in _VERDICTS:
        _VERDICTS[name] = classify_family(builtin_family(name), sample)
    return _VERDICTS[name]


SAMPLES = {
    "disc_nibble": [4, 8, 16, 32],
    "inverse_symmetric_quad": [3, 6, 12, 30],
    "slit_annulus_fig6": [8, 16, 32, 64],
    "concentric_annulus": [1, 2, 4, 8],
}
# principal meridian lengths of the quad family stay in this band
QUAD_BAND = (10.0, 25.0)


def test_criterion_05_family_verdicts(report):
    t = time.perf_counter()
    v = {name: _classify(name, s) for name, s in SAMPLES.items()}
    dt = time.perf_counter() - t
    quad = v["inverse_symmetric_quad"].measurements
    principal = [x["upper"] for k, vals in quad.items() if k.startswith("length[") and k.count("|") == 1
                 and len(k[7:k.index("|")]) == 1 for x in vals]
    middle = [x["upper"] for x in quad["length[01|23]"]]
    checks = {
        "nibble": v["disc_nibble"].verdict == "unbounded" and v["disc_nibble"].limit.kind == "connectivity-drop",
        "quad": v["inverse_symmetric_quad"].verdict == "unbounded",
        "quad principal band": bool(principal) and QUAD_BAND[0] <= min(principal) and max(principal) <= QUAD_BAND[1],
        "quad middle halves": middle[-1] < 0.5 * middle[0],
        "fig6": v["slit_annulus_fig6"].verdict == "unbounded",
        "concentric": v["concentric_annulus"].verdict == "bounded-evidence",
        "time": dt < 600,
    }
    ok = all(checks.values())
    detail = ", ".join(f"{k}: {'ok' if c else 'no'}" for k, c in checks.items())
    assert report(5, ok, f"{detail}; middle class {middle[0]:.3f} -> {middle[-1]:.3f}, {dt:.0f} s")


def _degenerating(v) -> list:
    """Certificate quantities that move monotonically toward degeneration along the sample."""
    def dec(xs):
        return all(b < a for a, b in zip(xs, xs[1:]))

    def inc(xs):
        return all(b > a for a, b in zip(xs, xs[1:]))

    meas = v.measurements
    out = []
    c4 = meas.get("condition4", [])
    if c4 and dec([x["delta1"] for x in c4]):
        out.append("condition4 clearance")
    if c4 and dec([x["delta2"] for x in c4]):
        out.append("condition4 diameter")
    for key in ("D", "L", "bound"):
        if key in meas and inc([x["lower"] for x in meas[key]]):
            out.append(key)
    for key, vals in meas.items():
        if key.startswith("length[") and dec([x["upper"] for x in vals]) and vals[-1]["upper"] < 0.5 * vals[0]["upper"]:
            out.append(key)
        if key.startswith("distance[") and inc([x["lower"] for x in vals]):
            out.append(key)
    return out


def test_criterion_06_condition4_consistency(report):
    bounded_ok = True
    F = builtin_family("concentric_annulus")
    for m in SAMPLES["concentric_annulus"]:
        U = F(m)
        probe = condition4_certificate(U, 1e-9, 1e-9, seeds=1)
        d1, d2 = 0.5 * probe.clearance[0], 0.5 * probe.min_diam[0]
        cert = condition4_certificate(U, d1, d2, seeds=1)
        bounded_ok &= cert.passed and cara_bound(U, seeds=1).finite
    unbounded = {name: _degenerating(_classify(name, SAMPLES[name]))
                 for name in ("disc_nibble", "inverse_symmetric_quad", "slit_annulus_fig6")}
    ok = bounded_ok and all(unbounded.values())
    assert report(6, ok, f"bounded members certified: {bounded_ok}; degenerating: "
                         + json.dumps({k: v[:3] for k, v in unbounded.items()}))


def test_criterion_07_extremal_bracket(report, oracle):
    t = time.perf_counter()
    conc = separating_annulus_max((Disc(0j, 1.0),), (DiscComplement(0j, 4.0),))
    want = oracle["ring_modulus_1_4"]
    conc_ok = abs(conc.lo - want) <= 0.02 * want and conc.lo <= conc.hi
    E = (Disc(-3 + 0j, 1.0), Disc(3 + 0j, 1.0))
    F = (Disc(0j, 1.0), DiscComplement(0j, 5.0))
    sym = separating_annulus_max(E, F)
    c, rc = sym.candidate, sym.candidate.reflect()
    sym_ok = candidate_valid(c, E, F) and candidate_valid(rc, E, F) and rc.modulus == c.modulus
    dt = time.perf_counter() - t
    ok = conc_ok and sym_ok and dt < 300
    assert report(7, ok, f"concentric lo = {conc.lo:.6f} (want {want:.6f}), hi = {conc.hi:.6f}; "
                         f"symmetric {c.kind} modulus {c.modulus:.4f}, reflection valid: {sym_ok}; {dt:.1f} s")


def test_criterion_08_containment(report, oracle):
    V = PointedDomain(0j, (DiscComplement(0j, 4.0),))

    def member(m):
        c = complex(0.05 * (m - 1))
        return annulus_between(PointedDomain(c, (DiscComplement(c, 1.0),)), V).domain

    F = DomainFamily("disc_in_disc_annuli", member, (1, 10), {}, 2)
    fb = family_bound(F, list(range(1, 11)))
    mids = np.array([fb.reports[m].bound.mid for m in range(1, 11)])
    finite = math.isfinite(fb.sup_bound.upper) and not fb.failures
    spread = float(np.max(np.abs(mids - mids.mean())) / mids.mean())
    odd = family_bound(F, list(range(1, 11, 2)))
    sub = abs(odd.sup_bound.mid - fb.sup_bound.mid) / fb.sup_bound.mid
    stable = spread <= 0.05 and sub <= 0.05
    eps = 0.01
    c = complex(1 - 2 * eps)
    hug = containment_check(PointedDomain(c, (DiscComplement(c, eps),)), unit_disc(), 3.0)
    item1 = hug.items["1_radius"]
    hug_ok = item1["status"] == "fail" and item1["value"]["lower"] >= oracle["subdisc_radius"]["0.01"] * (1 - 1e-6)
    ok = finite and stable and hug_ok
    assert report(8, ok, f"sup bound {fb.sup_bound.mid:.4f}, member spread {spread:.3f}, sub-sample {sub:.3f}; "
                         f"D(1-2e, e) e={eps} item 1 {item1['status']} at {item1['value']['lower']:.3f}")


def test_criterion_09_power_maps(report):
    worst = []
    for d in (1, 2, 3):
        U = annulus(1, 4.0, basepoint=2)
        V = annulus(1, 4.0**d, basepoint=2.0**d)
        rep = hyperbolic_lipschitz(MapSpec.power(d), U, V, 1.0, n=60)
        tol = max(2 * rep.width, 1e-9)
        worst.append(abs(rep.M - 1) <= tol and abs(rep.K - 1) <= tol)
        worst[-1] = (d, worst[-1], round(rep.M, 6), round(rep.K, 6), round(rep.width, 6))
    ok = all(w[1] for w in worst)
    assert report(9, ok, "(d, ok, M, K, width): " + "; ".join(str(w) for w in worst))


def test_criterion_10_determinism(report, tmp_path):
    ann = tmp_path / "ann.json"
    ann.write_text(json.dumps(annulus(1.0, 9.0).to_json()))
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps(disc_instance().to_json()))
    sets = tmp_path / "sets.json"
    sets.write_text(json.dumps({"E": [{"type": "disc", "center": [0, 0], "radius": 1.0}],
                                "F": [{"type": "disc_complement", "center": [0, 0], "radius": 4.0}]}))
    commands = {
        "bound": ["bound", "--domain", str(ann)],
        "classify": ["classify", "--family", "concentric_annulus", "--m", "1,2,4"],
        "meshcurve": ["meshcurve", "--instance", str(inst)],
        "extremal": ["extremal", "--instance", str(sets), "--starts", "4"],
    }
    same = {}
    for name, argv in commands.items():
        blobs = []
        for k in range(2):
            out, svg = tmp_path / f"{name}{k}.json", tmp_path / f"{name}{k}.svg"
            code = run(argv + ["--out", str(out), "--svg", str(svg)])
            blobs.append((code, out.read_bytes(), svg.read_bytes()))
        same[name] = blobs[0] == blobs[1] and blobs[0][0] == 0
    ok = all(same.values())
    assert report(10, ok, "byte-identical JSON and SVG: " + ", ".join(f"{k}={v}" for k, v in same.items()))

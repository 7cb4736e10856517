"""Caratheodory bound terms, the condition-4 curve certificate, density
comparability constants and hyperbolic Lipschitz estimates for rational maps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import ClosedCurve, OnCurveError, winding_numbers
from .domains import (
    DomainFamily,
    PointedDomain,
    complement_diam_bounds,
    delta_sharp_bounds,
    is_nondegenerate,
    validate,
)
from .hyperbolic import DistInterval, abs_log, closest_curve_point, get_field, model
from .meridians import (
    MeridianSystem,
    aggregates,
    class_anchors,
    extended_system,
    principal_system,
)
from .sphere import INF, Disc, DiscComplement, Point, Polygon, sph_diam_bounds, sph_dist_lower_array

ZERO = DistInterval(0.0, 0.0)


def _iv(lo: float, hi: float) -> DistInterval:
    return DistInterval(float(lo), float(hi))


def _ivjson(iv: DistInterval) -> dict:
    return {"lower": iv.lower, "upper": iv.upper}


# ------------------------------------------------------------ bound terms


def first_term(U: PointedDomain) -> DistInterval:
    """|log(delta#(u) * diam#(complement))| as an interval."""
    d_lo, d_hi = delta_sharp_bounds(U, U.basepoint)
    D_lo, D_hi = complement_diam_bounds(U)
    return abs_log(_iv(d_lo * D_lo, d_hi * D_hi))


@dataclass
class LengthDistance:
    L: DistInterval
    D: DistInterval
    L_E: DistInterval
    D_E: DistInterval
    principal: MeridianSystem | None = None
    extended: MeridianSystem | None = None


def length_distance(U: PointedDomain, seeds: int = 3, seed: int = 0, h: float | None = None,
                    extended: bool = True, n_vertices: int = 128) -> LengthDistance:
    """(L, D, L_E, D_E); all zero for simply connected domains."""
    if U.n <= 1:
        return LengthDistance(ZERO, ZERO, ZERO, ZERO)
    if extended:
        ext = extended_system(U, seeds, seed, h, n_vertices)
        # one system serves both aggregates: its principal entries form a principal system
        prin = _principal_part(ext)
        L, D = aggregates(prin, True)
        L_E, D_E = aggregates(ext, False)
        return LengthDistance(L, D, L_E, D_E, prin, ext)
    prin = principal_system(U, seeds, seed, h, n_vertices)
    L, D = aggregates(prin, True)
    return LengthDistance(L, D, L, D, prin, None)


def _principal_part(S: MeridianSystem) -> MeridianSystem:
    return MeridianSystem(S.domain_key, S.entries[: S.P], S.P, S.P)


@dataclass
class BoundReport:
    n: int
    first_term: DistInterval
    L: DistInterval
    D: DistInterval
    L_E: DistInterval
    D_E: DistInterval
    delta_sharp: tuple
    diam: tuple
    principal: MeridianSystem | None = None
    extended: MeridianSystem | None = None

    @property
    def bound(self) -> DistInterval:
        return self.first_term + self.L + self.D

    @property
    def bound_E(self) -> DistInterval:
        return self.first_term + self.L_E + self.D_E

    @property
    def finite(self) -> bool:
        return math.isfinite(self.bound.upper)

    def to_json(self, curves: bool = False) -> dict:
        out = {
            "n": self.n,
            "first_term": _ivjson(self.first_term),
            "L": _ivjson(self.L),
            "D": _ivjson(self.D),
            "L_E": _ivjson(self.L_E),
            "D_E": _ivjson(self.D_E),
            "bound": _ivjson(self.bound),
            "bound_E": _ivjson(self.bound_E),
            "delta_sharp": list(self.delta_sharp),
            "diam_complement": list(self.diam),
        }
        for name, S in (("principal", self.principal), ("extended", self.extended)):
            if S is not None:
                js = S.to_json()
                if not curves:
                    for e in js["entries"]:
                        e.pop("curve", None)
                out[name] = js
        return out


def cara_bound(U: PointedDomain, seeds: int = 3, seed: int = 0, h: float | None = None,
               extended: bool = True, n_vertices: int = 128) -> BoundReport:
    ok, why = is_nondegenerate(U)
    if not ok:
        raise ValueError("degenerate domain: " + "; ".join(why))
    ft = first_term(U)
    ld = length_distance(U, seeds, seed, h, extended, n_vertices)
    return BoundReport(U.n, ft, ld.L, ld.D, ld.L_E, ld.D_E,
                       delta_sharp_bounds(U, U.basepoint), complement_diam_bounds(U),
                       ld.principal, ld.extended)


# --------------------------------------------------------------- families


def trend(values: list) -> str:
    """'increasing' / 'decreasing' / 'flat' for a sequence of intervals.

    A direction needs a certified end-to-end change (first and last intervals
    disjoint) and a monotone second half; an early dip does not hide a drift.
    """
    if len(values) < 2:
        return "flat"
    mids = np.array([v.mid for v in values])
    tail = np.diff(mids[len(mids) // 2:])
    first, last = values[0], values[-1]
    if last.lower > first.upper and np.all(tail >= 0):
        return "increasing"
    if last.upper < first.lower and np.all(tail <= 0):
        return "decreasing"
    return "flat"


@dataclass
class FamilyBoundReport:
    family: str
    sample: list
    reports: dict
    failures: dict

    @property
    def sup_bound(self) -> DistInterval:
        bs = [r.bound for r in self.reports.values()]
        return _iv(max(b.lower for b in bs), max(b.upper for b in bs)) if bs else ZERO

    @property
    def sup_bound_E(self) -> DistInterval:
        bs = [r.bound_E for r in self.reports.values()]
        return _iv(max(b.lower for b in bs), max(b.upper for b in bs)) if bs else ZERO

    def series(self, name: str) -> list:
        return [getattr(self.reports[m], name) for m in self.sample if m in self.reports]

    def trends(self) -> dict:
        return {k: trend(self.series(k)) for k in ("bound", "bound_E", "first_term", "L", "D")}

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "sample": list(self.sample),
            "members": {str(m): self.reports[m].to_json() for m in self.sample if m in self.reports},
            "failures": {str(m): why for m, why in self.failures.items()},
            "sup_bound": _ivjson(self.sup_bound),
            "sup_bound_E": _ivjson(self.sup_bound_E),
            "trends": self.trends(),
        }


def family_bound(F: DomainFamily, sample, seeds: int = 1, seed: int = 0, h: float | None = None,
                 extended: bool = False, n_vertices: int = 128) -> FamilyBoundReport:
    """Bounds for each sampled member; invalid members are listed, never skipped silently."""
    reports, failures = {}, {}
    sample = sorted(sample)
    for m in sample:
        U, why = F.member_or_error(m)
        if U is None:
            failures[m] = why
            continue
        reports[m] = cara_bound(U, seeds, seed, h, extended, n_vertices)
    return FamilyBoundReport(F.name, sample, reports, failures)


# ------------------------------------------------------------ condition 4


def _status(lo: float, hi: float, thr: float) -> str:
    if lo >= thr:
        return "pass"
    if hi < thr:
        return "fail"
    return "inconclusive"


def curve_clearance(U: PointedDomain, z: np.ndarray, closed: bool = True, sub: int = 16) -> tuple:
    """Certified (lower, upper) spherical distance from a polyline to the complement.

    The distance to a closed set is 1-Lipschitz for the spherical metric, so each
    sub-piece loses at most half its spherical length.
    """
    z = np.asarray(z, dtype=complex)
    a = z
    b = np.roll(z, -1) if closed else z[1:]
    if not closed:
        a = z[:-1]
    t = np.arange(sub + 1) / sub
    pts = a[:, None] + (b - a)[:, None] * t[None, :]
    lo = np.full(pts.shape, np.inf)
    for K in U.components:
        lo = np.minimum(lo, sph_dist_lower_array(K, pts))
    piece = np.abs(b - a) / sub
    # spherical length of a piece is at most its Euclidean length over (1 + min|z|^2)
    rmin = np.minimum(np.abs(pts[:, :-1]), np.abs(pts[:, 1:])) - piece[:, None]
    rmin = np.maximum(rmin, 0.0)
    sl = piece[:, None] / (1 + rmin ** 2)
    seg_lo = np.minimum(lo[:, :-1], lo[:, 1:]) - 0.5 * sl
    lower = float(max(0.0, seg_lo.min()))
    # upper: exact spherical distances at a few sample points
    upper = math.inf
    k = int(np.argmin(lo.ravel()))
    for p in (pts.ravel()[k],):
        upper = min(upper, min(_sph_up(K, complex(p)) for K in U.components))
    return lower, upper


def _sph_up(K, p: complex) -> float:
    from .sphere import set_sph_dist_bounds
    return set_sph_dist_bounds(K, p)[1]


@dataclass
class Condition4Certificate:
    delta1: float
    delta2: float
    curves: list
    items: dict
    clearance: tuple
    min_diam: tuple

    @property
    def status(self) -> str:
        st = [v["status"] for v in self.items.values()]
        if all(s == "pass" for s in st):
            return "pass"
        if any(s == "fail" for s in st):
            return "fail"
        return "inconclusive"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self, curves: bool = False) -> dict:
        out = {
            "delta1": self.delta1,
            "delta2": self.delta2,
            "status": self.status,
            "items": self.items,
            "best_delta1": {"lower": self.clearance[0], "upper": self.clearance[1]},
            "best_delta2": {"lower": self.min_diam[0], "upper": self.min_diam[1]},
        }
        if curves:
            out["curves"] = [c.to_json() for c in self.curves]
        return out


def eta_curve(U: PointedDomain, curve: ClosedCurve, h: float | None = None) -> ClosedCurve:
    """Meridian plus the connecting path from the basepoint, traversed both ways."""
    u = complex(U.basepoint)
    k, path, _ = closest_curve_point(U, u, curve, h)
    z = curve.array
    loop = np.concatenate([z[k:], z[:k], [z[k]]])
    seq = np.concatenate([path[:-1], loop, path[::-1][1:-1]])
    # drop consecutive duplicates (they carry no geometry)
    keep = np.concatenate([[True], np.abs(np.diff(seq)) > 0])
    seq = seq[keep]
    if abs(seq[-1] - seq[0]) == 0:
        seq = seq[:-1]
    return ClosedCurve.from_array(seq)


def condition4_certificate(U: PointedDomain, delta1: float, delta2: float, seeds: int = 3, seed: int = 0,
                           h: float | None = None, n_vertices: int = 128,
                           system: MeridianSystem | None = None) -> Condition4Certificate:
    if not (delta1 > 0 and delta2 > 0):
        raise ValueError("thresholds must be positive")
    ok, why = is_nondegenerate(U)
    if not ok:
        raise ValueError("degenerate domain: " + "; ".join(why))
    if U.basepoint is INF:
        raise ValueError("basepoint at infinity: invert the domain first")
    diams = [sph_diam_bounds(K) for K in U.components]
    dlo = min(d[0] for d in diams)
    dhi = min(d[1] for d in diams)
    items: dict = {}
    if U.n == 1:
        # the curve degenerates to the basepoint; separation is vacuous
        lo, hi = delta_sharp_bounds(U, U.basepoint)
        items["a"] = {"status": "pass", "note": "curve reduces to the basepoint"}
        items["b"] = {"status": "pass", "note": "vacuous for simply connected domains"}
        items["c"] = {"status": _status(lo, hi, delta1), "lower": lo, "upper": hi}
        items["d"] = {"status": _status(dlo, dhi, delta2), "lower": dlo, "upper": dhi}
        return Condition4Certificate(delta1, delta2, [], items, (lo, hi), (dlo, dhi))
    S = system if system is not None else principal_system(U, seeds, seed, h, n_vertices)
    etas = []
    a_ok, b_ok = True, True
    clo, chi = math.inf, math.inf
    for e in S.principal():
        eta = eta_curve(U, e.curve, h)
        etas.append(eta)
        a_ok &= eta.points[0] == complex(U.basepoint)
        probes, want = class_anchors(U, e.cls)
        try:
            w = winding_numbers(eta.array, probes)
            b_ok &= bool(np.array_equal(w, want) or np.array_equal(w, 1 - want)
                         or np.array_equal(w, -want) or np.array_equal(w, want - 1))
        except OnCurveError:
            b_ok = False
        lo, hi = curve_clearance(U, eta.array)
        clo, chi = min(clo, lo), min(chi, hi)
    items["a"] = {"status": "pass" if a_ok else "fail"}
    items["b"] = {"status": "pass" if b_ok else "fail"}
    items["c"] = {"status": _status(clo, chi, delta1), "lower": clo, "upper": chi}
    items["d"] = {"status": _status(dlo, dhi, delta2), "lower": dlo, "upper": dhi}
    return Condition4Certificate(delta1, delta2, etas, items, (clo, chi), (dlo, dhi))


# -------------------------------------------------------- uniform perfectness


def domain_samples(U: PointedDomain, n: int = 200, seed: int = 0) -> np.ndarray:
    """Finite sample points of U: near every boundary piece at several depths, plus bulk points."""
    rng = np.random.default_rng(seed)
    pts = []
    depths = np.array([1e-3, 1e-2, 0.05, 0.2, 0.5])
    extent = 1.0
    for K in U.components:
        if isinstance(K, Disc):
            th = 2 * np.pi * rng.random(16)
            for t in depths:
                pts.append(K.center + (K.radius * (1 + t)) * np.exp(1j * th))
            extent = max(extent, abs(K.center) + K.radius)
        elif isinstance(K, DiscComplement):
            th = 2 * np.pi * rng.random(16)
            for t in depths:
                pts.append(K.center + (K.radius * (1 - t)) * np.exp(1j * th))
            extent = max(extent, abs(K.center) + K.radius)
        elif isinstance(K, Point) and K.at is not INF:
            th = 2 * np.pi * rng.random(16)
            for t in depths:
                pts.append(K.at + t * np.exp(1j * th))
        elif isinstance(K, Polygon):
            b = K.array
            sel = b[rng.integers(0, len(b), 16)]
            scale = float(np.max(np.abs(b - b.mean())))
            for t in depths:
                pts.append(sel + t * scale * np.exp(2j * np.pi * rng.random(16)))
            extent = max(extent, float(np.max(np.abs(b))))
    # the narrowest gaps between components are where comparability is most stressed
    from .hyperbolic import _closest_pair
    comps = U.components
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            a, b = _closest_pair(comps[i], comps[j])
            if a is not None:
                pts.append(a + (b - a) * np.linspace(0.02, 0.98, 13))
    box = 2 * extent
    pts.append(box * (rng.uniform(-1, 1, 4 * n) + 1j * rng.uniform(-1, 1, 4 * n)))
    z = np.concatenate(pts)
    z = z[U.contains(z)]
    if U.basepoint is not INF:
        z = np.concatenate([[complex(U.basepoint)], z])
    return z[:n] if len(z) > n else z


@dataclass
class PerfectnessReport:
    K2: float
    ratio_min: float
    ratio_max: float
    samples: int

    def to_json(self) -> dict:
        return {"K2": self.K2, "ratio_min": self.ratio_min, "ratio_max": self.ratio_max, "samples": self.samples}


def uniform_perfectness(U: PointedDomain, sample_points=None, n: int = 200, seed: int = 0) -> PerfectnessReport:
    """Smallest K2 with 1/K2 <= rho(z)(1+|z|^2) delta#(z) <= K2 on the samples (conservative)."""
    z = domain_samples(U, n, seed) if sample_points is None else np.asarray(sample_points, dtype=complex)
    lo, up = model(U).bounds(z)
    dl = np.full(z.shape, np.inf)
    for K in U.components:
        dl = np.minimum(dl, sph_dist_lower_array(K, z))
    du = np.array([delta_sharp_bounds(U, complex(p))[1] for p in z])
    s = 1 + np.abs(z) ** 2
    rmax = float(np.max(up * s * du))
    rmin = float(np.min(lo * s * dl))
    K2 = max(rmax, 1.0 / rmin if rmin > 0 else math.inf)
    return PerfectnessReport(K2, rmin, rmax, len(z))


# -------------------------------------------------------------- Lipschitz


def _coef(c) -> complex:
    if isinstance(c, (list, tuple)):
        return complex(c[0], c[1])
    return complex(c)


@dataclass(frozen=True)
class MapSpec:
    """Rational map num(z)/den(z) with coefficients in ascending powers."""

    num: tuple
    den: tuple = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "num", tuple(_coef(c) for c in self.num))
        object.__setattr__(self, "den", tuple(_coef(c) for c in self.den))
        if not any(self.den):
            raise ValueError("denominator is identically zero")

    @classmethod
    def from_json(cls, d: dict) -> "MapSpec":
        if not isinstance(d, dict) or "num" not in d:
            raise ValueError("map spec needs a 'num' coefficient list")
        return cls(tuple(d["num"]), tuple(d.get("den", [1.0])))

    def to_json(self) -> dict:
        enc = lambda cs: [[c.real, c.imag] for c in cs]
        return {"num": enc(self.num), "den": enc(self.den)}

    @staticmethod
    def power(d: int) -> "MapSpec":
        return MapSpec(tuple([0.0] * d + [1.0]))

    def __call__(self, z):
        P = np.polynomial.polynomial.polyval(z, self.num)
        Q = np.polynomial.polynomial.polyval(z, self.den)
        return P / Q

    def deriv(self, z):
        p, q = np.array(self.num), np.array(self.den)
        P = np.polynomial.polynomial.polyval(z, p)
        Q = np.polynomial.polynomial.polyval(z, q)
        dP = np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(p)) if len(p) > 1 else 0 * z
        dQ = np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(q)) if len(q) > 1 else 0 * z
        return (dP * Q - P * dQ) / Q ** 2


@dataclass
class LipschitzReport:
    R: float
    M: float
    K: float
    samples: int
    ratio_min: float
    ratio_max: float
    width: float
    flags: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"R": self.R, "M": self.M, "K": self.K, "samples": self.samples, "ratio_min": self.ratio_min,
                "ratio_max": self.ratio_max, "density_width": self.width, "flags": list(self.flags)}


def ball_samples(U: PointedDomain, R: float, n: int = 120, seed: int = 0, h: float | None = None) -> np.ndarray:
    """Sample points whose certified hyperbolic distance from the basepoint is at most R."""
    u = complex(U.basepoint)
    rng = np.random.default_rng(seed)
    d0 = float(U.euclid_clearance(np.array([u]))[0])
    cand = [domain_samples(U, 4 * n, seed)]
    r = d0 * np.sqrt(rng.random(4 * n))
    cand.append(u + r * np.exp(2j * np.pi * rng.random(4 * n)))
    z = np.concatenate(cand)
    z = z[U.contains(z)]
    fld = get_field(U, u, h)
    keep = []
    for p in z:
        if p == u:
            keep.append(p)
            continue
        up = fld.to_point(complex(p))[1]
        if up <= R:
            keep.append(p)
        if len(keep) >= n:
            break
    return np.array(keep, dtype=complex)


def hyperbolic_lipschitz(f: MapSpec, U: PointedDomain, V: PointedDomain, R: float, n: int = 120,
                         seed: int = 0, h: float | None = None, tol: float = 1e-9) -> LipschitzReport:
    """Sampled hyperbolic Lipschitz (M) and local bi-Lipschitz (K) constants of f: (U,u) -> (V,v)."""
    if U.basepoint is INF or V.basepoint is INF:
        raise ValueError("basepoints must be finite")
    u, v = complex(U.basepoint), complex(V.basepoint)
    fu = complex(f(u))
    if abs(fu - v) > tol * max(1.0, abs(v)):
        raise ValueError(f"f(u) = {fu} differs from the target basepoint {v}")
    z = ball_samples(U, R, n, seed, h)
    w = f(z)
    inside = V.contains(w)
    if not inside.all():
        raise ValueError(f"{int((~inside).sum())} sampled image point(s) lie outside V")
    dz = np.abs(f.deriv(z))
    lu, uu = model(U).bounds(z)
    lv, uv = model(V).bounds(w)
    hi = uv * dz / lu
    lo = lv * dz / uu
    flags = []
    M = float(np.max(hi))
    if np.any(dz == 0):
        K = math.inf
        flags.append("derivative vanishes at a sample; not locally injective")
    else:
        K = max(M, 1.0 / float(np.min(lo)))
    width = float(np.max(np.maximum((uu - lu) / lu, (uv - lv) / lv)))
    return LipschitzReport(R, M, K, len(z), float(np.min(lo)), M, width, flags)

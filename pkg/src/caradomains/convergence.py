"""Hausdorff distances, Caratheodory limits of pointed-domain sequences and
boundedness classification of families from finite tails."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment

from .domains import DomainFamily, PointedDomain, delta_sharp_bounds, is_nondegenerate, validate
from .hyperbolic import DistInterval
from .sphere import (
    HALF_PI,
    INF,
    Disc,
    DiscComplement,
    Point,
    Polygon,
    components_sph_gap,
    sph_diam_bounds,
    sph_dist,
    sph_dist_array,
    sph_dist_lower_array,
)

# --------------------------------------------------------------- Hausdorff


def _as_cap_or_none(K):
    return None if isinstance(K, Polygon) else K.cap()


def _cap_directed(a, b) -> float:
    # farthest point of cap a from the center of cap b, minus b's radius
    far = min(HALF_PI, sph_dist(a.center, b.center) + a.radius)
    return max(0.0, far - b.radius)


def _fib_sphere(n: int) -> np.ndarray:
    """Nearly uniform points on the unit sphere, returned as plane points (north pole omitted)."""
    k = np.arange(n) + 0.5
    zc = 1 - 2 * k / n
    phi = math.pi * (3 - math.sqrt(5)) * k
    r = np.sqrt(1 - zc ** 2)
    x, y = r * np.cos(phi), r * np.sin(phi)
    return (x + 1j * y) / (1 - zc)


def _samples(K, res: float):
    """Points of K with a certified covering radius (spherical units)."""
    if isinstance(K, Point):
        return (np.array([K.at], dtype=object) if K.at is INF else np.array([K.at], dtype=complex)), 0.0
    if isinstance(K, Polygon):
        v = K.array
        x0, x1 = v.real.min(), v.real.max()
        y0, y1 = v.imag.min(), v.imag.max()
        # grid budget of about 250k points; the error bar follows the actual spacing
        h = max(res, math.hypot(x1 - x0, y1 - y0) / 500)
        gx, gy = np.meshgrid(np.arange(x0, x1 + h, h), np.arange(y0, y1 + h, h))
        g = (gx + 1j * gy).ravel()
        g = g[K.contains(g)]
        b = K.boundary(res=h)
        # any point of K is within h/sqrt2 (euclidean) of a sample; spherical <= pi/2 * euclidean
        return np.concatenate([g, b]), 0.5 * math.pi * h / math.sqrt(2)
    n = int(min(400000, max(2000, 8.0 / res ** 2)))
    P = _fib_sphere(n)
    P = P[K.contains(P)]
    B = K.boundary(512)
    cov = 2.0 / math.sqrt(n) + math.pi / 512
    return np.concatenate([P, B]), cov


def _dist_to(K, P: np.ndarray):
    """(lower, upper) spherical distances from finite points to K."""
    if not isinstance(K, Polygon):
        d = K.cap().dist_array(P)
        return d, d
    lo = sph_dist_lower_array(K, P)
    hi = lo.copy()
    out = np.flatnonzero(lo > 0)
    v = K.array
    a, d = v, np.roll(v, -1) - v
    dd = np.abs(d) ** 2
    for s in range(0, len(out), 2048):
        idx = out[s:s + 2048]
        q = P[idx][:, None]
        t = np.clip((np.conj(d) * (q - a)).real / dd, 0, 1)
        near = a + t * d
        k = np.argmin(np.abs(q - near), axis=1)
        w = near[np.arange(len(idx)), k]
        hi[idx] = np.maximum(lo[idx], _sph_pair(P[idx], w))
    return lo, hi


def _sph_pair(p, q):
    return np.arctan2(np.abs(p - q), np.abs(1 + np.conj(p) * q))


def _directed(A, B, res: float) -> DistInterval:
    P, cov = _samples(A, res)
    if P.dtype == object:  # the point at infinity
        d = B.cap().dist(INF) if not isinstance(B, Polygon) else sph_dist_bounds_inf(B)
        return DistInterval(d, d)
    lo, hi = _dist_to(B, P.astype(complex))
    return DistInterval(float(lo.max()), min(HALF_PI, float(hi.max()) + cov))


def sph_dist_bounds_inf(K: Polygon) -> float:
    m = float(np.max(np.abs(K.array)))
    return math.atan2(1.0, m)


def _euclid_disc(K):
    if isinstance(K, Disc):
        return K.center, K.radius
    if isinstance(K, Point) and K.at is not INF:
        return K.at, 0.0
    return None


def hausdorff_dist(K1, K2, metric: str = "spherical", res: float = 1e-3) -> DistInterval:
    """Hausdorff distance between two compact sets as a certified interval.

    Exact for caps (spherical) and for discs or disc complements (euclidean);
    sampled with a Lipschitz error bar when a polygon is involved.
    """
    if K1 is None or K2 is None:
        raise ValueError("Hausdorff distance of an empty set is undefined")
    if metric not in ("spherical", "euclidean"):
        raise ValueError(f"unknown metric {metric!r}")
    if K1 == K2:
        return DistInterval(0.0, 0.0)
    if metric == "euclidean":
        a, b = _euclid_disc(K1), _euclid_disc(K2)
        if a and b:
            d = abs(a[0] - b[0]) + abs(a[1] - b[1])
            return DistInterval(d, d)
        if isinstance(K1, DiscComplement) and isinstance(K2, DiscComplement):
            c = abs(K1.center - K2.center)
            d12 = max(0.0, K2.radius - max(0.0, K1.radius - c))
            d21 = max(0.0, K1.radius - max(0.0, K2.radius - c))
            d = max(d12, d21)
            return DistInterval(d, d)
        if K1.contains_inf or K2.contains_inf:
            return DistInterval(math.inf, math.inf)
        return _euclid_sampled(K1, K2, res)
    c1, c2 = _as_cap_or_none(K1), _as_cap_or_none(K2)
    if c1 is not None and c2 is not None:
        d = max(_cap_directed(c1, c2), _cap_directed(c2, c1))
        return DistInterval(d, d)
    x, y = _directed(K1, K2, res), _directed(K2, K1, res)
    return DistInterval(max(x.lower, y.lower), max(x.upper, y.upper))


def _euclid_sampled(K1, K2, res):
    def pts(K):
        if isinstance(K, Polygon):
            P, cov = _samples(K, res)
            return P, cov * 2 / math.pi  # back to euclidean units
        c, r = _euclid_disc(K)
        h = max(res, r / 250)
        if r == 0:
            return np.array([c]), 0.0
        g = np.arange(-r, r + h, h)
        gx, gy = np.meshgrid(g, g)
        z = c + (gx + 1j * gy).ravel()
        z = z[np.abs(z - c) <= r]
        return np.concatenate([z, K.boundary(512)]), h / math.sqrt(2) + r * math.pi / 512

    lo, hi = 0.0, 0.0
    for A, B in ((K1, K2), (K2, K1)):
        P, cov = pts(A)
        d = B.euclid_dist(P)
        lo, hi = max(lo, float(d.max())), max(hi, float(d.max()) + cov)
    return DistInterval(lo, hi)


# ------------------------------------------------------------ trend tests


def tends_to_zero(ms, values) -> bool:
    """Finite-tail evidence that a positive quantity tends to 0.

    Requires a non-increasing trend, a halving across the tail and a
    least-squares extrapolation (in 1/log m) whose intercept is small compared
    with the last value.
    """
    ms = np.asarray(ms, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(v) < 3 or np.any(~np.isfinite(v)):
        return False
    if np.any(np.diff(v) > 1e-9 * max(1.0, abs(v).max())):
        return False
    if v[-1] <= 0:
        return True
    if not v[-1] <= 0.5 * v[0]:
        return False
    x = 1.0 / np.log(ms + 1.0)
    a = np.polyfit(x, v, 1)[1]
    return bool(a < 0.25 * v[-1])


def tends_to_infinity(ms, values) -> bool:
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        return False
    if np.any(np.isinf(v)):
        return True
    if np.any(v <= 0):
        return False
    return tends_to_zero(ms, 1.0 / v)


# --------------------------------------------------------------- limits


@dataclass
class Witness:
    kind: str
    detail: str
    indices: list
    values: list

    def to_json(self) -> dict:
        return {"kind": self.kind, "detail": self.detail, "m": list(self.indices), "values": list(self.values)}


@dataclass
class CaraLimit:
    kind: str  # nondegenerate | connectivity-drop | point | plane-like | puncture | no-limit
    limit: PointedDomain | None
    n_from: int
    n_to: int | None
    witnesses: list = field(default_factory=list)
    trail: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return self.kind != "nondegenerate"

    def descriptor(self) -> str:
        if self.kind == "connectivity-drop":
            return f"connectivity-drop({self.n_from}->{self.n_to})"
        return self.kind

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "descriptor": self.descriptor(),
            "n_from": self.n_from,
            "n_to": self.n_to,
            "limit": self.limit.to_json() if self.limit is not None else None,
            "witnesses": [w.to_json() for w in self.witnesses],
            "trail": self.trail,
        }


def _track(members: list) -> list:
    """perm[k][i] = index in member k of the component on track i (track order of the last member)."""
    last = members[-1]
    n = last.n
    perms = [None] * len(members)
    perms[-1] = list(range(n))
    for k in range(len(members) - 2, -1, -1):
        A, B = members[k], members[k + 1]
        C = np.zeros((n, n))
        for i, Ka in enumerate(A.components):
            for j, Kb in enumerate(B.components):
                C[i, j] = hausdorff_dist(Ka, Kb, res=2e-2).upper
        row, col = linear_sum_assignment(C)
        nxt = perms[k + 1]
        # component row[r] of A matches component col[r] of B, which sits on track nxt.index(col[r])
        perm = [0] * n
        for r, c in zip(row, col):
            perm[nxt.index(c)] = int(r)
        perms[k] = perm
    return perms


def bottleneck_to(U: PointedDomain, j: int, size: int = 360) -> float:
    """Widest-path clearance from the basepoint to component j.

    The largest t such that a path from u to (a grid neighbour of) K_j stays at
    euclidean distance >= t from every other component; computed on a grid over
    the finite part of the picture by thresholded connected-component labelling.
    """
    if U.basepoint is INF:
        raise ValueError("basepoint at infinity")
    comps = U.components
    others = [K for i, K in enumerate(comps) if i != j]
    ext = [abs(complex(U.basepoint))]
    for K in comps:
        if isinstance(K, (Disc, DiscComplement)):
            ext.append(abs(K.center) + K.radius)
        elif isinstance(K, Polygon):
            ext.append(float(np.max(np.abs(K.array))))
        elif K.at is not INF:
            ext.append(abs(K.at))
    L = 1.1 * max(ext) + 1e-9
    g = np.linspace(-L, L, size)
    h = g[1] - g[0]
    Z = g[None, :] + 1j * g[:, None]
    inside = U.contains(Z.ravel()).reshape(Z.shape)
    Kj = comps[j]
    if isinstance(Kj, Point) and Kj.at is INF:
        return math.inf
    near = (Kj.euclid_dist(Z.ravel()).reshape(Z.shape) <= 1.5 * h) & inside
    if not near.any():
        return math.inf
    w = np.full(Z.shape, np.inf)
    for K in others:
        w = np.minimum(w, K.euclid_dist(Z.ravel()).reshape(Z.shape))
    iu = np.unravel_index(np.argmin(np.abs(Z - complex(U.basepoint))), Z.shape)
    cand = np.unique(np.minimum(w[inside], 1e300))
    cand = cand[cand <= w[iu]]

    def ok(t):
        lab, _ = ndimage.label(inside & (w >= t))
        l0 = lab[iu]
        return l0 > 0 and bool((lab[near] == l0).any())

    if len(cand) == 0 or not ok(cand[0]):
        return 0.0
    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(cand[mid]):
            lo = mid
        else:
            hi = mid - 1
    return float(cand[lo])


def _lin_extrapolate(ts, xs):
    """Value at t = 0 of the line through the last two samples (t = 1/m)."""
    t1, t2 = ts[-2], ts[-1]
    x1, x2 = xs[-2], xs[-1]
    if np.array_equal(x1, x2):
        return x2
    return x2 - t2 * (x1 - x2) / (t1 - t2)


def _extrapolate_component(tracks, ts):
    K = tracks[-1]
    if all(t == K for t in tracks[-2:]):
        return K
    if isinstance(K, Disc):
        c = _lin_extrapolate(ts, [t.center for t in tracks])
        r = _lin_extrapolate(ts, [t.radius for t in tracks])
        return Disc(complex(c), float(r)) if r > 0 else Point(complex(c))
    if isinstance(K, DiscComplement):
        c = _lin_extrapolate(ts, [t.center for t in tracks])
        r = _lin_extrapolate(ts, [t.radius for t in tracks])
        return DiscComplement(complex(c), float(r))
    if isinstance(K, Point) and K.at is not INF:
        return Point(_lin_extrapolate(ts, [t.at for t in tracks]))
    if isinstance(K, Polygon) and len({len(t.vertices) for t in tracks[-2:]}) == 1:
        v = _lin_extrapolate(ts, [t.array for t in tracks])
        try:
            P = Polygon(tuple(v))
        except ValueError:
            return None
        # a slit that closes in the limit leaves a polygon that touches itself
        from .hyperbolic import polygon_pinches
        pin = polygon_pinches(P)
        size = float(np.ptp(P.array.real) + np.ptp(P.array.imag))
        if not P.is_simple() or (pin and min(x[1] for x in pin) < 1e-3 * size):
            return None
        return P
    return K


def cara_limit(seq: DomainFamily, tail) -> CaraLimit:
    """Finite-tail Caratheodory limit of a family, with degeneration witnesses."""
    tail = sorted(tail)
    if len(tail) < 3:
        raise ValueError("need at least three tail indices")
    members = []
    for m in tail:
        U, why = seq.member_or_error(m)
        if U is None:
            raise ValueError(f"member {m} is invalid: {why}")
        members.append(U)
    n = members[0].n
    if any(U.n != n for U in members):
        raise ValueError("tail members differ in connectivity")
    if all(U.components == members[0].components and U.basepoint == members[0].basepoint for U in members):
        return CaraLimit("nondegenerate", members[-1], n, n, [], {"m": tail})
    perms = _track(members)
    ms = np.array(tail, dtype=float)
    tracks = [[members[k].components[perms[k][i]] for k in range(len(members))] for i in range(n)]
    trail: dict = {"m": tail}
    witnesses: list[Witness] = []

    # convergence of each track: distance to the last member must shrink along the tail
    for i, tr in enumerate(tracks):
        dl = [hausdorff_dist(K, tr[-1], res=2e-2).upper for K in tr[:-1]]
        trail[f"track{i}_to_last"] = dl
        if any(b > a + 1e-9 for a, b in zip(dl, dl[1:])):
            return CaraLimit("no-limit", None, n, None,
                             [Witness("oscillation", f"track {i} does not settle", tail[:-1], dl)], trail)

    diam = [[sph_diam_bounds(K, res=1e-3)[1] for K in tr] for tr in tracks]
    collapsing = [i for i in range(n) if tends_to_zero(ms, diam[i])]
    for i in range(n):
        trail[f"diam{i}"] = diam[i]
    for i in collapsing:
        witnesses.append(Witness("vanishing-diameter", f"component track {i} shrinks to a point", tail, diam[i]))

    # merging: pairwise spherical gaps tending to 0
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            gaps = [components_sph_gap(members[k].components[perms[k][i]], members[k].components[perms[k][j]])
                    for k in range(len(members))]
            trail[f"gap{i}_{j}"] = gaps
            if tends_to_zero(ms, gaps):
                parent[find(i)] = find(j)
                witnesses.append(Witness("merging", f"tracks {i} and {j} merge", tail, gaps))

    # engulfment: the basepoint loses access to a component
    engulfed = []
    for i in range(n):
        bn = [bottleneck_to(members[k], perms[k][i]) for k in range(len(members))]
        trail[f"access{i}"] = bn
        if tends_to_zero(ms, bn):
            engulfed.append(i)
            witnesses.append(Witness("engulfed", f"basepoint loses access to track {i}", tail, bn))

    # self-pinching polygons close up (a slit closing); recorded, connectivity is set by access
    for i, tr in enumerate(tracks):
        if isinstance(tr[-1], Polygon):
            from .hyperbolic import polygon_pinches
            pin = []
            for K in tr:
                p = polygon_pinches(K)
                pin.append(min((x[1] for x in p), default=math.inf))
            trail[f"pinch{i}"] = pin
            if tends_to_zero(ms, pin):
                witnesses.append(Witness("pinching", f"component track {i} closes on itself", tail, pin))

    clear = [delta_sharp_bounds(U, U.basepoint)[1] for U in members]
    trail["basepoint_clearance"] = clear
    if tends_to_zero(ms, clear):
        witnesses.append(Witness("basepoint-clearance", "basepoint approaches the boundary", tail, clear))
        return CaraLimit("point", None, n, None, witnesses, trail)

    total = [sph_diam_bounds(list(U.components), res=1e-3)[1] for U in members]
    trail["complement_diam"] = total
    if tends_to_zero(ms, total):
        witnesses.append(Witness("vanishing-diameter", "whole complement shrinks to a point", tail, total))
        return CaraLimit("plane-like", None, n, 1, witnesses, trail)

    groups = {find(i) for i in range(n) if i not in engulfed}
    n_to = len(groups)
    lone_points = [g for g in groups if all(i in collapsing for i in range(n) if find(i) == g)]
    if not witnesses:
        ts = 1.0 / ms
        comps = [_extrapolate_component(tr, ts) for tr in tracks]
        bp = members[-1].basepoint
        if bp is not INF:
            bp = _lin_extrapolate(ts, [complex(U.basepoint) for U in members])
        if all(c is not None for c in comps):
            L = PointedDomain(bp, tuple(comps), f"{seq.name}[limit]")
            if validate(L).ok and is_nondegenerate(L)[0]:
                return CaraLimit("nondegenerate", L, n, n, [], trail)
        return CaraLimit("nondegenerate", None, n, n, [], trail)
    if lone_points and n_to == n:
        return CaraLimit("puncture", None, n, n_to, witnesses, trail)
    limit = None
    if n_to < n:
        limit = _survivor_limit(tracks, 1.0 / ms, members, groups, find, collapsing, engulfed, seq.name)
    return CaraLimit("connectivity-drop" if n_to < n else "puncture", limit, n, n_to, witnesses, trail)


def _survivor_limit(tracks, ts, members, groups, find, collapsing, engulfed, name):
    """Limit domain when every merged group is dominated by one non-collapsing track."""
    last = members[-1]
    comps = []
    for g in groups:
        idx = [i for i in range(last.n) if find(i) == g and i not in engulfed]
        keep = [i for i in idx if i not in collapsing]
        if len(keep) != 1:
            return None
        K = _extrapolate_component(tracks[keep[0]], ts)
        if K is None:
            return None
        comps.append(K)
    U = PointedDomain(last.basepoint, tuple(comps), f"{name}[limit]")
    return U if validate(U).ok and is_nondegenerate(U)[0] else None


# ---------------------------------------------------------- classification


@dataclass
class FamilyVerdict:
    family: str
    sample: list
    verdict: str  # bounded-evidence | unbounded | inconclusive
    witnesses: list
    limit: CaraLimit | None
    measurements: dict

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "sample": list(self.sample),
            "verdict": self.verdict,
            "witnesses": [w.to_json() for w in self.witnesses],
            "limit": self.limit.to_json() if self.limit is not None else None,
            "measurements": self.measurements,
        }

    def csv(self) -> str:
        """Measurement trails, one row per sampled index; dict entries become key.sub columns."""
        cols = []
        for k, v in self.measurements.items():
            if not (isinstance(v, list) and len(v) == len(self.sample)):
                continue
            if all(isinstance(x, dict) for x in v):
                subs = sorted({s for x in v for s in x})
                cols += [(f"{k}.{s}", k, s) for s in subs]
            else:
                cols.append((k, k, None))
        rows = ["m," + ",".join(c[0] for c in cols)]
        for r, m in enumerate(self.sample):
            cells = []
            for _, k, s in cols:
                x = self.measurements[k][r]
                cells.append(_fmt(x.get(s, "") if s is not None else x))
            rows.append(f"{m}," + ",".join(cells))
        return "\n".join(rows) + "\n"


def _fmt(x) -> str:
    return f"{x:.10g}" if isinstance(x, float) else str(x)


def classify_family(F: DomainFamily, sample, seeds: int = 1, seed: int = 0, h: float | None = None,
                    n_vertices: int = 128, extended: bool = True, delta1: float | None = None,
                    delta2: float | None = None) -> FamilyVerdict:
    """Boundedness verdict from a finite sample: limit analysis plus bound-term trends."""
    from .carabounds import condition4_certificate, family_bound

    sample = sorted(sample)
    lim = cara_limit(F, sample)
    witnesses = list(lim.witnesses)
    if lim.kind == "no-limit":
        return FamilyVerdict(F.name, sample, "inconclusive", witnesses, lim, {"limit_trail": lim.trail})
    fb = family_bound(F, sample, seeds, seed, h, extended, n_vertices)
    if fb.failures:
        meas = {"failures": {str(k): v for k, v in fb.failures.items()}}
        return FamilyVerdict(F.name, sample, "inconclusive", witnesses, lim, meas)
    ms = np.array(sample, dtype=float)
    meas: dict = {}
    for key in ("bound", "bound_E", "first_term", "L", "D", "L_E", "D_E"):
        meas[key] = [{"lower": v.lower, "upper": v.upper} for v in fb.series(key)]
    # per-class meridian lengths and distances
    reps = [fb.reports[m] for m in sample]
    if F.connectivity >= 2:
        systems = [r.extended if r.extended is not None else r.principal for r in reps]
        labels = [e.cls.label() for e in systems[0].entries]
        for c, lab in enumerate(labels):
            ls = [S.entries[c].length for S in systems]
            ds = [S.entries[c].distance for S in systems]
            meas[f"length[{lab}]"] = [{"lower": v.lower, "upper": v.upper} for v in ls]
            meas[f"distance[{lab}]"] = [{"lower": v.lower, "upper": v.upper} for v in ds]
            kind = "principal" if systems[0].entries[c].cls.principal else "non-principal"
            if tends_to_zero(ms, [v.upper for v in ls]):
                witnesses.append(Witness("meridian-length-to-0", f"{kind} class {lab}", sample, [v.upper for v in ls]))
            elif tends_to_infinity(ms, [v.lower for v in ls]):
                witnesses.append(Witness("meridian-length-to-inf", f"{kind} class {lab}", sample, [v.lower for v in ls]))
            if tends_to_infinity(ms, [v.lower for v in ds]):
                witnesses.append(Witness("meridian-distance-to-inf", f"{kind} class {lab}", sample, [v.lower for v in ds]))
    meas["trends"] = fb.trends()
    # condition-4 clearances; with no thresholds given only the measured values matter
    c4 = []
    for m in sample:
        U = F(m)
        S = fb.reports[m].principal
        d1 = delta1 if delta1 is not None else 1e-9
        d2 = delta2 if delta2 is not None else 1e-9
        cert = condition4_certificate(U, d1, d2, seeds, seed, h, n_vertices, system=S)
        c4.append({"delta1": cert.clearance[0], "delta2": cert.min_diam[0], "status": cert.status})
    meas["condition4"] = c4
    d1s = [x["delta1"] for x in c4]
    if tends_to_zero(ms, d1s):
        witnesses.append(Witness("eta-clearance-to-0", "condition-4 curves approach the boundary", sample, d1s))
    if witnesses:
        verdict = "unbounded"
    elif not lim.degenerate and math.isfinite(fb.sup_bound.upper):
        verdict = "bounded-evidence"
    else:
        verdict = "inconclusive"
    meas["limit_trail"] = lim.trail
    return FamilyVerdict(F.name, sample, verdict, witnesses, lim, meas)

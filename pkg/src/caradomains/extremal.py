"""Separating annuli of maximal modulus, bounded containment, and annuli between discs.

The modulus bracket [lo, hi] for annuli in U = C-bar minus (E u F) separating E
from F:  lo is realised by an explicit candidate (a Moebius-round ring, or the
standard collar about the separating geodesic), hi = pi / (lower bound for the
length of every separating curve), which is sound because an annulus B in U has
rho_U <= rho_B on it and its equator has B-length pi / mod B.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .carabounds import length_distance
from .curves import ClosedCurve, OnCurveError, winding_numbers
from .domains import PointedDomain, delta_sharp_bounds
from .hyperbolic import (
    GRID_STRETCH, DistInterval, Ring, _closest_pair, _mobius_image, _r_in, _r_out, best_round_ring,
    closed_form_lower, edge_length_bounds, get_field, hyp_dist, make_ring,
)
from .meridians import MeridianError, _segments_in_U, canonical_class, class_length_lower, find_meridian
from .meshcurve import sample_probes
from .sphere import INF, Disc, DiscComplement, Point, Polygon


class ExtremalError(ValueError):
    pass


def _ivjson(lo: float, hi: float) -> dict:
    return {"lower": lo, "upper": hi}


def collar_modulus(length: float) -> float:
    """Modulus of the standard collar about a simple closed geodesic of the given length.

    The collar has half-width w with sinh(w) sinh(length/2) = 1; in the annular
    cover it is a sector of opening 2 arctan(sinh w) modulo a dilation by e^length.
    Decreasing in the length, so an upper length gives a lower modulus.
    """
    if not (length > 0):
        raise ValueError("geodesic length must be positive")
    if not math.isfinite(length):
        return 0.0
    return 2.0 * math.atan(1.0 / math.sinh(0.5 * length)) / length


# ------------------------------------------------------------ candidates


@dataclass
class AnnulusCandidate:
    kind: str                  # "round", "tube" or "collar"
    modulus: float             # exact for round rings, a certified lower bound otherwise
    equator: ClosedCurve
    center: complex | None = None        # in the normalised plane
    r_in: float | None = None
    r_out: float | None = None
    normalization: tuple = ()            # () or (X1, X2): w = (z - X1)/(z - X2)
    inside: str = "E"                    # which set lies in the bounded side of the normalised ring
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_ring(cls, ring: Ring, inside: str = "E", n: int = 256) -> "AnnulusCandidate":
        t = 2 * np.pi * np.arange(n) / n
        w = math.sqrt(ring.a * ring.b) * np.exp(1j * t)
        eq = ClosedCurve.from_array(ring.from_w(w))
        norm = () if ring.X2 is None else (complex(ring.X1), complex(ring.X2))
        return cls("round", ring.modulus, eq, complex(ring.center), float(ring.a), float(ring.b), norm, inside)

    def ring(self) -> Ring:
        if self.kind != "round":
            raise ValueError("only round candidates carry a ring")
        X1, X2 = self.normalization if self.normalization else (None, None)
        return Ring(X1, X2, self.center, self.r_in, self.r_out)

    def reflect(self) -> "AnnulusCandidate":
        """Image under z -> -z (sign flips only, so the parameters reflect exactly)."""
        eq = ClosedCurve.from_array(-self.equator.array)
        if self.kind == "round":
            if self.normalization:
                # (-z + X1)/(-z + X2) = (z - X1)/(z - X2): same normalised ring
                X1, X2 = self.normalization
                return AnnulusCandidate("round", self.modulus, eq, self.center, self.r_in, self.r_out,
                                        (-X1, -X2), self.inside, dict(self.meta, reflected=True))
            return AnnulusCandidate("round", self.modulus, eq, -self.center, self.r_in, self.r_out,
                                    (), self.inside, dict(self.meta, reflected=True))
        return AnnulusCandidate(self.kind, self.modulus, eq, None, None, None, (), self.inside,
                                dict(self.meta, reflected=True))

    def to_json(self, curve: bool = True) -> dict:
        out = {"kind": self.kind, "modulus": self.modulus, "inside": self.inside}
        if self.kind == "round":
            out.update({"center": [self.center.real, self.center.imag], "r_in": self.r_in, "r_out": self.r_out,
                        "normalization": [[z.real, z.imag] for z in self.normalization]})
        out.update({k: v for k, v in self.meta.items() if k != "curve"})
        if curve:
            out["equator"] = self.equator.to_json()
        return out


def separation_windings(curve, E, F) -> tuple:
    """(windings on E samples, windings on F samples) of a closed curve."""
    probes, want = sample_probes(E, F)
    w = winding_numbers(curve.array if hasattr(curve, "array") else curve, probes)
    return w[want == 1], w[want == 0]


def separates(curve, E, F) -> bool:
    """Exact winding certificate: E and F on different sides of the curve."""
    try:
        we, wf = separation_windings(curve, E, F)
    except OnCurveError:
        return False
    if len(set(we.tolist())) != 1 or len(set(wf.tolist())) != 1:
        return False
    a, b = int(we[0]), int(wf[0])
    return {abs(a), abs(b)} == {0, 1}


def ring_avoids(cand: AnnulusCandidate, E, F) -> bool:
    """The open normalised ring misses every component (recomputed from its parameters)."""
    ins, outs = (E, F) if cand.inside == "E" else (F, E)
    X1, X2 = cand.normalization if cand.normalization else (None, None)
    imgs_in = [_mobius_image(K, X1, X2) for K in ins]
    imgs_out = [_mobius_image(K, X1, X2) for K in outs]
    if any(im[0] == "ext" for im in imgs_in):
        return False
    ri = max(_r_in(im, cand.center) for im in imgs_in)
    ro = min(_r_out(im, cand.center) for im in imgs_out)
    return ri <= cand.r_in and cand.r_out <= ro and cand.r_in < cand.r_out


def candidate_valid(cand: AnnulusCandidate, E, F) -> bool:
    U = PointedDomain(complex(cand.equator.points[0]), tuple(E) + tuple(F))
    z = cand.equator.array
    if not U.contains(z).all() or not _segments_in_U(U, z):
        return False
    if not separates(cand.equator, E, F):
        return False
    if cand.kind == "round":
        return ring_avoids(cand, E, F)
    if cand.kind == "tube":
        from .meshcurve import _curve_clearance
        h = max(1e-6, cand.equator.euclid_length() / 4096)
        return _curve_clearance(z, tuple(E) + tuple(F), h) > cand.meta["tube_radius"]
    return True


def tube_candidate(curve: ClosedCurve, E, F, fractions=(0.95, 0.8, 0.6, 0.4, 0.25, 0.12)):
    """Polygonal tube about a separating curve with an extremal-length lower bound on its modulus.

    P is a polygon inside the t-neighbourhood of the curve, t below the curve's
    clearance, so P lies in U.  If P has exactly one hole it is doubly connected,
    the curve separates its two boundary pieces, and every joining curve in P has
    euclidean length >= d_in + d_out, whence mod P >= (d_in + d_out)^2 / area(P).
    """
    import shapely.geometry as sg
    from .meshcurve import _curve_clearance

    z = curve.array
    comps = tuple(E) + tuple(F)
    clear = _curve_clearance(z, comps, max(1e-6, curve.euclid_length() / 4096))
    if clear <= 0:
        return None
    line = sg.LinearRing(np.c_[z.real, z.imag])
    best = None
    for f in fractions:
        t = f * clear
        P = line.buffer(t, quad_segs=16)
        if P.geom_type != "Polygon" or len(P.interiors) != 1:
            continue
        d_in = float(line.distance(sg.LinearRing(P.interiors[0].coords)))
        d_out = float(line.distance(sg.LinearRing(P.exterior.coords)))
        mod = (d_in + d_out) ** 2 / float(P.area)
        if best is None or mod > best[0]:
            best = (mod, t, d_in, d_out, float(P.area))
    if best is None:
        return None
    mod, t, d_in, d_out, area = best
    return AnnulusCandidate("tube", mod, curve, inside="E",
                            meta={"tube_radius": t, "clearance": clear, "d_in": d_in, "d_out": d_out, "area": area})


# ------------------------------------------------------------ extremal annulus


@dataclass
class ExtremalResult:
    candidate: AnnulusCandidate
    lo: float
    hi: float
    candidates: list
    ties: list
    meta: dict = field(default_factory=dict)

    def to_json(self, curve: bool = True) -> dict:
        return {"lo": self.lo, "hi": self.hi, "candidate": self.candidate.to_json(curve),
                "candidates": [c.to_json(False) for c in self.candidates],
                "ties": [c.to_json(False) for c in self.ties], **self.meta}


def _is_point_set(S) -> bool:
    return len(S) == 1 and isinstance(S[0], Point)


def _basepoint(E, F) -> complex:
    comps = tuple(E) + tuple(F)
    U = PointedDomain(0j, comps)
    best = None
    for e in E:
        for f in F:
            a, b = _closest_pair(e, f)
            if a is None:
                continue
            m = 0.5 * (a + b)
            if U.contains_point(m):
                gap = float(U.euclid_clearance(np.array([m]))[0])
                if best is None or gap > best[0]:
                    best = (gap, m)
    if best is not None:
        return best[1]
    from .carabounds import domain_samples
    pts = domain_samples(U, 64)
    return complex(pts[int(np.argmax(U.euclid_clearance(pts)))])


def separating_annulus_max(E, F, starts: int = 16, seed: int = 0, seeds: int = 3, collar: bool = True,
                           n_vertices: int = 128) -> ExtremalResult:
    """Best separating annulus found with a certified upper bound on the supremum of moduli."""
    E, F = tuple(E), tuple(F)
    if not E or not F:
        raise ExtremalError("E and F must be non-empty")
    if _is_point_set(E) or _is_point_set(F):
        raise ExtremalError("E and F must not be single points")
    comps = E + F
    for e in E:
        for f in F:
            from .sphere import euclid_gap
            if euclid_gap(e, f) <= 0 and not (e.contains_inf or f.contains_inf):
                raise ExtremalError("E and F are not disjoint")
    rng = np.random.default_rng(seed)
    cands = []
    for ins, outs, label in ((E, F, "E"), (F, E, "F")):
        ring, mod = best_round_ring(list(ins), list(outs), starts=starts, rng=rng)
        if ring is not None and mod > 0:
            c = AnnulusCandidate.from_ring(ring, inside=label)
            if candidate_valid(c, E, F):
                cands.append(c)
    bp = _basepoint(E, F)
    U = PointedDomain(bp, comps, "separating")
    inf_i = U.inf_index()
    cls = canonical_class(range(len(E)), len(comps), inf_i)
    lower_len = class_length_lower(U, cls)
    hi = math.pi / lower_len if lower_len > 0 else math.inf
    meta = {"basepoint": [bp.real, bp.imag], "class": cls.label(), "length_lower": lower_len, "starts": starts,
            "seed": seed}
    if collar:
        try:
            m = find_meridian(U, cls, seeds=seeds, seed=seed, n_vertices=n_vertices)
            L = m.curve_length.upper
            c = AnnulusCandidate("collar", collar_modulus(L), m.curve, inside="E",
                                 meta={"geodesic_length_upper": L, "geodesic_length_lower": m.length.lower})
            if candidate_valid(c, E, F):
                cands.append(c)
                meta["geodesic_length"] = m.length.to_json()
            tb = tube_candidate(m.curve, E, F)
            if tb is not None and candidate_valid(tb, E, F):
                cands.append(tb)
        except MeridianError as exc:
            meta["collar_failure"] = str(exc)
    if not cands:
        raise ExtremalError(f"no separating candidate found (starts={starts}, seed={seed}, seeds={seeds})")

    def key(c):
        par = (c.center.real, c.center.imag, c.r_in, c.r_out) if c.kind == "round" else (0.0, 0.0, 0.0, 0.0)
        return (-c.modulus, c.kind, par)

    cands.sort(key=key)
    best = cands[0]
    ties = [c for c in cands[1:] if c.modulus >= best.modulus * (1 - 1e-9)]
    lo = best.modulus
    hi = max(hi, lo) if hi < lo and hi > lo * (1 - 1e-12) else hi
    return ExtremalResult(best, lo, hi, cands, ties, meta)


# ------------------------------------------------------------ containment


def _depth(J, p: complex) -> float:
    """Euclidean distance from a point of the component J to the outside of J."""
    if isinstance(J, Disc):
        return max(0.0, J.radius - abs(p - J.center))
    if isinstance(J, DiscComplement):
        return max(0.0, abs(p - J.center) - J.radius)
    if isinstance(J, Point):
        return 0.0
    import shapely.geometry as sg
    v = J.array
    return float(sg.Polygon(np.c_[v.real, v.imag]).exterior.distance(sg.Point(p.real, p.imag)))


def _boundary_samples(K, n: int = 256) -> np.ndarray:
    if isinstance(K, Point):
        return np.array([] if K.at is INF else [K.at], dtype=complex)
    if isinstance(K, Polygon):
        return K.boundary(res=K_res(K, n))
    return K.boundary(n)


def K_res(K, n):
    v = K.array
    return float(np.sum(np.abs(np.roll(v, -1) - v))) / n


def subset_violations(Up: PointedDomain, U: PointedDomain, n: int = 256) -> list:
    """Sampled evidence that U' is not contained in U."""
    out = []
    if U.inf_index() is not None and Up.inf_index() is None:
        out.append("U' contains infinity but U does not")
    for i, K in enumerate(U.components):
        pts = _boundary_samples(K, n)
        tol = 1e-9 * max(1.0, float(np.max(np.abs(pts)))) if len(pts) else 0.0
        for p in pts:
            if Up.contains_point(complex(p)) and float(Up.euclid_clearance(np.array([p]))[0]) > tol:
                out.append(f"boundary of component {i} of the complement of U meets U'")
                break
    return out


def _pair_gap(K, J):
    """Exact gap between a disc-type piece K and the disc-type piece J of the same kind containing it."""
    if isinstance(K, Disc) and isinstance(J, Disc):
        return J.radius - abs(K.center - J.center) - K.radius
    if isinstance(K, DiscComplement) and isinstance(J, DiscComplement):
        return K.radius - J.radius - abs(K.center - J.center)
    return None


def closure_gap(Up: PointedDomain, U: PointedDomain, n: int = 512) -> float:
    """Euclidean gap between the closure of U' and the complement of U (0 when they touch).

    Exact for round pieces; otherwise the smallest depth over boundary samples.
    """
    gap = math.inf
    for K in U.components:
        exact = None
        for J in Up.components:
            g = _pair_gap(K, J)
            if g is not None and g >= -1e-15 and J.contains(np.array([K.anchor() if not K.contains_inf
                                                                    else K.center + 2 * K.radius]))[0]:
                exact = max(0.0, g)
        if exact is not None:
            gap = min(gap, exact)
            continue
        for p in _boundary_samples(K, n):
            p = complex(p)
            J = [j for j in Up.components if j.contains(np.array([p]))[0]]
            gap = min(gap, min((_depth(j, p) for j in J), default=0.0))
    return gap


@dataclass
class ContainmentReport:
    K: float
    items: dict
    meta: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        st = [it["status"] for it in self.items.values()]
        if all(s == "pass" for s in st):
            return "pass"
        if any(s == "fail" for s in st):
            return "fail"
        return "inconclusive"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {"K": self.K, "status": self.status, "items": self.items, **self.meta}


def _le_status(lo: float, hi: float, K: float) -> str:
    if hi <= K:
        return "pass"
    if lo > K:
        return "fail"
    return "inconclusive"


def distance_to_domain(Up: PointedDomain, z) -> np.ndarray:
    """Euclidean distance from finite points to the open set U' (0 inside)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros(len(z))
    for J in Up.components:
        inside = J.contains(z)
        for k in np.flatnonzero(inside):
            out[k] = max(out[k], _depth(J, complex(z[k])))
    return out


def radius_about(U: PointedDomain, Up: PointedDomain, h: float | None = None, max_grid: int = 40000,
                 n: int = 256) -> tuple:
    """Bracket for sup of d_U(u, z) over the closure of U' (inf when it touches the boundary of U)."""
    u = complex(U.basepoint)
    gap = closure_gap(Up, U, n)
    if gap <= 0:
        return math.inf, math.inf, {"gap": 0.0}
    if Up.inf_index() is None:
        return math.nan, math.inf, {"gap": gap, "note": "U' contains infinity; not sampled"}
    fld = get_field(U, u, h)

    def bounds(q):
        lo, up, _ = fld.to_point(q)
        lo = max(lo / GRID_STRETCH, closed_form_lower(U, u, q))
        return min(lo, up), up

    # lower: boundary of U' and its basepoint
    lows = []
    for K in Up.components:
        for p in _boundary_samples(K, n):
            p = complex(p)
            if U.contains_point(p) and p != u:
                lows.append(bounds(p)[0])
    lower = max(lows, default=0.0)
    # upper: grid covering of the closure of U' (bounded part of the plane)
    pts = np.concatenate([_boundary_samples(K, n) for K in Up.components])
    x0, x1 = pts.real.min(), pts.real.max()
    y0, y1 = pts.imag.min(), pts.imag.max()
    span = max(x1 - x0, y1 - y0, 1e-12)
    hg = float(max(min(span / 100, gap / 2), span / math.sqrt(max_grid)))
    cov = hg / math.sqrt(2)
    if cov >= gap:
        return lower, math.inf, {"gap": gap, "grid": hg, "note": "grid too coarse for the gap"}
    xs = np.arange(x0 - hg, x1 + 2 * hg, hg)
    ys = np.arange(y0 - hg, y1 + 2 * hg, hg)
    G = (xs[None, :] + 1j * ys[:, None]).ravel()
    near = (distance_to_domain(Up, G) <= cov) & U.contains(G)
    G = G[near]
    # each closure point is within cov of a kept node g, along a segment of clearance >= cl(g) - cov
    cl = U.euclid_clearance(G)
    if np.any(cl <= cov):
        return lower, math.inf, {"gap": gap, "grid": hg, "note": "grid node too close to the boundary"}
    pads = cov * 2.0 / (cl - cov)
    ups = np.array([bounds(complex(q))[1] for q in G])
    upper = float(np.max(ups + pads)) if len(G) else math.inf
    pad = float(pads.max()) if len(G) else math.inf
    return lower, upper, {"gap": gap, "grid": hg, "nodes": int(near.sum()), "cover": pad}


def containment_check(Up: PointedDomain, U: PointedDomain, K: float, h: float | None = None, seeds: int = 3,
                      seed: int = 0, n_vertices: int = 128) -> ContainmentReport:
    """The four bounded-containment items with interval status against the constant K."""
    if K < 1:
        raise ValueError("containment constant must be >= 1")
    bad = subset_violations(Up, U)
    if bad or not U.contains_point(Up.basepoint):
        raise ExtremalError("U' is not contained in U: " + "; ".join(bad or ["basepoint of U' outside U"]))
    items = {}
    lo, hi, info = radius_about(U, Up, h)
    items["1_radius"] = {"value": _ivjson(lo, hi), "status": "inconclusive" if math.isnan(lo) else _le_status(lo, hi, K),
                         **info}
    up = Up.basepoint
    a1, b1 = delta_sharp_bounds(Up, up)
    a0, b0 = delta_sharp_bounds(U, up)
    # need delta'(u') >= delta(u')/K, i.e. ratio delta/delta' <= K
    rlo, rhi = a0 / b1, (b0 / a1 if a1 > 0 else math.inf)
    items["2_delta_ratio"] = {"value": _ivjson(rlo, rhi), "status": _le_status(rlo, rhi, K),
                              "delta_sub": _ivjson(a1, b1), "delta": _ivjson(a0, b0)}
    ld = length_distance(Up, seeds=seeds, seed=seed, h=h, extended=False, n_vertices=n_vertices)
    items["3_length"] = {"value": ld.L.to_json(), "status": _le_status(ld.L.lower, ld.L.upper, K)}
    items["4_distance"] = {"value": ld.D.to_json(), "status": _le_status(ld.D.lower, ld.D.upper, K)}
    return ContainmentReport(K, items)


def curve_containment_check(curve: ClosedCurve, mark: complex, U: PointedDomain, K: float,
                            h: float | None = None) -> ContainmentReport:
    """Curve items: hyperbolic radius about u, and spherical speed over the marked point's clearance."""
    z = curve.array
    mark = complex(mark)
    if not U.contains(z).all() or not _segments_in_U(U, z):
        raise ExtremalError("curve exits U")
    u = complex(U.basepoint)
    fld = get_field(U, u, h)
    lows, ups = [], []
    for q in z:
        q = complex(q)
        if q == u:
            lows.append(0.0)
            ups.append(0.0)
            continue
        a, b, _ = fld.to_point(q)
        lows.append(min(max(a / GRID_STRETCH, closed_form_lower(U, u, q)), b))
        ups.append(b)
    _, seg_up = edge_length_bounds(U, z, True, levels=(2,))
    lo1 = max(lows)
    hi1 = max(ups) + 0.5 * float(np.max(seg_up))
    items = {"1_radius": {"value": _ivjson(lo1, hi1), "status": _le_status(lo1, hi1, K)}}
    # constant-speed parametrisation of the unit circle: |phi'| = length / 2pi
    L = curve.euclid_length()
    a = z
    b = np.roll(z, -1)
    # 1/(1+|w|^2) over a segment: extreme values at the nearest and farthest points from 0
    d = b - a
    t = np.clip(-(np.conj(d) * a).real / np.where(np.abs(d) > 0, np.abs(d) ** 2, 1.0), 0, 1)
    near = np.abs(a + t * d)
    far = np.maximum(np.abs(a), np.abs(b))
    s_hi = L / (2 * np.pi) / (1 + near ** 2)
    s_lo = L / (2 * np.pi) / (1 + far ** 2)
    dlo, dhi = delta_sharp_bounds(U, mark)
    rmin = (float(s_lo.min()) / dhi, float(s_lo.min()) / dlo)      # bracket of the smallest ratio
    rmax = (float(s_hi.max()) / dhi, float(s_hi.max()) / dlo)      # bracket of the largest ratio
    if rmax[0] > K or rmin[1] < 1 / K:
        st = "fail"
    elif rmax[1] <= K and rmin[0] >= 1 / K:
        st = "pass"
    else:
        st = "inconclusive"
    items["2_speed_ratio"] = {"min": _ivjson(*rmin), "max": _ivjson(*rmax), "status": st,
                              "delta_mark": _ivjson(dlo, dhi)}
    return ContainmentReport(K, items, {"mark": [mark.real, mark.imag]})


# ------------------------------------------------------------ annulus between discs


def _as_disc(D: PointedDomain):
    if D.n != 1:
        raise ExtremalError("expected a simply connected domain with one complementary disc")
    K = D.components[0]
    if isinstance(K, DiscComplement):
        return K.center, K.radius
    raise ExtremalError("only round discs D(c, r) are supported (complement must be a disc exterior)")


@dataclass
class PointedAnnulus:
    domain: PointedDomain
    candidate: AnnulusCandidate
    modulus: DistInterval
    engine: str

    def to_json(self, curve: bool = True) -> dict:
        return {"domain": self.domain.to_json(), "modulus": self.modulus.to_json(), "engine": self.engine,
                "annulus": self.candidate.to_json(curve)}


def annulus_between(U: PointedDomain, V: PointedDomain, engine: str = "exact", seeds: int = 3, seed: int = 0,
                    n_vertices: int = 128) -> PointedAnnulus:
    """V minus the closure of U for round discs, with its equator and a basepoint on it."""
    cu, ru = _as_disc(U)
    cv, rv = _as_disc(V)
    if abs(cu - cv) + ru >= rv:
        raise ExtremalError("closure of U is not inside V")
    inner, outer = Disc(cu, ru), DiscComplement(cv, rv)
    ring = make_ring(inner, outer)
    cand = AnnulusCandidate.from_ring(ring, inside="E")
    bp = complex(cand.equator.points[0])
    A = PointedDomain(bp, (inner, outer), "annulus_between")
    mod = DistInterval(ring.modulus, ring.modulus)
    if engine == "meridian":
        cls = canonical_class([0], 2, 1)
        m = find_meridian(A, cls, seeds=seeds, seed=seed, n_vertices=n_vertices)
        bp = complex(m.curve.points[0])
        A = A.with_basepoint(bp)
        mod = DistInterval(math.pi / m.length.upper, math.pi / m.length.lower if m.length.lower > 0 else math.inf)
        cand = AnnulusCandidate("collar", mod.lower, m.curve, inside="E",
                                meta={"equator_length": m.length.to_json(), "exact_modulus": ring.modulus})
    elif engine != "exact":
        raise ValueError(f"unknown engine {engine!r}")
    return PointedAnnulus(A, cand, mod, engine)

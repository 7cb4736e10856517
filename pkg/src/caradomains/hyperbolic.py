"""Two-sided estimates of the curvature -1 hyperbolic density, lengths and distances.

The density is bracketed by comparison domains: a subdomain W of U has a larger
density (upper bound), a superdomain a smaller one (lower bound).  Discs,
annuli, punctured discs and two-circle ring domains have closed forms; the
thrice-punctured sphere is bounded below by Hempel's inequality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from .domains import PointedDomain
from .sphere import INF, Disc, DiscComplement, Point, Polygon

# Gamma(1/4)^4 / (4 pi^2)
HEMPEL_K0 = 4.37687923010253
# worst-case stretch of the 16-neighbour grid metric against straight lines
GRID_STRETCH = 1.0 / math.cos(0.5 * math.atan(0.5))


@dataclass(frozen=True)
class DensityInterval:
    lower: float
    upper: float
    at: complex

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class DistInterval:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            object.__setattr__(self, "lower", self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= x <= self.upper + tol

    def __add__(self, other: "DistInterval") -> "DistInterval":
        return DistInterval(self.lower + other.lower, self.upper + other.upper)

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper}

    @staticmethod
    def exact(x: float) -> "DistInterval":
        return DistInterval(x, x)


def interval_max(items) -> DistInterval:
    items = list(items)
    if not items:
        return DistInterval(0.0, 0.0)
    return DistInterval(max(i.lower for i in items), max(i.upper for i in items))


def abs_log(iv: DistInterval) -> DistInterval:
    """Interval image of ``|log x|``."""
    lo, hi = iv.lower, iv.upper
    if lo <= 0:
        return DistInterval(0.0 if hi >= 1 else abs(math.log(hi)) if hi > 0 else math.inf, math.inf)
    a, b = abs(math.log(lo)), abs(math.log(hi))
    if lo <= 1 <= hi:
        return DistInterval(0.0, max(a, b))
    return DistInterval(min(a, b), max(a, b))


# ------------------------------------------------------------ closed forms


def disc_density(z, c, r):
    t2 = np.abs(z - c) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(t2 < r * r, 2 * r / (r * r - t2), np.inf)


def exterior_density(z, c, r):
    t2 = np.abs(z - c) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(t2 > r * r, 2 * r / (t2 - r * r), np.inf)


def annulus_density(z, c, r1, r2):
    """Density of ``r1 < |z - c| < r2`` (``inf`` outside)."""
    t = np.abs(z - c)
    L = math.log(r2 / r1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        s = np.sin(math.pi * np.log(t / r1) / L)
        return np.where((t > r1) & (t < r2), (math.pi / L) / (t * s), np.inf)


def punctured_disc_density(z, c, r):
    t = np.abs(z - c)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where((t > 0) & (t < r), 1.0 / (t * np.log(r / t)), np.inf)


def punctured_exterior_density(z, c, r):
    """Density of ``|z - c| > r`` with infinity removed."""
    t = np.abs(z - c)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(t > r, 1.0 / (t * np.log(t / r)), np.inf)


def _hempel(w):
    a = np.abs(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1.0 / (a * (np.abs(np.log(a)) + HEMPEL_K0))


def punctured_plane_lower(w):
    """Lower bound for the density of the sphere minus ``{0, 1, inf}``."""
    w = np.asarray(w, dtype=complex)
    out = np.maximum(_hempel(w), _hempel(1 - w))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = w / (w - 1)
        out = np.maximum(out, _hempel(g) / np.abs(w - 1) ** 2)
    return np.nan_to_num(out, nan=0.0, posinf=np.inf)


def circle_image(c: complex, r: float, p: complex):
    """Image circle of ``|z - c| = r`` under ``1/(z - p)`` (p off the circle)."""
    cc = c - p
    den = abs(cc) ** 2 - r * r
    return (cc.conjugate() / den, r / abs(den))


NEAR_CONCENTRIC = 1e-9


def ring_map(c1: complex, r1: float, c2: complex, r2: float):
    """Moebius normalisation of two disjoint circles to concentric ones.

    Returns ``(X1, X2)`` so that ``w = (z - X1)/(z - X2)`` maps both circles to
    circles about 0.  ``X2`` is None when the circles are (nearly) concentric.
    """
    d = abs(c2 - c1)
    if d <= NEAR_CONCENTRIC * max(r1, r2):
        return None
    u = (c2 - c1) / d
    s = (r1 * r1 + d * d - r2 * r2) / d
    disc = s * s - 4 * r1 * r1
    if disc <= 0:
        raise ValueError("circles intersect; no ring normalisation")
    q = math.sqrt(disc)
    # roots of t^2 - s t + r1^2; the larger one first, the smaller from the product (no cancellation)
    t2 = 0.5 * (s + q) if s > 0 else 0.5 * (s - q)
    t1 = r1 * r1 / t2
    return (c1 + t1 * u, c1 + t2 * u)


@dataclass(frozen=True)
class Ring:
    """Ring domain between two disjoint circles, normalised by a Moebius map."""

    X1: complex | None
    X2: complex | None
    center: complex
    a: float
    b: float

    @property
    def modulus(self) -> float:
        return math.log(self.b / self.a) / (2 * math.pi)

    def to_w(self, z):
        if self.X2 is None:
            return np.asarray(z) - self.center
        return (np.asarray(z) - self.X1) / (np.asarray(z) - self.X2) - self.center

    def from_w(self, w):
        if self.X2 is None:
            return np.asarray(w) + self.center
        w = np.asarray(w) + self.center
        return (self.X1 - w * self.X2) / (1 - w)

    def dw(self, z):
        if self.X2 is None:
            return np.ones(np.shape(z))
        return np.abs(self.X1 - self.X2) / np.abs(np.asarray(z) - self.X2) ** 2

    def density(self, z):
        w = self.to_w(z)
        with np.errstate(invalid="ignore", divide="ignore"):
            return annulus_density(w, 0.0, self.a, self.b) * self.dw(z)


def make_ring(K1, K2) -> Ring:
    """Ring domain complementary to two disjoint disc-type sets."""
    c1, r1 = K1.center, K1.radius
    c2, r2 = K2.center, K2.radius
    d = abs(c2 - c1)
    if d <= NEAR_CONCENTRIC * max(r1, r2):
        # nested and nearly concentric: the round ring about c1 shrunk by d is a sound sub-ring
        lo, hi = sorted([r1, r2])
        return Ring(None, None, c1, lo, hi - d)
    nm = ring_map(c1, r1, c2, r2)
    X1, X2 = nm
    ring = Ring(X1, X2, 0j, 1.0, 1.0)
    u = (c2 - c1) / d
    ra = float(np.abs(ring.to_w(c1 + r1 * u)))
    rb = float(np.abs(ring.to_w(c2 + r2 * u)))
    lo, hi = sorted([ra, rb])
    return Ring(X1, X2, 0j, lo, hi)


# ------------------------------------------------- separating round rings


def _mobius_image(K, X1, X2):
    """Image of a component under ``w = (z - X1)/(z - X2)`` (identity when X2 is None).

    Returns ("disc", C, R), ("ext", C, R), ("pt", w) or ("pts", samples, eps).
    """
    if isinstance(K, Point):
        if K.at is INF:
            return ("pt", 1.0 + 0j) if X2 is not None else ("ext", 0j, math.inf)
        w = K.at if X2 is None else (K.at - X1) / (K.at - X2)
        return ("pt", complex(w))
    if isinstance(K, (Disc, DiscComplement)):
        if X2 is None:
            return ("disc" if isinstance(K, Disc) else "ext", K.center, K.radius)
        if abs(abs(X2 - K.center) - K.radius) <= 1e-14 * max(1.0, K.radius):
            return ("ext", 0j, math.inf)
        C0, R0 = circle_image(K.center, K.radius, X2)
        C = 1 + (X2 - X1) * C0
        R = abs(X2 - X1) * R0
        bounded = not bool(K.contains(np.array([X2]))[0])
        return ("disc" if bounded else "ext", complex(C), float(R))
    # polygon: dense boundary image with a Lipschitz margin
    v = K.array
    b = np.roll(v, -1)
    per = max(2, 2048 // len(v))
    t = np.arange(per) / per
    z = (v[:, None] + (b - v)[:, None] * t[None, :]).ravel()
    step = float(np.max(np.abs(b - v))) / per
    if X2 is None:
        return ("pts", z, 0.5 * step, K)
    if K.contains(np.array([X2]))[0] or float(K.euclid_dist(np.array([X2]))[0]) <= 2 * step:
        return ("ext", 0j, math.inf)
    w = (z - X1) / (z - X2)
    dmin = float(np.min(np.abs(z - X2))) - step
    lip = abs(X1 - X2) / dmin ** 2
    return ("pts", w, 0.5 * step * lip, None)


def _r_in(img, c):
    kind = img[0]
    if kind == "disc":
        return abs(c - img[1]) + img[2]
    if kind == "pt":
        return abs(c - img[1])
    if kind == "pts":
        return float(np.max(np.abs(img[1] - c))) + img[2]
    return math.inf


def _r_out(img, c):
    kind = img[0]
    if kind == "disc":
        return abs(c - img[1]) - img[2]
    if kind == "ext":
        return img[2] - abs(c - img[1])
    if kind == "pt":
        return abs(c - img[1])
    w, eps, K = img[1], img[2], img[3]
    if K is not None:
        if K.contains(np.array([c]))[0]:
            return -1.0
        return float(K.euclid_dist(np.array([c]))[0])
    from matplotlib.path import Path
    if Path(np.c_[w.real, w.imag]).contains_point((c.real, c.imag)):
        return -1.0
    return float(np.min(np.abs(w - c))) - eps


def ring_pole_options(inside, outside):
    """Moebius normalisations worth trying: identity and limit points of disc pairs."""
    opts = [(None, None)]
    for e in inside:
        for f in outside:
            if _disc_type(e) and _disc_type(f):
                try:
                    nm = ring_map(e.center, e.radius, f.center, f.radius)
                except ValueError:
                    continue
                if nm is not None:
                    opts.append(nm)
    return opts


def best_round_ring(inside, outside, starts: int = 4, rng=None, poles=None):
    """Widest round annulus (after a Moebius normalisation) separating two component sets.

    Returns ``(Ring, modulus)`` or ``(None, 0.0)`` when no option separates.  The
    ring's open annulus avoids every component, so it is a subdomain of U.
    """
    from scipy.optimize import minimize

    best = (None, 0.0)
    for X1, X2 in (poles if poles is not None else ring_pole_options(inside, outside)):
        imgs_in = [_mobius_image(K, X1, X2) for K in inside]
        if any(im[0] == "ext" for im in imgs_in):
            continue
        imgs_out = [_mobius_image(K, X1, X2) for K in outside]

        def score(c):
            ri = max(_r_in(im, c) for im in imgs_in)
            ro = min(_r_out(im, c) for im in imgs_out)
            return ri, ro

        def neg(x):
            ri, ro = score(complex(x[0], x[1]))
            if not (ro > ri > 0):
                return 1e6 + (ri - ro)
            return -math.log(ro / ri)

        pts = []
        for im in imgs_in:
            if im[0] in ("disc", "pt"):
                pts.append(im[1])
            elif im[0] == "pts":
                pts.append(complex(np.mean(im[1])))
        c0 = complex(np.mean(pts))
        seeds = [c0] + pts[:3]
        if rng is not None:
            spread = max(1e-9, max(abs(p - c0) for p in pts) + max(_r_in(im, c0) for im in imgs_in) * 0.1)
            seeds += [c0 + spread * complex(*rng.standard_normal(2)) for _ in range(max(0, starts - len(seeds)))]
        for c in seeds[:max(starts, 1)]:
            res = minimize(neg, [c.real, c.imag], method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400})
            cc = complex(res.x[0], res.x[1])
            ri, ro = score(cc)
            if ro > ri > 0:
                mod = math.log(ro / ri) / (2 * math.pi)
                if mod > best[1]:
                    best = (Ring(X1, X2, cc, ri, ro), mod)
    return best


def _disc_type(K) -> bool:
    return isinstance(K, (Disc, DiscComplement))


def _dist_center_to(K, c: complex) -> float:
    """Euclidean distance from a point to a component (``inf`` for the point at infinity)."""
    return float(K.euclid_dist(np.array([c]))[0])


def _max_dist_from(K, c: complex) -> float:
    if isinstance(K, Disc):
        return abs(K.center - c) + K.radius
    if isinstance(K, Polygon):
        return float(np.max(np.abs(K.array - c)))
    if isinstance(K, Point):
        return math.inf if K.at is INF else abs(K.at - c)
    return math.inf


# ------------------------------------------------------------ density model


FULL_PARTITIONS_UPTO = 6


def _partition_sizes(n: int) -> tuple:
    """Subset sizes used for comparison annuli; all of them only while 2^n stays small."""
    if n <= FULL_PARTITIONS_UPTO:
        return tuple(range(1, n))
    return (1, n - 1)


class DensityModel:
    """Vectorised density bracket for one domain."""

    def __init__(self, U: PointedDomain):
        self.U = U
        comps = U.components
        n = len(comps)
        if n == 0:
            raise ValueError("the sphere is not hyperbolic")
        pts = [K for K in comps if isinstance(K, Point)]
        if len(pts) == n and n <= 2:
            raise ValueError("complement has fewer than three points; not hyperbolic")
        self.exact = None
        if n == 1 and _disc_type(comps[0]):
            K = comps[0]
            if isinstance(K, Disc):
                self.exact = lambda z, K=K: exterior_density(z, K.center, K.radius)
            else:
                self.exact = lambda z, K=K: disc_density(z, K.center, K.radius)
            self.kind = "exact"
        elif n == 2 and all(_disc_type(K) for K in comps):
            ring = make_ring(*comps)
            self.ring = ring
            self.exact = ring.density
            self.kind = "exact"
        elif n == 2 and len(pts) == 1 and any(_disc_type(K) for K in comps):
            K = next(K for K in comps if _disc_type(K))
            p = pts[0].at
            self.exact = _punctured_exact(K, p)
            self.kind = "exact"
        else:
            self.kind = "sandwich"
            self._build_sandwich()

    # .................................................................
    def _build_sandwich(self):
        comps = self.U.components
        idx_inf = self.U.inf_index()
        self.upper_annuli = []
        self.upper_ext = []
        self.lower_single = []
        self.lower_rings = []
        self.lower_punct = []
        # concentric annuli about each disc-type component
        for i, K in enumerate(comps):
            others = [comps[j] for j in range(len(comps)) if j != i]
            if isinstance(K, Disc):
                rout = min(_dist_center_to(J, K.center) + 0.0 for J in others)
                if rout > K.radius and math.isfinite(rout):
                    self.upper_annuli.append((K.center, K.radius, rout))
            elif isinstance(K, DiscComplement):
                rin = max(_max_dist_from(J, K.center) for J in others)
                if rin < K.radius:
                    self.upper_annuli.append((K.center, rin, K.radius))
        # one annulus per partition, centred between the inside components
        n = len(comps)
        for k in _partition_sizes(n):
            for S in combinations(range(n), k):
                if idx_inf is not None and idx_inf in S:
                    continue
                anchors = [comps[i].inscribed().center if not isinstance(comps[i], Point) else comps[i].at
                           for i in S]
                if any(a is INF for a in anchors):
                    continue
                c = _minimax_center(np.array(anchors, dtype=complex), [comps[i] for i in S])
                rin = max(_max_dist_from(comps[i], c) for i in S)
                rest = [comps[j] for j in range(n) if j not in S]
                rout = min(_dist_center_to(J, c) for J in rest)
                if rin < rout:
                    if math.isfinite(rout):
                        self.upper_annuli.append((c, rin, rout))
                    else:
                        self.upper_ext.append((c, rin))
        # Moebius-round rings separating each partition
        self.upper_rings = []
        for k in _partition_sizes(n):
            for S in combinations(range(n), k):
                if idx_inf is not None and idx_inf in S:
                    continue
                if idx_inf is None and k > n - k:
                    continue
                ins = [comps[i] for i in S]
                outs = [comps[j] for j in range(n) if j not in S]
                ring, mod = best_round_ring(ins, outs, starts=2)
                if idx_inf is None:
                    r2, m2 = best_round_ring(outs, ins, starts=2)
                    if m2 > mod:
                        ring, mod = r2, m2
                if ring is not None:
                    self.upper_rings.append(ring)
        # superdomains: complements of one or two disc-type pieces
        discs = []
        for K in comps:
            if isinstance(K, Polygon):
                discs.append(K.inscribed())
            elif _disc_type(K):
                discs.append(K)
            else:
                discs.append(None)
        self.lower_single = [D for D in discs if D is not None]
        for i, j in combinations(range(n), 2):
            Di, Dj = discs[i], discs[j]
            if Di is not None and Dj is not None:
                try:
                    self.lower_rings.append(make_ring(Di, Dj))
                except ValueError:
                    pass
            elif Di is not None or Dj is not None:
                D = Di if Di is not None else Dj
                P = comps[j] if Di is not None else comps[i]
                if not (P.at is INF and isinstance(D, DiscComplement)):
                    self.lower_punct.append(_punctured_exact(D, P.at))
        # discs on both sides of a narrow gap of a polygon: their complement contains U
        for K in comps:
            if isinstance(K, Polygon):
                for D1, D2 in pinch_discs(K):
                    try:
                        self.lower_rings.append(make_ring(D1, D2))
                    except ValueError:
                        pass
        self.use_hempel = n >= 3

    # .................................................................
    def bounds(self, z):
        """Return ``(lower, upper)`` density arrays at finite points ``z``."""
        z = np.asarray(z, dtype=complex)
        if self.exact is not None:
            v = self.exact(z)
            return v, v
        up = self.upper(z)
        lo = np.zeros(z.shape)
        for D in self.lower_single:
            if isinstance(D, Disc):
                v = exterior_density(z, D.center, D.radius)
            else:
                v = disc_density(z, D.center, D.radius)
            lo = np.maximum(lo, np.where(np.isfinite(v), v, 0.0))
        for ring in self.lower_rings:
            v = ring.density(z)
            lo = np.maximum(lo, np.where(np.isfinite(v), v, 0.0))
        for f in self.lower_punct:
            v = f(z)
            lo = np.maximum(lo, np.where(np.isfinite(v), v, 0.0))
        if self.use_hempel:
            lo = np.maximum(lo, self._hempel_lower(z))
        lo = np.minimum(lo, up)
        return lo, up

    def upper(self, z):
        """Upper density only (cheaper; used by optimisers)."""
        z = np.asarray(z, dtype=complex)
        if self.exact is not None:
            return self.exact(z)
        delta = self.U.euclid_clearance(z)
        with np.errstate(divide="ignore"):
            up = 2.0 / delta
        for c, r1, r2 in self.upper_annuli:
            up = np.minimum(up, annulus_density(z, c, r1, r2))
        for c, r in self.upper_ext:
            up = np.minimum(up, exterior_density(z, c, r))
        for ring in self.upper_rings:
            v = ring.density(z)
            up = np.minimum(up, np.where(np.isnan(v), np.inf, v))
        return up

    def _hempel_lower(self, z):
        comps = self.U.components
        near = []
        dist = []
        for K in comps:
            q, d = _nearest_points(K, z)
            near.append(q)
            dist.append(d)
        near = np.stack(near)  # (n, ...)
        dist = np.stack(dist)
        order = np.argsort(dist, axis=0)
        take = lambda k: np.take_along_axis(near, order[k:k + 1], axis=0)[0]
        a, b, c = take(0), take(1), take(2)
        inf_c = ~np.isfinite(c)
        c_safe = np.where(inf_c, 0.0, c)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(inf_c, (z - a) / (b - a), (z - a) * (b - c_safe) / ((z - c_safe) * (b - a)))
            dw = np.where(inf_c, 1.0 / np.abs(b - a),
                          np.abs((b - c_safe) * (a - c_safe)) / (np.abs(z - c_safe) ** 2 * np.abs(b - a)))
            v = punctured_plane_lower(w) * dw
        return np.nan_to_num(v, nan=0.0, posinf=0.0)


def _punctured_exact(K, p):
    """Density of the sphere minus a disc-type set and one point."""
    if p is INF:
        if isinstance(K, Disc):
            return lambda z: punctured_exterior_density(z, K.center, K.radius)
        raise ValueError("infinity already lies in the disc complement")
    if isinstance(K, DiscComplement) and abs(p - K.center) == 0:
        return lambda z: punctured_disc_density(z, K.center, K.radius)
    c2, r2 = circle_image(K.center, K.radius, p)

    def f(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            zeta = 1.0 / (z - p)
            return punctured_exterior_density(zeta, c2, r2) / np.abs(z - p) ** 2
    return f


def _nearest_points(K, z):
    z = np.asarray(z, dtype=complex)
    if isinstance(K, (Disc, DiscComplement)):
        v = z - K.center
        a = np.abs(v)
        u = np.where(a > 0, v / np.where(a > 0, a, 1.0), 1.0)
        q = K.center + K.radius * u
        return q, np.abs(z - q)
    if isinstance(K, Point):
        if K.at is INF:
            return np.full(z.shape, np.inf + 0j), np.full(z.shape, np.inf)
        return np.full(z.shape, K.at), np.abs(z - K.at)
    v = K.array
    a, b = v[None, :], np.roll(v, -1)[None, :]
    flat = z.ravel()[:, None]
    d = b - a
    t = np.clip(((np.conj(d) * (flat - a)).real) / np.abs(d) ** 2, 0, 1)
    p = a + t * d
    k = np.argmin(np.abs(flat - p), axis=1)
    q = p[np.arange(len(flat)), k].reshape(z.shape)
    return q, np.abs(z - q)


def _minimax_center(anchors: np.ndarray, comps) -> complex:
    """Centre minimising the radius of a disc containing all given components."""
    c = complex(anchors.mean())
    best = max(_max_dist_from(K, c) for K in comps)
    step = max(best, 1e-12) * 0.5
    while step > 1e-9 * max(best, 1e-300):
        improved = False
        for d in (1, 1j, -1, -1j):
            cc = c + step * d
            v = max(_max_dist_from(K, cc) for K in comps)
            if v < best:
                c, best, improved = cc, v, True
                break
        if not improved:
            step *= 0.5
    return c


_MODEL_CACHE: dict = {}


def model(U: PointedDomain) -> DensityModel:
    key = (U.components,)
    m = _MODEL_CACHE.get(key)
    if m is None:
        if len(_MODEL_CACHE) > 256:
            _MODEL_CACHE.clear()
        m = DensityModel(U)
        _MODEL_CACHE[key] = m
    return m


def density(U: PointedDomain, z) -> DensityInterval:
    """Certified density bracket at one finite point of U."""
    if z is INF:
        raise ValueError("density is per Euclidean length; evaluate at finite points")
    z = complex(z)
    if not U.contains_point(z):
        raise ValueError("point is not in U")
    lo, up = model(U).bounds(np.array([z]))
    return DensityInterval(float(lo[0]), float(up[0]), z)


def density_bounds(U: PointedDomain, z):
    return model(U).bounds(z)


# ------------------------------------------------------------------ length


def _piece_bounds(U, a, b, k):
    """Per-edge (lower, upper) lengths with ``k`` sub-pieces per edge."""
    t = np.arange(2 * k + 1) / (2 * k)
    pts = a[:, None] + (b - a)[:, None] * t[None, :]
    lo, up = model(U).bounds(pts)
    seg = np.abs(b - a) / k
    lo3 = np.minimum(np.minimum(lo[:, 0:-1:2], lo[:, 1::2]), lo[:, 2::2])
    up3 = np.maximum(np.maximum(up[:, 0:-1:2], up[:, 1::2]), up[:, 2::2])
    return (lo3.sum(axis=1) * seg, up3.sum(axis=1) * seg)


def edge_length_bounds(U: PointedDomain, z, closed: bool = True, levels=(2, 4, 8)):
    """Per-edge length brackets, intersected over refinement levels."""
    z = np.asarray(z, dtype=complex)
    a = z
    b = np.roll(z, -1) if closed else z[1:]
    if not closed:
        a = z[:-1]
    lo = np.zeros(len(a))
    up = np.full(len(a), np.inf)
    for k in levels:
        l, u = _piece_bounds(U, a, b, k)
        lo = np.maximum(lo, l)
        up = np.minimum(up, u)
    lo = np.minimum(lo, up)
    return lo, up


def hyp_length(U: PointedDomain, curve, closed: bool = True, levels=(2, 4, 8)) -> DistInterval:
    """Hyperbolic length bracket of a polyline (closed by default)."""
    z = curve.array if hasattr(curve, "array") else np.asarray(curve, dtype=complex)
    if len(z) < 2:
        return DistInterval(0.0, 0.0)
    if not U.contains(z).all():
        raise ValueError("curve exits U")
    lo, up = edge_length_bounds(U, z, closed, levels)
    if not np.isfinite(up).all():
        raise ValueError("curve exits U")
    return DistInterval(float(lo.sum()), float(up.sum()))


# ------------------------------------------------------------- distances


def _simply_connected_dist(K, z, w) -> float:
    """Exact distance in the sphere minus one disc-type set."""
    if isinstance(K, DiscComplement):
        r = K.radius
        a, b = z - K.center, w - K.center
    else:
        r = K.radius
        a, b = r * r / (z - K.center), r * r / (w - K.center)
    x = r * abs(a - b) / abs(r * r - a.conjugate() * b)
    x = min(x, 1.0)
    if x >= 1.0:
        return math.inf
    return 2 * math.atanh(x)


def closed_form_lower(U: PointedDomain, z: complex, w: complex) -> float:
    best = 0.0
    for K in U.components:
        D = K.inscribed() if isinstance(K, Polygon) else K
        if isinstance(D, (Disc, DiscComplement)):
            best = max(best, _simply_connected_dist(D, z, w))
    return best


OFFSETS = ((1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1))


class LogPolarMesh:
    """Graph on a log-polar grid ``c + exp(s + i theta)`` restricted to U.

    Every edge is a straight segment certified to stay in U (the clearance
    discs at its endpoints cover it).  Edge weights bracket the hyperbolic
    length of the segment.
    """

    def __init__(self, U: PointedDomain, h: float | None = None, extra=(), max_nodes: int = 400_000):
        self.U = U
        comps = U.components
        pts = [p for p in extra if p is not INF]
        if U.basepoint is not INF:
            pts.append(U.basepoint)
        c, hh, s0, s1 = choose_mesh(U, pts, h)
        nt = max(16, int(math.ceil(2 * math.pi / hh)))
        ht = 2 * math.pi / nt
        ns = max(2, int(math.ceil((s1 - s0) / hh)) + 1)
        while ns * nt > max_nodes:
            hh *= 1.25
            nt = max(16, int(math.ceil(2 * math.pi / hh)))
            ht = 2 * math.pi / nt
            ns = max(2, int(math.ceil((s1 - s0) / hh)) + 1)
        self.c, self.hs, self.ht, self.s0, self.ns, self.nt = c, (s1 - s0) / (ns - 1), ht, s0, ns, nt
        s = s0 + self.hs * np.arange(ns)
        th = ht * np.arange(nt)
        self.grid = c + np.exp(s[:, None] + 1j * th[None, :])
        flat = self.grid.ravel()
        # the centre joins the innermost ring radially, so paths through the hole are not lost
        self.center_node = bool(U.contains(np.array([c]))[0])
        if self.center_node:
            flat = np.append(flat, c)
        self.points = flat
        self.clear = U.euclid_clearance(flat)
        self.valid = (self.clear > 0) & U.contains(flat)
        self.rho_lo = np.full(flat.shape, np.inf)
        self.rho_up = np.full(flat.shape, np.inf)
        lo, up = model(U).bounds(flat[self.valid])
        self.rho_lo[self.valid] = lo
        self.rho_up[self.valid] = up
        self._build_edges()

    @property
    def nodes(self) -> np.ndarray:
        return self.points

    def index(self, i, j):
        return i * self.nt + (j % self.nt)

    def _build_edges(self):
        ns, nt = self.ns, self.nt
        I, J = np.meshgrid(np.arange(ns), np.arange(nt), indexing="ij")
        rows, cols, wl, wu = [], [], [], []
        flat = self.points
        pairs = []
        for di, dj in OFFSETS:
            i2 = I + di
            ok = (i2 >= 0) & (i2 < ns)
            pairs.append((self.index(I[ok], J[ok]), self.index(i2[ok], J[ok] + dj)))
        if self.center_node:
            pairs.append((np.full(nt, ns * nt), self.index(np.zeros(nt, dtype=int), np.arange(nt))))
        for a, b in pairs:
            good = self.valid[a] & self.valid[b]
            a, b = a[good], b[good]
            za, zb = flat[a], flat[b]
            L = np.abs(zb - za)
            good = self.clear[a] + self.clear[b] >= L
            a, b, za, zb, L = a[good], b[good], za[good], zb[good], L[good]
            lo, up = self._edge_weights(za, zb, self.rho_lo[a], self.rho_up[a], self.rho_lo[b], self.rho_up[b])
            rows.append(a)
            cols.append(b)
            wl.append(lo)
            wu.append(up)
        self.e_a = np.concatenate(rows)
        self.e_b = np.concatenate(cols)
        self.e_lo = np.concatenate(wl)
        self.e_up = np.concatenate(wu)
        N = len(flat)
        self.N = N
        self.G_up = sparse.csr_matrix((np.maximum(self.e_up, 1e-300), (self.e_a, self.e_b)), shape=(N, N))
        self.G_lo = sparse.csr_matrix((np.maximum(self.e_lo, 1e-300), (self.e_a, self.e_b)), shape=(N, N))

    def _edge_weights(self, za, zb, la, ua, lb, ub):
        """Two-piece min/max density samples times length."""
        m = model(self.U)
        lm, um = m.bounds(0.5 * (za + zb))
        l1, u1 = m.bounds(0.75 * za + 0.25 * zb)
        l3, u3 = m.bounds(0.25 * za + 0.75 * zb)
        half = 0.5 * np.abs(zb - za)
        lo = (np.minimum(np.minimum(la, l1), lm) + np.minimum(np.minimum(lm, l3), lb)) * half
        up = (np.maximum(np.maximum(ua, u1), um) + np.maximum(np.maximum(um, u3), ub)) * half
        return lo, up

    # .................................................................
    def attachments(self, q: complex, radius: int = 2):
        """Edges from an off-grid point to nearby nodes: (node, lower, upper)."""
        c = self.c
        d = abs(q - c)
        flat = self.points
        if d < math.exp(self.s0):
            nodes = self.index(np.zeros(self.nt, dtype=int), np.arange(self.nt))
            if self.center_node:
                nodes = np.append(nodes, self.ns * self.nt)
        else:
            s = math.log(d)
            th = math.atan2((q - c).imag, (q - c).real) % (2 * math.pi)
            i0 = int(round((s - self.s0) / self.hs))
            j0 = int(round(th / self.ht))
            ii, jj = np.meshgrid(np.arange(i0 - radius, i0 + radius + 1),
                                 np.arange(j0 - radius, j0 + radius + 1), indexing="ij")
            ok = (ii >= 0) & (ii < self.ns)
            nodes = self.index(ii[ok], jj[ok])
        nodes = nodes[self.valid[nodes]]
        if len(nodes) == 0:
            return nodes, np.zeros(0), np.zeros(0)
        cq = float(self.U.euclid_clearance(np.array([q]))[0])
        L = np.abs(flat[nodes] - q)
        good = self.clear[nodes] + cq >= L
        nodes = nodes[good]
        if len(nodes) == 0:
            return nodes, np.zeros(0), np.zeros(0)
        zq = np.full(len(nodes), q)
        lq, uq = model(self.U).bounds(np.array([q]))
        lo, up = self._edge_weights(flat[nodes], zq, self.rho_lo[nodes], self.rho_up[nodes],
                                    np.full(len(nodes), lq[0]), np.full(len(nodes), uq[0]))
        return nodes, lo, up

    def field(self, q: complex):
        """Single-source distances (lower graph, upper graph, predecessors) from ``q``."""
        nodes, lo, up = self.attachments(q)
        if len(nodes) == 0:
            raise MeshError("source point is not connected to the mesh; refine the mesh")
        N = self.N
        out = []
        preds = None
        for G, w in ((self.G_lo, lo), (self.G_up, up)):
            extra_r = sparse.csr_matrix((np.maximum(w, 1e-300), (np.zeros(len(nodes), dtype=int), nodes)),
                                        shape=(1, N))
            H = sparse.bmat([[G, extra_r.T], [extra_r, None]], format="csr")
            if G is self.G_up:
                dist, pred = dijkstra(H, directed=False, indices=N, return_predecessors=True)
                preds = pred
            else:
                dist = dijkstra(H, directed=False, indices=N)
            out.append(dist[:N])
        return SourceField(self, q, out[0], out[1], preds)


class MeshError(RuntimeError):
    pass


@dataclass
class SourceField:
    mesh: LogPolarMesh
    source: complex
    d_lo: np.ndarray
    d_up: np.ndarray
    pred: np.ndarray

    def to_point(self, q: complex) -> tuple[float, float, int]:
        """Graph distances to ``q`` and the mesh node used on the upper path."""
        if q == self.source:
            return 0.0, 0.0, -1
        nodes, lo, up = self.mesh.attachments(q)
        if len(nodes) == 0:
            return math.inf, math.inf, -1
        a = self.d_lo[nodes] + lo
        b = self.d_up[nodes] + up
        k = int(np.argmin(b))
        # direct segment when both points see each other
        U = self.mesh.U
        cl = U.euclid_clearance(np.array([q, self.source]))
        if cl.sum() >= abs(q - self.source):
            l, u = edge_length_bounds(U, np.array([self.source, q]), closed=False)
            return float(min(a.min(), l[0])), float(min(b.min(), u[0])), (-1 if u[0] <= b[k] else int(nodes[k]))
        return float(a.min()), float(b[k]), int(nodes[k])

    def path_to(self, q: complex) -> np.ndarray:
        """Polyline from the source to ``q`` along the upper-weight shortest path."""
        _, _, node = self.to_point(q)
        if node < 0:
            return np.array([self.source, q])
        N = self.mesh.N
        flat = self.mesh.points
        seq = []
        v = node
        while v != N and v >= 0:
            seq.append(flat[v])
            v = self.pred[v]
        seq = seq[::-1]
        return np.array([self.source] + seq + [q])


def choose_mesh(U: PointedDomain, pts, h: float | None):
    """Pick the log-polar centre, spacing and radial range for a domain."""
    comps = U.components
    h_max = 0.05 if h is None else h
    h_min = 2e-4
    feats = _features(U, pts)
    cands = []
    for K in comps:
        if isinstance(K, (Disc, DiscComplement)):
            cands.append(K.center)
        elif isinstance(K, Polygon):
            cands.append(K.inscribed().center)
        elif isinstance(K, Point) and K.at is not INF:
            cands.append(K.at)
    cands.extend(pts)
    best = None
    for c in cands:
        hh = h_max
        for x, w in feats:
            dx = abs(x - c)
            if dx > 0:
                hh = min(hh, w / (4 * dx))
        hh = max(hh, h_min)
        s0, s1 = _radial_range(U, c, pts)
        cost = (s1 - s0) / hh * (2 * math.pi / hh)
        key = (cost, abs(c))
        if best is None or key < best[0]:
            best = (key, c, hh, s0, s1)
    _, c, hh, s0, s1 = best
    return c, hh, s0, s1


def _features(U, pts):
    """(location, width) pairs that the mesh must resolve."""
    comps = U.components
    feats = []
    for i, j in combinations(range(len(comps)), 2):
        a, b = _closest_pair(comps[i], comps[j])
        if a is not None:
            feats.append((0.5 * (a + b), abs(a - b)))
    for K in comps:
        if isinstance(K, Polygon):
            feats.extend(polygon_pinches(K))
    for p in pts:
        d = float(U.euclid_clearance(np.array([p]))[0])
        if 0 < d < math.inf:
            feats.append((p, 2 * d))
    return feats


def _closest_pair(A, B):
    """Closest points between two components (None if one is the point at infinity)."""
    if isinstance(A, Point) and A.at is INF or isinstance(B, Point) and B.at is INF:
        return None, None
    if isinstance(A, DiscComplement) and isinstance(B, DiscComplement):
        return None, None
    sa = _sample(A)
    sb = _sample(B)
    d = np.abs(sa[:, None] - sb[None, :])
    k = np.unravel_index(np.argmin(d), d.shape)
    return complex(sa[k[0]]), complex(sb[k[1]])


def _sample(K, n: int = 256):
    if isinstance(K, Point):
        return np.array([K.at])
    if isinstance(K, Polygon):
        v = K.array
        per = max(1, 512 // len(v))
        b = np.roll(v, -1)
        t = np.arange(per) / per
        return (v[:, None] + (b - v)[:, None] * t[None, :]).ravel()
    return K.boundary(n)


def polygon_pinches(K: Polygon):
    """Narrow places where a polygon nearly touches itself."""
    v = K.array
    n = len(v)
    a, b = v, np.roll(v, -1)
    mids = 0.5 * (a + b)
    seglen = np.abs(b - a)
    cum = np.concatenate([[0], np.cumsum(seglen)])
    per = cum[-1]
    out = []
    for i in range(n):
        d = _seg_seg_dist(a[i], b[i], a, b)
        arc = np.abs(cum[:-1] - cum[i])
        arc = np.minimum(arc, per - arc)
        mask = (arc > 3 * d) & (np.abs(np.arange(n) - i) > 1) & (np.abs(np.arange(n) - i) < n - 1)
        if mask.any():
            k = int(np.argmin(np.where(mask, d, np.inf)))
            out.append((0.5 * (mids[i] + mids[k]), float(d[k])))
    if not out:
        return []
    w = min(x[1] for x in out)
    return [x for x in out if x[1] <= 1.5 * w]


def pinch_discs(K: Polygon, samples: int = 7, rel: float = 0.1) -> list:
    """Pairs of discs inside K facing each other across each narrow gap of K."""
    v = K.array
    n = len(v)
    a, b = v, np.roll(v, -1)
    seglen = np.abs(b - a)
    cum = np.concatenate([[0], np.cumsum(seglen)])
    per = cum[-1]
    size = float(np.ptp(v.real) + np.ptp(v.imag))
    found = []
    for i in range(n):
        d = _seg_seg_dist(a[i], b[i], a, b)
        arc = np.abs(cum[:-1] - cum[i])
        arc = np.minimum(arc, per - arc)
        mask = (arc > 3 * d) & (np.abs(np.arange(n) - i) > 1) & (np.abs(np.arange(n) - i) < n - 1)
        if mask.any():
            k = int(np.argmin(np.where(mask, d, np.inf)))
            found.append((i, k, float(d[k])))
    if not found:
        return []
    w = min(x[2] for x in found)
    out = []
    seen = set()
    for i, k, d in found:
        if d > 1.5 * w or d > rel * size or (k, i) in seen:
            continue
        seen.add((i, k))
        e = b[k] - a[k]
        for t in np.linspace(0.1, 0.9, samples):
            p = a[i] + t * (b[i] - a[i])
            s = np.clip(((np.conj(e) * (p - a[k])).real) / abs(e) ** 2, 0, 1)
            q = a[k] + s * e
            if not 0 < abs(p - q) <= 2 * d:
                continue
            # inward normals (vertices are stored counter-clockwise)
            ni = 1j * (b[i] - a[i]) / seglen[i]
            nk = 1j * e / abs(e)
            if ((q - p) * np.conj(ni)).real > 0 or ((p - q) * np.conj(nk)).real > 0:
                continue  # the gap is not between the two edge faces
            D1 = _tangent_disc(K, p, ni, size)
            D2 = _tangent_disc(K, q, nk, size)
            if D1 is not None and D2 is not None:
                out.append((D1, D2))
    return out


def _tangent_disc(K: Polygon, p: complex, u: complex, size: float):
    """Largest disc inside K touching the boundary near p, centred along direction u."""
    def fits(r):
        c = p + r * u
        return bool(K.contains(np.array([c]))[0]) and float(K.edge_dist(np.array([c]))[0]) >= r * (1 - 1e-9)
    lo, hi = 0.0, size
    if not fits(1e-9 * size):
        return None
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if fits(mid):
            lo = mid
        else:
            hi = mid
    r = 0.98 * lo
    if r <= 0:
        return None
    # shift inward so the shrunken disc stays inside
    return Disc(complex(p + lo * u), r)


def _seg_seg_dist(p, q, a, b):
    from .sphere import point_segment_dist
    d1 = point_segment_dist(np.array([p])[:, None], a[None, :], b[None, :])[0]
    d2 = point_segment_dist(np.array([q])[:, None], a[None, :], b[None, :])[0]
    d3 = point_segment_dist(a, p, q)
    d4 = point_segment_dist(b, p, q)
    return np.minimum(np.minimum(d1, d2), np.minimum(d3, d4))


def _radial_range(U, c, pts):
    comps = U.components
    inner = 0.0
    for K in comps:
        if isinstance(K, Disc) and abs(c - K.center) < K.radius:
            inner = max(inner, K.radius - abs(c - K.center))
        elif isinstance(K, Polygon) and K.contains(np.array([c]))[0]:
            inner = max(inner, float(K.edge_dist(np.array([c]))[0]))
    near = [abs(p - c) for p in pts if abs(p - c) > 0]
    dc = [_dist_center_to(K, c) for K in comps]
    dc = [d for d in dc if d > 0 and math.isfinite(d)]
    if inner > 0:
        r0 = inner * 0.999
    else:
        cand = near + dc
        r0 = 0.25 * min(cand) if cand else 1e-3
        r0 = min(r0, 0.25 * min(dc)) if dc else r0
    idx = U.inf_index()
    if idx is not None and isinstance(comps[idx], DiscComplement):
        K = comps[idx]
        r1 = abs(c - K.center) + K.radius
    else:
        far = [abs(p - c) for p in pts]
        for K in comps:
            m = _max_dist_from(K, c)
            if math.isfinite(m):
                far.append(m)
        r1 = 4.0 * max(far) if far else 10.0
    if r1 <= r0:
        r1 = 2 * r0
    return math.log(r0), math.log(r1)


_MESH_CACHE: dict = {}


def get_mesh(U: PointedDomain, h: float | None = None) -> LogPolarMesh:
    key = (U.components, U.basepoint, h)
    m = _MESH_CACHE.get(key)
    if m is None:
        if len(_MESH_CACHE) > 8:
            _MESH_CACHE.clear()
        m = LogPolarMesh(U, h)
        _MESH_CACHE[key] = m
    return m


_FIELD_CACHE: dict = {}


def get_field(U: PointedDomain, z: complex, h: float | None = None) -> SourceField:
    key = (U.components, U.basepoint, h, z)
    f = _FIELD_CACHE.get(key)
    if f is None:
        if len(_FIELD_CACHE) > 16:
            _FIELD_CACHE.clear()
        f = get_mesh(U, h).field(z)
        _FIELD_CACHE[key] = f
    return f


def _check_inside(U, *pts):
    for p in pts:
        if p is INF:
            raise ValueError("distances are computed at finite points; invert the domain first")
        if not U.contains_point(p):
            raise ValueError("point is not in U")


def hyp_dist(U: PointedDomain, z, w, h: float | None = None) -> DistInterval:
    """Distance bracket between two points of U."""
    z, w = complex(z), complex(w)
    _check_inside(U, z, w)
    if z == w:
        return DistInterval(0.0, 0.0)
    fld = get_field(U, z, h)
    lo_g, up_g, _ = fld.to_point(w)
    if not math.isfinite(up_g):
        raise MeshError("points not connected in the mesh; refine the mesh")
    lo = max(lo_g / GRID_STRETCH, closed_form_lower(U, z, w))
    return DistInterval(min(lo, up_g), up_g)


def dist_point_to_curve(U: PointedDomain, z, curve, h: float | None = None) -> DistInterval:
    """Distance bracket from a point to a closed polyline in U."""
    z = complex(z)
    _check_inside(U, z)
    pts = curve.array if hasattr(curve, "array") else np.asarray(curve, dtype=complex)
    if not U.contains(pts).all():
        raise ValueError("curve exits U")
    # the curve's own edge lengths bound how far a sample can be from the continuum
    seg_lo, seg_up = edge_length_bounds(U, pts, True, levels=(2,))
    half = 0.5 * float(np.max(seg_up))
    k_on = np.flatnonzero(pts == z)
    if len(k_on):
        return DistInterval(0.0, 0.0)
    from .curves import winding_numbers  # noqa: F401  (kept local to avoid cycles)
    fld = get_field(U, z, h)
    los, ups = [], []
    for q in pts:
        a, b, _ = fld.to_point(q)
        los.append(a)
        ups.append(b)
    los = np.array(los)
    ups = np.array(ups)
    upper = float(ups.min())
    if not math.isfinite(upper):
        raise MeshError("curve not reachable in the mesh; refine the mesh")
    cf = max(closed_form_lower(U, z, complex(q)) for q in pts[:: max(1, len(pts) // 64)])
    cf_all = min(closed_form_lower(U, z, complex(q)) for q in pts) if len(pts) <= 512 else cf
    lower = max(float(los.min()) / GRID_STRETCH, cf_all) - half
    upper_on = _on_curve_upper(U, z, pts)
    if upper_on is not None:
        upper = min(upper, upper_on)
    return DistInterval(max(0.0, min(lower, upper)), upper)


def _on_curve_upper(U, z, pts):
    """If ``z`` lies on an edge of the polyline its distance is 0."""
    a = pts
    b = np.roll(pts, -1)
    d = b - a
    t = np.clip(((np.conj(d) * (z - a)).real) / np.where(np.abs(d) > 0, np.abs(d) ** 2, 1), 0, 1)
    dist = np.abs(z - (a + t * d))
    if dist.min() <= 1e-12 * max(1.0, abs(z)):
        return 0.0
    return None


def closest_curve_point(U: PointedDomain, z, curve, h: float | None = None):
    """Index of the curve vertex closest to ``z`` along the upper-weight mesh path."""
    z = complex(z)
    pts = curve.array if hasattr(curve, "array") else np.asarray(curve, dtype=complex)
    fld = get_field(U, z, h)
    ups = np.array([fld.to_point(q)[1] for q in pts])
    k = int(np.argmin(ups))
    return k, fld.path_to(complex(pts[k])), float(ups[k])

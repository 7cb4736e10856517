"""Riemann-sphere points, compact complement pieces and spherical-metric primitives.

Spherical lengths use the density ``|dz| / (1 + |z|^2)``, so the whole sphere
has diameter ``pi / 2`` and ``sph_dist(p, q) = arctan(|p - q| / |1 + conj(p) q|)``.
The point at infinity is the singleton ``INF``; it is never encoded as a big float.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
import shapely
from matplotlib.path import Path
from scipy.spatial import cKDTree

HALF_PI = 0.5 * math.pi
DEFAULT_SPH_RES = 1e-4


class _Infinity:
    """The point at infinity of the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())

    def __hash__(self) -> int:
        return hash("caradomains.INF")


INF = _Infinity()
SpherePoint = Union[complex, _Infinity]


def is_inf(p) -> bool:
    return p is INF


def as_point(p) -> SpherePoint:
    """Coerce numbers, pairs and the string ``"inf"`` to a SpherePoint."""
    if p is INF or (isinstance(p, str) and p.lower() == "inf"):
        return INF
    if isinstance(p, (tuple, list, np.ndarray)) and len(p) == 2:
        z = complex(float(p[0]), float(p[1]))
    else:
        z = complex(p)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"finite sphere point expected, got {p!r}")
    return z


def sph_dist(p: SpherePoint, q: SpherePoint) -> float:
    """Spherical distance in half-central-angle units (range ``[0, pi/2]``)."""
    if p is INF and q is INF:
        return 0.0
    if p is INF:
        p, q = q, p
    if q is INF:
        return math.atan2(1.0, abs(p))
    return math.atan2(abs(p - q), abs(1.0 + p.conjugate() * q))


def sph_dist_array(z: np.ndarray, q: SpherePoint) -> np.ndarray:
    """Vectorised ``sph_dist`` from finite points ``z`` to one sphere point."""
    z = np.asarray(z, dtype=complex)
    if q is INF:
        return np.arctan2(1.0, np.abs(z))
    return np.arctan2(np.abs(z - q), np.abs(1.0 + np.conj(z) * q))


def invert(p: SpherePoint) -> SpherePoint:
    """The isometry ``z -> 1/z`` (``0 <-> INF``)."""
    if p is INF:
        return 0j
    if p == 0:
        return INF
    with np.errstate(over="ignore"):
        w = 1.0 / p
    # subnormal inputs overflow; their image is infinity to double precision
    return w if math.isfinite(w.real) and math.isfinite(w.imag) else INF


def antipode(p: SpherePoint) -> SpherePoint:
    """Diametrically opposite point ``-1/conj(p)``."""
    if p is INF:
        return 0j
    if p == 0:
        return INF
    return -1.0 / p.conjugate()


def to_unit_sphere(z: np.ndarray) -> np.ndarray:
    """Stereographic lift to the unit sphere in R^3 (finite points only)."""
    z = np.asarray(z, dtype=complex)
    s = 1.0 + np.abs(z) ** 2
    return np.stack([2 * z.real / s, 2 * z.imag / s, (np.abs(z) ** 2 - 1) / s], axis=-1)


@dataclass(frozen=True)
class Cap:
    """Closed spherical cap: center and radius in half-angle units."""

    center: SpherePoint
    radius: float

    def dist(self, z: SpherePoint) -> float:
        return max(0.0, sph_dist(z, self.center) - self.radius)

    def dist_array(self, z: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, sph_dist_array(z, self.center) - self.radius)


def _disc_cap(c: complex, r: float) -> Cap:
    m = abs(c)
    u = c / m if m > 0 else 1.0 + 0j
    a1 = math.atan(m - r)
    a2 = math.atan(m + r)
    return Cap(math.tan(0.5 * (a1 + a2)) * u, 0.5 * (a2 - a1))


# ---------------------------------------------------------------- compact sets


@dataclass(frozen=True)
class Disc:
    """Closed disc ``|z - center| <= radius``."""

    center: complex
    radius: float
    kind = "disc"

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("disc radius must be positive")

    @property
    def contains_inf(self) -> bool:
        return False

    def cap(self) -> Cap:
        return _disc_cap(self.center, self.radius)

    def contains(self, z: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) <= self.radius

    def euclid_dist(self, z: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, np.abs(np.asarray(z) - self.center) - self.radius)

    def anchor(self) -> complex:
        return self.center

    def inscribed(self) -> "Disc":
        return self

    def boundary(self, n: int = 256) -> np.ndarray:
        t = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * t)

    def translate(self, a: complex) -> "Disc":
        return Disc(self.center + a, self.radius)

    def scale(self, s: float) -> "Disc":
        return Disc(self.center * s, self.radius * abs(s))

    def negate(self) -> "Disc":
        return Disc(-self.center, self.radius)


@dataclass(frozen=True)
class DiscComplement:
    """Closed exterior ``|z - center| >= radius`` together with infinity."""

    center: complex
    radius: float
    kind = "disc_complement"

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError("disc_complement radius must be positive")

    @property
    def contains_inf(self) -> bool:
        return True

    def cap(self) -> Cap:
        inner = _disc_cap(self.center, self.radius)
        return Cap(antipode(inner.center), HALF_PI - inner.radius)

    def contains(self, z: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) >= self.radius

    def euclid_dist(self, z: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, self.radius - np.abs(np.asarray(z) - self.center))

    def anchor(self) -> SpherePoint:
        return INF

    def inscribed(self) -> "DiscComplement":
        return self

    def boundary(self, n: int = 256) -> np.ndarray:
        t = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * t)

    def translate(self, a: complex) -> "DiscComplement":
        return DiscComplement(self.center + a, self.radius)

    def scale(self, s: float) -> "DiscComplement":
        return DiscComplement(self.center * s, self.radius * abs(s))

    def negate(self) -> "DiscComplement":
        return DiscComplement(-self.center, self.radius)


@dataclass(frozen=True)
class Point:
    """A single point of the sphere (a degenerate component)."""

    at: SpherePoint
    kind = "point"

    def __post_init__(self):
        object.__setattr__(self, "at", as_point(self.at))

    @property
    def contains_inf(self) -> bool:
        return self.at is INF

    def cap(self) -> Cap:
        return Cap(self.at, 0.0)

    def contains(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z)
        if self.at is INF:
            return np.zeros(z.shape, dtype=bool)
        return z == self.at

    def euclid_dist(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z)
        if self.at is INF:
            return np.full(z.shape, np.inf)
        return np.abs(z - self.at)

    def anchor(self) -> SpherePoint:
        return self.at

    def inscribed(self) -> "Point":
        return self

    def boundary(self, n: int = 1) -> np.ndarray:
        if self.at is INF:
            return np.zeros(0, dtype=complex)
        return np.array([self.at], dtype=complex)

    def translate(self, a: complex) -> "Point":
        return self if self.at is INF else Point(self.at + a)

    def scale(self, s: float) -> "Point":
        return self if self.at is INF else Point(self.at * s)

    def negate(self) -> "Point":
        return self if self.at is INF else Point(-self.at)


def _segments_intersect(a, b, c, d) -> bool:
    def orient(p, q, r):
        v = (q - p).conjugate() * (r - p)
        return np.sign(v.imag)

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def point_segment_dist(z: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from points ``z[:, None]`` to segments ``(a, b)`` (broadcast)."""
    d = b - a
    dd = np.abs(d) ** 2
    safe = np.where(dd > 0, dd, 1.0)
    t = np.clip(((np.conj(d) * (z - a)).real) / safe, 0.0, 1.0)
    return np.abs(z - (a + t * d))


@dataclass(frozen=True)
class Polygon:
    """Closed simple polygon (interior plus boundary), stored counter-clockwise."""

    vertices: tuple
    kind = "polygon"

    def __post_init__(self):
        vs = tuple(as_point(v) for v in self.vertices)
        if len(vs) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if any(v is INF for v in vs):
            raise ValueError("polygon vertices must be finite")
        if _signed_area(vs) < 0:
            vs = vs[::-1]
        object.__setattr__(self, "vertices", vs)

    @property
    def contains_inf(self) -> bool:
        return False

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=complex)

    def is_simple(self) -> bool:
        v = self.array
        n = len(v)
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if _segments_intersect(a, b, v[j], v[(j + 1) % n]):
                    return False
        return abs(_signed_area(self.vertices)) > 0

    def _path(self) -> Path:
        v = self.array
        return Path(np.column_stack([v.real, v.imag]), closed=False)

    def _shapes(self):
        # GEOS geometries, built once per polygon
        g = self.__dict__.get("_geos")
        if g is None:
            v = self.array
            xy = np.column_stack([v.real, v.imag])
            g = (shapely.LinearRing(xy), shapely.Polygon(xy))
            shapely.prepare(g[1])
            object.__setattr__(self, "_geos", g)
        return g

    def contains(self, z: np.ndarray) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        # intersects_xy counts boundary points: the component is closed
        return shapely.intersects_xy(self._shapes()[1], z.real, z.imag)

    def _tree(self):
        t = self.__dict__.get("_kd")
        if t is None:
            v = self.array
            a, b = v, np.roll(v, -1)
            mid = 0.5 * (a + b)
            t = (cKDTree(np.column_stack([mid.real, mid.imag])), a, b, float(np.max(np.abs(b - a))) * 0.5)
            object.__setattr__(self, "_kd", t)
        return t

    def edge_dist(self, z: np.ndarray) -> np.ndarray:
        """Exact distance to the boundary polyline.

        Candidate edges come from the k nearest edge midpoints; a point whose
        k-th midpoint is not provably too far falls back to all edges.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        tree, a, b, half = self._tree()
        n = len(a)
        k = min(8, n)
        dm, idx = tree.query(np.column_stack([z.real, z.imag]), k=k)
        dm = dm.reshape(len(z), k)
        idx = idx.reshape(len(z), k)
        d = point_segment_dist(z[:, None], a[idx], b[idx]).min(axis=1)
        if k < n:
            unsure = dm[:, -1] - half < d
            if unsure.any():
                zz = z[unsure][:, None]
                d[unsure] = point_segment_dist(zz, a[None, :], b[None, :]).min(axis=1)
        return d

    def euclid_dist(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        flat = np.atleast_1d(z).ravel()
        d = self.edge_dist(flat)
        inside = shapely.contains_xy(self._shapes()[1], flat.real, flat.imag)
        d[inside] = 0.0
        return d.reshape(shape)

    def nearest(self, z: complex) -> complex:
        v = self.array
        a, b = v, np.roll(v, -1)
        d = b - a
        t = np.clip(((np.conj(d) * (z - a)).real) / np.abs(d) ** 2, 0, 1)
        p = a + t * d
        return complex(p[np.argmin(np.abs(z - p))])

    def cap(self) -> Cap:
        raise TypeError("polygon is not a spherical cap")

    def anchor(self) -> complex:
        return self.inscribed().center

    def inscribed(self, n: int = 48) -> Disc:
        """Approximately largest inscribed disc (grid search plus refinement)."""
        return _inscribed_disc(self.vertices, n)

    def boundary(self, n: int | None = None, res: float | None = None) -> np.ndarray:
        return densify(self.array, res if res is not None else 0.0, closed=True)

    def translate(self, a: complex) -> "Polygon":
        return Polygon(tuple(v + a for v in self.vertices))

    def scale(self, s: float) -> "Polygon":
        return Polygon(tuple(v * s for v in self.vertices))

    def negate(self) -> "Polygon":
        return Polygon(tuple(-v for v in self.vertices))


def _signed_area(vs: Sequence[complex]) -> float:
    v = np.array(vs, dtype=complex)
    w = np.roll(v, -1)
    return 0.5 * float(np.sum(v.real * w.imag - w.real * v.imag))


_INSCRIBED_CACHE: dict = {}


def _inscribed_disc(vertices: tuple, n: int) -> Disc:
    key = (vertices, n)
    if key in _INSCRIBED_CACHE:
        return _INSCRIBED_CACHE[key]
    poly = Polygon.__new__(Polygon)
    object.__setattr__(poly, "vertices", vertices)
    v = np.array(vertices)
    lo = complex(v.real.min(), v.imag.min())
    hi = complex(v.real.max(), v.imag.max())
    xs = np.linspace(lo.real, hi.real, n)
    ys = np.linspace(lo.imag, hi.imag, n)
    g = (xs[None, :] + 1j * ys[:, None]).ravel()
    inside = poly._path().contains_points(np.column_stack([g.real, g.imag]))
    g = g[inside]
    if len(g) == 0:
        g = np.array([v.mean()])
    d = poly.edge_dist(g)
    best = complex(g[np.argmax(d)])
    step = max(hi.real - lo.real, hi.imag - lo.imag) / n
    bd = float(poly.edge_dist(np.array([best]))[0])
    while step > 1e-9 * max(1.0, abs(best)):
        cand = best + step * np.exp(2j * np.pi * np.arange(8) / 8)
        ins = poly._path().contains_points(np.column_stack([cand.real, cand.imag]))
        dc = np.where(ins, poly.edge_dist(cand), -1.0)
        k = int(np.argmax(dc))
        if dc[k] > bd:
            best, bd = complex(cand[k]), float(dc[k])
        else:
            step *= 0.5
    out = Disc(best, bd * (1 - 1e-9))
    _INSCRIBED_CACHE[key] = out
    return out


CompactSet = Union[Disc, DiscComplement, Polygon, Point]


def densify(v: np.ndarray, res: float, closed: bool = True) -> np.ndarray:
    """Subdivide polyline edges until each piece has Euclidean length <= res.

    Spherical density never exceeds 1, so Euclidean ``res`` also bounds the
    spherical length of each piece.
    """
    v = np.asarray(v, dtype=complex)
    if res <= 0:
        return v.copy()
    a = v
    b = np.roll(v, -1) if closed else v[1:]
    if not closed:
        a = v[:-1]
    out = []
    for p, q in zip(a, b):
        k = max(1, int(math.ceil(abs(q - p) / res)))
        out.append(p + (q - p) * np.arange(k) / k)
    if not closed:
        out.append(v[-1:])
    return np.concatenate(out) if out else v.copy()


# -------------------------------------------------------------- set queries


def set_sph_dist(K: CompactSet, z: SpherePoint) -> float:
    """Spherical distance from ``z`` to ``K`` (exact for caps; nearest-point value for polygons)."""
    lo, hi = set_sph_dist_bounds(K, z)
    return hi


def set_sph_dist_bounds(K: CompactSet, z: SpherePoint) -> tuple[float, float]:
    """Certified ``(lower, upper)`` spherical distance from ``z`` to ``K``."""
    if isinstance(K, Polygon):
        if z is INF:
            m = float(np.max(np.abs(K.array)))
            d = math.atan2(1.0, m)
            return d, d
        if bool(K.contains(np.array([z]))[0]):
            return 0.0, 0.0
        w = K.nearest(z)
        d = abs(z - w)
        lo = math.atan2(d, 1.0 + abs(z) ** 2 + abs(z) * d)
        return lo, max(lo, sph_dist(z, w))
    d = K.cap().dist(z)
    return d, d


def polygon_sph_dist_lower(K: Polygon, z: np.ndarray) -> np.ndarray:
    """Vectorised certified lower bound for spherical distance to a polygon."""
    z = np.asarray(z, dtype=complex)
    d = K.euclid_dist(z)
    return np.arctan2(d, 1.0 + np.abs(z) ** 2 + np.abs(z) * d)


def sph_dist_lower_array(K: CompactSet, z: np.ndarray) -> np.ndarray:
    if isinstance(K, Polygon):
        return polygon_sph_dist_lower(K, z)
    return K.cap().dist_array(z)


def _cap_pair_max(a: Cap, b: Cap) -> float:
    return min(HALF_PI, sph_dist(a.center, b.center) + a.radius + b.radius)


def sph_diam(K: CompactSet | Iterable[CompactSet], res: float = DEFAULT_SPH_RES) -> float:
    """Spherical diameter of a compact set or of a union of compact sets."""
    return sph_diam_bounds(K, res)[1]


def sph_diam_bounds(K, res: float = DEFAULT_SPH_RES) -> tuple[float, float]:
    """``(lower, upper)`` spherical diameter; exact (lower = upper) without polygons."""
    sets = [K] if isinstance(K, (Disc, DiscComplement, Polygon, Point)) else list(K)
    if not sets:
        raise ValueError("diameter of an empty set is undefined")
    caps = [s.cap() for s in sets if not isinstance(s, Polygon)]
    pts = [s.boundary(res=res) for s in sets if isinstance(s, Polygon)]
    best = 0.0
    for i, a in enumerate(caps):
        for b in caps[i:]:
            best = max(best, _cap_pair_max(a, b))
    lo = hi = best
    polys = [s for s in sets if isinstance(s, Polygon)]
    if polys:
        if caps:
            # samples every res (euclidean) along the boundary; spherical error <= res / 2
            P = np.concatenate([p.boundary(res=res) for p in polys])
            for c in caps:
                d = float(np.max(np.minimum(HALF_PI, sph_dist_array(P, c.center) + c.radius)))
                lo, hi = max(lo, d), max(hi, min(HALF_PI, d + 0.5 * res))
        plo, phi = _polyline_sph_diam(polys, res)
        lo, hi = max(lo, plo), max(hi, phi)
    return lo, hi


def _polyline_sph_diam(polys, res: float, max_pairs: int = 400_000) -> tuple[float, float]:
    """(lower, upper) largest spherical distance between polygon boundary points.

    Branch and bound over pairs of boundary sub-segments: a pair is kept while
    its midpoint distance plus the spherical half-lengths of both pieces could
    still beat the best value found, and kept pairs are split in four.
    """
    for p in polys:
        anti = -1.0 / np.conj(p.boundary(res=max(res, 1e-3)))
        if any(bool(q.contains(anti).any()) for q in polys):
            return HALF_PI, HALF_PI
    A = np.concatenate([p.array for p in polys])
    B = np.concatenate([np.roll(p.array, -1) for p in polys])
    i, j = np.triu_indices(len(A))
    a1, b1, a2, b2 = A[i], B[i], A[j], B[j]
    best = 0.0
    for _ in range(60):
        m1, m2 = 0.5 * (a1 + b1), 0.5 * (a2 + b2)
        D = _pair_sph(m1, m2)
        best = max(best, float(D.max()))
        slack = _sph_half(a1, b1) + _sph_half(a2, b2)
        keep = D + slack > best + 0.5 * res
        if not keep.any():
            return best, min(HALF_PI, best + 0.5 * res)
        if 4 * keep.sum() > max_pairs:
            return best, min(HALF_PI, float((D + slack)[keep].max()))
        a1, b1, a2, b2 = a1[keep], b1[keep], a2[keep], b2[keep]
        m1, m2 = 0.5 * (a1 + b1), 0.5 * (a2 + b2)
        # split both pieces: four child pairs
        a1, b1, a2, b2 = (np.concatenate(x) for x in (
            (a1, a1, m1, m1), (m1, m1, b1, b1), (a2, m2, a2, m2), (m2, b2, m2, b2)))
    return best, HALF_PI


def _sph_half(a, b):
    """Upper bound for the spherical distance from any point of [a, b] to its midpoint."""
    h = 0.5 * np.abs(b - a)
    r = np.maximum(np.abs(0.5 * (a + b)) - h, 0.0)
    return h / (1 + r ** 2)


def _pair_sph(p, q):
    return np.arctan2(np.abs(p - q), np.abs(1 + np.conj(p) * q))


def components_sph_gap(A: CompactSet, B: CompactSet) -> float:
    """Spherical distance between two compact sets (0 when they meet)."""
    if not isinstance(A, Polygon) and not isinstance(B, Polygon):
        ca, cb = A.cap(), B.cap()
        return max(0.0, sph_dist(ca.center, cb.center) - ca.radius - cb.radius)
    if isinstance(B, Polygon) and not isinstance(A, Polygon):
        A, B = B, A
    if euclid_gap(A, B) == 0.0:
        return 0.0
    P = A.boundary(res=1e-3)
    if isinstance(B, Polygon):
        Q = B.boundary(res=1e-3)
        X, Y = to_unit_sphere(P), to_unit_sphere(Q)
        best = np.inf
        for s in range(0, len(X), 2048):
            ch = np.sqrt(((X[s:s + 2048, None] - Y[None]) ** 2).sum(-1)).min()
            best = min(best, ch)
        return float(math.asin(min(1.0, best / 2)))
    return float(np.min(B.cap().dist_array(P)))


def euclid_gap(A: CompactSet, B: CompactSet) -> float:
    """Euclidean distance between two compact sets (``inf`` when undefined)."""
    if isinstance(A, Point) and A.at is INF:
        return 0.0 if B.contains_inf else math.inf
    if isinstance(B, Point) and B.at is INF:
        return 0.0 if A.contains_inf else math.inf
    if isinstance(A, DiscComplement) and isinstance(B, DiscComplement):
        return 0.0
    if isinstance(B, Polygon) and not isinstance(A, Polygon):
        A, B = B, A
    if isinstance(A, Polygon):
        if isinstance(B, Polygon):
            va, vb = A.array, B.array
            if A.contains(vb).any() or B.contains(va).any():
                return 0.0
            return float(min(A.edge_dist(vb).min(), B.edge_dist(va).min(),
                             _poly_edge_gap(va, vb)))
        if isinstance(B, Disc):
            if A.contains(np.array([B.center]))[0]:
                return 0.0
            return max(0.0, float(A.edge_dist(np.array([B.center]))[0]) - B.radius)
        if isinstance(B, DiscComplement):
            far = float(np.max(np.abs(A.array - B.center)))
            return max(0.0, B.radius - far)
        if isinstance(B, Point):
            return float(A.euclid_dist(np.array([B.at]))[0])
    if isinstance(B, DiscComplement) and not isinstance(A, DiscComplement):
        A, B = B, A
    if isinstance(A, DiscComplement):
        if isinstance(B, Disc):
            return max(0.0, A.radius - abs(B.center - A.center) - B.radius)
        return float(A.euclid_dist(np.array([B.at]))[0])
    if isinstance(A, Disc) and isinstance(B, Disc):
        return max(0.0, abs(A.center - B.center) - A.radius - B.radius)
    if isinstance(A, Point):
        A, B = B, A
    if isinstance(B, Point):
        return float(A.euclid_dist(np.array([B.at]))[0])
    raise TypeError("unsupported pair")


def _poly_edge_gap(va: np.ndarray, vb: np.ndarray) -> float:
    a0, a1 = va, np.roll(va, -1)
    b0, b1 = vb, np.roll(vb, -1)
    for i in range(len(a0)):
        for j in range(len(b0)):
            if _segments_intersect(a0[i], a1[i], b0[j], b1[j]):
                return 0.0
    return math.inf

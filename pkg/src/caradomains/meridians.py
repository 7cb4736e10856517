"""Homology classes of separating curves and their meridians (closed geodesics).

A meridian is found by discrete curve shortening: a separating polygon is built
around the "inside" components, then shortened by preconditioned gradient
steps on its hyperbolic length with a backtracking line search, resampling by
hyperbolic arc length and doubling the vertex count once each level settles.
Every accepted curve is simple, stays in U and keeps its exact winding numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import shapely
from shapely import geometry as sg
from shapely.ops import unary_union

from .curves import ClosedCurve, OnCurveError, resample_closed, segments_cross, winding_numbers
from .domains import PointedDomain
from .hyperbolic import (
    DistInterval,
    MeshError,
    dist_point_to_curve,
    edge_length_bounds,
    get_mesh,
    hyp_length,
    make_ring,
    model,
)
from .sphere import INF, Disc, DiscComplement, Point, Polygon, euclid_gap


# ----------------------------------------------------------------- classes


@dataclass(frozen=True, order=True)
class HomologyClass:
    """Partition {inside, rest} of the complement components."""

    inside: tuple
    n: int
    principal: bool

    def __post_init__(self):
        s = tuple(sorted(set(int(i) for i in self.inside)))
        if not s or len(s) >= self.n or s[0] < 0 or s[-1] >= self.n:
            raise ValueError(f"inside set {s} is not a nonempty proper subset of range({self.n})")
        object.__setattr__(self, "inside", s)

    @property
    def outside(self) -> tuple:
        return tuple(i for i in range(self.n) if i not in self.inside)

    @property
    def singled_out(self) -> int | None:
        """The lone component of a principal class."""
        if len(self.inside) == 1:
            return self.inside[0]
        if len(self.outside) == 1:
            return self.outside[0]
        return None

    def label(self) -> str:
        sep = "," if self.n > 10 else ""
        return sep.join(map(str, self.inside)) + "|" + sep.join(map(str, self.outside))

    def to_json(self) -> dict:
        return {"inside": list(self.inside), "outside": list(self.outside), "principal": self.principal}


def canonical_class(inside, n: int, inf_index: int | None = None) -> HomologyClass:
    s = tuple(sorted(set(int(i) for i in inside)))
    c = tuple(i for i in range(n) if i not in s)
    if not s or not c:
        raise ValueError("a class needs components on both sides")
    if inf_index is not None:
        if inf_index in s:
            s, c = c, s
    elif c < s:
        s, c = c, s
    return HomologyClass(s, n, len(s) == 1 or len(s) == n - 1)


def parse_class(text: str, n: int, inf_index: int | None = None) -> HomologyClass:
    """Parse ``"0|123"`` or ``"0,1|2,3"``."""
    if "|" not in text:
        raise ValueError(f"class {text!r} must look like 'i|jk'")
    left, right = text.split("|", 1)

    def ids(s):
        s = s.strip()
        if not s:
            return []
        return [int(x) for x in (s.split(",") if "," in s else list(s))]

    a, b = ids(left), ids(right)
    if sorted(a + b) != list(range(n)):
        raise ValueError(f"class {text!r} does not partition components 0..{n - 1}")
    return canonical_class(a, n, inf_index)


def homology_classes(n: int, inf_index: int | None = None) -> list:
    """All 2^(n-1) - 1 separating classes; principal ones first."""
    if n < 2:
        raise ValueError("separating classes need at least two components")
    seen = set()
    out = []
    for k in range(1, n):
        for s in combinations(range(n), k):
            c = canonical_class(s, n, inf_index)
            if c.inside not in seen:
                seen.add(c.inside)
                out.append(c)
    if n == 2:
        return out
    principal = sorted((c for c in out if c.principal), key=lambda c: c.singled_out)
    rest = sorted((c for c in out if not c.principal), key=lambda c: c.inside)
    return principal + rest


# ------------------------------------------------------------ geometry


def _anchor(K) -> complex | None:
    """A finite point of the component, for winding certificates."""
    if isinstance(K, Disc):
        return K.center
    if isinstance(K, DiscComplement):
        return K.center + 2 * K.radius + 1.0
    if isinstance(K, Point):
        return None if K.at is INF else K.at
    if isinstance(K, Polygon):
        return K.inscribed().center
    raise TypeError(type(K))


def class_anchors(U: PointedDomain, cls: HomologyClass):
    """(probe points, expected winding) for a counter-clockwise separating curve."""
    probes, want = [], []
    for i, K in enumerate(U.components):
        a = _anchor(K)
        if a is None:
            continue
        probes.append(a)
        want.append(1 if i in cls.inside else 0)
    return np.array(probes, dtype=complex), np.array(want, dtype=int)


def _shape(K, t: float):
    """Shapely outline of the closed t-neighbourhood of a bounded component."""
    if isinstance(K, Disc):
        return sg.Point(K.center.real, K.center.imag).buffer(K.radius + t, quad_segs=64)
    if isinstance(K, Point):
        return sg.Point(K.at.real, K.at.imag).buffer(t, quad_segs=32)
    if isinstance(K, Polygon):
        v = K.array
        return sg.Polygon(np.c_[v.real, v.imag]).buffer(t, quad_segs=16)
    raise TypeError("unbounded component has no finite neighbourhood")


def _dense(path: np.ndarray, step: float) -> np.ndarray:
    out = [path[:1]]
    for a, b in zip(path[:-1], path[1:]):
        k = max(1, int(math.ceil(abs(b - a) / step)))
        out.append(a + (b - a) * np.arange(1, k + 1) / k)
    return np.concatenate(out)


def _nearest_pair(A, B):
    from .hyperbolic import _closest_pair
    return _closest_pair(A, B)


def _seg_blocked(U, a, b, skip) -> bool:
    pts = _dense(np.array([a, b]), max(abs(b - a) / 256, 1e-9))[1:-1]
    for j, K in enumerate(U.components):
        if j in skip:
            continue
        if K.contains(pts).any():
            return True
    return False


def _corridor(U, i, j, rng=None, noise: float = 0.0):
    """Polyline in U from component i to component j."""
    Ki, Kj = U.components[i], U.components[j]
    a, b = _nearest_pair(Ki, Kj)
    if a is None:
        raise ValueError("corridor endpoints undefined")
    if not _seg_blocked(U, a, b, (i, j)) and noise == 0.0:
        return np.array([a, b])
    # route around obstacles through the mesh
    mesh = get_mesh(U)
    u = (b - a) / abs(b - a)
    da = _clearance_except(U, a, i)
    db = _clearance_except(U, b, j)
    for f in (0.5, 0.25, 0.1, 0.03):
        a2 = a + u * f * min(da, abs(b - a) / 3)
        b2 = b - u * f * min(db, abs(b - a) / 3)
        if U.contains(np.array([a2, b2])).all():
            break
    else:
        raise ValueError("no room to leave the components")
    if noise > 0 and rng is not None:
        fld = _noisy_field(mesh, a2, rng, noise)
    else:
        fld = mesh.field(a2)
    path = fld.path_to(b2)
    if not np.isfinite(path).all() or len(path) < 2:
        raise MeshError("corridor not found")
    return np.concatenate([[a], path, [b]])


def _clearance_except(U, z, skip) -> float:
    return min(float(K.euclid_dist(np.array([z]))[0]) for k, K in enumerate(U.components) if k != skip)


def _noisy_field(mesh, q, rng, noise):
    from scipy import sparse
    from scipy.sparse.csgraph import dijkstra

    from .hyperbolic import SourceField

    G = mesh.G_up.tocoo()
    w = G.data * np.exp(noise * rng.standard_normal(len(G.data)))
    # keep the matrix symmetric
    H = sparse.coo_matrix((w, (G.row, G.col)), shape=G.shape).tocsr()
    H = H.maximum(H.T)
    nodes, lo, up = mesh.attachments(q)
    if len(nodes) == 0:
        raise MeshError("corridor start not connected to the mesh")
    N = mesh.N
    er = sparse.csr_matrix((np.maximum(up, 1e-300), (np.zeros(len(nodes), dtype=int), nodes)), shape=(1, N))
    M = sparse.bmat([[H, er.T], [er, None]], format="csr")
    d, pred = dijkstra(M, directed=False, indices=N, return_predecessors=True)
    return SourceField(mesh, q, d[:N], d[:N], pred)


def _min_dist_to(U, pts: np.ndarray, idx) -> float:
    d = math.inf
    for j in idx:
        d = min(d, float(U.components[j].euclid_dist(pts).min()))
    return d


def initial_curves(U: PointedDomain, cls: HomologyClass, seeds: int = 1, seed: int = 0) -> list:
    """Separating polygons for a class, one per seed (seed 0 is deterministic and unjittered)."""
    chk = _checker(U, cls)
    out = []
    rng = np.random.default_rng([seed, *cls.inside])
    fracs = [0.5, 0.3, 0.7, 0.4, 0.6, 0.2, 0.8]
    for k in range(seeds):
        f = fracs[k % len(fracs)]
        z = None
        for _ in range(12):
            try:
                z = _init_one(U, cls, f, rng if k > 0 else None, 0.3 if k > 0 else 0.0)
            except (ValueError, MeshError):
                z = None
            if z is not None and chk.ok(z):
                break
            z = None
            f *= 0.5
        if z is not None:
            out.append(z)
    return out


def _init_one(U, cls, f, rng, noise):
    comps = U.components
    S, C = cls.inside, cls.outside
    if rng is not None:
        f = f * (1 + 0.2 * rng.uniform(-1, 1))
    # ring just inside the unbounded outer component
    if len(C) == 1 and isinstance(comps[C[0]], DiscComplement):
        K = comps[C[0]]
        g = min(euclid_gap(K, comps[i]) for i in S)
        return _circle_or_offset(K.center, K.radius - f * g)
    # neighbourhood of a single bounded component on either side
    for side, other in ((S, C), (C, S)):
        if len(side) == 1 and not comps[side[0]].contains_inf:
            K = comps[side[0]]
            g = min(euclid_gap(K, comps[j]) for j in other)
            return _outline(unary_union([_shape(K, f * g)]))
    # several inside components: tree of corridors, then a clearance-scaled tube
    paths = [_corridor(U, i, j, rng, noise) for i, j in _mst(U, S)]
    shapes = []
    for i in S:
        g = min(euclid_gap(comps[i], comps[j]) for j in C)
        shapes.append(_shape(comps[i], f * g))
    for p in paths:
        d = _dense(p, max(1e-9, _path_len(p) / 300))
        cl = np.full(len(d), np.inf)
        for j in C:
            cl = np.minimum(cl, comps[j].euclid_dist(d))
        if not (cl > 0).all():
            return None
        for k in range(len(d) - 1):
            if not _tube(U, C, d[k], d[k + 1], cl[k], cl[k + 1], f, shapes):
                return None
    return _outline(unary_union(shapes))


def _path_len(p):
    return float(np.sum(np.abs(np.diff(p)))) or 1.0


def _mst(U, idx):
    comps = U.components
    if len(idx) < 2:
        return []
    pairs = sorted((euclid_gap(comps[i], comps[j]), i, j) for i, j in combinations(idx, 2))
    parent = {i: i for i in idx}

    def root(x):
        while parent[x] != x:
            x = parent[x]
        return x

    out = []
    for _, i, j in pairs:
        a, b = root(i), root(j)
        if a != b:
            parent[a] = b
            out.append((i, j))
    return out


def _outline(geom):
    if geom.geom_type == "MultiPolygon":
        geom = max(geom.geoms, key=lambda g: g.area)
    ring = geom.exterior
    xy = np.asarray(ring.coords)[:-1]
    z = xy[:, 0] + 1j * xy[:, 1]
    if not shapely.LinearRing(xy).is_ccw:
        z = z[::-1]
    return z


def _tube(U, C, a, b, ca, cb, f, shapes, depth: int = 0) -> bool:
    """Buffer segment [a, b] by f times its certified clearance; bisect when the segment is too long."""
    half = 0.5 * abs(b - a)
    # distance to the complement is 1-Lipschitz: the segment keeps min(ca, cb) - half
    r = f * (min(ca, cb) - half)
    if r > 0 and half <= 2 * min(ca, cb):
        seg = sg.LineString([(a.real, a.imag), (b.real, b.imag)])
        shapes.append(seg.buffer(r, quad_segs=8))
        return True
    if depth > 12:
        return False
    m = 0.5 * (a + b)
    cm = min(float(U.components[j].euclid_dist(np.array([m]))[0]) for j in C)
    if cm <= 0:
        return False
    return _tube(U, C, a, m, ca, cm, f, shapes, depth + 1) and _tube(U, C, m, b, cm, cb, f, shapes, depth + 1)


def _circle_or_offset(c, r, n=256):
    return c + r * np.exp(2j * np.pi * np.arange(n) / n)


# ---------------------------------------------------------- shortening


class MeridianError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def _segments_in_U(U, z, depth: int = 6) -> bool:
    a = z
    b = np.roll(z, -1)
    ca = U.euclid_clearance(a)
    if not (ca > 0).all():
        return False
    cb = np.roll(ca, -1)
    bad = ca + cb < np.abs(b - a)
    if not bad.any():
        return True
    if depth == 0:
        return False
    a, b = a[bad], b[bad]
    m = 0.5 * (a + b)
    cm = U.euclid_clearance(m)
    if not (cm > 0).all():
        return False
    ok1 = U.euclid_clearance(a) + cm >= np.abs(m - a)
    ok2 = cm + U.euclid_clearance(b) >= np.abs(b - m)
    if ok1.all() and ok2.all():
        return True
    sub = []
    for x, y, o1, o2, mm in zip(a, b, ok1, ok2, m):
        if not o1:
            sub.append((x, mm))
        if not o2:
            sub.append((mm, y))
    for x, y in sub:
        if not _segments_in_U(U, np.array([x, y]), depth - 1):
            return False
    return True


@dataclass
class _Checker:
    """Valid curve: inside U, simple, and winding 1 on one side of the partition, 0 on the other."""

    U: PointedDomain
    probes: np.ndarray
    want: np.ndarray

    def windings_ok(self, z) -> bool:
        try:
            w = winding_numbers(z, self.probes)
        except OnCurveError:
            return False
        return np.array_equal(w, self.want) or np.array_equal(w, 1 - self.want)

    def ok(self, z: np.ndarray) -> bool:
        if not _segments_in_U(self.U, z):
            return False
        if not self.windings_ok(z):
            return False
        return not segments_cross(z)


def _checker(U, cls) -> _Checker:
    probes, want = class_anchors(U, cls)
    return _Checker(U, probes, want)


class _Objective:
    """Length under the upper density by 2-point Gauss rule per edge, and its gradient."""

    T = np.array([0.5 - 0.5 / math.sqrt(3), 0.5 + 0.5 / math.sqrt(3)])

    def __init__(self, U):
        self.U = U
        self.m = model(U)

    def rho(self, z):
        return self.m.upper(z)

    def _samples(self, z):
        d = np.roll(z, -1) - z
        return d, z[None, :] + self.T[:, None] * d[None, :]

    def edge_weights(self, z):
        d, p = self._samples(z)
        return self.rho(p).mean(axis=0) * np.abs(d)

    def value(self, z):
        return float(np.sum(self.edge_weights(z)))

    def certified(self, z) -> float:
        """Certified upper length (inf if the curve leaves U)."""
        if not U_contains_all(self.U, z):
            return math.inf
        return float(np.sum(edge_length_bounds(self.U, z, True, levels=(4,))[1]))

    def grad(self, z):
        d, p = self._samples(z)
        ld = np.abs(d)
        u = d / np.where(ld > 0, ld, 1.0)
        eps = 1e-5 * np.maximum(self.U.euclid_clearance(p), 1e-12)
        pts = np.stack([p, p + eps, p + 1j * eps])
        r = self.rho(pts)
        rho = r[0]
        grho = (r[1] - rho) / eps + 1j * (r[2] - rho) / eps
        w = 1.0 / len(self.T)
        t = self.T[:, None]
        g_start = (w * (-rho * u[None, :] + ld[None, :] * (1 - t) * grho)).sum(axis=0)
        g_end = (w * (rho * u[None, :] + ld[None, :] * t * grho)).sum(axis=0)
        return g_start + np.roll(g_end, 1)


def U_contains_all(U, z) -> bool:
    return bool(U.contains(z).all())


@dataclass
class ShortenResult:
    z: np.ndarray
    work_length: float
    trail: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _resample(obj, z, n):
    return resample_closed(z, obj.edge_weights(z), n)


def shorten(U: PointedDomain, z0: np.ndarray, chk: _Checker, levels=(16, 32, 64, 128),
            max_rounds: int = 40, rtol: float = 1e-6, window: int = 20) -> ShortenResult:
    """Multiresolution length descent keeping the curve valid at every accepted step.

    Each round minimises the working length over normal offsets of the vertices
    with L-BFGS-B; offsets are boxed by half the clearance so vertices stay in U.
    A round's result is accepted only if the curve is still simple, inside U and
    separating (otherwise it is pulled back towards the round's start).
    """
    obj = _Objective(U)
    z = np.asarray(z0, dtype=complex)
    trail = []
    its = 0
    start = None
    for n in levels:
        cand = _resample(obj, z, n)
        if chk.ok(cand):
            start, z = n, cand
            break
    if start is None:
        n = levels[-1]
        while n <= 4096:
            cand = _resample(obj, z, n)
            if chk.ok(cand):
                break
            n *= 2
        else:
            if not chk.ok(z):
                raise MeridianError("initial curve is not a valid separating curve")
            cand = z
        z = cand
        lv = [len(z)]
    else:
        lv = [n for n in levels if n >= start]
    cur = best = obj.certified(z)
    bz = z
    trail.append(best)
    converged = False
    for li, n in enumerate(lv):
        if li > 0:
            cand = _resample(obj, z, n)
            if not chk.ok(cand) or obj.certified(cand) > cur:
                cand = _midpoints(z)
            z = cand
            cur = obj.certified(z)
        level_conv = False
        for _ in range(max_rounds):
            z_new, k = _lbfgs_round(U, obj, z, window)
            its += k
            # pull back towards the start until valid and certifiably shorter
            s = 1.0
            while s > 1e-6:
                cand = z + s * (z_new - z)
                v = obj.certified(cand)
                if v < cur and chk.ok(cand):
                    break
                s *= 0.5
            else:
                level_conv = True
                break
            prev = cur
            z, cur = cand, v
            rs = _resample(obj, z, n)
            vr = obj.certified(rs)
            if vr <= cur and chk.ok(rs):
                z, cur = rs, vr
            if cur < best:
                bz, best = z, cur
            trail.append(best)
            if prev - cur <= rtol * cur:
                level_conv = True
                break
        if li == len(lv) - 1:
            converged = level_conv
    return ShortenResult(bz, best, trail, its, converged)


def _lbfgs_round(U, obj, z0, maxiter):
    from scipy.optimize import minimize

    tan = np.roll(z0, -1) - np.roll(z0, 1)
    nrm = 1j * tan / np.where(np.abs(tan) > 0, np.abs(tan), 1.0)
    bound = 0.45 * U.euclid_clearance(z0)
    scale = np.maximum(bound, 1e-300)

    def f(x):
        z = z0 + (x * scale) * nrm
        if not U.contains(z).all():
            return 1e300, np.zeros_like(x)
        v = obj.value(z)
        g = obj.grad(z)
        return v, (g.conjugate() * nrm).real * scale

    x0 = np.zeros(len(z0))
    res = minimize(f, x0, jac=True, method="L-BFGS-B", bounds=[(-1.0, 1.0)] * len(z0),
                   options={"maxiter": 3 * maxiter, "ftol": 1e-12, "gtol": 1e-12})
    return z0 + (res.x * scale) * nrm, int(res.nit)


def _midpoints(z):
    m = 0.5 * (z + np.roll(z, -1))
    out = np.empty(2 * len(z), dtype=complex)
    out[0::2] = z
    out[1::2] = m
    return out


# ------------------------------------------------------------ meridians


def class_length_lower(U: PointedDomain, cls: HomologyClass) -> float:
    """Certified lower bound for the length of any curve in the class.

    For i inside and j outside, U sits in the ring between (inscribed discs of)
    K_i and K_j, whose core geodesic is the shortest curve separating them.
    """
    best = 0.0
    comps = U.components
    for i in cls.inside:
        for j in cls.outside:
            A, B = comps[i], comps[j]
            if isinstance(A, Point) or isinstance(B, Point):
                continue
            A = A.inscribed() if isinstance(A, Polygon) else A
            B = B.inscribed() if isinstance(B, Polygon) else B
            try:
                ring = make_ring(A, B)
            except ValueError:
                continue
            best = max(best, math.pi / ring.modulus)
    return best


@dataclass
class Meridian:
    cls: HomologyClass
    curve: ClosedCurve
    length: DistInterval
    curve_length: DistInterval
    diagnostics: dict = field(default_factory=dict)


def certify(U: PointedDomain, cls: HomologyClass, curve) -> bool:
    """Exact check that a closed polyline is a simple curve in U separating the class."""
    z = curve.array if isinstance(curve, ClosedCurve) else np.asarray(curve, dtype=complex)
    return _checker(U, cls).ok(z)


def meridian_candidates(U: PointedDomain, cls: HomologyClass, seeds: int = 3, seed: int = 0,
                        n_vertices: int = 128, max_rounds: int = 40) -> list:
    """Shortened curve per seed (invalid seeds dropped), in seed order."""
    chk = _checker(U, cls)
    levels = tuple(n for n in (16, 32, 64, 128, 256, 512) if n <= n_vertices)
    if not levels or levels[-1] != n_vertices:
        levels = levels + (n_vertices,)
    lower = class_length_lower(U, cls)
    out = []
    fails = []
    for k, z0 in enumerate(initial_curves(U, cls, seeds, seed)):
        try:
            res = shorten(U, z0, chk, levels, max_rounds=max_rounds)
        except MeridianError as exc:
            fails.append({"seed": k, "reason": str(exc)})
            continue
        if not chk.ok(res.z):
            fails.append({"seed": k, "reason": "class separation lost"})
            continue
        curve = ClosedCurve.from_array(res.z)
        cl = hyp_length(U, curve)
        length = DistInterval(min(max(lower, 0.0), cl.upper), cl.upper)
        out.append(Meridian(cls, curve, length, cl, {
            "seed": k, "iterations": res.iterations, "converged": res.converged,
            "trail": res.trail, "working_length": res.work_length,
        }))
    if not out:
        raise MeridianError(f"class {cls.label()}: separation lost on all seeds", {"failures": fails})
    return out


def find_meridian(U: PointedDomain, cls: HomologyClass, seeds: int = 3, seed: int = 0,
                  n_vertices: int = 128, max_rounds: int = 40) -> Meridian:
    """Shortest converged separating curve of the class over the seeds."""
    cands = meridian_candidates(U, cls, seeds, seed, n_vertices, max_rounds)
    return min(cands, key=lambda m: m.curve_length.upper)


# -------------------------------------------------------------- systems


@dataclass
class SystemEntry:
    cls: HomologyClass
    curve: ClosedCurve
    length: DistInterval
    distance: DistInterval
    curve_length: DistInterval
    seed: int = 0

    def to_json(self) -> dict:
        return {
            "class": self.cls.to_json(),
            "label": self.cls.label(),
            "length": self.length.to_json(),
            "curve_length": self.curve_length.to_json(),
            "distance": self.distance.to_json(),
            "seed": self.seed,
            "curve": self.curve.to_json(),
        }


@dataclass
class MeridianSystem:
    domain_key: str
    entries: list
    P: int
    E: int

    def principal(self) -> list:
        return self.entries[: self.P]

    def to_json(self) -> dict:
        return {"P": self.P, "E": self.E, "entries": [e.to_json() for e in self.entries]}


def principal_count(n: int) -> int:
    if n < 2:
        return 0
    return 1 if n == 2 else n


def extended_count(n: int) -> int:
    return 0 if n < 2 else 2 ** (n - 1) - 1


def _working(U: PointedDomain):
    """Domain used for distances: basepoint at infinity is not supported directly."""
    if U.basepoint is INF:
        raise ValueError("basepoint at infinity: invert the domain first")
    return U


def _entry(U, m: Meridian, h) -> SystemEntry:
    d = dist_point_to_curve(U, U.basepoint, m.curve, h)
    return SystemEntry(m.cls, m.curve, m.length, d, m.curve_length, m.diagnostics.get("seed", 0))


def principal_system(U: PointedDomain, seeds: int = 3, seed: int = 0, h: float | None = None,
                     n_vertices: int = 128) -> MeridianSystem:
    _working(U)
    n = U.n
    if n < 2:
        raise ValueError("meridians need connectivity at least 2")
    classes = [c for c in homology_classes(n, U.inf_index()) if c.principal]
    entries = []
    for c in classes:
        m = find_meridian(U, c, seeds, seed, n_vertices)
        entries.append(_entry(U, m, h))
    return MeridianSystem(U.dumps(), entries, len(entries), len(entries))


def extended_system(U: PointedDomain, seeds: int = 3, seed: int = 0, h: float | None = None,
                    n_vertices: int = 128) -> MeridianSystem:
    """One meridian per class; within a class the seed closest to the basepoint wins."""
    _working(U)
    n = U.n
    if n < 2:
        raise ValueError("meridians need connectivity at least 2")
    classes = homology_classes(n, U.inf_index())
    entries = []
    for c in classes:
        cands = meridian_candidates(U, c, seeds, seed, n_vertices)
        best = None
        for m in cands:
            e = _entry(U, m, h)
            # strictly smaller distance replaces; ties keep the earlier seed
            if best is None or e.distance.upper < best.distance.upper:
                best = e
        entries.append(best)
    P = sum(1 for c in classes if c.principal)
    return MeridianSystem(U.dumps(), entries, P, len(entries))


def aggregates(S: MeridianSystem, principal_only: bool) -> tuple:
    """(max |log l|, max d) as intervals over the principal or all entries."""
    from .hyperbolic import abs_log, interval_max
    es = S.principal() if principal_only else S.entries
    if not es:
        return DistInterval(0.0, 0.0), DistInterval(0.0, 0.0)
    L = interval_max([abs_log(e.length) for e in es])
    D = interval_max([e.distance for e in es])
    return L, D


@dataclass
class InequalityResult:
    status: str  # "pass" | "fail" | "inconclusive"
    lhs: float
    rhs: float
    slack: float

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {"status": self.status, "lhs_upper": self.lhs, "rhs_lower": self.rhs, "slack": self.slack}


def system_inequality_check(G: MeridianSystem, G2: MeridianSystem) -> InequalityResult:
    """Check D_E(G2) <= D_E(G) + exp(L_E(G))/2 with sound interval ends."""
    if G.domain_key != G2.domain_key:
        raise ValueError("systems belong to different domains")
    L, D = aggregates(G, False)
    _, D2 = aggregates(G2, False)
    lhs_up = D2.upper
    rhs_lo = D.lower + 0.5 * math.exp(L.lower)
    if lhs_up <= rhs_lo:
        return InequalityResult("pass", lhs_up, rhs_lo, rhs_lo - lhs_up)
    lhs_lo = D2.lower
    rhs_up = D.upper + 0.5 * math.exp(L.upper)
    if lhs_lo > rhs_up:
        return InequalityResult("fail", lhs_lo, rhs_up, rhs_up - lhs_lo)
    return InequalityResult("inconclusive", lhs_up, rhs_lo, rhs_lo - lhs_up)


def edge_weights_upper(U, curve) -> np.ndarray:
    """Per-edge upper hyperbolic lengths (used for resampling by callers)."""
    return edge_length_bounds(U, curve.array, True)[1]

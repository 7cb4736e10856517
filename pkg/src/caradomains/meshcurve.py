"""Grid-square construction of a curve with prescribed winding around E and F.

Squares of side r/(4*sqrt2) that meet the r/4-neighbourhood of E are summed
as positively oriented cycles; shared sides cancel.  The resulting cycle is
split into closed grid walks (left-turn pairing at four-valent vertices) and
the walks are joined to the guide curve by connectors traversed both ways.
Grid vertices are integers; plane coordinates are origin + side * (i + 1j*j).
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
import shapely
import shapely.geometry as sg
from shapely.ops import unary_union

from .curves import ClosedCurve, OnCurveError, winding_numbers
from .domains import PointedDomain, SchemaError, component_from_json, component_schema_errors, component_to_json
from .sphere import INF, Disc, DiscComplement, Point, Polygon

SQRT2 = math.sqrt(2.0)


class InstanceError(ValueError):
    pass


class ConnectorError(RuntimeError):
    def __init__(self, message: str, dump: dict):
        super().__init__(message)
        self.dump = dump


# ------------------------------------------------------------- geometry


def _shape(K):
    """Shapely geometry of a bounded component (discs exact via distance formulas elsewhere)."""
    if isinstance(K, Polygon):
        v = K.array
        return sg.Polygon(np.c_[v.real, v.imag])
    raise TypeError("only polygons are converted")


def seg_dist(K, a: complex, b: complex) -> float:
    """Euclidean distance from the segment [a, b] to a component."""
    if isinstance(K, Point):
        if K.at is INF:
            return math.inf
        return _pt_seg(K.at, a, b)
    if isinstance(K, Disc):
        return max(0.0, _pt_seg(K.center, a, b) - K.radius)
    if isinstance(K, DiscComplement):
        # farthest point of a segment from a centre is an endpoint
        return max(0.0, K.radius - max(abs(a - K.center), abs(b - K.center)))
    line = sg.LineString([(a.real, a.imag), (b.real, b.imag)]) if a != b else sg.Point(a.real, a.imag)
    return float(_shape(K).distance(line))


def _pt_seg(p, a, b) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) * d.conjugate()).real / abs(d) ** 2))
    return abs(p - (a + t * d))


def _box_dist(K, x0, y0, x1, y1) -> float:
    """Euclidean distance from the closed box [x0,x1]x[y0,y1] to a bounded component."""
    if isinstance(K, (Disc, Point)):
        c = K.center if isinstance(K, Disc) else K.at
        dx = max(x0 - c.real, 0.0, c.real - x1)
        dy = max(y0 - c.imag, 0.0, c.imag - y1)
        return max(0.0, math.hypot(dx, dy) - (K.radius if isinstance(K, Disc) else 0.0))
    return float(_shape(K).distance(sg.box(x0, y0, x1, y1)))


def _extent(K):
    if isinstance(K, Disc):
        c, r = K.center, K.radius
        return c.real - r, c.imag - r, c.real + r, c.imag + r
    if isinstance(K, Point):
        return K.at.real, K.at.imag, K.at.real, K.at.imag
    v = K.array
    return v.real.min(), v.imag.min(), v.real.max(), v.imag.max()


# ------------------------------------------------------------- instance


@dataclass
class SeparationInstance:
    E: tuple
    F: tuple
    gamma: ClosedCurve
    r: float
    R: float

    def __post_init__(self):
        self.E = tuple(self.E)
        self.F = tuple(self.F)

    @property
    def side(self) -> float:
        return self.r / (4 * SQRT2)

    def domain(self) -> PointedDomain:
        return PointedDomain(self.gamma.points[0], self.E + self.F, "separation-instance")

    def check(self, spacing: float | None = None) -> dict:
        """Verify the hypotheses; raises InstanceError on a violation."""
        errs = []
        if not (self.r > 0 and self.R > 0):
            errs.append("r and R must be positive")
        if not self.E or not self.F:
            errs.append("E and F must be non-empty")
        if any(K.contains_inf for K in self.E):
            errs.append("infinity must lie in F")
        if not any(K.contains_inf for K in self.F):
            errs.append("F must contain infinity")
        if errs:
            raise InstanceError("; ".join(errs))
        for K in self.E:
            for J in self.F:
                if _comp_gap(K, J) <= 0:
                    raise InstanceError("E and F are not disjoint")
        z = self.gamma.array
        length = self.gamma.euclid_length()
        radius = float(np.max(np.abs(z)))
        h = spacing if spacing is not None else self.r / 64
        clear = _curve_clearance(z, self.E + self.F, h)
        w = np.array(winding_numbers(z, sample_probes(self.E, self.F)[0]))
        want = sample_probes(self.E, self.F)[1]
        out = {"clearance_lower": clear, "length": length, "radius": radius,
               "winding_ok": bool(np.array_equal(w, want))}
        if clear < self.r:
            raise InstanceError(f"guide curve clearance {clear:.6g} < r = {self.r}")
        if length > self.R * (1 + 1e-12):
            raise InstanceError(f"guide curve length {length:.6g} > R = {self.R}")
        if radius > self.R * (1 + 1e-12):
            raise InstanceError(f"guide curve leaves the disc of radius R = {self.R}")
        if not out["winding_ok"]:
            raise InstanceError("guide curve does not separate E from F")
        return out

    def to_json(self) -> dict:
        return {"E": [component_to_json(K) for K in self.E], "F": [component_to_json(K) for K in self.F],
                "gamma": self.gamma.to_json(), "r": self.r, "R": self.R}

    @classmethod
    def from_json(cls, d: dict) -> "SeparationInstance":
        errs = set_schema_errors(d, ("E", "F"))
        g = d.get("gamma") if isinstance(d, dict) else None
        if not (isinstance(g, dict) and g.get("closed") is True and isinstance(g.get("points"), list)
                and len(g["points"]) >= 3):
            errs.append(("/gamma", "expected {\"closed\": true, \"points\": [[x, y], ...]} with >= 3 points"))
        for key in ("r", "R"):
            v = d.get(key) if isinstance(d, dict) else None
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                errs.append((f"/{key}", "expected positive number"))
        if errs:
            raise SchemaError(errs)
        try:
            return cls(tuple(component_from_json(c) for c in d["E"]),
                       tuple(component_from_json(c) for c in d["F"]),
                       ClosedCurve.from_json(d["gamma"]), float(d["r"]), float(d["R"]))
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"malformed instance: {exc}") from exc

    def translate(self, a: complex) -> "SeparationInstance":
        return SeparationInstance(tuple(K.translate(a) for K in self.E), tuple(K.translate(a) for K in self.F),
                                  ClosedCurve.from_array(self.gamma.array + a), self.r, self.R + abs(a))

    def scale(self, lam: float) -> "SeparationInstance":
        return SeparationInstance(tuple(K.scale(lam) for K in self.E), tuple(K.scale(lam) for K in self.F),
                                  ClosedCurve.from_array(self.gamma.array * lam), self.r * lam, self.R * lam)


def set_schema_errors(d, keys) -> list:
    """(pointer, message) pairs for documents holding lists of components under ``keys``."""
    if not isinstance(d, dict):
        return [("/", "expected object")]
    errs = []
    for key in keys:
        v = d.get(key)
        if not isinstance(v, list) or not v:
            errs.append((f"/{key}", "expected non-empty array of components"))
            continue
        for i, c in enumerate(v):
            errs.extend(component_schema_errors(c, f"/{key}/{i}"))
    return errs


def _comp_gap(K, J) -> float:
    from .sphere import euclid_gap
    return euclid_gap(K, J)


def _curve_clearance(z, comps, h) -> float:
    """Certified lower bound for the euclidean distance from a closed polyline to the components."""
    a = z
    b = np.roll(z, -1)
    best = math.inf
    for p, q in zip(a, b):
        k = max(1, int(math.ceil(abs(q - p) / h)))
        pts = p + (q - p) * np.arange(k + 1) / k
        d = np.full(len(pts), np.inf)
        for K in comps:
            d = np.minimum(d, K.euclid_dist(pts))
        best = min(best, float(d.min()) - 0.5 * abs(q - p) / k)
    return best


def sample_probes(E, F, n: int = 24):
    """Sample points of E (winding 1) and of F (winding 0)."""
    pe, pf = [], []
    for K in E:
        if isinstance(K, Point):
            pe.append(K.at)
        elif isinstance(K, Disc):
            pe.extend([K.center, *K.boundary(n)])
        else:
            pe.extend([K.anchor(), *K.array])
    for K in F:
        if isinstance(K, Point):
            if K.at is not INF:
                pf.append(K.at)
        elif isinstance(K, Disc):
            pf.extend([K.center, *K.boundary(n)])
        elif isinstance(K, DiscComplement):
            pf.extend(list(K.boundary(n)) + list(K.center + 2 * K.radius * np.exp(2j * np.pi * np.arange(4) / 4)))
        else:
            pf.extend([K.anchor(), *K.array])
    probes = np.array(pe + pf, dtype=complex)
    want = np.array([1] * len(pe) + [0] * len(pf), dtype=int)
    return probes, want


# ------------------------------------------------------------- grid cycle


Vertex = tuple  # (i, j) integers


@dataclass
class GridCycle:
    side: float
    origin: complex
    squares: frozenset
    edges: dict  # (u, v) -> multiplicity, directed unit edges after cancellation

    def to_plane(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return self.origin + self.side * (w[..., 0] + 1j * w[..., 1])

    def boundary_ok(self) -> bool:
        deg = defaultdict(int)
        for (u, v), m in self.edges.items():
            deg[u] -= m
            deg[v] += m
        return all(d == 0 for d in deg.values())

    def cancelled(self) -> bool:
        return all((v, u) not in self.edges for (u, v) in self.edges)

    def winding(self, z) -> np.ndarray:
        """Exact winding numbers about plane points (grid comparisons on integer vertices)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        w = (z - self.origin) / self.side
        px, py = w.real, w.imag
        tot = np.zeros(len(z), dtype=int)
        on = np.zeros(len(z), dtype=bool)
        for ((x0, y0), (x1, y1)), m in self.edges.items():
            if x0 == x1:
                lo, hi = min(y0, y1), max(y0, y1)
                s = m if y1 > y0 else -m
                tot += np.where((px < x0) & (py >= lo) & (py < hi), s, 0)
                on |= (px == x0) & (py >= lo) & (py <= hi)
            else:
                lo, hi = min(x0, x1), max(x0, x1)
                on |= (py == y0) & (px >= lo) & (px <= hi)
        if on.any():
            raise OnCurveError(f"{int(on.sum())} probe point(s) lie on the cycle")
        return tot

    def to_json(self) -> dict:
        return {"side": self.side, "origin": [self.origin.real, self.origin.imag],
                "squares": sorted([list(q) for q in self.squares]),
                "edges": sorted([[list(u), list(v), m] for (u, v), m in self.edges.items()])}


def mesh_origin(inst: SeparationInstance) -> complex:
    """Grid anchor tied to the instance so that translating the instance translates the cycle."""
    ext = np.array([_extent(K) for K in inst.E])
    return complex(ext[:, 0].min(), ext[:, 1].min())


def build_mesh_cycle(inst: SeparationInstance, check: bool = True) -> GridCycle:
    """Sum of positively oriented squares meeting the r/4-neighbourhood of E, shared sides cancelled."""
    if check:
        inst.check()
    s = inst.side
    o = mesh_origin(inst)
    q = inst.r / 4
    squares = set()
    for K in inst.E:
        x0, y0, x1, y1 = _extent(K)
        i0 = int(math.floor((x0 - q - o.real) / s)) - 1
        i1 = int(math.ceil((x1 + q - o.real) / s)) + 1
        j0 = int(math.floor((y0 - q - o.imag) / s)) - 1
        j1 = int(math.ceil((y1 + q - o.imag) / s)) + 1
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                if (i, j) in squares:
                    continue
                bx0, by0 = o.real + i * s, o.imag + j * s
                if _box_dist(K, bx0, by0, bx0 + s, by0 + s) <= q:
                    squares.add((i, j))
    net = defaultdict(int)
    for i, j in squares:
        corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
        for a, b in zip(corners, corners[1:] + corners[:1]):
            net[(a, b)] += 1
    edges = {}
    for (a, b), m in net.items():
        k = m - net.get((b, a), 0)
        if k > 0:
            edges[(a, b)] = k
    G = GridCycle(s, o, frozenset(squares), edges)
    for F in inst.F:
        for K in inst.E:
            if _comp_gap(K, F) <= q:
                raise InstanceError("E comes within r/4 of F")
    return G


def edge_clearances(G: GridCycle, inst: SeparationInstance) -> tuple:
    """(min distance of surviving edges to E, min distance to F)."""
    dE = dF = math.inf
    for (u, v) in G.edges:
        a, b = G.to_plane(u), G.to_plane(v)
        a, b = complex(a), complex(b)
        dE = min(dE, min(seg_dist(K, a, b) for K in inst.E))
        dF = min(dF, min(seg_dist(K, a, b) for K in inst.F))
    return dE, dF


def square_bound(r: float, R: float) -> float:
    return (2 * R / r + 2) ** 2


# ------------------------------------------------------------- decomposition

_DIRS = {(1, 0): 0, (0, 1): 1, (-1, 0): 2, (0, -1): 3}


def _heading(u, v) -> int:
    return _DIRS[(v[0] - u[0], v[1] - u[1])]


def decompose_cycle(G: GridCycle) -> list:
    """Closed grid walks whose sum is the cycle; incoming edges pair with the leftmost free outgoing edge."""
    if not G.boundary_ok():
        raise ValueError("malformed cycle: boundary is not zero")
    out = defaultdict(list)
    for (u, v), m in sorted(G.edges.items()):
        out[u].extend([v] * m)
    # pairing: at each vertex, each incoming edge takes the free outgoing edge turning most to the left
    succ = {}
    incoming = defaultdict(list)
    for (u, v), m in sorted(G.edges.items()):
        for k in range(m):
            incoming[v].append((u, v, k))
    for v, ins in incoming.items():
        free = list(out[v])
        for (u, _, k) in sorted(ins):
            h = _heading(u, v)
            # left turn, straight, right turn (a reversal cannot survive cancellation)
            order = [(h + 1) % 4, h, (h + 3) % 4, (h + 2) % 4]
            pick = None
            for d in order:
                for w in free:
                    if _heading(v, w) == d:
                        pick = w
                        break
                if pick is not None:
                    break
            free.remove(pick)
            kk = sum(1 for (x, y, _k) in succ.values() if x == v and y == pick)
            succ[(u, v, k)] = (v, pick, kk)
    parts = []
    seen = set()
    for e0 in sorted(succ):
        if e0 in seen:
            continue
        walk = []
        e = e0
        while e not in seen:
            seen.add(e)
            walk.append(e[0])
            e = succ[e]
        parts.append(walk)
    return parts


def part_winding(part, G: GridCycle, z) -> np.ndarray:
    return winding_numbers(G.to_plane(np.array(part, dtype=float)), z)


# ------------------------------------------------------------- joining


@dataclass
class JoinReport:
    parts: int
    dropped: int
    connectors: list = field(default_factory=list)  # per connector: dict
    min_dist_E: float = math.inf
    min_dist_F_connectors: float = math.inf

    def to_json(self) -> dict:
        return {"parts": self.parts, "dropped_holes": self.dropped, "connectors": self.connectors,
                "min_dist_E": self.min_dist_E, "min_dist_F_connectors": self.min_dist_F_connectors}


def _ring_of(part, G) -> np.ndarray:
    return np.array(part, dtype=float)


def _signed_area(w) -> float:
    x, y = w[:, 0], w[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _keep_part(part, G, inst) -> bool:
    """Clockwise walks bound holes; a hole without F can be dropped without changing windings on E or F."""
    w = _ring_of(part, G)
    if _signed_area(w) > 0:
        return True
    zw = G.to_plane(w)
    hole = sg.Polygon(np.c_[zw.real, zw.imag])
    for K in inst.F:
        if isinstance(K, DiscComplement) or (isinstance(K, Point) and K.at is INF):
            continue
        if isinstance(K, Disc):
            if hole.distance(sg.Point(K.center.real, K.center.imag)) <= K.radius:
                return True
        elif isinstance(K, Point):
            if hole.intersects(sg.Point(K.at.real, K.at.imag)):
                return True
        elif hole.intersects(_shape(K)):
            return True
    return False


def _arc_positions(w):
    seg = np.abs(np.diff(np.vstack([w, w[:1]]), axis=0)).sum(axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def _locate(w, p):
    """(edge index, parameter) of a point lying on the closed grid polyline w."""
    b = np.roll(w, -1, axis=0)
    best, arg = math.inf, (0, 0.0)
    for k in range(len(w)):
        a, c = w[k], b[k]
        d = c - a
        L2 = float(d @ d)
        t = 0.0 if L2 == 0 else max(0.0, min(1.0, float((p - a) @ d) / L2))
        e = float(np.hypot(*(a + t * d - p)))
        if e < best:
            best, arg = e, (k, t)
    return arg


def _walk(w, p, q) -> np.ndarray:
    """Shorter way along the closed polyline w from point p to point q (both on w)."""
    n = len(w)
    pos = _arc_positions(w)
    per = pos[-1]
    (kp, tp), (kq, tq) = _locate(w, p), _locate(w, q)
    sp = pos[kp] + tp * (pos[kp + 1] - pos[kp])
    sq = pos[kq] + tq * (pos[kq + 1] - pos[kq])
    fwd = (sq - sp) % per
    pts = [p]
    if fwd <= per - fwd:
        for j in range(1, n + 1):
            k = (kp + j) % n
            off = (pos[k] - sp) % per
            if off == 0 or off >= fwd:
                break
            pts.append(w[k])
    else:
        back = per - fwd
        for j in range(n):
            k = (kp - j) % n
            off = (sp - pos[k]) % per
            if off >= back:
                break
            if off > 0:
                pts.append(w[k])
    pts.append(q)
    return np.array(pts, dtype=float)


def _closest_pair(line_a: sg.LineString, line_b: sg.LineString):
    pa, pb = shapely.ops.nearest_points(line_a, line_b)
    return np.array([pa.x, pa.y]), np.array([pb.x, pb.y])


def join_curves(parts: list, inst: SeparationInstance, G: GridCycle) -> tuple:
    """One closed curve homologous to the cycle: connectors and guide arcs are traversed both ways."""
    kept = [p for p in parts if _keep_part(p, G, inst)]
    rep = JoinReport(len(parts), len(parts) - len(kept))
    if not kept:
        raise ConnectorError("no part left after dropping empty holes", {"parts": len(parts)})
    rings = [_ring_of(p, G) for p in kept]
    if len(rings) == 1:
        pts = G.to_plane(rings[0])
        rep.min_dist_E = _poly_dist(pts, inst.E)
        return ClosedCurve.from_array(pts), rep
    # work in grid units
    gw = np.c_[((inst.gamma.array - G.origin) / G.side).real, ((inst.gamma.array - G.origin) / G.side).imag]
    gline = sg.LineString(np.vstack([gw, gw[:1]]))
    cover = unary_union([sg.box(i, j, i + 1, j + 1) for (i, j) in G.squares])
    plines = [sg.LineString(np.vstack([w, w[:1]])) for w in rings]
    conns = []
    for i, w in enumerate(rings):
        a, b = _closest_pair(gline, plines[i])
        path = _connector(a, b, i, rings, plines, cover)
        conns.append((a, b, path))
        pl = G.to_plane(path)
        dF = _poly_dist(pl, inst.F, closed=False)
        dE = _poly_dist(pl, inst.E, closed=False)
        rep.connectors.append({"part": i, "a": _xy(G.to_plane(a)), "b": _xy(G.to_plane(b)),
                               "euclid_length": float(np.sum(np.abs(np.diff(pl)))),
                               "min_dist_E": dE, "min_dist_F": dF})
        rep.min_dist_F_connectors = min(rep.min_dist_F_connectors, dF)
    # order by position of a along the guide curve
    gpos = [gline.project(sg.Point(*c[0])) for c in conns]
    order = np.argsort(gpos, kind="stable")
    seq = []
    for t, i in enumerate(order):
        a, b, path = conns[i]
        w = rings[i]
        loop = _walk_full(w, b)
        seq.extend([path, loop, path[::-1]])
        if t + 1 < len(order):
            seq.append(_guide_arc(gline, gpos[i], gpos[order[t + 1]]))
    # back along the guide curve, retracing the forward arcs
    back = []
    for t in range(len(order) - 1, 0, -1):
        back.append(_guide_arc(gline, gpos[order[t - 1]], gpos[order[t]])[::-1])
    seq.extend(back)
    allpts = np.vstack(seq)
    keep = np.concatenate([[True], np.any(np.abs(np.diff(allpts, axis=0)) > 0, axis=1)])
    allpts = allpts[keep]
    if np.all(allpts[-1] == allpts[0]):
        allpts = allpts[:-1]
    pts = G.to_plane(allpts)
    rep.min_dist_E = _poly_dist(pts, inst.E)
    return ClosedCurve.from_array(pts), rep


def _xy(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _walk_full(w, b) -> np.ndarray:
    """Closed walk along w starting and ending at the point b on it (orientation kept)."""
    k, t = _locate(w, b)
    n = len(w)
    pts = [b] + [w[(k + 1 + j) % n] for j in range(n)] + [b]
    return np.array(pts, dtype=float)


def _guide_arc(gline: sg.LineString, s0: float, s1: float) -> np.ndarray:
    """Forward piece of the (closed) guide polyline between arc positions s0 <= s1."""
    coords = np.array(gline.coords)
    cum = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(coords, axis=0).T))])
    inner = coords[(cum > s0) & (cum < s1)]
    p0 = np.array(gline.interpolate(s0).coords[0])
    p1 = np.array(gline.interpolate(s1).coords[0])
    return np.vstack([p0, inner, p1])


def _connector(a, b, i, rings, plines, cover) -> np.ndarray:
    """Segment a -> b with its passages through the square cover replaced by walks along part boundaries."""
    seg = sg.LineString([a, b])
    L = float(np.hypot(*(b - a)))
    if L == 0:
        return np.array([a, b])
    inter = seg.intersection(cover)
    pieces = []
    for g in getattr(inter, "geoms", [inter]):
        if isinstance(g, sg.LineString) and g.length > 0:
            c = np.array(g.coords)
            m = 0.5 * (c[0] + c[-1])
            if cover.boundary.distance(sg.Point(*m)) > 1e-9:
                pieces.append(c)
    if not pieces:
        return np.array([a, b])
    u = (b - a) / L
    pieces = [p if (p[-1] - p[0]) @ u >= 0 else p[::-1] for p in pieces]
    pieces.sort(key=lambda p: float((p[0] - a) @ u))
    out = [a]
    for p in pieces:
        p_in, p_out = p[0], p[-1]
        j_in = int(np.argmin([pl.distance(sg.Point(*p_in)) for pl in plines]))
        j_out = int(np.argmin([pl.distance(sg.Point(*p_out)) for pl in plines]))
        if j_in != j_out:
            raise ConnectorError("connector passes between two different part boundaries inside the cover",
                                 {"a": a.tolist(), "b": b.tolist(), "entry": p_in.tolist(), "exit": p_out.tolist(),
                                  "parts": [j_in, j_out]})
        out.extend(_walk(rings[j_in], p_in, p_out))
    out.append(b)
    arr = np.array(out, dtype=float)
    keep = np.concatenate([[True], np.any(np.abs(np.diff(arr, axis=0)) > 0, axis=1)])
    return arr[keep]


def _poly_dist(pts, comps, closed: bool = True) -> float:
    z = np.asarray(pts, dtype=complex)
    a = z
    b = np.roll(z, -1) if closed else z[1:]
    if not closed:
        a = z[:-1]
    best = math.inf
    for p, q in zip(a, b):
        best = min(best, min(seg_dist(K, complex(p), complex(q)) for K in comps))
    return best


# ------------------------------------------------------------- pipeline


def length_bound(r: float, R: float) -> float:
    """A-priori hyperbolic length bound B(r, R) from the counting in the construction.

    Every point of the output is at euclidean distance >= r/4 from the complement,
    so the density is at most 8/r; the euclidean budget counts the cycle
    (N squares of perimeter 4s), up to N connectors traversed twice (each at most
    2R plus a cycle-length detour) and the guide curve traversed twice.
    """
    N = square_bound(r, R)
    s = r / (4 * SQRT2)
    return (8.0 / r) * (N * 4 * s + 2 * N * (2 * R + N * 4 * s) + 2 * R)


def certified_upper_length(z: np.ndarray, comps, closed: bool = True, pieces: int = 8) -> float:
    """Upper hyperbolic length from rho <= 2/delta and the 1-Lipschitz euclidean clearance."""
    z = np.asarray(z, dtype=complex)
    a = z
    b = np.roll(z, -1) if closed else z[1:]
    if not closed:
        a = z[:-1]
    tot = 0.0
    t = np.arange(pieces + 1) / pieces
    for p, q in zip(a, b):
        L = abs(q - p)
        if L == 0:
            continue
        pts = p + (q - p) * t
        d = np.full(len(pts), np.inf)
        for K in comps:
            d = np.minimum(d, K.euclid_dist(pts))
        h = L / pieces
        lo = np.minimum(d[:-1], d[1:]) - 0.5 * h
        if np.any(lo <= 0):
            return math.inf
        tot += float(np.sum(2.0 / lo * h))
    return tot


@dataclass
class MeshCurveResult:
    curve: ClosedCurve
    cycle: GridCycle
    parts: list
    join: JoinReport
    squares: int
    square_bound: float
    edge_dist_E: float
    edge_dist_F: float
    length: object  # DistInterval
    bound: float
    windings_ok: bool

    def to_json(self, curve: bool = True) -> dict:
        out = {
            "squares": self.squares,
            "square_bound": self.square_bound,
            "parts": len(self.parts),
            "edge_dist_E": self.edge_dist_E,
            "edge_dist_F": self.edge_dist_F,
            "hyperbolic_length": {"lower": self.length.lower, "upper": self.length.upper},
            "length_bound": self.bound,
            "windings_ok": self.windings_ok,
            "join": self.join.to_json(),
        }
        if curve:
            out["curve"] = self.curve.to_json()
        return out


def mesh_curve(inst: SeparationInstance, density: str = "model") -> MeshCurveResult:
    """Full pipeline with certificate: windings, clearances, square count and length bound.

    density="model" intersects the density-sandwich interval with the bound from
    rho <= 2/delta; density="clearance" uses the latter only (lower end 0).
    """
    from .hyperbolic import DistInterval, hyp_length

    inst.check()
    G = build_mesh_cycle(inst, check=False)
    parts = decompose_cycle(G)
    curve, rep = join_curves(parts, inst, G)
    probes, want = sample_probes(inst.E, inst.F)
    try:
        ok = bool(np.array_equal(winding_numbers(curve.array, probes), want))
    except OnCurveError:
        ok = False
    dE, dF = edge_clearances(G, inst)
    comps = inst.E + inst.F
    up = certified_upper_length(curve.array, comps)
    if density == "model":
        L = hyp_length(inst.domain(), curve)
        length = DistInterval(L.lower, min(L.upper, up))
    else:
        length = DistInterval(0.0, up)
    out = MeshCurveResult(curve, G, parts, rep, len(G.squares), square_bound(inst.r, inst.R), dE, dF,
                          length, length_bound(inst.r, inst.R), ok)
    if not ok:
        raise RuntimeError("output curve has the wrong winding numbers")
    if out.length.upper > out.bound:
        raise RuntimeError(f"hyperbolic length {out.length.upper:.6g} exceeds the a-priori bound {out.bound:.6g}")
    return out


# ------------------------------------------------------------- instances


def disc_instance(E_radius: float = 0.1, F_radius: float = 2.0, r: float = 0.5, R: float = 2 * math.pi,
                  n: int = 128) -> SeparationInstance:
    """E a small disc about 0, F the outside of a large circle, guide curve the unit circle."""
    t = 2 * np.pi * np.arange(n) / n
    gamma = ClosedCurve.from_array(np.exp(1j * t))
    return SeparationInstance((Disc(0j, E_radius),), (DiscComplement(0j, F_radius),), gamma, r, R)


def random_instance(rng: np.random.Generator, max_discs: int = 4) -> SeparationInstance:
    """Seeded valid instance: E a few separated discs inside a guide circle, F outside it."""
    for _ in range(1000):
        r = float(rng.uniform(0.1, 0.4))
        k = int(rng.integers(1, max_discs + 1))
        rho = float(rng.uniform(0.6, 1.6))
        c0 = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        discs = []
        for _ in range(50 * k):
            if len(discs) == k:
                break
            c = c0 + rho * math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
            rad = float(rng.uniform(0.03, 0.25))
            if abs(c - c0) + rad > rho:
                continue
            if all(abs(c - D.center) > rad + D.radius + 0.05 for D in discs):
                discs.append(Disc(complex(c), rad))
        if not discs:
            continue
        g = rho + r * float(rng.uniform(1.05, 1.5))
        n = 160
        gamma = c0 + g * np.exp(2j * np.pi * np.arange(n) / n)
        outer = g + r * float(rng.uniform(1.05, 5.0))
        F = [DiscComplement(c0, outer)]
        rad = 0.5 * (outer - g - 2.2 * r)
        if rad > 0.02 and rng.uniform() < 0.7:
            # a bounded piece of F between the guide curve and the outer part
            mid = c0 + np.exp(2j * np.pi * rng.uniform()) * (g + 1.1 * r + rad)
            F.append(Disc(complex(mid), rad))
        inst = SeparationInstance(tuple(discs), tuple(F), ClosedCurve.from_array(gamma), r, 0.0)
        R = max(inst.gamma.euclid_length(), float(np.max(np.abs(gamma)))) * 1.0000001
        inst.R = R
        try:
            inst.check()
        except InstanceError:
            continue
        return inst
    raise RuntimeError("could not draw a valid instance")

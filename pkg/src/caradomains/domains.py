"""Pointed finitely connected domains: sphere minus labelled compact components."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .sphere import (
    INF,
    Disc,
    DiscComplement,
    Point,
    Polygon,
    SpherePoint,
    as_point,
    components_sph_gap,
    euclid_gap,
    set_sph_dist_bounds,
    sph_diam_bounds,
)


@dataclass(frozen=True)
class PointedDomain:
    basepoint: SpherePoint
    components: tuple
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "basepoint", as_point(self.basepoint))
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def n(self) -> int:
        return len(self.components)

    def contains(self, z) -> np.ndarray:
        """Membership of finite points in the open set U."""
        z = np.asarray(z, dtype=complex)
        inside = np.zeros(z.shape, dtype=bool)
        for K in self.components:
            inside |= K.contains(z)
        return ~inside

    def contains_point(self, p: SpherePoint) -> bool:
        if p is INF:
            return not any(K.contains_inf for K in self.components)
        return bool(self.contains(np.array([p]))[0])

    def euclid_clearance(self, z) -> np.ndarray:
        """Euclidean distance from finite points to the complement."""
        z = np.asarray(z, dtype=complex)
        d = np.full(z.shape, np.inf)
        for K in self.components:
            d = np.minimum(d, K.euclid_dist(z))
        return d

    def inf_index(self) -> int | None:
        for i, K in enumerate(self.components):
            if K.contains_inf:
                return i
        return None

    def with_basepoint(self, p) -> "PointedDomain":
        return PointedDomain(p, self.components, self.label)

    def map_components(self, f) -> "PointedDomain":
        bp = self.basepoint
        return PointedDomain(bp, tuple(f(K) for K in self.components), self.label)

    def negate(self) -> "PointedDomain":
        bp = self.basepoint if self.basepoint is INF else -self.basepoint
        return PointedDomain(bp, tuple(K.negate() for K in self.components), self.label)

    # ---------------------------------------------------------------- json
    def to_json(self) -> dict:
        out: dict = {
            "basepoint": "inf" if self.basepoint is INF else [self.basepoint.real, self.basepoint.imag],
            "components": [component_to_json(K) for K in self.components],
        }
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PointedDomain":
        errors = schema_errors(data)
        if errors:
            raise SchemaError(errors)
        comps = tuple(component_from_json(c) for c in data["components"])
        return cls(data["basepoint"], comps, data.get("label"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class SchemaError(ValueError):
    """Input JSON violates a schema; ``errors`` holds (json_pointer, message) pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.errors))


def _xy(p) -> list:
    return [p.real, p.imag]


def component_to_json(K) -> dict:
    if isinstance(K, Disc):
        return {"type": "disc", "center": _xy(K.center), "radius": K.radius}
    if isinstance(K, DiscComplement):
        return {"type": "disc_complement", "center": _xy(K.center), "radius": K.radius}
    if isinstance(K, Polygon):
        return {"type": "polygon", "vertices": [_xy(v) for v in K.vertices]}
    if isinstance(K, Point):
        return {"type": "point", "at": "inf" if K.at is INF else _xy(K.at)}
    raise TypeError(f"unknown component {K!r}")


def component_from_json(c: dict):
    t = c["type"]
    if t == "disc":
        return Disc(as_point(c["center"]), float(c["radius"]))
    if t == "disc_complement":
        return DiscComplement(as_point(c["center"]), float(c["radius"]))
    if t == "polygon":
        return Polygon(tuple(as_point(v) for v in c["vertices"]))
    if t == "point":
        return Point(as_point(c["at"]))
    raise ValueError(f"unknown component type {t!r}")


def _is_xy(v) -> bool:
    return (isinstance(v, list) and len(v) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
            and all(math.isfinite(x) for x in v))


def schema_errors(data, base: str = "") -> list:
    """Structural checks of a domain document; returns (pointer, message) pairs."""
    errs = []
    if not isinstance(data, dict):
        return [(base or "/", "expected object")]
    bp = data.get("basepoint")
    if bp is None:
        errs.append((f"{base}/basepoint", "missing"))
    elif not (bp == "inf" or _is_xy(bp)):
        errs.append((f"{base}/basepoint", "expected [x, y] or \"inf\""))
    comps = data.get("components")
    if not isinstance(comps, list):
        errs.append((f"{base}/components", "expected array"))
        return errs
    for i, c in enumerate(comps):
        errs.extend(component_schema_errors(c, f"{base}/components/{i}"))
    return errs


def component_schema_errors(c, p: str) -> list:
    errs = []
    if not isinstance(c, dict):
        return [(p, "expected object")]
    t = c.get("type")
    if t in ("disc", "disc_complement"):
        if not _is_xy(c.get("center")):
            errs.append((f"{p}/center", "expected [x, y]"))
        r = c.get("radius")
        if not isinstance(r, (int, float)) or isinstance(r, bool) or not (r > 0) or not math.isfinite(r):
            errs.append((f"{p}/radius", "expected positive number"))
    elif t == "polygon":
        vs = c.get("vertices")
        if not isinstance(vs, list) or len(vs) < 3:
            errs.append((f"{p}/vertices", "expected at least 3 points"))
        else:
            for j, v in enumerate(vs):
                if not _is_xy(v):
                    errs.append((f"{p}/vertices/{j}", "expected [x, y]"))
    elif t == "point":
        a = c.get("at")
        if not (a == "inf" or _is_xy(a)):
            errs.append((f"{p}/at", "expected [x, y] or \"inf\""))
    else:
        errs.append((f"{p}/type", f"unknown component type {t!r}"))
    return errs


def load_domain(path: str) -> PointedDomain:
    with open(path) as fh:
        return PointedDomain.from_json(json.load(fh))


# ------------------------------------------------------------- validation


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": self.violations}


def validate(U: PointedDomain) -> ValidationReport:
    v = []
    comps = U.components
    for i, K in enumerate(comps):
        if isinstance(K, Polygon) and not K.is_simple():
            v.append({"violation": "polygon not simple", "component": i})
    n_inf = sum(1 for K in comps if K.contains_inf)
    if n_inf > 1:
        v.append({"violation": "more than one component contains infinity", "count": n_inf})
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            g = euclid_gap(comps[i], comps[j])
            if g == 0.0:
                v.append({"violation": "components intersect", "components": [i, j], "gap": 0.0})
            else:
                s = components_sph_gap(comps[i], comps[j])
                if not s > 0:
                    v.append({"violation": "components intersect", "components": [i, j], "gap": s})
    if not U.contains_point(U.basepoint):
        v.append({"violation": "basepoint not in U"})
    return ValidationReport(not v, v)


def is_nondegenerate(U: PointedDomain) -> tuple[bool, list]:
    reasons = []
    if U.n == 0:
        reasons.append("no complement components (U is the whole sphere)")
    for i, K in enumerate(U.components):
        if isinstance(K, Point):
            reasons.append(f"component {i} is a point")
        elif sph_diam_bounds(K, 1e-3)[0] <= 0:
            reasons.append(f"component {i} has zero spherical diameter")
    return (not reasons, reasons)


def connectivity(U: PointedDomain) -> int:
    return U.n


def delta_sharp(U: PointedDomain, z: SpherePoint) -> float:
    """Spherical distance from ``z`` to the complement of ``U``."""
    return delta_sharp_bounds(U, z)[1]


def delta_sharp_bounds(U: PointedDomain, z: SpherePoint) -> tuple[float, float]:
    z = as_point(z)
    if not U.contains_point(z):
        raise ValueError("point is not in U")
    if U.n == 0:
        raise ValueError("complement is empty")
    lo = hi = math.inf
    for K in U.components:
        a, b = set_sph_dist_bounds(K, z)
        lo, hi = min(lo, a), min(hi, b)
    return lo, hi


def complement_diam_bounds(U: PointedDomain, res: float = 1e-4) -> tuple[float, float]:
    return sph_diam_bounds(list(U.components), res)


# --------------------------------------------------------------- families


@dataclass(frozen=True)
class DomainFamily:
    name: str
    generator: Callable[[int], PointedDomain]
    index_range: tuple
    params: dict
    connectivity: int

    def __call__(self, m: int) -> PointedDomain:
        lo, hi = self.index_range
        if m < lo or (hi is not None and m > hi):
            raise ValueError(f"index {m} outside {self.name} range {self.index_range}")
        U = self.generator(m)
        if U.n != self.connectivity:
            raise ValueError(f"{self.name}({m}) has connectivity {U.n}, expected {self.connectivity}")
        return U

    def member_or_error(self, m: int):
        """Generate and validate; returns (domain, None) or (None, reason)."""
        try:
            U = self.generator(m)
        except Exception as exc:  # generation failures are reported per member
            return None, str(exc)
        rep = validate(U)
        if not rep.ok:
            return None, "; ".join(x["violation"] for x in rep.violations)
        ok, why = is_nondegenerate(U)
        if not ok:
            return None, "; ".join(why)
        if U.n != self.connectivity:
            return None, f"connectivity {U.n} != {self.connectivity}"
        return U, None


def arc_polygon(r_in: float, r_out: float, t0: float, t1: float, per_arc: int = 64) -> Polygon:
    """Closed annular sector ``r_in <= |z| <= r_out``, ``t0 <= arg z <= t1``."""
    t = np.linspace(t0, t1, per_arc)
    outer = r_out * np.exp(1j * t)
    inner = r_in * np.exp(1j * t[::-1])
    return Polygon(tuple(complex(z) for z in np.concatenate([outer, inner])))


def _disc_nibble(m: int) -> PointedDomain:
    return PointedDomain(0j, (Disc(1 - 2 / m, 1 / m), DiscComplement(0j, 1.0)), f"disc_nibble[m={m}]")


def _quad(m: int) -> PointedDomain:
    comps = (
        Disc(5 / (4 * m), 3 / (4 * m)),
        Disc(-5 / (4 * m), 3 / (4 * m)),
        Disc(5 * m / 4, 3 * m / 4),
        Disc(-5 * m / 4, 3 * m / 4),
    )
    return PointedDomain(1 + 0j, comps, f"inverse_symmetric_quad[m={m}]")


def _fig6(basepoint: complex, per_arc: int):
    def gen(m: int) -> PointedDomain:
        comps = (
            Disc(0j, 2.0),
            DiscComplement(0j, 5.0),
            arc_polygon(3.0, 4.0, 1 / m, 2 * math.pi - 1 / m, per_arc),
        )
        return PointedDomain(basepoint, comps, f"slit_annulus_fig6[m={m}]")
    return gen


def _merging(m: int) -> PointedDomain:
    s = 0.5 + 1 / m
    comps = (DiscComplement(0j, 4.0), Disc(-s, 0.5), Disc(s, 0.5))
    return PointedDomain(2j, comps, f"merging_components[m={m}]")


def _concentric(m: int) -> PointedDomain:
    R = 9 - 5 / m
    return PointedDomain(math.sqrt(R), (Disc(0j, 1.0), DiscComplement(0j, R)), f"concentric_annulus[m={m}]")


BUILTIN_NAMES = (
    "disc_nibble",
    "inverse_symmetric_quad",
    "slit_annulus_fig6",
    "merging_components",
    "concentric_annulus",
)


def builtin_family(name: str, params: dict | None = None) -> DomainFamily:
    """Named parametric families used throughout the tests and the CLI."""
    params = dict(params or {})
    if name == "disc_nibble":
        return DomainFamily(name, _disc_nibble, (4, None), params, 2)
    if name == "inverse_symmetric_quad":
        return DomainFamily(name, _quad, (3, None), params, 4)
    if name == "slit_annulus_fig6":
        bp = params.setdefault("basepoint", -2.5)
        per_arc = int(params.setdefault("per_arc", 64))
        return DomainFamily(name, _fig6(as_point(bp), per_arc), (1, None), params, 3)
    if name == "merging_components":
        return DomainFamily(name, _merging, (1, None), params, 3)
    if name == "concentric_annulus":
        return DomainFamily(name, _concentric, (1, None), params, 2)
    raise ValueError(f"unknown family {name!r}; known: {', '.join(BUILTIN_NAMES)}")


def unit_disc(basepoint=0j) -> PointedDomain:
    return PointedDomain(basepoint, (DiscComplement(0j, 1.0),), "unit_disc")


def annulus(r: float, R: float, basepoint=None, center=0j) -> PointedDomain:
    bp = center + math.sqrt(r * R) if basepoint is None else basepoint
    return PointedDomain(bp, (Disc(center, r), DiscComplement(center, R)), f"annulus({r},{R})")

"""Closed polylines and exact integer winding numbers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClosedCurve:
    """Closed polyline; the last vertex connects back to the first."""

    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))

    @classmethod
    def from_array(cls, z) -> "ClosedCurve":
        return cls(tuple(complex(p) for p in np.asarray(z, dtype=complex)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=complex)

    def __len__(self) -> int:
        return len(self.points)

    def euclid_length(self) -> float:
        z = self.array
        return float(np.sum(np.abs(np.roll(z, -1) - z)))

    def negate(self) -> "ClosedCurve":
        return ClosedCurve(tuple(-p for p in self.points))

    def reversed(self) -> "ClosedCurve":
        return ClosedCurve(self.points[::-1])

    def to_json(self) -> dict:
        return {"closed": True, "points": [[p.real, p.imag] for p in self.points]}

    @classmethod
    def from_json(cls, d: dict) -> "ClosedCurve":
        if not isinstance(d, dict) or d.get("closed") is not True:
            raise ValueError("curve document must have \"closed\": true")
        return cls(tuple(complex(x, y) for x, y in d["points"]))


class OnCurveError(ValueError):
    pass


def winding_numbers(z: np.ndarray, probes, tol: float = 0.0) -> np.ndarray:
    """Winding numbers of the closed polyline ``z`` about each probe point.

    Signed upward/downward crossing count of a rightward ray; the result is an
    exact integer for every probe that is not on the curve.
    """
    z = np.asarray(z, dtype=complex)
    p = np.atleast_1d(np.asarray(probes, dtype=complex))
    a = z[None, :]
    b = np.roll(z, -1)[None, :]
    q = p[:, None]
    cross = (b.real - a.real) * (q.imag - a.imag) - (q.real - a.real) * (b.imag - a.imag)
    up = (a.imag <= q.imag) & (b.imag > q.imag) & (cross > 0)
    down = (a.imag > q.imag) & (b.imag <= q.imag) & (cross < 0)
    w = up.sum(axis=1) - down.sum(axis=1)
    on = _on_polyline(z, p, tol)
    if on.any():
        raise OnCurveError(f"{int(on.sum())} probe point(s) lie on the curve")
    return w.astype(int)


def _on_polyline(z, p, tol):
    a = z[None, :]
    b = np.roll(z, -1)[None, :]
    q = p[:, None]
    d = b - a
    dd = np.abs(d) ** 2
    t = np.clip(((np.conj(d) * (q - a)).real) / np.where(dd > 0, dd, 1.0), 0, 1)
    dist = np.abs(q - (a + t * d))
    return (dist <= tol).any(axis=1)


def winding_number(c, z) -> int:
    """Exact winding number of a closed curve about one point."""
    pts = c.array if isinstance(c, ClosedCurve) else np.asarray(c, dtype=complex)
    return int(winding_numbers(pts, [complex(z)])[0])


def segments_cross(z: np.ndarray) -> bool:
    """True if the closed polyline has two non-adjacent intersecting edges."""
    z = np.asarray(z, dtype=complex)
    n = len(z)
    if n < 4:
        return False
    a = z
    b = np.roll(z, -1)
    ax, ay, bx, by = a.real, a.imag, b.real, b.imag
    # bounding-box prefilter keeps this near-linear for well-spread curves
    order = np.argsort(np.minimum(ax, bx))
    xmin = np.minimum(ax, bx)[order]
    xmax = np.maximum(ax, bx)[order]
    for k in range(n):
        i = order[k]
        hi = np.searchsorted(xmin, xmax[k], side="right")
        js = order[k + 1:hi]
        if len(js) == 0:
            continue
        js = js[(np.abs(js - i) > 1) & (np.abs(js - i) < n - 1)]
        if len(js) == 0:
            continue
        c, d = a[js], b[js]
        o1 = _orient(a[i], b[i], c)
        o2 = _orient(a[i], b[i], d)
        o3 = _orient(c, d, a[i])
        o4 = _orient(c, d, b[i])
        if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
            return True
    return False


def _orient(p, q, r):
    return np.sign(((q - p).conjugate() * (r - p)).imag)


def is_simple(c) -> bool:
    pts = c.array if isinstance(c, ClosedCurve) else np.asarray(c, dtype=complex)
    return not segments_cross(pts)


def resample_closed(z: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    """Resample a closed polyline to ``n`` vertices equally spaced in weighted length.

    ``weights[k]`` is the (weighted) length of edge ``z[k] -> z[k+1]``.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(weights, dtype=float)
    cum = np.concatenate([[0.0], np.cumsum(w)])
    total = cum[-1]
    s = total * np.arange(n) / n
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(z) - 1)
    frac = np.where(w[k] > 0, (s - cum[k]) / np.where(w[k] > 0, w[k], 1.0), 0.0)
    a = z[k]
    b = np.roll(z, -1)[k]
    return a + frac * (b - a)


def circle(center: complex, radius: float, n: int = 128) -> ClosedCurve:
    t = 2 * np.pi * np.arange(n) / n
    return ClosedCurve.from_array(center + radius * np.exp(1j * t))

"""Deterministic SVG pictures of domains, curves, annuli and grid cycles."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle, Polygon as MplPolygon, Wedge  # noqa: E402
import numpy as np  # noqa: E402

from .sphere import INF, Disc, DiscComplement, Point, Polygon  # noqa: E402

SHADE = "#b8c4d6"
EDGE = "#34495e"
CURVE_COLORS = ("#c0392b", "#27ae60", "#8e44ad", "#d35400", "#2980b9", "#16a085")

_RC = {
    "svg.hashsalt": "caradomains",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.linewidth": 0.6,
    "path.simplify": False,
}


def _extent(components, curves, extra=()) -> tuple:
    xs, ys = [], []
    for K in components:
        if isinstance(K, Disc):
            xs += [K.center.real - K.radius, K.center.real + K.radius]
            ys += [K.center.imag - K.radius, K.center.imag + K.radius]
        elif isinstance(K, DiscComplement):
            r = 1.15 * K.radius
            xs += [K.center.real - r, K.center.real + r]
            ys += [K.center.imag - r, K.center.imag + r]
        elif isinstance(K, Polygon):
            v = K.array
            xs += [v.real.min(), v.real.max()]
            ys += [v.imag.min(), v.imag.max()]
        elif isinstance(K, Point) and K.at is not INF:
            xs.append(K.at.real)
            ys.append(K.at.imag)
    for z in list(curves) + list(extra):
        z = np.asarray(z, dtype=complex)
        if len(z):
            xs += [z.real.min(), z.real.max()]
            ys += [z.imag.min(), z.imag.max()]
    if not xs:
        return -1.0, 1.0, -1.0, 1.0
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    pad = 0.05 * max(x1 - x0, y1 - y0, 1e-9)
    return x0 - pad, x1 + pad, y0 - pad, y1 + pad


def _draw_component(ax, K, view):
    if isinstance(K, Disc):
        ax.add_patch(Circle((K.center.real, K.center.imag), K.radius, fc=SHADE, ec=EDGE, lw=0.8))
    elif isinstance(K, DiscComplement):
        x0, x1, y0, y1 = view
        far = 2 * max(abs(x0 - K.center.real), abs(x1 - K.center.real),
                      abs(y0 - K.center.imag), abs(y1 - K.center.imag), K.radius)
        ax.add_patch(Wedge((K.center.real, K.center.imag), far + K.radius, 0, 360, width=far,
                           fc=SHADE, ec=EDGE, lw=0.8))
    elif isinstance(K, Polygon):
        v = K.array
        ax.add_patch(MplPolygon(np.c_[v.real, v.imag], closed=True, fc=SHADE, ec=EDGE, lw=0.8))
    elif isinstance(K, Point) and K.at is not INF:
        ax.plot([K.at.real], [K.at.imag], "x", color=EDGE, ms=5)


def render(path: str, components=(), basepoint=None, curves=(), labels=None, title: str | None = None,
           grid_edges=None, extra_points=()) -> str:
    """Write an SVG picture; identical inputs give byte-identical files."""
    curves = [np.asarray(c.array if hasattr(c, "array") else c, dtype=complex) for c in curves]
    grid_z = []
    if grid_edges is not None:
        grid_z = [np.asarray(e, dtype=complex) for e in grid_edges]
    view = _extent(components, curves + grid_z, extra_points)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 5))
        for K in components:
            _draw_component(ax, K, view)
        for seg in grid_z:
            ax.plot(seg.real, seg.imag, "-", color="#7f8c8d", lw=0.7)
        for k, z in enumerate(curves):
            zz = np.concatenate([z, z[:1]])
            lab = labels[k] if labels and k < len(labels) else None
            ax.plot(zz.real, zz.imag, "-", color=CURVE_COLORS[k % len(CURVE_COLORS)], lw=1.1, label=lab)
        if basepoint is not None and basepoint is not INF:
            b = complex(basepoint)
            ax.plot([b.real], [b.imag], "o", color="black", ms=4)
        for p in extra_points:
            ax.plot([p.real], [p.imag], ".", color="black", ms=3)
        x0, x1, y0, y1 = view
        ax.set_xlim(x0, x1)
        ax.set_ylim(y0, y1)
        ax.set_aspect("equal")
        if title:
            ax.set_title(title)
        if labels:
            ax.legend(loc="upper right", fontsize=7, frameon=False)
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches=None)
        plt.close(fig)
    return path


def render_domain(path: str, U, curves=(), labels=None, title: str | None = None) -> str:
    return render(path, U.components, U.basepoint, curves, labels, title or U.label)


def render_meshcurve(path: str, inst, result, title: str | None = None) -> str:
    """Instance sets, the guide curve, the grid cycle edges and the joined curve."""
    G = result.cycle
    edges = [G.to_plane(np.array([u, v], dtype=float)) for (u, v) in sorted(G.edges)]
    return render(path, tuple(inst.E) + tuple(inst.F), None, [inst.gamma.array, result.curve.array],
                  ["guide curve", "joined curve"], title, grid_edges=edges)


def render_annulus(path: str, E, F, cand, title: str | None = None) -> str:
    curves = [cand.equator.array]
    labels = [f"{cand.kind} equator, mod >= {cand.modulus:.4g}"]
    if cand.kind == "round":
        ring = cand.ring()
        t = 2 * np.pi * np.arange(256) / 256
        for r in (ring.a, ring.b):
            curves.append(ring.from_w(r * np.exp(1j * t)))
            labels.append(None)
    return render(path, tuple(E) + tuple(F), None, curves, labels, title)


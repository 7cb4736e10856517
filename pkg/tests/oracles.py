"""Independent reference values, computed without importing the package.

Closed forms are evaluated with plain floats; anything with an
integral is done by scipy quadrature so the package's own discretisations are
not reused.  ``make_oracles.py`` freezes these values into data/oracles.json.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate, optimize


def chordal_angle(p, q) -> float:
    """Half the great-circle angle between stereographic images (sphere diameter pi/2)."""

    def lift(z):
        if z is None:
            return np.array([0.0, 0.0, 1.0])
        x, y = z.real, z.imag
        d = 1 + x * x + y * y
        return np.array([2 * x / d, 2 * y / d, (x * x + y * y - 1) / d])

    c = float(np.clip(lift(p) @ lift(q), -1.0, 1.0))
    return 0.5 * math.acos(c)


def radial_sph_length(a: float, b: float) -> float:
    return integrate.quad(lambda t: 1.0 / (1.0 + t * t), a, b, epsabs=1e-14, epsrel=1e-14)[0]


def annulus_density(x: float, R: float) -> float:
    """Curvature -1 density of A(0,1,R) at radius x."""
    L = math.log(R)
    return math.pi / (x * L * math.sin(math.pi * math.log(x) / L))


def equator_length(R: float) -> float:
    x = math.sqrt(R)
    return integrate.quad(lambda t: annulus_density(x, R) * x, 0.0, 2 * math.pi)[0]


def radial_annulus_distance(a: float, b: float, R: float) -> float:
    return integrate.quad(lambda x: annulus_density(x, R), a, b, epsabs=1e-13)[0]


def disc_circle_length(rho: float) -> float:
    return integrate.quad(lambda t: 2.0 / (1 - rho * rho) * rho, 0, 2 * math.pi)[0]


def disc_distance(a: complex, b: complex) -> float:
    return 2 * math.atanh(abs((a - b) / (1 - np.conj(a) * b)))


def class_count(n: int, principal_only: bool = False) -> int:
    """Enumerate unordered bipartitions of n labelled components into two non-empty sides."""
    seen = set()
    for mask in range(1, 2 ** n - 1):
        side = frozenset(i for i in range(n) if mask >> i & 1)
        other = frozenset(range(n)) - side
        key = min(tuple(sorted(side)), tuple(sorted(other)))
        if principal_only and min(len(side), len(other)) != 1:
            continue
        seen.add(key)
    return len(seen)


def disc_hausdorff(c1, r1, c2, r2, n=20000) -> float:
    t = np.linspace(0, 2 * math.pi, n, endpoint=False)
    # directed distance of the farthest boundary point of each disc from the other disc
    def directed(ca, ra, cb, rb):
        z = ca + ra * np.exp(1j * t)
        return float(np.max(np.maximum(np.abs(z - cb) - rb, 0.0)))
    return max(directed(c1, r1, c2, r2), directed(c2, r2, c1, r1))


def subdisc_radius(eps: float) -> float:
    """sup of the unit-disc distance from 0 over the closed disc D(1-2eps, eps)."""
    c = 1 - 2 * eps
    f = lambda t: -disc_distance(0j, c + eps * np.exp(1j * t))
    res = optimize.minimize_scalar(f, bounds=(-1.0, 1.0), method="bounded", options={"xatol": 1e-12})
    return -float(res.fun)


def eccentric_ring_modulus(c: float, r: float, R: float) -> float:
    """Modulus of D(0,R) minus the closed disc D(c,r) via the Mobius map fixing the pair of symmetric points."""
    # symmetric points x1, x2 with respect to both circles: x1*x2 = R^2 and (x1-c)(x2-c) = r^2
    s = (R * R - r * r + c * c) / c
    x1, x2 = sorted(np.roots([1.0, -s, R * R]).real, key=abs)
    k_in = abs((c + r - x1) / (c + r - x2))
    k_out = abs((R - x1) / (R - x2))
    return math.log(k_out / k_in) / (2 * math.pi) if k_out > k_in else math.log(k_in / k_out) / (2 * math.pi)


def square_bound(r: float, R: float) -> float:
    return (2 * R / r + 2) ** 2


def all_values() -> dict:
    e = math.e
    return {
        "sph_dist_0_1": radial_sph_length(0, 1),
        "sph_dist_0_2": radial_sph_length(0, 2),
        "sph_dist_1_minus1": chordal_angle(1 + 0j, -1 + 0j),
        "sph_dist_0_inf": chordal_angle(0j, None),
        "sph_dist_1_i": chordal_angle(1 + 0j, 1j),
        "annulus_density_sqrtR_e2pi": annulus_density(math.exp(math.pi), math.exp(2 * math.pi)),
        "equator_length": {str(k): equator_length(R) for k, R in
                           (("e", e), ("e_pi", math.exp(math.pi)), ("e_2pi", math.exp(2 * math.pi)),
                            ("e_4pi", math.exp(4 * math.pi)), ("16", 16.0), ("9", 9.0))},
        "radial_A9_2_3": radial_annulus_distance(2.0, 3.0, 9.0),
        "disc_circle_half": disc_circle_length(0.5),
        "disc_dist_0_half": disc_distance(0j, 0.5 + 0j),
        "disc_bound": 2 * math.log(4 / math.pi),
        "class_counts": {str(n): [class_count(n), class_count(n, True)] for n in (2, 3, 4, 5)},
        "hausdorff_D01_D31": disc_hausdorff(0j, 1.0, 3 + 0j, 1.0),
        "hausdorff_D01_D02": disc_hausdorff(0j, 1.0, 0j, 2.0),
        "subdisc_radius": {str(e_): subdisc_radius(e_) for e_ in (0.1, 0.05, 0.03, 0.01)},
        "ring_modulus_1_4": math.log(4) / (2 * math.pi),
        "ring_modulus_half_in_4": eccentric_ring_modulus(0.5, 0.5, 4.0),
        "square_bound_05_2": square_bound(0.5, 2.0),
        "square_bound_05_2pi": square_bound(0.5, 2 * math.pi),
        "annulus_L_e2pi": abs(math.log(math.pi)),
    }

"""PSL(2,Z) acting on the upper half-plane and on its boundary circle R u {inf}."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from .words import CapExceeded

ENUM_CAP = 10.0
INF = math.inf


@dataclass(frozen=True)
class UnimodularMatrix:
    """Integer matrix [[a, b], [c, d]] with ad - bc = 1, taken modulo sign."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self.entries} is not 1")
        first = next(x for x in self.entries if x != 0)
        if first < 0:
            for name in "abcd":
                object.__setattr__(self, name, -getattr(self, name))

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return UnimodularMatrix(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    __mul__ = __matmul__

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a)

    def norm2(self) -> int:
        return self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2

    def orbit_point(self) -> tuple[Fraction, Fraction]:
        """g.i as exact (real, imaginary) rationals."""
        a, b, c, d = self.entries
        den = c * c + d * d
        return Fraction(a * c + b * d, den), Fraction(1, den)


IDENTITY = UnimodularMatrix(1, 0, 0, 1)
S = UnimodularMatrix(0, -1, 1, 0)
T = UnimodularMatrix(1, 1, 0, 1)


@dataclass(frozen=True)
class UpperHalfPoint:
    re: float
    im: float

    def __post_init__(self):
        if not self.im > 0:
            raise ValueError("upper half-plane points need im > 0")

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)


BASE = UpperHalfPoint(0.0, 1.0)


def mobius_apply(g: UnimodularMatrix, z):
    """(az + b)/(cz + d) on half-plane points (UpperHalfPoint or complex) or
    on boundary points (real numbers, with ``math.inf`` for the point at infinity)."""
    a, b, c, d = g.entries
    if isinstance(z, UpperHalfPoint):
        w = (a * z.z + b) / (c * z.z + d)
        return UpperHalfPoint(w.real, w.imag)
    if isinstance(z, complex):
        return (a * z + b) / (c * z + d)
    if isinstance(z, Fraction) or isinstance(z, int):
        if c * z + d == 0:
            return INF
        return Fraction(a * z + b, 1) / (c * z + d)
    x = float(z)
    if math.isinf(x):
        return INF if c == 0 else a / c
    den = c * x + d
    if den == 0:
        return INF
    return (a * x + b) / den


def hyperbolic_distance(z: UpperHalfPoint, w: UpperHalfPoint) -> float:
    dz = z.z - w.z
    return math.acosh(1.0 + abs(dz) ** 2 / (2.0 * z.im * w.im))


def distance_from_base(g: UnimodularMatrix) -> float:
    """d(i, g.i) = arcosh(|g|^2 / 2), using the Frobenius norm."""
    return math.acosh(g.norm2() / 2.0)


def _egcd(x: int, y: int) -> tuple[int, int, int]:
    if y == 0:
        return (abs(x), (1 if x >= 0 else -1), 0)
    g, p, q = _egcd(y, x % y)
    return g, q, p - (x // y) * q


@lru_cache(maxsize=32)
def _enumerate(bound: int) -> tuple[UnimodularMatrix, ...]:
    # Parametrise by the bottom row (c, d), coprime; the top row is then
    # (a0, b0) + k (c, d) for integer k.
    out = set()
    r = math.isqrt(bound)
    for c in range(-r, r + 1):
        for d in range(-r, r + 1):
            cd = c * c + d * d
            if cd == 0 or cd > bound or math.gcd(c, d) != 1:
                continue
            _, p, q = _egcd(d, -c)  # p*d - q*c = 1
            a0, b0 = p, q
            centre = -(a0 * c + b0 * d) / cd
            # |(a0, b0) + k (c, d)|^2 <= bound - cd confines k near centre
            half = math.sqrt(max(bound - cd, 0) / cd) + 1
            for k in range(math.floor(centre - half), math.ceil(centre + half) + 1):
                a, b = a0 + k * c, b0 + k * d
                if a * a + b * b + cd <= bound:
                    out.add(UnimodularMatrix(a, b, c, d))
    return tuple(sorted(out, key=lambda g: (g.norm2(), g.entries)))


def norm_bound(n: float) -> int:
    return math.floor(2.0 * math.cosh(n) + 1e-9)


def enumerate_ball(n: float, cap: float = ENUM_CAP) -> list[UnimodularMatrix]:
    """All g in PSL(2,Z) with d(i, g.i) <= n, stabiliser cosets included."""
    if n < 0:
        raise ValueError("radius must be nonnegative")
    if n > cap:
        raise CapExceeded(f"radius {n} exceeds cap {cap}")
    return list(_enumerate(norm_bound(n)))


def orbit_points(ball: Iterable[UnimodularMatrix]) -> list[tuple[Fraction, Fraction]]:
    """Distinct orbit points g.i, exact, sorted."""
    return sorted({g.orbit_point() for g in ball})


def orbit_point_arrays(n: float, cap: float = ENUM_CAP) -> tuple[np.ndarray, np.ndarray]:
    pts = orbit_points(enumerate_ball(n, cap))
    return (
        np.array([float(x) for x, _ in pts]),
        np.array([float(y) for _, y in pts]),
    )


def ball_csv(ball: Iterable[UnimodularMatrix]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b", "c", "d", "distance"])
    for g in ball:
        w.writerow([*g.entries, repr(distance_from_base(g))])
    return buf.getvalue()


def rn_lebesgue(g: UnimodularMatrix, xi: float) -> float:
    """(c xi + d)^-2, the derivative against Lebesgue measure on the real line."""
    if math.isinf(xi):
        raise ValueError("the point at infinity is excluded")
    den = g.c * xi + g.d
    if den == 0:
        return INF
    return 1.0 / den ** 2


def poisson_ratio(g: UnimodularMatrix, xi):
    """P(g.i, xi) / P(i, xi) for finite boundary points xi (scalar or array).

    This is d(g_* mu)/d mu for harmonic measure mu seen from i.
    """
    x, y = g.orbit_point()
    x, y = float(x), float(y)
    out = poisson_ratio_point(x, y, np.asarray(xi, dtype=float))
    return float(out) if out.ndim == 0 else out


def poisson_ratio_point(x, y, xi):
    """Same as poisson_ratio but from orbit-point coordinates (broadcasting)."""
    # rescale by max(1, |xi|) so huge boundary points do not overflow
    xi = np.asarray(xi, dtype=float)
    t = 1.0 / np.maximum(1.0, np.abs(xi))
    u = np.where(np.isinf(xi), np.sign(xi), np.where(np.isinf(xi), 0.0, xi) * t)
    return y * (t * t + u * u) / ((x * t - u) ** 2 + (y * t) ** 2)


def busemann_circle(xi: float, z: UpperHalfPoint) -> float:
    """beta_xi(i, z) = log(P(z, xi) / P(i, xi))."""
    if math.isinf(xi):
        raise ValueError("xi must be finite")
    return math.log(z.im * (1.0 + xi * xi) / ((z.re - xi) ** 2 + z.im ** 2))


def sample_harmonic(rng: np.random.Generator, size=None):
    """Harmonic measure from i (standard Cauchy) via tan(pi (U - 1/2))."""
    u = rng.random(size)
    # U = 0 would map to -inf; harmonic measure gives inf zero mass
    u = np.where(u == 0.0, 0.5, u)
    out = np.tan(np.pi * (u - 0.5))
    return float(out) if size is None else out


def random_unimodular(rng: np.random.Generator, length: int) -> UnimodularMatrix:
    """Random word of the given length in S, T and T^-1."""
    g = IDENTITY
    gens = (S, T, T.inverse())
    for _ in range(length):
        g = g @ gens[rng.integers(3)]
    return g

"""Laplace fundamental solution, its zonal-harmonic expansion and Kelvin transform.

Gamma(x, y) = |x-y|^(2-n) / (omega_n (2-n)) for n != 2 and log|x-y| / 2pi for
n = 2 (for n = 1 this is |x-y| / 2), where omega_n = 2 pi^(n/2) / Gamma(n/2) is the area of S^(n-1).  For
|x| < |y| it expands as

    Gamma(x, y) = sum_k |x|^k / |y|^(k+n-2) Z_k(x'.y'),
    Z_k = -Z^(k)(x'.y') / (2k+n-2),

with Z^(k) the zonal harmonic of degree k; for n = 2 the k = 0 term is
log|y| / 2pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ZonalQuery",
    "PolarQuadSpec",
    "TestFunction",
    "sphere_area",
    "gegenbauer",
    "gamma_laplace",
    "zonal_kernel",
    "zonal",
    "laplace_series_terms",
    "laplace_series_partial",
    "kelvin_transform",
    "kelvin_conjugation_residual",
    "radial_bump",
    "laplace_representation_residual",
]


def sphere_area(n: int) -> float:
    """omega_n, the surface measure of the unit sphere in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True)
class ZonalQuery:
    k: int
    n: int
    u: float

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"degree must be >= 0, got {self.k}")
        if self.n < 2:
            raise ValueError(f"zonal harmonics need n >= 2, got {self.n}")
        if not abs(self.u) <= 1:
            raise ValueError(f"the cosine u must lie in [-1, 1], got {self.u}")

    @property
    def omega(self) -> float:
        return sphere_area(self.n)


def gegenbauer(k: int, lam: float, u):
    """C_k^lam(u) by the three-term recurrence (vectorized over u)."""
    u = np.asarray(u, dtype=float)
    prev = np.ones_like(u)
    if k == 0:
        return prev
    cur = 2 * lam * u
    for m in range(1, k):
        prev, cur = cur, (2 * (m + lam) * u * cur - (m + 2 * lam - 1) * prev) / (m + 1)
    return cur


def zonal_kernel(q: ZonalQuery) -> float:
    """Z^(k)(u): reproducing kernel of degree-k spherical harmonics on S^(n-1).

    n >= 3: (2k+n-2) / ((n-2) omega_n) C_k^((n-2)/2)(u);
    n = 2:  1/2pi for k = 0, cos(k arccos u) / pi otherwise.
    """
    if q.n == 2:
        if q.k == 0:
            return 1 / (2 * math.pi)
        return math.cos(q.k * math.acos(q.u)) / math.pi
    lam = (q.n - 2) / 2
    return (2 * q.k + q.n - 2) / ((q.n - 2) * q.omega) * float(gegenbauer(q.k, lam, q.u))


def zonal(k: int, n: int, u: float) -> float:
    return zonal_kernel(ZonalQuery(k, n, u))


def gamma_laplace(x, y) -> float:
    """Fundamental solution of the Laplacian in R^n, n = len(x)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: x{x.shape} vs y{y.shape}")
    n = x.size
    r = float(np.linalg.norm(x - y))
    if r == 0.0:
        raise ValueError("Gamma(x, y) is singular at x = y")
    if n == 2:
        return math.log(r) / (2 * math.pi)
    return r ** (2 - n) / (sphere_area(n) * (2 - n))


def laplace_series_terms(x, y, K: int) -> np.ndarray:
    """The terms k = 0..K of the expansion of Gamma(x, y) for |x| < |y|."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: x{x.shape} vs y{y.shape}")
    n = x.size
    if n < 2:
        raise ValueError("the Laplace expansion is implemented for n >= 2")
    rx, ry = float(np.linalg.norm(x)), float(np.linalg.norm(y))
    if not rx < ry:
        raise ValueError(f"the expansion needs |x| < |y|, got {rx} >= {ry}")
    terms = np.zeros(K + 1)
    if n == 2:
        terms[0] = math.log(ry) / (2 * math.pi)
    else:
        terms[0] = -zonal(0, n, 1.0) / (n - 2) * ry ** (2 - n)
    if rx == 0.0:
        return terms
    u = float(np.clip(x @ y / (rx * ry), -1.0, 1.0))
    for k in range(1, K + 1):
        terms[k] = -zonal(k, n, u) / (2 * k + n - 2) * rx**k / ry ** (k + n - 2)
    return terms


def laplace_series_partial(x, y, K: int) -> float:
    """Partial sum through degree K of the zonal expansion of Gamma(x, y)."""
    return math.fsum(laplace_series_terms(x, y, K))


def kelvin_transform(u: Callable) -> Callable:
    """v(x) = |x|^(2-n) u(x / |x|^2)."""

    def v(x):
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        if r2 == 0.0:
            raise ValueError("the Kelvin transform is undefined at the origin")
        return r2 ** ((2 - x.size) / 2) * u(x / r2)

    return v


def _fd_laplacian(f, x, h):
    centre = f(x)
    total = 0.0
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        total += (f(x + e) - 2 * centre + f(x - e)) / h**2
    return total


def kelvin_conjugation_residual(u: Callable, x, h: float = 1e-3) -> float:
    """|Delta_h v(x) - |x|^(-n-2) Delta_h u(x/|x|^2)| for v the Kelvin transform of u."""
    if not 0 < h <= 1e-2:
        raise ValueError(f"step must lie in (0, 1e-2], got {h}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r2 = float(x @ x)
    if r2 == 0.0:
        raise ValueError("the Kelvin identity needs x != 0")
    n = x.size
    lhs = _fd_laplacian(kelvin_transform(u), x, h)
    rhs = r2 ** ((-n - 2) / 2) * _fd_laplacian(u, x / r2, h)
    return abs(lhs - rhs)


# --- representation identity --------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """A smooth compactly supported phi on R^n with its Laplacian.

    Both callables take an array of points of shape (..., n).  ``support``
    is a box ((lo_1, hi_1), ..., (lo_n, hi_n)) containing supp(phi).
    """

    __test__ = False  # not a pytest class

    value: Callable
    laplacian: Callable
    support: Optional[tuple] = None

    def translate(self, a) -> "TestFunction":
        """phi(. - a)."""
        a = np.asarray(a, dtype=float)
        support = None
        if self.support is not None:
            support = tuple((lo + ai, hi + ai) for (lo, hi), ai in zip(self.support, a))
        return TestFunction(
            value=lambda y: self.value(np.asarray(y) - a),
            laplacian=lambda y: self.laplacian(np.asarray(y) - a),
            support=support,
        )


def radial_bump(n: int, centre=None, radius: float = 1.0, height: float = 1.0) -> TestFunction:
    """height * exp(-1 / (1 - rho)) with rho = |y - centre|^2 / radius^2 < 1."""
    centre = np.zeros(n) if centre is None else np.asarray(centre, dtype=float)

    def parts(y):
        d = (np.asarray(y, dtype=float) - centre) / radius
        rho = np.sum(d * d, axis=-1)
        inside = rho < 1
        q = np.where(inside, 1 - rho, 1.0)
        F = np.where(inside, np.exp(-1 / q), 0.0)
        return rho, q, F

    def value(y):
        return height * parts(y)[2]

    def laplacian(y):
        # Delta F(rho) = (4 rho F'' + 2 n F') / radius^2
        rho, q, F = parts(y)
        F1 = -F / q**2
        F2 = F * (1 / q**4 - 2 / q**3)
        return height * (4 * rho * F2 + 2 * n * F1) / radius**2

    support = tuple((c - radius, c + radius) for c in centre)
    return TestFunction(value, laplacian, support)


@dataclass(frozen=True)
class PolarQuadSpec:
    """Quadrature in polar coordinates around the evaluation point.

    ``grading`` geometric panels crowd towards r = 0, followed by
    ``radial_panels`` uniform panels, each with ``order`` Gauss-Legendre
    nodes; ``angular`` nodes per angular direction.
    """

    radial_panels: int = 24
    order: int = 12
    grading: int = 12
    angular: int = 48


def _radial_rule(R: float, spec: PolarQuadSpec):
    first = R / spec.radial_panels
    edges = [first * 2.0**-j for j in range(spec.grading, 0, -1)]
    edges = np.concatenate(([0.0], edges, np.linspace(first, R, spec.radial_panels)))
    nodes, weights = np.polynomial.legendre.leggauss(spec.order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    r = (mid[:, None] + half[:, None] * nodes).ravel()
    w = (half[:, None] * weights).ravel()
    return r, w


def _sphere_rule(n: int, m: int):
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.ones(2)
    phis = 2 * math.pi * np.arange(2 * m) / (2 * m)
    wphi = np.full(2 * m, math.pi / m)
    if n == 2:
        return np.stack([np.cos(phis), np.sin(phis)], axis=-1), wphi
    ct, wt = np.polynomial.legendre.leggauss(m)
    st = np.sqrt(1 - ct * ct)
    dirs = np.stack(
        [
            (st[:, None] * np.cos(phis)).ravel(),
            (st[:, None] * np.sin(phis)).ravel(),
            np.repeat(ct, 2 * m),
        ],
        axis=-1,
    )
    return dirs, (wt[:, None] * wphi).ravel()


def laplace_representation_residual(
    phi: TestFunction, x, quad_spec: PolarQuadSpec = PolarQuadSpec()
) -> float:
    """|phi(x) - int Gamma(x, y) Delta phi(y) dy| for n in {1, 2, 3}.

    The integral is taken in polar coordinates centred at x, so the kernel
    singularity becomes the integrable factor r log r (n = 2) or r (n = 1, 3),
    and the radial panels are graded geometrically towards r = 0.
    """
    if phi.support is None:
        raise ValueError("support box not provided")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    if n not in (1, 2, 3):
        raise ValueError(f"the representation check supports n <= 3, got {n}")
    corners = np.array(np.meshgrid(*phi.support, indexing="ij")).reshape(n, -1).T
    R = float(np.max(np.linalg.norm(corners - x, axis=1)))
    r, wr = _radial_rule(R, quad_spec)
    dirs, wd = _sphere_rule(n, quad_spec.angular)
    if n == 1:
        radial = r / 2
    elif n == 2:
        radial = np.log(r) / (2 * math.pi) * r
    else:
        radial = -r / (4 * math.pi)
    points = x + r[:, None, None] * dirs[None, :, :]
    lap = phi.laplacian(points)
    integral = float(np.sum((lap @ wd) * radial * wr))
    return abs(float(phi.value(x)) - integral)

"""Gaussian kernels of the heat operator and their Taylor series at the origin.

The backward kernel G_b(x,t,y,s) = (4 pi (s-t))^(-n/2) exp(-|x-y|^2 / 4(s-t)),
t < s, expands around (x, t) = (0, 0) as

    G_b = 4^(-n/2) sum_k sum_{|alpha|=k} Q_alpha(x, t) A_alpha(y, s),

with Q_alpha the caloric polynomials and
A_alpha(y, s) = s^(-(k+n)/2) phi_alpha(y / 2 sqrt(s)) exp(-|y|^2 / 8s)
their Appell images.  For 0 < t < s this is the same series as
(4s)^(-n/2) e^{|x|^2/8t} sum_k (t/s)^(k/2) Phi_k(x/2 sqrt t, y/2 sqrt s) e^{-|y|^2/8s},
but the product form has no singularity at t = 0 and also makes sense
for -s < t < 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from flint import arb

from ._series import adaptive_sum, caloric_arb, convolve_truncated, hermite_arb
from .caloric import caloric_table
from .hermite import hermite_function_table
from .projection import MehlerQuery, mehler_adaptive, phi_k_kernels

__all__ = [
    "SpaceTimePoint",
    "ExpansionResult",
    "QuadSpec",
    "SpaceTimeTestFunction",
    "gaussian_backward",
    "gaussian_forward",
    "appell_image_table",
    "taylor_terms",
    "taylor_partial",
    "taylor_adaptive",
    "hermite_kernel_series",
    "proof_substitution_partial",
    "proof_substitution_adaptive",
    "proof_substitution_closed",
    "heat_representation_residual",
    "spacetime_bump",
]

K_MAX_DEFAULT = 1000


@dataclass(frozen=True)
class SpaceTimePoint:
    x: np.ndarray
    t: float

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if x.ndim != 1:
            raise ValueError(f"x must be a vector, got shape {x.shape}")
        if not (np.isfinite(x).all() and math.isfinite(self.t)):
            raise ValueError("space-time coordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dimension(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class ExpansionResult:
    value: float
    degrees_used: int
    tail_estimate: float
    converged: bool
    digits: int = 16


def _as_point(p) -> SpaceTimePoint:
    if isinstance(p, SpaceTimePoint):
        return p
    x, t = p
    return SpaceTimePoint(x, t)


def _gaussian(x: np.ndarray, y: np.ndarray, tau: float) -> float:
    d = x - y
    return (4 * math.pi * tau) ** (-x.size / 2) * math.exp(-float(d @ d) / (4 * tau))


def gaussian_backward(p, q) -> float:
    """G_b(x, t, y, s) for p = (x, t), q = (y, s); zero when t > s."""
    p, q = _as_point(p), _as_point(q)
    if p.dimension != q.dimension:
        raise ValueError(f"dimension mismatch: {p.dimension} vs {q.dimension}")
    if p.t == q.t:
        raise ValueError("the Gaussian kernel is undefined on the diagonal t = s")
    if p.t > q.t:
        return 0.0
    return _gaussian(p.x, q.x, q.t - p.t)


def gaussian_forward(p, q) -> float:
    """G(x, t, y, s) for p = (x, t), q = (y, s); zero when s > t."""
    p, q = _as_point(p), _as_point(q)
    if p.dimension != q.dimension:
        raise ValueError(f"dimension mismatch: {p.dimension} vs {q.dimension}")
    if p.t == q.t:
        raise ValueError("the Gaussian kernel is undefined on the diagonal t = s")
    if q.t > p.t:
        return 0.0
    return _gaussian(p.x, q.x, p.t - q.t)


def appell_image_table(kmax: int, y, s: float) -> np.ndarray:
    """One-dimensional s^(-(k+1)/2) h_k(y / 2 sqrt s) exp(-y^2 / 8s), k <= kmax.

    Vectorized over y; the product over coordinates of these factors is
    A_alpha(y, s).
    """
    y = np.asarray(y, dtype=float)
    z = y / (2 * math.sqrt(s))
    table = hermite_function_table(kmax, z) * np.exp(-y * y / (8 * s))
    return table * s ** (-(np.arange(kmax + 1) + 1) / 2).reshape((-1,) + (1,) * y.ndim)


def _check_series_args(x, t, y, s):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"dimension mismatch: x{x.shape} vs y{y.shape}")
    s, t = float(s), float(t)
    if not s > 0:
        raise ValueError(f"the expansion needs s > 0, got s={s}")
    if not abs(t) < s:
        raise ValueError(f"the expansion needs |t| < s, got t={t}, s={s}")
    return x, float(t), y, s


def _taylor_terms_arb(x: np.ndarray, t: float, y: np.ndarray, s: float, K: int) -> list:
    t_, s_ = arb(t), arb(s)
    root_s = s_.sqrt()
    seqs = []
    for xj, yj in zip(x, y):
        xj, yj = arb(float(xj)), arb(float(yj))
        q = caloric_arb(K, xj, t_)
        h = hermite_arb(K, yj / (2 * root_s))
        g = (-(yj * yj) / (8 * s_)).exp() / root_s
        seq = []
        for k in range(K + 1):
            seq.append(q[k] * h[k] * g)
            g = g / root_s
        seqs.append(seq)
    scale = arb(4) ** arb(-x.size / 2)
    return [v * scale for v in convolve_truncated(seqs, K)]


def taylor_terms(x, t: float, y, s: float, K: int) -> np.ndarray:
    """Degree-by-degree terms 4^(-n/2) sum_{|alpha|=k} Q_alpha(x,t) A_alpha(y,s).

    The sum over |alpha| = k is the degree-k coefficient of a product of
    one-dimensional sequences, so it is formed by truncated convolutions
    in a fixed order.
    """
    x, t, y, s = _check_series_args(x, t, y, s)
    if K < 0:
        raise ValueError(f"truncation degree must be >= 0, got {K}")
    n = x.size
    prod = caloric_table(K, x, t) * appell_image_table(K, y, s)
    out = prod[:, 0]
    for j in range(1, n):
        out = np.convolve(out, prod[:, j])[: K + 1]
    return out * 4.0 ** (-n / 2)


def taylor_partial(x, t: float, y, s: float, K: int) -> float:
    """Partial sum through degree K of the Taylor series of G_b at the origin."""
    return math.fsum(taylor_terms(x, t, y, s, K))


def taylor_adaptive(
    x, t: float, y, s: float, tol: float, K_max: int = K_MAX_DEFAULT, extended: bool = True
) -> ExpansionResult:
    """Sum the series until three consecutive degree increments are each
    <= tol * |partial| and the extrapolated tail is below the same bound.

    The tail is extrapolated geometrically from the largest of the last
    three increments, with per-degree ratio sqrt(|t|/s).  The sum is done
    in double precision first.  When its condition number
    sum|terms| / |sum| is too large for tol (and ``extended`` is set), it
    is redone in ball arithmetic with enough bits.  If K_max is reached
    first the full partial sum is returned with converged=False.
    """
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    x, t, y, s = _check_series_args(x, t, y, s)
    if t == 0.0 and not np.any(x):
        # Q_alpha(0, 0) = 0 for |alpha| >= 1
        return ExpansionResult(float(taylor_terms(x, t, y, s, 0)[0]), 0, 0.0, True)
    res = adaptive_sum(
        lambda K: taylor_terms(x, t, y, s, K),
        lambda K: _taylor_terms_arb(x, t, y, s, K),
        tol,
        math.sqrt(abs(t) / s),
        K_max,
        extended,
    )
    return ExpansionResult(res.value, res.degrees_used, res.tail_estimate, res.converged, res.digits)


def hermite_kernel_series(x, t: float, y, s: float, K: int) -> float:
    """The series in its Hermite-kernel form, valid only for 0 < t < s:
    (4s)^(-n/2) e^{|x|^2/8t} sum_{k<=K} (t/s)^(k/2) Phi_k(x/2 sqrt t, y/2 sqrt s) e^{-|y|^2/8s}.
    """
    x, t, y, s = _check_series_args(x, t, y, s)
    if not t > 0:
        raise ValueError("the Hermite-kernel form needs 0 < t < s")
    n = x.size
    kernels = phi_k_kernels(K, x / (2 * math.sqrt(t)), y / (2 * math.sqrt(s)))
    series = math.fsum(kernels * (t / s) ** (np.arange(K + 1) / 2))
    return (4 * s) ** (-n / 2) * math.exp(float(x @ x) / (8 * t) - float(y @ y) / (8 * s)) * series


def proof_substitution_partial(x, t: float, y, s: float, K: int) -> float:
    """s^(-n/2) sum_{k<=K} (t/s)^(k/2) Phi_k(x/2 sqrt t, y/2 sqrt s), 0 < t < s."""
    x, t, y, s = _check_series_args(x, t, y, s)
    if not t > 0:
        raise ValueError("the substitution needs 0 < t < s")
    kernels = phi_k_kernels(K, x / (2 * math.sqrt(t)), y / (2 * math.sqrt(s)))
    return s ** (-x.size / 2) * math.fsum(kernels * (t / s) ** (np.arange(K + 1) / 2))


def proof_substitution_adaptive(x, t: float, y, s: float, tol: float = 1e-13) -> ExpansionResult:
    """The substitution series summed adaptively, 0 < t < s.

    It is Mehler's series at xi = sqrt(t/s) with arguments x/2 sqrt t and
    y/2 sqrt s, so it inherits the ball-arithmetic fallback used there;
    the plain partial sum loses all accuracy once |x|^2/t is large.
    """
    x, t, y, s = _check_series_args(x, t, y, s)
    if not t > 0:
        raise ValueError("the substitution needs 0 < t < s")
    q = MehlerQuery(x / (2 * math.sqrt(t)), y / (2 * math.sqrt(s)), math.sqrt(t / s))
    res = mehler_adaptive(q, tol=tol)
    scale = s ** (-x.size / 2)
    return ExpansionResult(scale * res.value, res.degrees_used, scale * res.tail_estimate, res.converged, res.digits)


def proof_substitution_closed(x, t: float, y, s: float) -> float:
    """pi^(-n/2) (s-t)^(-n/2) exp(-((s+t)/(s-t)) (|x|^2/8t + |y|^2/8s) + <x,y>/2(s-t))."""
    x, t, y, s = _check_series_args(x, t, y, s)
    if not t > 0:
        raise ValueError("the substitution needs 0 < t < s")
    n = x.size
    expo = -(s + t) / (s - t) * (float(x @ x) / (8 * t) + float(y @ y) / (8 * s)) + float(
        x @ y
    ) / (2 * (s - t))
    return math.pi ** (-n / 2) * (s - t) ** (-n / 2) * math.exp(expo)


# --- representation identity --------------------------------------------------


@dataclass(frozen=True)
class QuadSpec:
    """Composite Gauss-Legendre rule: ``panels`` panels of ``order`` nodes
    per axis; ``cutoff`` bounds the Gaussian variable z (e^{-cutoff^2} is
    treated as zero)."""

    panels: int = 16
    order: int = 16
    cutoff: float = 7.0


def _composite_gl(lo: float, hi: float, panels: int, order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    pts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return pts, w


@dataclass(frozen=True)
class SpaceTimeTestFunction:
    """A smooth compactly supported f(y, s) in one space dimension.

    ``value``, ``laplacian`` and ``dt`` are vectorized callables of (y, s);
    ``support`` is ((y_lo, y_hi), (s_lo, s_hi)).  A sum remembers its
    summands in ``parts`` so the residual can integrate each one over its
    own box, which keeps the discretized identity linear.
    """

    value: Callable
    laplacian: Callable
    dt: Callable
    support: Optional[tuple] = None
    parts: tuple = ()

    def __add__(self, other: "SpaceTimeTestFunction") -> "SpaceTimeTestFunction":
        if self.support is None or other.support is None:
            raise ValueError("support box not provided")
        (a1, b1), (c1, d1) = self.support
        (a2, b2), (c2, d2) = other.support
        return SpaceTimeTestFunction(
            value=lambda y, s: self.value(y, s) + other.value(y, s),
            laplacian=lambda y, s: self.laplacian(y, s) + other.laplacian(y, s),
            dt=lambda y, s: self.dt(y, s) + other.dt(y, s),
            support=((min(a1, a2), max(b1, b2)), (min(c1, c2), max(d1, d2))),
            parts=(self.parts or (self,)) + (other.parts or (other,)),
        )


def _bump(r):
    """psi(r) = exp(-1/(1-r^2)) on |r| < 1 and its first two derivatives."""
    r = np.asarray(r, dtype=float)
    inside = np.abs(r) < 1
    q = np.where(inside, 1 - r * r, 1.0)
    psi = np.where(inside, np.exp(-1.0 / q), 0.0)
    d1 = psi * (-2 * r / q**2)
    d2 = psi * (4 * r * r - (2 + 6 * r * r) * q) / q**4
    return psi, np.where(inside, d1, 0.0), np.where(inside, d2, 0.0)


def spacetime_bump(
    centre: tuple[float, float] = (0.0, 0.0),
    widths: tuple[float, float] = (1.0, 1.0),
    poly: Sequence[float] = (1.0,),
) -> SpaceTimeTestFunction:
    """p(y) psi((y-c)/a) psi((s-d)/b) with psi the standard C^infinity bump.

    ``poly`` holds the coefficients of p in y, lowest power first, so the
    default is a plain product bump.
    """
    c, d = centre
    a, b = widths
    p = np.polynomial.Polynomial(poly)
    dp, ddp = p.deriv(1), p.deriv(2)

    def parts(y, s):
        py, py1, py2 = _bump((np.asarray(y) - c) / a)
        ps, ps1, _ = _bump((np.asarray(s) - d) / b)
        return py, py1 / a, py2 / a**2, ps, ps1 / b

    def value(y, s):
        py, _, _, ps, _ = parts(y, s)
        return p(y) * py * ps

    def laplacian(y, s):
        py, py1, py2, ps, _ = parts(y, s)
        return (ddp(y) * py + 2 * dp(y) * py1 + p(y) * py2) * ps

    def dt(y, s):
        py, _, _, _, ps1 = parts(y, s)
        return p(y) * py * ps1

    return SpaceTimeTestFunction(value, laplacian, dt, ((c - a, c + a), (d - b, d + b)))


def heat_representation_residual(
    f: SpaceTimeTestFunction, x, t: float, quad_spec: QuadSpec = QuadSpec()
) -> float:
    """|f(x,t) + int int G(x,t,y,s) (Delta f - d_s f)(y,s) dy ds| in one dimension.

    The s-integral runs over s < t only.  With u = sqrt(t - s) and
    y = x + 2 u z the kernel becomes pi^(-1/2) e^(-z^2) dz and ds = 2u du,
    which removes the singularity at s = t.  Both the u- and z-integrals
    use composite Gauss-Legendre rules.
    """
    if f.support is None:
        raise ValueError("support box not provided")
    x = float(np.atleast_1d(np.asarray(x, dtype=float))[0]) if np.ndim(x) else float(x)
    parts = f.parts or (f,)
    return abs(math.fsum(_heat_defect(p, x, float(t), quad_spec) for p in parts))


def _heat_defect(f: SpaceTimeTestFunction, x: float, t: float, quad_spec: QuadSpec) -> float:
    (a, b), (c, d) = f.support
    if t <= c:
        integral = 0.0
    else:
        u_lo = math.sqrt(max(t - d, 0.0))
        u_hi = math.sqrt(t - c)
        us, wu = _composite_gl(u_lo, u_hi, quad_spec.panels, quad_spec.order)
        # per u, integrate z only where y = x + 2uz meets the spatial support
        with np.errstate(divide="ignore"):
            z_lo = np.maximum((a - x) / (2 * us), -quad_spec.cutoff)
            z_hi = np.minimum((b - x) / (2 * us), quad_spec.cutoff)
        z_hi = np.maximum(z_hi, z_lo)
        ref, wref = _composite_gl(0.0, 1.0, quad_spec.panels, quad_spec.order)
        Z = z_lo[:, None] + (z_hi - z_lo)[:, None] * ref[None, :]
        WZ = (z_hi - z_lo)[:, None] * wref[None, :]
        U = us[:, None]
        Y = x + 2 * U * Z
        S = t - U * U
        source = f.laplacian(Y, S) - f.dt(Y, S)
        inner = np.sum(source * np.exp(-Z * Z) * WZ, axis=1) / math.sqrt(math.pi)
        integral = float(np.sum(2 * us * inner * wu))
    return float(f.value(x, t)) + integral

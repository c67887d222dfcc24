"""Hermite projection kernels, Mehler's formula and L^2 projections.

Phi_k(x, y) = sum_{|alpha|=k} phi_alpha(x) phi_alpha(y) is the kernel of the
orthogonal projection of L^2(R^n) onto the degree-k Hermite functions.  Its
generating function in a real variable xi, |xi| < 1, is Mehler's formula,
evaluated in closed form by :func:`mehler_closed`.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np
from flint import arb

from ._series import SeriesSum, adaptive_sum, convolve_truncated, hermite_arb
from .hermite import MultiIndex, graded_indices, hermite_function_table, multi_indices

__all__ = [
    "MehlerQuery",
    "gauss_hermite",
    "phi_k_kernel",
    "phi_k_kernels",
    "mehler_closed",
    "mehler_partial",
    "mehler_adaptive",
    "project_component",
    "gram_matrix",
    "hermite_operator_residual",
]


@dataclass(frozen=True)
class MehlerQuery:
    x: np.ndarray
    y: np.ndarray
    xi: float

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError(f"dimension mismatch: x{x.shape} vs y{y.shape}")
        xi = float(self.xi)
        if not abs(xi) < 1:
            raise ValueError(f"Mehler's formula needs |xi| < 1, got {xi}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "xi", xi)

    @property
    def dimension(self) -> int:
        return self.x.size


_GH_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_GH_LOCK = threading.Lock()


def gauss_hermite(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and *scaled* weights w_i exp(z_i^2) of Gauss-Hermite quadrature.

    Nodes are eigenvalues of the symmetric Jacobi matrix (Golub-Welsch).
    The scaled weights come from the Christoffel formula
    1 / sum_{k<order} h_k(z_i)^2, which avoids the underflow of the raw
    weights at high order.  Thus sum_i ws_i f(z_i) approximates the
    integral of f over R when f is a Hermite function times a polynomial.
    """
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    cached = _GH_CACHE.get(order)
    if cached is not None:
        return cached
    off = np.sqrt(np.arange(1, order) / 2.0)
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    nodes = np.linalg.eigvalsh(jacobi)
    # symmetrize to kill eigen-solver asymmetry
    nodes = 0.5 * (nodes - nodes[::-1])
    table = hermite_function_table(order - 1, nodes)
    weights = 1.0 / np.sum(table**2, axis=0)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    with _GH_LOCK:
        return _GH_CACHE.setdefault(order, (nodes, weights))


def _pair(x, y):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"dimension mismatch: x{x.shape} vs y{y.shape}")
    return x, y


def phi_k_kernel(k: int, x, y) -> float:
    """Phi_k(x, y) by direct enumeration of |alpha| = k, compensated sum."""
    x, y = _pair(x, y)
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    n = x.size
    hx = hermite_function_table(k, x)
    hy = hermite_function_table(k, y)
    cols = np.arange(n)
    terms = []
    for alpha in multi_indices(n, k):
        idx = list(alpha)
        terms.append(float(np.prod(hx[idx, cols]) * np.prod(hy[idx, cols])))
    return math.fsum(terms)


def phi_k_kernels(K: int, x, y) -> np.ndarray:
    """Phi_0(x,y), ..., Phi_K(x,y) at once.

    Phi_k is the degree-k coefficient of the product over coordinates of the
    one-dimensional sequences h_m(x_j) h_m(y_j), so all K+1 kernels follow
    from n-1 truncated convolutions, O(n K^2) work.
    """
    x, y = _pair(x, y)
    hx = hermite_function_table(K, x)
    hy = hermite_function_table(K, y)
    prod = hx * hy
    out = prod[:, 0]
    for j in range(1, x.size):
        out = np.convolve(out, prod[:, j])[: K + 1]
    return out


def mehler_closed(q: MehlerQuery) -> float:
    """Closed form of sum_k Phi_k(x, y) xi^k for real |xi| < 1.

    The cross term uses the inner product <x, y>.
    """
    n = q.dimension
    xi2 = q.xi * q.xi
    one_minus = 1.0 - xi2
    expo = (
        -0.5 * (1.0 + xi2) / one_minus * (float(q.x @ q.x) + float(q.y @ q.y))
        + 2.0 * q.xi * float(q.x @ q.y) / one_minus
    )
    return math.pi ** (-n / 2) * one_minus ** (-n / 2) * math.exp(expo)


def mehler_partial(q: MehlerQuery, K: int) -> float:
    """sum_{k=0}^{K} Phi_k(x, y) xi^k."""
    if K < 0:
        raise ValueError(f"truncation degree must be >= 0, got {K}")
    return math.fsum(_mehler_terms(q, K))


def _mehler_terms(q: MehlerQuery, K: int) -> np.ndarray:
    return phi_k_kernels(K, q.x, q.y) * q.xi ** np.arange(K + 1)


def _mehler_terms_arb(q: MehlerQuery, K: int) -> list:
    xi = arb(q.xi)
    seqs = []
    for xj, yj in zip(q.x, q.y):
        hx = hermite_arb(K, arb(float(xj)))
        hy = hermite_arb(K, arb(float(yj)))
        power = arb(1)
        seq = []
        for k in range(K + 1):
            seq.append(hx[k] * hy[k] * power)
            power = power * xi
        seqs.append(seq)
    return convolve_truncated(seqs, K)


def mehler_adaptive(q: MehlerQuery, tol: float = 1e-13, K_max: int = 4000, extended: bool = True) -> SeriesSum:
    """Partial sums of Mehler's series, stopped once three consecutive
    increments are below tol relative to the running sum.

    Ill-conditioned sums (widely separated x, y with |xi| near 1) are
    redone in ball arithmetic; see :mod:`heatseries._series`.
    """
    return adaptive_sum(
        lambda K: _mehler_terms(q, K),
        lambda K: _mehler_terms_arb(q, K),
        tol,
        abs(q.xi),
        K_max,
        extended,
    )


def _check_points(f_values, shape):
    f_values = np.asarray(f_values, dtype=float)
    if f_values.shape != shape:
        raise ValueError(f"f returned shape {f_values.shape}, expected {shape}")
    return f_values


def _tensor_grid(n: int, order: int):
    nodes, weights = gauss_hermite(order)
    grids = np.meshgrid(*([nodes] * n), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*([weights] * n), indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return points, w


def project_component(
    f: Callable[[np.ndarray], np.ndarray], k: int, quad_order: int, n: int = 1
) -> dict[MultiIndex, float]:
    """Coefficients <f, phi_alpha> for all |alpha| = k by tensor Gauss-Hermite.

    ``f`` maps an array of points with shape (m, n) to m values.  The
    degree-k projection is then P_k f(x) = sum_alpha c_alpha phi_alpha(x).
    The quadrature is exact when f is a Hermite expansion of degree
    <= 2 * quad_order - 1 - k, hence quad_order >= 2k + 2 is required.
    """
    if n not in (1, 2):
        raise ValueError(f"projections are supported for n <= 2, got n={n}")
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    if quad_order < 2 * k + 2:
        raise ValueError(
            f"quadrature order {quad_order} is too low for degree {k}; need >= {2 * k + 2}"
        )
    points, w = _tensor_grid(n, quad_order)
    values = _check_points(f(points), (points.shape[0],))
    table = hermite_function_table(k, points)  # (k+1, m, n)
    cols = np.arange(n)
    out = {}
    for alpha in multi_indices(n, k):
        phi = np.prod(table[list(alpha), :, cols], axis=0)
        out[alpha] = math.fsum(w * values * phi)
    return out


def gram_matrix(n: int, max_degree: int, quad_order: int = 64) -> tuple[list[MultiIndex], np.ndarray]:
    """Gram matrix of {phi_alpha : |alpha| <= max_degree} by tensor quadrature."""
    indices = graded_indices(n, max_degree)
    points, w = _tensor_grid(n, quad_order)
    table = hermite_function_table(max_degree, points)
    cols = np.arange(n)
    basis = np.array([np.prod(table[list(a), :, cols], axis=0) for a in indices])
    return indices, (basis * w) @ basis.T


def hermite_operator_residual(alpha, x, h: float = 1e-3) -> float:
    """|Delta_h phi_alpha(x) - |x|^2 phi_alpha(x) + (2|alpha| + n) phi_alpha(x)|.

    Delta_h is the central second-difference Laplacian with step h, so the
    residual is O(h^2) because phi_alpha is an eigenfunction of
    Delta - |x|^2 with eigenvalue -(2|alpha| + n).
    """
    if not 0 < h <= 1e-2:
        raise ValueError(f"step must lie in (0, 1e-2], got {h}")
    alpha = MultiIndex(alpha)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = alpha.dimension
    if x.shape != (n,):
        raise ValueError(f"dimension mismatch: {alpha} vs shape {x.shape}")
    kmax = max(alpha)
    cols = np.arange(n)
    idx = list(alpha)

    def phi(p):
        return float(np.prod(hermite_function_table(kmax, p)[idx, cols]))

    centre = phi(x)
    lap = 0.0
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        lap += (phi(x + e) - 2 * centre + phi(x - e)) / h**2
    return abs(lap - float(x @ x) * centre + (2 * alpha.degree + n) * centre)

"""Backward caloric polynomials Q_alpha and the Appell transformation.

For a multi-index alpha with |alpha| = k,

    Q_alpha(x, t) = t^(k/2) phi_alpha(x / 2 sqrt(t)) exp(|x|^2 / 8t)

is a polynomial in (x, t) solving Delta Q + d/dt Q = 0 and homogeneous of
degree k under (x, t) -> (lambda x, lambda^2 t).  It is stored as an exact
dyadic-rational polynomial times the scalar

    c_alpha = (2^|alpha| alpha! pi^(n/2))^(-1/2),

so that caloricity and homogeneity can be checked with zero tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .hermite import MAX_EXACT_DEGREE, MultiIndex, hermite_poly_coeffs

__all__ = [
    "CaloricPolynomial",
    "q_alpha",
    "poly_eval",
    "heat_operator_apply",
    "caloric_table",
    "q_alpha_value",
    "appell_transform",
    "appell_conjugation_residual",
]

# monomial key: (beta, m) meaning x^beta t^m
Monomial = tuple[tuple[int, ...], int]


@dataclass(frozen=True)
class CaloricPolynomial:
    """prefactor * sum_{(beta, m)} coeff * x^beta * t^m with exact coefficients.

    ``degree`` is the parabolic degree: every stored monomial satisfies
    |beta| + 2m == degree.  Instances are immutable.
    """

    dimension: int
    terms: Mapping[Monomial, Fraction]
    prefactor: float = 1.0
    degree: int = 0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        clean = {}
        for (beta, m), c in self.terms.items():
            beta = tuple(int(b) for b in beta)
            if len(beta) != self.dimension:
                raise ValueError(f"monomial {beta} does not match dimension {self.dimension}")
            if m < 0 or any(b < 0 for b in beta):
                raise ValueError(f"negative exponent in monomial {(beta, m)}")
            c = Fraction(c)
            if c != 0:
                clean[(beta, int(m))] = c
        for beta, m in clean:
            if sum(beta) + 2 * m != self.degree:
                raise ValueError(
                    f"monomial x^{beta} t^{m} is not parabolically homogeneous "
                    f"of degree {self.degree}"
                )
        object.__setattr__(self, "terms", dict(sorted(clean.items(), reverse=True)))

    @classmethod
    def from_terms(cls, dimension: int, terms: Mapping[Monomial, object], prefactor: float = 1.0):
        """Build a polynomial, inferring the parabolic degree from its terms."""
        degrees = {sum(beta) + 2 * m for (beta, m), c in terms.items() if c != 0}
        if len(degrees) > 1:
            raise ValueError(f"terms have mixed parabolic degrees {sorted(degrees)}")
        degree = degrees.pop() if degrees else 0
        return cls(dimension, terms, prefactor, degree)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def is_dyadic(self) -> bool:
        """True iff every coefficient has a power-of-two denominator."""
        return all(c.denominator & (c.denominator - 1) == 0 for c in self.terms.values())

    def homogeneity_holds(self) -> bool:
        return all(sum(beta) + 2 * m == self.degree for beta, m in self.terms)

    def __call__(self, x, t):
        return poly_eval(self, x, t)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        pieces = []
        for i, ((beta, m), c) in enumerate(self.terms.items()):
            factors = [
                f"x{j + 1}" if b == 1 else f"x{j + 1}^{b}"
                for j, b in enumerate(beta)
                if b
            ]
            if m:
                factors.append("t" if m == 1 else f"t^{m}")
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = "*".join(factors)
            if not body:
                body = str(mag)
            elif mag != 1:
                body = f"{mag}*{body}"
            if i == 0:
                pieces.append(body if sign == "+" else f"-{body}")
            else:
                pieces.append(f"{sign} {body}")
        poly = " ".join(pieces)
        name = f"{self.label} = " if self.label else ""
        return f"{name}{self.prefactor!r} * ({poly})"


def _coordinate_terms(a: int) -> dict[tuple[int, int], Fraction]:
    # t^(a/2) H_a(x / 2 sqrt(t)) = sum_j c_j 2^-j x^j t^((a-j)/2), j = a mod 2
    out = {}
    for j, c in enumerate(hermite_poly_coeffs(a)):
        if c == 0:
            continue
        if (a - j) % 2:
            raise AssertionError(f"H_{a} has a term of the wrong parity")
        out[(j, (a - j) // 2)] = Fraction(c, 2**j)
    return out


def q_alpha(alpha: Sequence[int]) -> CaloricPolynomial:
    """The caloric polynomial Q_alpha in exact form; e.g. Q_(2) = c (x^2 - 2t)."""
    alpha = MultiIndex(alpha)
    if alpha.degree > MAX_EXACT_DEGREE:
        raise ValueError(
            f"|alpha| = {alpha.degree} exceeds the exact-arithmetic limit {MAX_EXACT_DEGREE}"
        )
    n = alpha.dimension
    terms: dict[Monomial, Fraction] = {((0,) * n, 0): Fraction(1)}
    for j, a in enumerate(alpha):
        new: dict[Monomial, Fraction] = {}
        for (beta, m), c in terms.items():
            for (p, q), d in _coordinate_terms(a).items():
                key = (beta[:j] + (p,) + beta[j + 1:], m + q)
                new[key] = new.get(key, Fraction(0)) + c * d
        terms = new
    log_norm = alpha.degree * math.log(2.0) + sum(math.lgamma(a + 1) for a in alpha)
    prefactor = math.exp(-0.5 * log_norm) * math.pi ** (-n / 4)
    return CaloricPolynomial(n, terms, prefactor, alpha.degree, label=f"Q{tuple(alpha)}")


def poly_eval(p: CaloricPolynomial, x, t) -> float:
    """Evaluate prefactor * sum(coeff x^beta t^m) in floating point; any real t."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (p.dimension,):
        raise ValueError(f"expected a point of dimension {p.dimension}, got shape {x.shape}")
    t = float(t)
    total = math.fsum(
        float(c) * math.prod(xi**b for xi, b in zip(x, beta)) * t**m
        for (beta, m), c in p.terms.items()
    )
    return p.prefactor * total


def heat_operator_apply(p: CaloricPolynomial) -> CaloricPolynomial:
    """Delta p + d/dt p, computed exactly term by term."""
    out: dict[Monomial, Fraction] = {}
    for (beta, m), c in p.terms.items():
        for j, b in enumerate(beta):
            if b >= 2:
                key = (beta[:j] + (b - 2,) + beta[j + 1:], m)
                out[key] = out.get(key, Fraction(0)) + c * b * (b - 1)
        if m >= 1:
            key = (beta, m - 1)
            out[key] = out.get(key, Fraction(0)) + c * m
    return CaloricPolynomial(p.dimension, out, p.prefactor, max(p.degree - 2, 0))


def caloric_table(kmax: int, x, t: float) -> np.ndarray:
    """Normalized one-dimensional Q_k(x, t) for k = 0..kmax, vectorized over x.

    Uses q_{k+1} = x q_k / sqrt(2(k+1)) - t sqrt(k/(k+1)) q_{k-1}, which is
    the Hermite recurrence after the substitution z = x / 2 sqrt(t).  No
    square root of t appears, so any real t (including t <= 0) is fine and
    degrees beyond the exact-coefficient limit are available.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = math.pi ** -0.25
    if kmax >= 1:
        out[1] = x * out[0] / math.sqrt(2.0)
    for k in range(1, kmax):
        out[k + 1] = x * out[k] / math.sqrt(2.0 * (k + 1)) - t * math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def q_alpha_value(alpha: Sequence[int], x, t: float) -> float:
    """Q_alpha(x, t) through the recurrence, one factor per coordinate."""
    alpha = MultiIndex(alpha)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (alpha.dimension,):
        raise ValueError(f"dimension mismatch: {alpha} vs shape {x.shape}")
    table = caloric_table(max(alpha), x, t)
    return float(np.prod(table[list(alpha), np.arange(alpha.dimension)]))


def appell_transform(u: Callable | CaloricPolynomial) -> Callable:
    """Return v(x, t) = |t|^(-n/2) exp(-|x|^2 / 4t) u(x/t, 1/t).

    ``u`` is any callable ``u(x, t)`` with x a 1-D array; a
    CaloricPolynomial is evaluated through :func:`poly_eval`.  The dimension
    n is taken from the point at which v is evaluated.
    """
    if isinstance(u, CaloricPolynomial):
        poly = u
        u = lambda x, t: poly_eval(poly, x, t)  # noqa: E731

    def v(x, t):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = float(t)
        if t == 0.0:
            raise ValueError("the Appell transform is undefined at t = 0")
        n = x.size
        return abs(t) ** (-n / 2) * math.exp(-float(x @ x) / (4 * t)) * u(x / t, 1 / t)

    return v


def _fd_laplacian(f, x, t, h):
    total = 0.0
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        total += (f(x + e, t) - 2 * f(x, t) + f(x - e, t)) / h**2
    return total


def _fd_dt(f, x, t, h):
    return (f(x, t + h) - f(x, t - h)) / (2 * h)


def appell_conjugation_residual(u: Callable | CaloricPolynomial, x, t: float, h: float = 1e-3) -> float:
    """|(Delta - d_t) v(x,t) - |t|^(-2-n/2) e^(-|x|^2/4t) (Delta + d_t) u(x/t, 1/t)|.

    v is the Appell transform of u; both sides use central differences with
    step h, so the residual is O(h^2).
    """
    if not 0 < h <= 1e-2:
        raise ValueError(f"step must lie in (0, 1e-2], got {h}")
    t = float(t)
    if t == 0.0:
        raise ValueError("the Appell conjugation identity needs t != 0")
    if isinstance(u, CaloricPolynomial):
        poly = u
        u = lambda y, s: poly_eval(poly, y, s)  # noqa: E731
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    v = appell_transform(u)
    lhs = _fd_laplacian(v, x, t, h) - _fd_dt(v, x, t, h)
    xs, ts = x / t, 1 / t
    backward = _fd_laplacian(u, xs, ts, h) + _fd_dt(u, xs, ts, h)
    rhs = abs(t) ** (-2 - n / 2) * math.exp(-float(x @ x) / (4 * t)) * backward
    return abs(lhs - rhs)

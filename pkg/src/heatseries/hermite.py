"""Hermite functions and polynomials in one and several variables.

The one-dimensional Hermite functions are

    h_k(x) = (2^k k! sqrt(pi))^(-1/2) H_k(x) exp(-x^2/2),

with H_k the physicists' Hermite polynomial (leading coefficient 2^k).
They are evaluated here through the normalized three-term recurrence,
which is forward stable; the Rodrigues-type definition is never used
numerically.  Exact integer coefficients of H_k are available for
k <= MAX_EXACT_DEGREE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "MAX_EXACT_DEGREE",
    "CRAMER_BOUND",
    "MultiIndex",
    "HermiteSequence",
    "multi_indices",
    "graded_indices",
    "hermite_poly_coeffs",
    "hermite_function_sequence",
    "hermite_function_table",
    "phi_alpha",
]

MAX_EXACT_DEGREE = 64

# sup_x |h_k(x)| <= 1.086435 * pi^(-1/4) for every k (Cramer's inequality)
CRAMER_BOUND = 1.086435 * math.pi ** -0.25


class MultiIndex(tuple):
    """A multi-index alpha in N^n, stored as an immutable tuple of ints.

    Being a tuple, it hashes and compares like one, so it can key dicts
    and be compared against plain tuples.
    """

    def __new__(cls, entries: Iterable[int]):
        entries = tuple(int(a) for a in entries)
        if len(entries) < 1:
            raise ValueError("a multi-index needs at least one entry")
        if any(a < 0 for a in entries):
            raise ValueError(f"multi-index entries must be non-negative: {entries}")
        return super().__new__(cls, entries)

    @property
    def entries(self) -> tuple[int, ...]:
        return tuple(self)

    @property
    def degree(self) -> int:
        return sum(self)

    @property
    def dimension(self) -> int:
        return len(self)

    def __repr__(self) -> str:
        return f"MultiIndex({tuple(self)!r})"


@dataclass(frozen=True)
class HermiteSequence:
    """h_0(x), ..., h_kmax(x) at a single argument."""

    values: np.ndarray
    argument: float
    max_degree: int

    def __getitem__(self, k: int) -> float:
        return float(self.values[k])

    def __len__(self) -> int:
        return self.max_degree + 1


@lru_cache(maxsize=None)
def _multi_indices(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    if n == 1:
        return ((k,),)
    out = []
    for first in range(k, -1, -1):
        for rest in _multi_indices(n - 1, k - first):
            out.append((first,) + rest)
    return tuple(out)


def multi_indices(n: int, k: int) -> list[MultiIndex]:
    """All alpha in N^n with |alpha| = k, in graded-lexicographic order.

    Within a degree, indices are sorted lexicographically from the largest
    first entry down, e.g. for n=3, k=2:
    (2,0,0), (1,1,0), (1,0,1), (0,2,0), (0,1,1), (0,0,2).
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    return [MultiIndex(a) for a in _multi_indices(n, k)]


def graded_indices(n: int, K: int) -> list[MultiIndex]:
    """All multi-indices of degree 0..K, concatenated degree by degree."""
    out: list[MultiIndex] = []
    for k in range(K + 1):
        out.extend(multi_indices(n, k))
    return out


@lru_cache(maxsize=None)
def _hermite_coeffs(k: int) -> tuple[int, ...]:
    if k == 0:
        return (1,)
    if k == 1:
        return (0, 2)
    prev = _hermite_coeffs(k - 2)
    cur = _hermite_coeffs(k - 1)
    # H_k = 2z H_{k-1} - 2(k-1) H_{k-2}
    out = [0] * (k + 1)
    for i, c in enumerate(cur):
        out[i + 1] += 2 * c
    for i, c in enumerate(prev):
        out[i] -= 2 * (k - 1) * c
    return tuple(out)


def hermite_poly_coeffs(k: int) -> list[int]:
    """Exact integer coefficients of H_k, lowest power first.

    Raises ValueError for k outside 0..MAX_EXACT_DEGREE; beyond that range
    only the floating-point recurrence is supported.
    """
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    if k > MAX_EXACT_DEGREE:
        raise ValueError(
            f"exact Hermite coefficients are supported up to degree "
            f"{MAX_EXACT_DEGREE}, got {k}"
        )
    return list(_hermite_coeffs(k))


def hermite_function_table(kmax: int, x) -> np.ndarray:
    """Vectorized recurrence: array of shape (kmax+1,) + shape(x) holding h_k(x)."""
    if kmax < 0:
        raise ValueError(f"kmax must be >= 0, got {kmax}")
    x = np.asarray(x, dtype=float)
    if np.isnan(x).any():
        raise ValueError("Hermite functions are undefined at NaN")
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if kmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, kmax):
        out[k + 1] = (
            math.sqrt(2.0 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
        )
    return out


def hermite_function_sequence(kmax: int, x: float) -> HermiteSequence:
    """h_0(x), ..., h_kmax(x) by the normalized three-term recurrence.

    Seeded with h_0 = pi^(-1/4) exp(-x^2/2) and h_1 = sqrt(2) x h_0, then
    h_{k+1} = x sqrt(2/(k+1)) h_k - sqrt(k/(k+1)) h_{k-1}.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("Hermite functions are undefined at NaN")
    values = hermite_function_table(kmax, x)
    return HermiteSequence(values=values, argument=x, max_degree=int(kmax))


def phi_alpha(alpha: Sequence[int], x) -> float:
    """Tensor-product Hermite function prod_j h_{alpha_j}(x_j)."""
    alpha = MultiIndex(alpha)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (alpha.dimension,):
        raise ValueError(
            f"dimension mismatch: alpha has {alpha.dimension} entries, x has shape {x.shape}"
        )
    table = hermite_function_table(max(alpha), x)
    return float(np.prod(table[list(alpha), np.arange(alpha.dimension)]))

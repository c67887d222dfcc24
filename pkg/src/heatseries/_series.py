"""Adaptive summation of the degree-graded series, with an arb fallback.

Both the Mehler series and the heat-kernel Taylor series are sums over
total degree of products of one-dimensional sequences.  In double
precision they lose log10(sum|terms| / |sum|) digits to cancellation,
which is large when the arguments are far apart.  When that loss would
eat into the requested tolerance the series is recomputed in arb ball
arithmetic (python-flint) at a working precision sized from the
condition number.  The precision is raised until the ball radius of the
result is small enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import flint
import numpy as np
from flint import arb, arb_poly


@dataclass(frozen=True)
class SeriesSum:
    value: float
    degrees_used: int
    tail_estimate: float
    converged: bool
    digits: int


def hermite_arb(K: int, z: arb) -> list:
    """h_0(z), ..., h_K(z) by the normalized recurrence in ball arithmetic."""
    pi14 = arb.pi() ** arb(-0.25)
    out = [pi14 * (-(z * z) / 2).exp()]
    if K >= 1:
        out.append(arb(2).sqrt() * z * out[0])
    for k in range(1, K):
        out.append((arb(2) / (k + 1)).sqrt() * z * out[k] - (arb(k) / (k + 1)).sqrt() * out[k - 1])
    return out


def caloric_arb(K: int, x: arb, t: arb) -> list:
    """Normalized one-dimensional caloric polynomials q_0..q_K at (x, t)."""
    pi14 = arb.pi() ** arb(-0.25)
    out = [pi14]
    if K >= 1:
        out.append(x * pi14 / arb(2).sqrt())
    for k in range(1, K):
        out.append(x * out[k] / (arb(2) * (k + 1)).sqrt() - t * (arb(k) / (k + 1)).sqrt() * out[k - 1])
    return out


def convolve_truncated(seqs: Sequence[list], K: int) -> list:
    """Degree-k coefficients, k <= K, of the product of the sequences' generating polynomials."""
    poly = arb_poly(list(seqs[0]))
    for seq in seqs[1:]:
        poly = arb_poly((poly * arb_poly(list(seq))).coeffs()[: K + 1])
    coeffs = poly.coeffs()[: K + 1]
    return coeffs + [arb(0)] * (K + 1 - len(coeffs))


def _scan(terms: np.ndarray, partials: np.ndarray, tol: float, ratio: float, run: int = 3):
    """First k at which ``run`` consecutive increments are <= tol |partial_k|
    and the geometric tail estimate is too; None if there is none."""
    streak = 0
    for k in range(len(terms)):
        scale = tol * abs(partials[k])
        streak = streak + 1 if abs(terms[k]) <= scale else 0
        if streak >= run:
            tail = float(np.max(np.abs(terms[k - run + 1 : k + 1]))) * ratio / (1 - ratio)
            if tail <= scale:
                return k, tail
    return None


def _bits_needed(cond: float, tol: float) -> int:
    return int(math.ceil(math.log2(max(cond, 1.0)) - math.log2(tol))) + 64


def adaptive_sum(
    float_terms: Callable[[int], np.ndarray],
    arb_terms: Callable[[int], list],
    tol: float,
    ratio: float,
    K_max: int,
    extended: bool = True,
    run: int = 3,
) -> SeriesSum:
    """Sum a series until ``run`` consecutive degree increments are each
    <= tol * |partial| and the geometric tail estimate (per-degree ratio
    ``ratio``) is below the same bound.

    ``float_terms(K)`` and ``arb_terms(K)`` return the degree 0..K terms in
    double precision and in arb at the active precision respectively.
    """
    terms = np.asarray(float_terms(K_max), dtype=float)
    found = _scan(terms, np.cumsum(terms), tol, ratio, run)
    k_end = found[0] if found else K_max
    value = math.fsum(terms[: k_end + 1])
    cond = math.fsum(np.abs(terms[: k_end + 1])) / abs(value) if value else math.inf
    digits = 16
    last = terms
    if extended and cond * 2.0**-52 > 1e-2 * tol:
        bits = _bits_needed(min(cond, 1e300), tol)
        K_try = min(K_max, max(64, k_end))
        for _ in range(8):
            old = flint.ctx.prec
            flint.ctx.prec = bits
            try:
                aterms = arb_terms(K_try)
                partials = []
                acc = arb(0)
                for v in aterms:
                    acc = acc + v
                    partials.append(acc)
                mids = np.array([float(v.mid()) for v in aterms])
                pmids = np.array([float(v.mid()) for v in partials])
                found = _scan(mids, pmids, tol, ratio, run)
                k_end = found[0] if found else K_try
                result = partials[k_end]
                accurate = result.rel_accuracy_bits() >= -math.log2(tol) + 10
            finally:
                flint.ctx.prec = old
            if not accurate:
                bits *= 2
                continue
            if found is None and K_try < K_max:
                K_try = min(K_max, 2 * K_try)
                continue
            break
        value = float(result.mid())
        digits = int(bits * math.log10(2))
        last = mids
    if found is None:
        tail = float(np.max(np.abs(last[-run:]))) * ratio / (1 - ratio)
        return SeriesSum(value, len(last) - 1, tail, False, digits)
    return SeriesSum(value, found[0], float(found[1]), True, digits)

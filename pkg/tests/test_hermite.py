import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import hermite as nph

from heatseries.hermite import (
    CRAMER_BOUND,
    MAX_EXACT_DEGREE,
    MultiIndex,
    graded_indices,
    hermite_function_sequence,
    hermite_function_table,
    hermite_poly_coeffs,
    multi_indices,
    phi_alpha,
)

# mpmath, 40 digits
H4_AT_1_3 = -0.3856554524665831542
PHI_23_AT = -0.1124811878283086575


def from_coeffs(k, x):
    """Oracle from the integer coefficients; H_k(x) is evaluated exactly
    (Horner in rationals) because float Horner cancels badly for |x| ~ 5."""
    c = hermite_poly_coeffs(k)
    out = []
    for xv in np.atleast_1d(x):
        xf = Fraction(float(xv))
        acc = Fraction(0)
        for ci in reversed(c):
            acc = acc * xf + ci
        out.append(float(acc))
    Hk = np.array(out).reshape(np.shape(x))
    return (2.0**k * math.factorial(k) * math.sqrt(math.pi)) ** -0.5 * Hk * np.exp(-np.asarray(x) ** 2 / 2)


class TestMultiIndices:
    def test_one_dimension(self):
        assert multi_indices(1, 5) == [(5,)]

    def test_graded_lex_order(self):
        assert multi_indices(3, 2) == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]

    def test_degree_zero(self):
        assert multi_indices(2, 0) == [(0, 0)]

    @pytest.mark.parametrize("n", range(1, 7))
    def test_cardinality(self, n):
        for k in range(21):
            assert len(multi_indices(n, k)) == math.comb(k + n - 1, n - 1)

    def test_graded_concatenation(self):
        idx = graded_indices(2, 4)
        assert len(idx) == math.comb(6, 2)
        assert [a.degree for a in idx] == sorted(a.degree for a in idx)

    def test_multiindex_fields(self):
        a = MultiIndex((2, 0, 3))
        assert a.degree == 5 and a.dimension == 3 and a.entries == (2, 0, 3)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            multi_indices(0, 1)
        with pytest.raises(ValueError):
            multi_indices(2, -1)
        with pytest.raises(ValueError):
            MultiIndex((1, -1))


class TestHermitePoly:
    def test_base_cases(self):
        assert hermite_poly_coeffs(0) == [1]
        assert hermite_poly_coeffs(1) == [0, 2]

    def test_degree_two_and_three(self):
        assert hermite_poly_coeffs(2) == [-2, 0, 4]
        assert hermite_poly_coeffs(3) == [0, -12, 0, 8]

    def test_matches_numpy_physicists_basis(self):
        for k in range(0, 25):
            basis = nph.herm2poly([0] * k + [1])
            assert np.allclose([float(c) for c in hermite_poly_coeffs(k)], basis, rtol=1e-15, atol=0)

    def test_exact_integers_at_limit(self):
        c = hermite_poly_coeffs(MAX_EXACT_DEGREE)
        assert all(isinstance(v, int) for v in c)
        assert c[-1] == 2**MAX_EXACT_DEGREE

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            hermite_poly_coeffs(MAX_EXACT_DEGREE + 1)
        with pytest.raises(ValueError):
            hermite_poly_coeffs(-1)


class TestHermiteFunctions:
    def test_values_at_zero(self):
        seq = hermite_function_sequence(3, 0.0)
        assert seq[0] == pytest.approx(0.7511255444649425, rel=1e-15)
        assert seq[1] == 0.0
        assert len(seq) == 4

    def test_h4_against_frozen_value(self):
        assert hermite_function_sequence(4, 1.3)[4] == pytest.approx(H4_AT_1_3, rel=1e-12)
        assert from_coeffs(4, 1.3) == pytest.approx(H4_AT_1_3, rel=1e-12)

    def test_recurrence_matches_coefficients(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-5, 5, 200)
        table = hermite_function_table(30, x)
        for k in range(31):
            ref = from_coeffs(k, x)
            assert np.all(np.abs(table[k] - ref) <= np.maximum(1e-11 * np.abs(ref), 1e-13))

    def test_parity(self):
        x = np.linspace(0.01, 6, 50)
        a, b = hermite_function_table(40, x), hermite_function_table(40, -x)
        sign = (-1.0) ** np.arange(41)[:, None]
        assert np.all(np.abs(b - sign * a) <= 1e-14 * np.abs(a))

    def test_cramer_bound(self):
        x = np.linspace(-30, 30, 2001)
        assert np.max(np.abs(hermite_function_table(200, x))) <= CRAMER_BOUND

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            hermite_function_sequence(3, float("nan"))

    def test_high_degree_stays_finite(self):
        assert np.all(np.isfinite(hermite_function_table(2000, np.array([0.0, 10.0, 60.0]))))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-8, 8), st.integers(0, 40))
    def test_table_and_sequence_agree(self, x, k):
        assert hermite_function_sequence(k, x)[k] == hermite_function_table(k, np.array([x]))[k, 0]


class TestPhiAlpha:
    def test_origin(self):
        assert phi_alpha((0, 0), (0.0, 0.0)) == pytest.approx(0.5641895835477563, rel=1e-15)

    def test_odd_factor_vanishes(self):
        assert phi_alpha((1, 0), (0.0, 0.37)) == 0.0

    def test_product(self):
        assert phi_alpha((2, 3), (0.5, -0.7)) == pytest.approx(PHI_23_AT, rel=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            phi_alpha((1, 2), (0.1,))

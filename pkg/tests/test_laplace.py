import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_gegenbauer

from heatseries.laplace import (
    PolarQuadSpec,
    TestFunction,
    ZonalQuery,
    gamma_laplace,
    gegenbauer,
    kelvin_conjugation_residual,
    laplace_representation_residual,
    laplace_series_partial,
    laplace_series_terms,
    radial_bump,
    sphere_area,
    zonal,
    zonal_kernel,
)


def fd_laplacian(f, x, h=1e-3):
    total = 0.0
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        total += (f(x + e) - 2 * f(x) + f(x - e)) / h**2
    return total


class TestGamma:
    def test_three_dimensions(self):
        assert gamma_laplace([0.0, 0.0, 0.0], [0.0, 0.0, 2.0]) == pytest.approx(-0.039788735772973836, rel=1e-15)

    def test_two_dimensions_unit_distance(self):
        assert gamma_laplace([0.25, 0.5], [0.25, 1.5]) == 0.0
        assert gamma_laplace([0.0, 0.0], [0.6, 0.8]) == pytest.approx(0.0, abs=1e-16)

    def test_four_dimensions(self):
        v = gamma_laplace([0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0])
        assert v == pytest.approx(-1 / (4 * math.pi**2), rel=1e-15)

    def test_one_dimension(self):
        assert gamma_laplace([0.0], [2.0]) == 1.0

    def test_sphere_areas(self):
        assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
        assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
        assert sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-15)

    def test_singular(self):
        with pytest.raises(ValueError):
            gamma_laplace([1.0, 2.0], [1.0, 2.0])


class TestZonal:
    @pytest.mark.parametrize("u", [-1.0, -0.3, 0.0, 0.8, 1.0])
    def test_constant_harmonic(self, u):
        assert zonal(0, 3, u) == pytest.approx(1 / (4 * math.pi), rel=1e-15)

    @pytest.mark.parametrize("u", [-0.9, 0.2, 0.7])
    def test_degree_one(self, u):
        assert zonal(1, 3, u) == pytest.approx(3 * u / (4 * math.pi), rel=1e-14)

    def test_circle_degree_two(self):
        for theta in np.linspace(0, math.pi, 7):
            assert zonal(2, 2, math.cos(theta)) == pytest.approx(math.cos(2 * theta) / math.pi, abs=1e-15)

    def test_gegenbauer_against_scipy(self):
        u = np.linspace(-1, 1, 41)
        for lam in (0.5, 1.0, 1.5, 2.5):
            for k in range(0, 25):
                assert np.allclose(gegenbauer(k, lam, u), eval_gegenbauer(k, lam, u), rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 3, 7])
    def test_circle_reproducing_property(self, k):
        m = 256
        phis = 2 * math.pi * np.arange(m) / m
        for theta in (0.0, 0.4, 2.1):
            z = np.array([zonal(k, 2, math.cos(theta - p)) for p in phis])
            proj = np.sum(z * np.cos(k * phis)) * 2 * math.pi / m
            assert proj == pytest.approx(math.cos(k * theta), abs=1e-10)

    def test_sphere_reproducing_property(self):
        # int_{S^2} Z^(k)(x'.w) Y(w) dw = Y(x') for Y = P_2(w_3)
        ct, wt = np.polynomial.legendre.leggauss(40)
        x3 = 0.35
        for_phi = 64
        phis = 2 * math.pi * np.arange(for_phi) / for_phi
        st_ = np.sqrt(1 - ct * ct)
        xs = np.array([math.sqrt(1 - x3 * x3), 0.0, x3])
        total = 0.0
        for c, w, s_ in zip(ct, wt, st_):
            dirs = np.stack([s_ * np.cos(phis), s_ * np.sin(phis), np.full(for_phi, c)], axis=-1)
            u = np.clip(dirs @ xs, -1, 1)
            z = np.array([zonal(2, 3, v) for v in u])
            total += w * np.sum(z) * 2 * math.pi / for_phi * (1.5 * c * c - 0.5)
        assert total == pytest.approx(1.5 * x3 * x3 - 0.5, abs=1e-10)

    def test_bad_queries(self):
        with pytest.raises(ValueError):
            ZonalQuery(2, 3, 1.5)
        with pytest.raises(ValueError):
            ZonalQuery(-1, 3, 0.0)
        with pytest.raises(ValueError):
            zonal_kernel(ZonalQuery(1, 1, 0.0))


class TestSeries:
    def test_centre(self):
        y = np.array([0.3, -1.0, 0.5])
        assert laplace_series_partial(np.zeros(3), y, 5) == gamma_laplace(np.zeros(3), y)

    def test_three_dimensions(self):
        x, y = [0.1, 0.0, 0.0], [1.0, 0.0, 0.0]
        assert laplace_series_partial(x, y, 40) == pytest.approx(gamma_laplace(x, y), rel=1e-12)

    def test_two_dimensions(self):
        x, y = [0.3, 0.0], [0.0, 1.0]
        v = laplace_series_partial(x, y, 60)
        assert abs(v - math.log(math.hypot(0.3, 1.0)) / (2 * math.pi)) <= 1e-10

    def test_outside_ball(self):
        with pytest.raises(ValueError):
            laplace_series_partial([1.0, 0.0], [0.0, 1.0], 5)

    @pytest.mark.parametrize("ratio", [0.2, 0.35, 0.5])
    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_decay_rate(self, ratio, sign):
        y = np.array([0.0, 0.0, 2.0])
        x = sign * ratio * y
        terms = np.abs(laplace_series_terms(x, y, 30))
        k = np.arange(10, 31)
        slope = np.polyfit(k, np.log(terms[10:31]), 1)[0]
        assert math.exp(slope) == pytest.approx(ratio, abs=0.05)

    @pytest.mark.parametrize("n", [2, 3])
    def test_terms_are_harmonic(self, n):
        rng = np.random.default_rng(14)
        y = 2.0 * np.eye(n)[0]
        for k in range(1, 7):
            term = lambda x: laplace_series_terms(x, y, k)[k]  # noqa: E731
            for _ in range(3):
                x = rng.uniform(-0.6, 0.6, n)
                assert abs(fd_laplacian(term, x)) <= 1e-5

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 3), st.floats(0.0, 0.5), st.integers(0, 10**6))
    def test_series_property(self, n, ratio, seed):
        rng = np.random.default_rng(seed)
        y = rng.normal(size=n)
        y *= 3.0 / np.linalg.norm(y)
        x = rng.normal(size=n)
        x *= 3.0 * ratio / np.linalg.norm(x)
        assert laplace_series_partial(x, y, 48) == pytest.approx(gamma_laplace(x, y), rel=1e-10)


class TestKelvin:
    X = np.array([1.2, -0.9, 1.1])

    def test_constant(self):
        assert kelvin_conjugation_residual(lambda x: 1.0, self.X) <= 1e-5

    def test_linear(self):
        assert kelvin_conjugation_residual(lambda x: x[0], self.X) <= 1e-5

    def test_square(self):
        assert kelvin_conjugation_residual(lambda x: float(x @ x), self.X) <= 1e-5
        # Laplacian of |x|^2 is 2n, so the right side is 2n |x|^(-n-2)
        r2 = float(self.X @ self.X)
        from heatseries.laplace import kelvin_transform

        lhs = fd_laplacian(kelvin_transform(lambda x: float(x @ x)), self.X)
        assert lhs == pytest.approx(6 * r2 ** (-2.5), rel=1e-5)

    def test_two_dimensions(self):
        assert kelvin_conjugation_residual(lambda x: x[0] * x[1], np.array([1.3, 0.8])) <= 1e-5

    def test_origin(self):
        with pytest.raises(ValueError):
            kelvin_conjugation_residual(lambda x: 1.0, np.zeros(3))


class TestRepresentation:
    def test_zero(self):
        zero = TestFunction(lambda y: 0 * y[..., 0], lambda y: 0 * y[..., 0], ((-1, 1), (-1, 1)))
        assert laplace_representation_residual(zero, [0.1, 0.2]) == 0.0

    def test_missing_support(self):
        phi = radial_bump(2)
        with pytest.raises(ValueError):
            laplace_representation_residual(TestFunction(phi.value, phi.laplacian), [0.0, 0.0])

    def test_bump_at_centre(self):
        assert laplace_representation_residual(radial_bump(3), np.zeros(3)) <= 1e-3

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_bump_off_centre(self, n):
        phi = radial_bump(n, centre=np.full(n, 0.1), radius=1.2, height=2.0)
        x = np.linspace(-0.3, 0.4, n)
        assert laplace_representation_residual(phi, x) <= 1e-3

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_translation_covariance(self, n):
        phi = radial_bump(n, radius=0.9)
        a = np.linspace(0.7, -1.3, n)
        x = np.linspace(0.2, -0.1, n)
        r0 = laplace_representation_residual(phi, x)
        r1 = laplace_representation_residual(phi.translate(a), x + a)
        assert abs(r0 - r1) <= 1e-10

    def test_unsupported_dimension(self):
        with pytest.raises(ValueError):
            laplace_representation_residual(radial_bump(4), np.zeros(4))

    def test_refinement_lowers_residual(self):
        phi = radial_bump(2)
        coarse = laplace_representation_residual(phi, [0.2, 0.1], PolarQuadSpec(8, 6, 6, 16))
        fine = laplace_representation_residual(phi, [0.2, 0.1])
        assert fine < coarse

import math

import numpy as np
import pytest

from gaussbv import gauss
from gaussbv.gauss import (
    CameronMartinShift,
    DegenerateMeasureError,
    GaussianMeasure,
    build_quadrature,
    cameron_martin_density,
    gaussian_cdf,
    gaussian_cdf_inverse,
    gaussian_density,
    isoperimetric_profile,
    sample_gaussian,
    standard_measure,
)


def erf_series(z: float) -> float:
    """Taylor-series erf, the high-precision oracle for cdf checks."""
    total = 0.0
    term = z
    n = 0
    while abs(term) > 1e-18:
        total += term / (2 * n + 1)
        n += 1
        term *= -z * z / n
    return 2.0 / math.sqrt(math.pi) * total


class TestDensity:
    def test_standard_1d_at_zero(self):
        m = standard_measure(1)
        assert gaussian_density(m, np.array([0.0])) == pytest.approx(
            1.0 / math.sqrt(2 * math.pi), abs=1e-15
        )

    def test_standard_2d_at_zero(self):
        m = standard_measure(2)
        assert gaussian_density(m, np.zeros(2)) == pytest.approx(
            1.0 / (2 * math.pi), abs=1e-15
        )

    def test_shifted_variance_four(self):
        # 1-D formula with q = 4 evaluated directly as the oracle
        m = GaussianMeasure([1.0], [[4.0]])
        oracle = 1.0 / math.sqrt(2 * math.pi * 4.0)
        assert gaussian_density(m, np.array([1.0])) == pytest.approx(oracle, rel=1e-14)

    def test_singular_covariance_rejected(self):
        m = GaussianMeasure(np.zeros(2), [[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(DegenerateMeasureError):
            m.density(np.zeros(2))

    def test_density_integrates_to_one_over_rule_support(self):
        rule = build_quadrature(1, "uniform-truncated", 513, box_radius=7.0)
        for m in (standard_measure(1), GaussianMeasure([0.5], [[0.8]])):
            total = np.sum(rule.lebesgue_tensor * m.density(rule.nodes))
            assert total == pytest.approx(1.0, abs=1e-6)


class TestCdf:
    def test_symmetry_point(self):
        assert gaussian_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
        assert abs(gaussian_cdf_inverse(0.5)) < 1e-12

    def test_phi_of_one_against_series_oracle(self):
        oracle = 0.5 * (1.0 + erf_series(1.0 / math.sqrt(2.0)))
        assert gaussian_cdf(1.0) == pytest.approx(oracle, abs=1e-14)
        assert oracle == pytest.approx(0.841345, abs=5e-7)

    def test_inverse_round_trip(self):
        ps = np.concatenate(
            [
                np.array([1e-10, 1e-8, 1e-4, 0.3, 0.5, 0.7, 1 - 1e-4, 1 - 1e-8, 1 - 1e-10]),
                np.linspace(0.01, 0.99, 101),
            ]
        )
        back = gaussian_cdf(gaussian_cdf_inverse(ps))
        assert np.max(np.abs(back - ps)) < 1e-10

    def test_inverse_monotone(self):
        ps = np.linspace(1e-6, 1 - 1e-6, 400)
        xs = gaussian_cdf_inverse(ps)
        assert np.all(np.diff(xs) > 0)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.1])
    def test_inverse_domain_error(self, p):
        with pytest.raises(ValueError):
            gaussian_cdf_inverse(p)


class TestIsoperimetricProfile:
    def test_center_value(self):
        # the perimeter of the halfspace of volume 1/2
        assert isoperimetric_profile(0.5) == pytest.approx(
            1.0 / math.sqrt(2 * math.pi), abs=1e-14
        )

    def test_endpoints(self):
        assert isoperimetric_profile(0.0) == 0.0
        assert isoperimetric_profile(1.0) == 0.0

    def test_density_oracle_point(self):
        # U(Phi(1)) = G(1)
        t = 0.5 * (1.0 + erf_series(1.0 / math.sqrt(2.0)))
        oracle = math.exp(-0.5) / math.sqrt(2 * math.pi)
        assert isoperimetric_profile(t) == pytest.approx(oracle, abs=1e-10)
        assert oracle == pytest.approx(0.2419707, abs=5e-8)

    def test_symmetry_on_grid(self):
        ts = np.linspace(0.0, 1.0, 1001)
        vals = isoperimetric_profile(ts)
        assert np.max(np.abs(vals - vals[::-1])) < 1e-12

    def test_maximum_at_half(self):
        ts = np.linspace(0.01, 0.99, 99)
        assert np.argmax(isoperimetric_profile(ts)) == 49

    def test_domain_error(self):
        with pytest.raises(ValueError):
            isoperimetric_profile(1.2)


class TestQuadrature:
    def test_gh_second_moment(self):
        rule = build_quadrature(1, "gauss-hermite", 64)
        assert rule.integrate(lambda p: p[:, 0] ** 2) == pytest.approx(1.0, abs=1e-10)

    def test_gh_fourth_moment_oracle(self):
        # E[x^{2k}] = (2k-1)!! by recursion
        oracle = 1.0
        for k in (1, 2):
            oracle *= 2 * k - 1
        rule = build_quadrature(1, "gauss-hermite", 64)
        assert rule.integrate(lambda p: p[:, 0] ** 4) == pytest.approx(oracle, abs=1e-8)

    def test_uniform_normalisation_2d(self):
        rule = build_quadrature(2, "uniform-truncated", 257, box_radius=6.0)
        assert rule.integrate(lambda p: np.ones(len(p))) == pytest.approx(1.0, abs=1e-6)

    def test_axis_moments(self):
        for kind, tol in (("gauss-hermite", 1e-8), ("uniform-truncated", 1e-6)):
            rule = build_quadrature(2, kind, 64 if kind == "gauss-hermite" else 257)
            assert rule.integrate(lambda p: p[:, 1]) == pytest.approx(0.0, abs=tol)
            assert rule.integrate(lambda p: p[:, 0] ** 2) == pytest.approx(1.0, abs=tol)

    def test_weights_sum_to_covered_mass(self):
        gh = build_quadrature(1, "gauss-hermite", 32)
        assert gh.weights.sum() == pytest.approx(1.0, abs=1e-12)
        uni = build_quadrature(1, "uniform-truncated", 513)
        assert uni.weights.sum() == pytest.approx(1.0, abs=1e-6)

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            build_quadrature(4, "gauss-hermite", 16)

    def test_level_floor(self):
        with pytest.raises(ValueError):
            build_quadrature(1, "gauss-hermite", 4)


class TestSampling:
    def test_deterministic_given_seed(self):
        m = standard_measure(2)
        a = sample_gaussian(m, 1, seed=42)
        b = sample_gaussian(m, 1, seed=42)
        assert np.array_equal(a, b)
        c = sample_gaussian(m, 1, seed=43)
        assert not np.array_equal(a, c)

    def test_clt_mean_bound_1d(self):
        n = 10**6
        x = sample_gaussian(standard_measure(1), n, seed=7)
        assert abs(x.mean()) < 4.0 / math.sqrt(n)

    def test_clt_covariance_bound_2d(self):
        n = 10**6
        x = sample_gaussian(standard_measure(2), n, seed=11)
        rho = np.corrcoef(x.T)[0, 1]
        assert abs(rho) < 0.004

    def test_nonstandard_measure(self):
        m = GaussianMeasure([2.0, -1.0], [[2.0, 0.5], [0.5, 1.0]])
        x = sample_gaussian(m, 200_000, seed=5)
        assert np.allclose(x.mean(axis=0), m.mean, atol=0.02)
        assert np.allclose(np.cov(x.T), m.cov, atol=0.03)


class TestCameronMartin:
    def test_zero_shift(self):
        s = CameronMartinShift(np.zeros(2))
        pts = np.array([[0.0, 0.0], [1.5, -2.0]])
        assert np.allclose(cameron_martin_density(s, pts), 1.0)

    def test_is_probability_density_mc(self):
        s = CameronMartinShift(np.array([1.0]))
        x = sample_gaussian(standard_measure(1), 10**6, seed=3)
        mean = cameron_martin_density(s, x).mean()
        assert mean == pytest.approx(1.0, abs=0.01)

    def test_shifted_mean_identity(self):
        # int x exp(x - 1/2) dgamma = 1, by Gauss-Hermite quadrature
        rule = build_quadrature(1, "gauss-hermite", 80)
        s = CameronMartinShift(np.array([1.0]))
        val = rule.integrate(lambda p: p[:, 0] * cameron_martin_density(s, p))
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_change_of_variables(self):
        # int f(x + h) dgamma = int f cm_density dgamma for bounded smooth f
        rule = build_quadrature(1, "gauss-hermite", 96)
        h = 0.7
        s = CameronMartinShift(np.array([h]))
        lhs = rule.integrate(lambda p: np.cos(p[:, 0] + h))
        rhs = rule.integrate(lambda p: np.cos(p[:, 0]) * cameron_martin_density(s, p))
        assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_norm_and_functional(self):
        m = GaussianMeasure(np.zeros(2), [[4.0, 0.0], [0.0, 1.0]])
        s = CameronMartinShift(np.array([2.0, 0.0]), m)
        assert s.h_norm_sq == pytest.approx(1.0)
        assert s.h_hat(np.array([2.0, 5.0])) == pytest.approx(1.0)

    def test_centred_measure_required(self):
        m = GaussianMeasure([1.0], [[1.0]])
        with pytest.raises(ValueError):
            CameronMartinShift(np.array([1.0]), m)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special, stats

from roughheston.special_functions import (
    MLParams,
    MittagLefflerConvergenceError,
    cdf_spline,
    mittag_leffler,
    ml_cdf,
    ml_cdf_integral,
    ml_cdf_inverse,
    ml_cdf_second_integral,
    ml_density,
    ml_sample,
)

# Frozen from an mpmath power series run at 40 + |z|^(1/alpha)/ln(10) digits.
MPMATH_ORACLE = [
    (0.6, 1.0, -0.5, 0.6094758219562),
    (0.6, 1.0, -3.0, 0.1597034802650912),
    (0.6, 1.0, -20.0, 0.022946564273258377),
    (0.6, 0.6, -2.0, 0.06479454369171557),
    (0.6, 0.6, -15.0, 0.0012559189916879758),
    (0.75, 1.0, -8.0, 0.039335854041138194),
    (0.6, 1.6, -5.0, 0.1809764307122491),
    (0.6, 2.0, -12.0, 0.08809572224734785),
    (0.9, 1.0, -30.0, 0.003713707698459852),
    (0.6, 1.0, 2.0, 39.69280495850546),
    (0.5, 1.0, -1.0, 0.427583576155807),
]


@pytest.mark.parametrize("alpha,beta,z,expected", MPMATH_ORACLE)
def test_matches_high_precision_series(alpha, beta, z, expected):
    assert mittag_leffler(alpha, beta, z).real == pytest.approx(expected, rel=1e-12)


def test_complex_argument_small_modulus():
    val = mittag_leffler(0.6, 1.0, 1j)
    assert val == pytest.approx(0.36351260195051893 + 0.6624101682751308j, rel=1e-12)


@pytest.mark.parametrize("x", [0.3, 2.0, 7.5, 30.0, 120.0, 800.0])
def test_half_order_closed_form(x):
    # E_{1/2}(-x) = exp(x^2) erfc(x)
    assert mittag_leffler(0.5, 1.0, -x).real == pytest.approx(special.erfcx(x), rel=1e-12)


@pytest.mark.parametrize("z", [-40.0, -3.0, -1e-3, 0.0, 0.7, 5.0, 2 + 3j])
def test_exponential_and_expm1_cases(z):
    assert mittag_leffler(1.0, 1.0, z) == pytest.approx(np.exp(z), rel=1e-15)
    if z != 0:
        assert mittag_leffler(1.0, 2.0, z) == pytest.approx(np.expm1(z) / z, rel=1e-14)


def test_zero_argument_is_reciprocal_gamma():
    assert mittag_leffler(0.6, 1.7, 0.0) == pytest.approx(1.0 / math.gamma(1.7))


def test_beta_recurrence_large_argument():
    a, x = 0.6, 60.0
    lhs = mittag_leffler(a, 1.0 + a, -x).real
    rhs = (mittag_leffler(a, 1.0, -x).real - 1.0) / (-x)
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        mittag_leffler(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        mittag_leffler(0.6, 1.0, complex("nan"))
    with pytest.raises(ValueError):
        MLParams(alpha=1.5)
    with pytest.raises(ValueError):
        ml_density(0.6, 1.0, 0.0)
    with pytest.raises(ValueError):
        ml_cdf(0.6, 1.0, -1.0)


def test_off_axis_large_argument_raises_with_partial():
    with pytest.raises(MittagLefflerConvergenceError) as info:
        mittag_leffler(0.6, 1.0, 60.0 * np.exp(0.4j * np.pi))
    assert info.value.partial is not None


@given(x=st.floats(0.0, 200.0), alpha=st.floats(0.52, 0.98))
def test_completely_monotone_range(x, alpha):
    # E_alpha(-x) lies in (0, 1] for 0 < alpha <= 1
    v = mittag_leffler(alpha, 1.0, -x).real
    assert 0.0 < v <= 1.0 + 1e-15


@given(x=st.floats(0.01, 100.0), alpha=st.floats(0.52, 0.98))
def test_monotone_in_argument(x, alpha):
    assert mittag_leffler(alpha, 1.0, -1.01 * x).real <= mittag_leffler(alpha, 1.0, -x).real + 1e-15


class TestDistribution:
    alpha, lam = 0.6, 2.0

    def test_cdf_limits(self):
        assert ml_cdf(self.alpha, self.lam, 0.0) == 0.0
        assert ml_cdf(self.alpha, self.lam, 1e8) > 0.999

    @pytest.mark.parametrize("t", [0.01, 0.3, 1.0, 4.0, 25.0])
    def test_density_is_cdf_derivative(self, t):
        h = 1e-5 * t
        fd = (ml_cdf(self.alpha, self.lam, t + h) - ml_cdf(self.alpha, self.lam, t - h)) / (2 * h)
        assert ml_density(self.alpha, self.lam, t) == pytest.approx(fd, rel=1e-7)

    @pytest.mark.parametrize("t", [0.05, 1.0, 6.0])
    def test_cdf_integrals_match_quadrature(self, t):
        F = lambda s: ml_cdf(self.alpha, self.lam, s)  # noqa: E731
        one = integrate.quad(F, 0.0, t, epsabs=1e-13, epsrel=1e-12)[0]
        assert ml_cdf_integral(self.alpha, self.lam, t) == pytest.approx(one, rel=1e-9)
        two = integrate.quad(lambda s: ml_cdf_integral(self.alpha, self.lam, s), 0.0, t, epsabs=1e-13)[0]
        assert ml_cdf_second_integral(self.alpha, self.lam, t) == pytest.approx(two, rel=1e-9)

    def test_exponential_case(self):
        t = np.array([0.1, 1.0, 3.0])
        assert np.allclose(ml_cdf(1.0, 1.5, t), 1 - np.exp(-1.5 * t), rtol=1e-14)
        assert np.allclose(ml_density(1.0, 1.5, t), 1.5 * np.exp(-1.5 * t), rtol=1e-14)

    @given(u=st.floats(1e-6, 0.999))
    def test_inverse_roundtrip(self, u):
        t = ml_cdf_inverse(self.alpha, self.lam, u)
        assert abs(ml_cdf(self.alpha, self.lam, t) - u) <= 1e-10

    def test_spline_accuracy(self):
        spl = cdf_spline(self.alpha, self.lam, 10.0)
        t = np.linspace(0.0, 10.0, 57)
        assert np.max(np.abs(spl(t**self.alpha) - ml_cdf(self.alpha, self.lam, t))) < 1e-9

    def test_sampler_matches_cdf(self):
        rng = np.random.default_rng(7)
        draws = ml_sample(self.alpha, self.lam, 20_000, rng)
        res = stats.kstest(draws, lambda t: ml_cdf(self.alpha, self.lam, np.maximum(t, 0.0)))
        assert res.pvalue > 1e-3

    def test_sampler_matches_inverse_transform(self):
        rng = np.random.default_rng(8)
        direct = ml_sample(self.alpha, self.lam, 2_000, rng)
        inverse = np.array([ml_cdf_inverse(self.alpha, self.lam, u) for u in rng.random(2_000)])
        assert stats.ks_2samp(direct, inverse).pvalue > 1e-3

    def test_sampler_exponential_case(self):
        rng = np.random.default_rng(9)
        draws = ml_sample(1.0, 3.0, 20_000, rng)
        assert stats.kstest(draws, "expon", args=(0, 1 / 3.0)).pvalue > 1e-3

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from roughheston.heston_classical import (
    HestonClassicalParams,
    heston_cf,
    heston_log_cf,
    heston_riccati_closed_form,
)
from roughheston.riccati import riccati_rhs


@pytest.fixture
def params(paper_params):
    return paper_params.replace(alpha=1.0)


def test_closed_form_solves_the_riccati_ode(params):
    a, t, dt = 1.3 - 0.2j, 0.7, 1e-5
    h = lambda s: heston_riccati_closed_form(params, a, s)  # noqa: E731
    deriv = (h(t + dt) - h(t - dt)) / (2 * dt)
    assert deriv == pytest.approx(riccati_rhs(params, a, h(t)), rel=1e-8)
    assert heston_riccati_closed_form(params, a, 0.0) == 0.0


def test_log_cf_is_the_integrated_formula(params):
    a, t = 2.0, 1.0
    integral = integrate.quad(lambda s: heston_riccati_closed_form(params, a, s).real, 0, t, epsabs=1e-14)[0]
    integral += 1j * integrate.quad(lambda s: heston_riccati_closed_form(params, a, s).imag, 0, t, epsabs=1e-14)[0]
    expected = params.theta * params.lam * integral + params.v0 * heston_riccati_closed_form(params, a, t)
    assert heston_log_cf(params, a, t) == pytest.approx(expected, rel=1e-10)


def test_broadcasting_and_scalars(params):
    a = np.array([[0.5], [1.0]])
    t = np.array([0.1, 0.5, 1.0])
    assert heston_cf(params, a, t).shape == (2, 3)
    assert isinstance(heston_cf(params, 0.5, 1.0), complex)


def test_degenerate_discriminant():
    # d = 0 exactly: beta^2 + eta^2 (u^2 + iu) = 0 at u = -i/2 when beta = 1/2 eta
    p = HestonClassicalParams(lam=1.0, theta=0.04, rho=0.0, nu=1.0, v0=0.1)
    h = heston_riccati_closed_form(p, -0.5j, 1.0)
    hn = heston_riccati_closed_form(p, -0.5j + 1e-7, 1.0)
    assert np.isfinite(h) and abs(h - hn) < 1e-5


def test_rough_params_with_fractional_alpha_rejected(paper_params):
    with pytest.raises(ValueError):
        heston_cf(paper_params, 1.0, 1.0)


@given(a=st.floats(-20.0, 20.0), t=st.floats(0.01, 5.0))
def test_cf_hermitian_and_bounded(a, t):
    p = HestonClassicalParams(lam=2.0, theta=0.04, rho=-0.5, nu=0.05, v0=0.4)
    v = heston_cf(p, a, t)
    assert abs(v) <= 1.0 + 1e-12
    assert heston_cf(p, -a, t) == pytest.approx(np.conj(v), abs=1e-14)

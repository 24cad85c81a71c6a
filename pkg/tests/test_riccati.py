import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from roughheston import _kernels, riccati
from roughheston.frac_grid import TimeGrid
from roughheston.heston_classical import heston_riccati_closed_form
from roughheston.riccati import (
    ParameterRangeWarning,
    RiccatiDivergenceError,
    RoughHestonParams,
    riccati_coefficients,
    riccati_rhs,
    solve_riccati,
    solve_riccati_batch,
)
from roughheston.validation import Tolerances, check_alpha_one_gate


def test_rhs_formula(paper_params):
    p, a, x = paper_params, 0.7 - 0.2j, 0.3 + 0.1j
    expected = 0.5 * (-a * a - 1j * a) + p.lam * (1j * a * p.rho * p.nu - 1.0) * x + 0.5 * (p.lam * p.nu) ** 2 * x * x
    assert riccati_rhs(p, a, x) == pytest.approx(expected, rel=1e-15)


def test_zero_argument_gives_zero_solution(paper_params):
    sol = solve_riccati(paper_params, 0.0, TimeGrid(1.0, 100))
    assert np.all(sol.h == 0.0)


def test_alpha_one_matches_ode_solver(paper_params):
    p = paper_params.replace(alpha=1.0)
    a = 1.5
    grid = TimeGrid(1.0, 2000)
    h = solve_riccati(p, a, grid).h

    def rhs(t, y):
        z = y[0] + 1j * y[1]
        f = riccati_rhs(p, a, z)
        return [f.real, f.imag]

    ode = integrate.solve_ivp(rhs, (0.0, 1.0), [0.0, 0.0], rtol=1e-12, atol=1e-14, t_eval=grid.nodes[::200])
    assert np.allclose(h[::200], ode.y[0] + 1j * ode.y[1], atol=1e-6)


def test_alpha_one_matches_closed_form(paper_params):
    p = paper_params.replace(alpha=1.0)
    grid = TimeGrid(1.0, 1000)
    for a in (-3.0, 0.5, 4.0):
        h = solve_riccati(p, a, grid).h
        exact = heston_riccati_closed_form(p, a, grid.nodes)
        assert np.max(np.abs(h - exact)) < 1e-5


def test_batch_equals_single_solves(paper_params):
    grid = TimeGrid(1.0, 300)
    a = np.array([-2.0, 0.5, 3.0 - 0.5j])
    batch = solve_riccati_batch(paper_params, a, grid)
    for i, ai in enumerate(a):
        assert np.allclose(batch[i], solve_riccati(paper_params, ai, grid).h, rtol=1e-13, atol=1e-15)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
def test_numba_and_numpy_backends_agree(paper_params):
    grid = TimeGrid(1.0, 500)
    a = np.linspace(-6.0, 6.0, 9).astype(complex)
    c0, c1, c2 = riccati_coefficients(paper_params, a)
    diag, c, a0, b = riccati._weights(paper_params.alpha, grid.delta, grid.n_steps)
    h_np, bad_np = _kernels.adams_numpy(c0, c1, c2, b, c, a0, diag, grid.n_steps)
    h_nb, bad_nb = _kernels.adams_numba(c0, c1, c2, b, c, a0, diag, grid.n_steps)
    assert np.allclose(h_np, h_nb, rtol=1e-12, atol=1e-14)
    assert np.array_equal(bad_np, bad_nb)


def test_backend_reports_environment_choice():
    assert _kernels.backend() in ("numba", "numpy")


def test_divergence_is_reported():
    # strongly explosive moments for imaginary a far from the strip
    p = RoughHestonParams(lam=0.5, theta=0.04, rho=0.7, nu=3.0, v0=0.4, alpha=0.6)
    with pytest.raises(RiccatiDivergenceError) as info:
        solve_riccati(p, -30j, TimeGrid(50.0, 2000))
    assert info.value.last_finite_index >= 0


def test_parameter_validation():
    with pytest.raises(ValueError):
        RoughHestonParams(lam=-1.0, theta=0.04, rho=-0.5, nu=0.05, v0=0.4, alpha=0.6)
    with pytest.raises(ValueError):
        RoughHestonParams(lam=1.0, theta=0.04, rho=-0.5, nu=0.05, v0=0.4, alpha=0.4)
    with pytest.warns(ParameterRangeWarning):
        p = RoughHestonParams(lam=1.0, theta=0.04, rho=-0.9, nu=0.05, v0=0.4, alpha=0.6)
    assert p.outside_theorem_range


@given(a=st.floats(-8.0, 8.0))
def test_real_part_nonpositive_for_real_arguments(a):
    # h solves a Riccati equation whose solution has Re h <= 0 for real a
    p = RoughHestonParams(lam=2.0, theta=0.04, rho=-0.5, nu=0.05, v0=0.4, alpha=0.6)
    h = solve_riccati(p, a, TimeGrid(1.0, 200)).h
    assert np.all(h.real <= 1e-12)


def test_gate_detects_corrupted_weights(monkeypatch):
    """Negative control: the alpha=1 gate must fail when the weights are wrong."""
    honest = check_alpha_one_gate(Tolerances())
    assert honest.passed
    original = riccati._weights.__wrapped__

    def corrupted(alpha, delta, n):
        # weights built for the wrong fractional order
        return original(alpha - 0.1, delta, n)

    monkeypatch.setattr(riccati, "_weights", corrupted)
    assert not check_alpha_one_gate(Tolerances()).passed

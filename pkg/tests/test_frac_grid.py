import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from roughheston.frac_grid import (
    TimeGrid,
    corrector_profile,
    corrector_weights,
    frac_integral_on_grid,
    predictor_weights,
)

# Hat-function and indicator integrals against (t - s)^(alpha-1) / Gamma(alpha),
# evaluated by mpmath quadrature at 30 digits; alpha = 0.6, delta = 0.1.
CORRECTOR_K3 = [0.05021473251474917, 0.10927426714130423, 0.12943651221016023, 0.18122540465517545, 0.17570252385088111]
CORRECTOR_K0 = [0.10542151431052867, 0.17570252385088111]
PREDICTOR_K3 = [0.10238949739992115, 0.1173595810867989, 0.14498032372414035, 0.28112403816140974]


def test_corrector_weights_match_quadrature():
    assert np.allclose(corrector_weights(0.6, 0.1, 3), CORRECTOR_K3, rtol=1e-13, atol=0)
    assert np.allclose(corrector_weights(0.6, 0.1, 0), CORRECTOR_K0, rtol=1e-13, atol=0)


def test_predictor_weights_match_quadrature():
    assert np.allclose(predictor_weights(0.6, 0.1, 3), PREDICTOR_K3, rtol=1e-13, atol=0)


def test_first_weight_closed_form():
    # a_{0,1} = delta^alpha * alpha / Gamma(alpha + 2)
    assert corrector_weights(0.6, 0.1, 0)[0] == pytest.approx(0.1**0.6 * 0.6 / math.gamma(2.6), rel=1e-14)


@given(alpha=st.floats(0.51, 1.0), k=st.integers(0, 400), delta=st.floats(1e-4, 0.5))
def test_weights_integrate_constants_and_lines(alpha, k, delta):
    t = (k + 1) * delta
    a = corrector_weights(alpha, delta, k)
    b = predictor_weights(alpha, delta, k)
    nodes = np.arange(k + 2) * delta
    const = t**alpha / math.gamma(alpha + 1.0)
    assert np.all(a > 0.0) and np.all(b > 0.0)
    assert a.sum() == pytest.approx(const, rel=1e-11)
    assert b.sum() == pytest.approx(const, rel=1e-11)
    lin = t ** (alpha + 1.0) / math.gamma(alpha + 2.0)
    assert a @ nodes == pytest.approx(lin, rel=1e-10)


def test_profiles_reproduce_full_weights():
    diag, c = corrector_profile(0.7, 0.01, 50)
    for k in (5, 30, 49):
        w = corrector_weights(0.7, 0.01, k)
        assert w[-1] == diag
        assert np.allclose(w[1 : k + 1], c[k:0:-1], rtol=1e-15)


@pytest.mark.parametrize("r", [0.4, 0.6, 1.0])
@pytest.mark.parametrize("p", [0.0, 1.0])
def test_grid_integral_exact_on_polynomials_of_degree_one(r, p):
    grid = TimeGrid(2.0, 200)
    f = grid.nodes**p
    exact = math.gamma(p + 1) / math.gamma(p + 1 + r) * grid.nodes ** (p + r)
    assert np.allclose(frac_integral_on_grid(r, f, grid), exact, rtol=1e-11, atol=1e-14)


def test_grid_integral_second_order_on_smooth_input():
    errs = []
    for n in (100, 200, 400):
        grid = TimeGrid(1.0, n)
        approx = frac_integral_on_grid(0.4, grid.nodes**2, grid)[-1]
        errs.append(abs(approx - 2.0 / math.gamma(3.4)))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_grid_integral_fft_matches_direct():
    grid = TimeGrid(1.0, 1500)
    rng = np.random.default_rng(1)
    f = rng.standard_normal((6, len(grid))) + 1j * rng.standard_normal((6, len(grid)))
    batched = frac_integral_on_grid(0.4, f, grid)
    single = np.array([frac_integral_on_grid(0.4, row, grid) for row in f[:2]])
    assert np.allclose(batched[:2], single, atol=1e-12)


def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(0.0, 10)
    with pytest.raises(ValueError):
        TimeGrid(1.0, 0)
    with pytest.raises(ValueError):
        TimeGrid.from_delta(1.0, 0.3)
    assert TimeGrid.from_delta(1.0, 0.25).n_steps == 4
    with pytest.raises(ValueError):
        frac_integral_on_grid(0.5, np.ones(5), TimeGrid(1.0, 10))
    with pytest.raises(ValueError):
        corrector_weights(1.5, 0.1, 2)

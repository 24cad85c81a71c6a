"""Fractional Riccati equation of the rough Heston model.

``h(a, .)`` solves the Volterra equation

    h(a, t) = 1/Gamma(alpha) int_0^t (t - s)^(alpha - 1) F(a, h(a, s)) ds,
    F(a, x) = (-a^2 - i a)/2 + lam (i a rho nu - 1) x + (lam nu)^2 / 2 x^2,

which is discretized by the explicit fractional Adams predictor-corrector
(one predictor, one corrector evaluation per step, no iteration).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .frac_grid import TimeGrid, corrector_profile, first_corrector_weights, predictor_profile

__all__ = [
    "RoughHestonParams",
    "RiccatiSolution",
    "RiccatiDivergenceError",
    "riccati_rhs",
    "riccati_coefficients",
    "solve_riccati",
    "solve_riccati_batch",
]

RHO_LOWER = -1.0 / math.sqrt(2.0)
RHO_UPPER = 1.0 / math.sqrt(2.0)


class ParameterRangeWarning(UserWarning):
    pass


class RiccatiDivergenceError(ArithmeticError):
    """The Adams iterates left the floating-point range (moment explosion)."""

    def __init__(self, a, last_finite_index: int):
        super().__init__(f"Riccati solution for a={a} diverged after node {last_finite_index}")
        self.a = a
        self.last_finite_index = last_finite_index


@dataclass(frozen=True)
class RoughHestonParams:
    lam: float
    theta: float
    rho: float
    nu: float
    v0: float
    alpha: float = 1.0
    outside_theorem_range: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError(f"lam={self.lam} must be positive")
        if not self.theta > 0.0:
            raise ValueError(f"theta={self.theta} must be positive")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho={self.rho} must lie in (-1, 1)")
        if not self.nu > 0.0:
            raise ValueError(f"nu={self.nu} must be positive")
        if not self.v0 >= 0.0:
            raise ValueError(f"v0={self.v0} must be non-negative")
        if not 0.5 < self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} must lie in (1/2, 1]")
        outside = not (RHO_LOWER < self.rho <= RHO_UPPER)
        object.__setattr__(self, "outside_theorem_range", outside)
        if outside:
            warnings.warn(
                f"rho={self.rho} lies outside (-1/sqrt(2), 1/sqrt(2)]; the characteristic "
                "function formula is computed but not covered by the convergence result",
                ParameterRangeWarning,
                stacklevel=3,
            )

    def replace(self, **changes) -> "RoughHestonParams":
        values = {k: getattr(self, k) for k in ("lam", "theta", "rho", "nu", "v0", "alpha")}
        values.update(changes)
        return RoughHestonParams(**values)


@dataclass(frozen=True)
class RiccatiSolution:
    a: complex
    grid: TimeGrid
    h: np.ndarray
    predictor_used: bool = True

    def __post_init__(self):
        if self.h.shape != (len(self.grid),):
            raise ValueError("solution length does not match the grid")


def riccati_coefficients(params: RoughHestonParams, a):
    """Coefficients ``(c0, c1, c2)`` of ``F(a, x) = c0 + c1 x + c2 x^2``."""
    a = np.asarray(a, dtype=complex)
    c0 = 0.5 * (-a * a - 1j * a)
    c1 = params.lam * (1j * a * params.rho * params.nu - 1.0)
    c2 = np.full_like(a, 0.5 * (params.lam * params.nu) ** 2)
    return c0, c1, c2


def riccati_rhs(params: RoughHestonParams, a, x):
    c0, c1, c2 = riccati_coefficients(params, a)
    out = c0 + c1 * x + c2 * x * x
    return complex(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=64)
def _weights(alpha: float, delta: float, n: int):
    diag, c = corrector_profile(alpha, delta, n)
    a0 = first_corrector_weights(alpha, delta, n)
    b = predictor_profile(alpha, delta, n)
    for arr in (c, a0, b):
        arr.flags.writeable = False
    return diag, c, a0, b


def solve_riccati_batch(params: RoughHestonParams, a, grid: TimeGrid) -> np.ndarray:
    """``h(a_i, t_k)`` for a vector of Fourier arguments; shape ``(len(a), len(grid))``."""
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    c0, c1, c2 = riccati_coefficients(params, a)
    diag, c, a0, b = _weights(params.alpha, grid.delta, grid.n_steps)
    h, first_bad = _kernels.adams(c0, c1, c2, b, c, a0, diag, grid.n_steps)
    bad = np.flatnonzero(first_bad >= 0)
    if bad.size:
        i = bad[0]
        raise RiccatiDivergenceError(a[i], int(first_bad[i]) - 1)
    return h


def solve_riccati(params: RoughHestonParams, a: complex, grid: TimeGrid) -> RiccatiSolution:
    h = solve_riccati_batch(params, [a], grid)[0]
    return RiccatiSolution(complex(a), grid, h)

"""Characteristic function of the log-price ``X_t = log(S_t / S_0)``.

    L(a, t) = exp(theta lam I^1 h(a, t) + v0 I^(1 - alpha) h(a, t))

with ``h`` the solution of the fractional Riccati equation. One Riccati solve
gives the whole curve ``t -> L(a, t)`` on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frac_grid import TimeGrid, frac_integral_on_grid
from .riccati import RoughHestonParams, solve_riccati_batch

__all__ = ["CharFnValue", "log_cf", "log_cf_batch", "cf", "cf_value", "DEFAULT_STEPS"]

DEFAULT_STEPS = 1000


@dataclass(frozen=True)
class CharFnValue:
    a: complex
    t: float
    log_cf: complex

    @property
    def cf(self) -> complex:
        return complex(np.exp(self.log_cf))


def _assemble(params: RoughHestonParams, h: np.ndarray, grid: TimeGrid) -> np.ndarray:
    drift = frac_integral_on_grid(1.0, h, grid)
    if params.alpha == 1.0:
        vol = h  # I^0 is the identity
    else:
        vol = frac_integral_on_grid(1.0 - params.alpha, h, grid)
    return params.theta * params.lam * drift + params.v0 * vol


def log_cf_batch(params: RoughHestonParams, a, grid: TimeGrid) -> np.ndarray:
    """Log-CF at every node for each ``a``; shape ``(len(a), len(grid))``."""
    h = solve_riccati_batch(params, a, grid)
    return _assemble(params, h, grid)


def log_cf(params: RoughHestonParams, a: complex, grid: TimeGrid) -> np.ndarray:
    """Log-CF ``t_k -> log L(a, t_k)`` along the whole grid."""
    return log_cf_batch(params, [a], grid)[0]


def cf_value(params: RoughHestonParams, a: complex, t: float, n_steps: int = DEFAULT_STEPS) -> CharFnValue:
    if not t > 0.0:
        raise ValueError(f"t={t} must be positive")
    if n_steps < 10:
        raise ValueError(f"n_steps={n_steps} must be at least 10")
    curve = log_cf(params, a, TimeGrid(t, n_steps))
    return CharFnValue(complex(a), float(t), complex(curve[-1]))


def cf(params: RoughHestonParams, a, t: float, n_steps: int = DEFAULT_STEPS):
    """``L(a, t)``; vectorized over ``a`` (one batched Riccati solve)."""
    if not t > 0.0:
        raise ValueError(f"t={t} must be positive")
    if n_steps < 10:
        raise ValueError(f"n_steps={n_steps} must be at least 10")
    a_arr = np.asarray(a, dtype=complex)
    out = np.exp(log_cf_batch(params, a_arr.ravel(), TimeGrid(t, n_steps))[:, -1])
    if a_arr.ndim == 0:
        return complex(out[0])
    return out.reshape(a_arr.shape)

"""Closed-form classical Heston characteristic function (the alpha = 1 case).

Parametrization matches the rough model: mean reversion ``lam``, long-run
variance ``theta`` and vol-of-vol ``lam * nu``, so that ``h`` solves

    dh/dt = (-a^2 - i a)/2 + lam (i a rho nu - 1) h + (lam nu)^2 / 2 h^2,  h(0) = 0.

The solution is written in the form that uses ``exp(-d t)`` with
``Re d >= 0`` (no branch rotation of the complex logarithm), with the
``1/eta^2`` factors cancelled analytically so that ``nu -> 0`` is well behaved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .riccati import RoughHestonParams

__all__ = ["HestonClassicalParams", "heston_riccati_closed_form", "heston_log_cf", "heston_cf"]

_DEGENERATE_D = 1e-10


@dataclass(frozen=True)
class HestonClassicalParams:
    lam: float
    theta: float
    rho: float
    nu: float
    v0: float

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

    @classmethod
    def from_rough(cls, params: RoughHestonParams) -> "HestonClassicalParams":
        return cls(params.lam, params.theta, params.rho, params.nu, params.v0)


def _log1p_ratio(y):
    """log1p(y)/y with the removable singularity at 0 filled in."""
    y = np.asarray(y, dtype=complex)
    out = np.ones_like(y)
    nz = np.abs(y) > 1e-8
    out[nz] = np.log1p(y[nz]) / y[nz]
    small = ~nz
    out[small] = 1.0 - y[small] / 2.0 + y[small] ** 2 / 3.0
    return out


def _one_minus_exp_ratio(d, t):
    """(1 - exp(-d t)) / d, finite as d -> 0."""
    x = d * t
    out = np.empty_like(x)
    nz = np.abs(x) > 1e-8
    out[nz] = -np.expm1(-x[nz]) / d[nz]
    small = ~nz
    out[small] = t * (1.0 - x[small] / 2.0)
    return out


def _pieces(p: HestonClassicalParams, a, t):
    a = np.asarray(a, dtype=complex)
    t = np.asarray(t, dtype=float)
    a, t = np.broadcast_arrays(a, t)
    a = a.astype(complex)
    t = t.astype(float)
    if np.any(t < 0.0):
        raise ValueError("t must be non-negative")
    eta2 = (p.lam * p.nu) ** 2
    w = a * a + 1j * a  # u^2 + i u
    beta = p.lam - 1j * p.rho * p.lam * p.nu * a
    d = np.sqrt(beta * beta + eta2 * w)
    bd = beta + d
    q = w / (bd * bd)
    g = -eta2 * q
    e = np.exp(-d * t)
    one_m_e = -np.expm1(-d * t)

    h = -(w / bd) * one_m_e / (1.0 - g * e)
    # int_0^t h = -w t/(b+d) - (2/eta^2) log(1 + y),  y = g (1-e)/(1-g)
    y_over_eta2 = -q * one_m_e / (1.0 - g)
    y = eta2 * y_over_eta2
    int_h = -w * t / bd - 2.0 * y_over_eta2 * _log1p_ratio(y)

    degenerate = np.abs(d) < _DEGENERATE_D * np.maximum(1.0, np.abs(beta))
    if np.any(degenerate):
        b = beta[degenerate]
        tt = t[degenerate]
        r = b / eta2
        h[degenerate] = r * (b * tt / 2.0) / (1.0 + b * tt / 2.0)
        int_h[degenerate] = r * (tt - (2.0 / b) * np.log1p(b * tt / 2.0))
    return h, int_h


def _as_classical(params) -> HestonClassicalParams:
    if isinstance(params, HestonClassicalParams):
        return params
    if isinstance(params, RoughHestonParams):
        if params.alpha != 1.0:
            raise ValueError("the closed form only covers alpha = 1")
        return HestonClassicalParams.from_rough(params)
    raise TypeError(f"unsupported parameter object {type(params).__name__}")


def _scalarize(x):
    return complex(x) if np.ndim(x) == 0 else x


def heston_riccati_closed_form(params, a, t):
    """``h(a, t)`` of the classical Riccati equation; broadcasts over ``a`` and ``t``."""
    h, _ = _pieces(_as_classical(params), a, t)
    return _scalarize(h)


def heston_log_cf(params, a, t):
    """``theta lam int_0^t h + v0 h(a, t)``."""
    p = _as_classical(params)
    h, int_h = _pieces(p, a, t)
    return _scalarize(p.theta * p.lam * int_h + p.v0 * h)


def heston_cf(params, a, t):
    return _scalarize(np.exp(heston_log_cf(params, a, t)))

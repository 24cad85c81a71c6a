"""Uniform grids, fractional Adams weights and grid fractional integrals.

The corrector weights are the product-trapezoid weights of the
Riemann-Liouville integral ``I^alpha``; the predictor weights are the
product-rectangle weights. Both depend on ``k - j`` only (apart from the first
corrector weight), so they are generated once per ``(alpha, delta, n)`` as
"difference profiles".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

__all__ = [
    "TimeGrid",
    "corrector_weights",
    "predictor_weights",
    "corrector_profile",
    "predictor_profile",
    "first_corrector_weights",
    "frac_integral_on_grid",
]

# below this index the closed-form differences are exact enough
_SERIES_FROM = 3
_SERIES_TERMS = 64
# batched convolutions longer than this go through the FFT
_DIRECT_MAX = 512


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    n_steps: int
    delta: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.t_end > 0.0:
            raise ValueError(f"t_end={self.t_end} must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps={self.n_steps} must be a positive integer")
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "delta", self.t_end / self.n_steps)
        nodes = np.arange(self.n_steps + 1) * self.delta
        nodes[-1] = self.t_end
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def from_delta(cls, t_end: float, delta: float) -> "TimeGrid":
        n = int(round(t_end / delta))
        if not math.isclose(n * delta, t_end, rel_tol=1e-9):
            raise ValueError(f"delta={delta} does not divide t_end={t_end}")
        return cls(t_end, n)

    def __len__(self):
        return self.n_steps + 1


def _check(alpha, delta):
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"order {alpha} must lie in (0, 1]")
    if not delta > 0.0:
        raise ValueError(f"delta={delta} must be positive")


def _binom_even_tail(p: float, x: np.ndarray) -> np.ndarray:
    """(1+x)^p + (1-x)^p - 2 = 2 sum_{n>=1} C(p, 2n) x^{2n} for |x| < 1."""
    out = np.zeros_like(x)
    x2 = x * x
    power = np.ones_like(x)
    coef = 1.0
    for n in range(1, _SERIES_TERMS + 1):
        m = 2 * n
        coef *= (p - m + 2) * (p - m + 1) / ((m - 1) * m)
        power = power * x2
        out += coef * power
    return 2.0 * out


def _second_differences(p: float, m: np.ndarray) -> np.ndarray:
    """(m+1)^p + (m-1)^p - 2 m^p for integer m >= 1, cancellation-free."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    small = m < _SERIES_FROM
    ms = m[small]
    out[small] = (ms + 1.0) ** p + (ms - 1.0) ** p - 2.0 * ms**p
    ml = m[~small]
    out[~small] = ml**p * _binom_even_tail(p, 1.0 / ml)
    return out


def _first_differences(p: float, m: np.ndarray) -> np.ndarray:
    """m^p - (m-1)^p for integer m >= 1."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    one = m == 1.0
    out[one] = 1.0
    mm = m[~one]
    out[~one] = -(mm**p) * np.expm1(p * np.log1p(-1.0 / mm))
    return out


def _first_weight_core(alpha: float, k: np.ndarray) -> np.ndarray:
    """k^(a+1) - (k-a)(k+1)^a for integer k >= 0."""
    k = np.asarray(k, dtype=float)
    out = np.empty_like(k)
    small = k < _SERIES_FROM
    ks = k[small]
    out[small] = ks ** (alpha + 1.0) - (ks - alpha) * (ks + 1.0) ** alpha
    kl = k[~small]
    # log(1 - a/k) + a log(1 + 1/k) = sum_n k^-n / n * (a (-1)^(n+1) - a^n); n = 1 vanishes
    inv = 1.0 / kl
    s = np.zeros_like(kl)
    power = inv.copy()
    for n in range(2, _SERIES_TERMS + 1):
        power = power * inv
        s += power * (alpha * (-1.0) ** (n + 1) - alpha**n) / n
    out[~small] = -(kl ** (alpha + 1.0)) * np.expm1(s)
    return out


def corrector_profile(alpha: float, delta: float, n: int) -> tuple[float, np.ndarray]:
    """Diagonal weight and interior weights ``c[m]`` for ``m = 0..n``.

    ``a_{j,k+1} = c[k+1-j]`` for ``1 <= j <= k`` and ``c[0]`` is the diagonal.
    """
    _check(alpha, delta)
    scale = delta**alpha / math.gamma(alpha + 2.0)
    c = np.empty(n + 1)
    c[0] = scale
    if n:
        c[1:] = scale * _second_differences(alpha + 1.0, np.arange(1, n + 1))
    return scale, c


def first_corrector_weights(alpha: float, delta: float, n: int) -> np.ndarray:
    """``a_{0,k+1}`` for ``k = 0..n-1``."""
    _check(alpha, delta)
    scale = delta**alpha / math.gamma(alpha + 2.0)
    return scale * _first_weight_core(alpha, np.arange(n))


def predictor_profile(alpha: float, delta: float, n: int) -> np.ndarray:
    """``b[m]`` for ``m = 0..n``, with ``b_{j,k+1} = b[k+1-j]`` and ``b[0] = 0``."""
    _check(alpha, delta)
    b = np.zeros(n + 1)
    if n:
        b[1:] = delta**alpha / math.gamma(alpha + 1.0) * _first_differences(alpha, np.arange(1, n + 1))
    return b


def corrector_weights(alpha: float, delta: float, k: int) -> np.ndarray:
    """``(a_{0,k+1}, ..., a_{k+1,k+1})``, length ``k + 2``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    diag, c = corrector_profile(alpha, delta, k)
    out = np.empty(k + 2)
    out[0] = first_corrector_weights(alpha, delta, k + 1)[k]
    out[1 : k + 1] = c[k:0:-1]
    out[k + 1] = diag
    return out


def predictor_weights(alpha: float, delta: float, k: int) -> np.ndarray:
    """``(b_{0,k+1}, ..., b_{k,k+1})``, length ``k + 1``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    b = predictor_profile(alpha, delta, k + 1)
    return b[k + 1 : 0 : -1].copy()


def frac_integral_on_grid(r: float, samples, grid: TimeGrid) -> np.ndarray:
    """Product-trapezoid ``I^r f`` at every node of ``grid``.

    ``samples[k]`` is ``f(t_k)``; the result at ``t = 0`` is 0.
    """
    f = np.asarray(samples)
    if f.shape[-1] != len(grid):
        raise ValueError(f"{f.shape[-1]} samples for a grid of {len(grid)} nodes")
    n = grid.n_steps
    if r == 1.0:
        # the weights reduce to the ordinary trapezoid rule
        out = np.zeros(f.shape, dtype=np.result_type(f, float))
        out[..., 1:] = np.cumsum(0.5 * grid.delta * (f[..., 1:] + f[..., :-1]), axis=-1)
        return out
    _, c = corrector_profile(r, grid.delta, n)
    a0 = first_corrector_weights(r, grid.delta, n)
    out = np.zeros(f.shape, dtype=np.result_type(f, float))
    # I f(t_k) = a0[k-1] f_0 + sum_{j=1}^{k} c[k-j] f_j
    conv = _causal_convolve(c, f[..., 1:])
    out[..., 1:] = a0 * f[..., :1] + conv
    return out


def _causal_convolve(kernel: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    if x.ndim == 1:
        return np.convolve(kernel[:n], x)[:n]
    rows = x.reshape(-1, n)
    if n <= _DIRECT_MAX or rows.shape[0] < 4:
        return np.stack([np.convolve(kernel[:n], row)[:n] for row in rows]).reshape(x.shape)
    return signal.fftconvolve(rows, kernel[None, :n], axes=-1)[:, :n].reshape(x.shape)

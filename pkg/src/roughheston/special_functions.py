"""Mittag-Leffler functions and the Mittag-Leffler distribution.

``E_{a,b}(z) = sum_n z^n / Gamma(a n + b)`` is evaluated by

* the power series with compensated summation, when the rounding error
  estimate ``eps * sum |terms|`` stays within tolerance;
* a real integral representation on the negative real axis for ``0 < a < 1``
  (exact for ``b < 1 + a``; larger ``b`` is reduced by the recurrence
  ``E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z``);
* the algebraic asymptotic expansion for ``|z| > z_switch`` in the sector
  ``|arg z| > a*pi``.

Documented accuracy is relative ``1e-12`` on the negative real axis. Other
complex arguments are best-effort: the series is used when it is accurate and a
:class:`MittagLefflerConvergenceError` is raised otherwise.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, special

__all__ = [
    "MLParams",
    "MittagLefflerConvergenceError",
    "mittag_leffler",
    "ml_density",
    "ml_cdf",
    "ml_cdf_inverse",
    "ml_cdf_integral",
    "ml_sample",
]

EPS = np.finfo(float).eps
Z_SWITCH = 50.0
MAX_TERMS = 10_000
DEFAULT_RTOL = 1e-12


class MittagLefflerConvergenceError(ArithmeticError):
    """Raised when no evaluation route reaches the requested tolerance."""

    def __init__(self, message: str, partial: complex):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class MLParams:
    alpha: float
    beta: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} must lie in (0, 1]")
        if self.beta <= 0.0:
            raise ValueError(f"beta={self.beta} must be positive")
        if self.lam <= 0.0:
            raise ValueError(f"lam={self.lam} must be positive")


def _neumaier(s: float, c: float, x: float) -> tuple[float, float]:
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


def _series(alpha: float, beta: float, z: complex, rtol: float) -> tuple[complex, bool]:
    """Compensated partial sums; returns (value, accurate)."""
    if z == 0:
        return complex(special.rgamma(beta)), True
    logabs = math.log(abs(z))
    phase = z / abs(z)
    s_re = s_im = c_re = c_im = 0.0
    abs_sum = 0.0
    ph = 1.0 + 0.0j
    prev = math.inf
    for n in range(MAX_TERMS):
        mag = math.exp(n * logabs - special.gammaln(alpha * n + beta))
        t = mag * ph
        s_re, c_re = _neumaier(s_re, c_re, t.real)
        s_im, c_im = _neumaier(s_im, c_im, t.imag)
        abs_sum += mag
        ph *= phase
        if abs_sum > 1e300:
            return complex(s_re + c_re, s_im + c_im), False
        # past the peak and below the working precision of the running total
        if mag < prev and mag <= 0.25 * EPS * abs_sum:
            value = complex(s_re + c_re, s_im + c_im)
            err = 4.0 * EPS * abs_sum
            return value, err <= rtol * abs(value)
        prev = mag
    value = complex(s_re + c_re, s_im + c_im)
    raise MittagLefflerConvergenceError(
        f"series for E_{{{alpha},{beta}}}({z}) did not terminate within {MAX_TERMS} terms",
        value,
    )


def _asymptotic(alpha: float, beta: float, z: complex, rtol: float) -> tuple[complex, bool]:
    # E(z) ~ -sum_{k>=1} z^{-k} / Gamma(beta - alpha k),  |arg z| > alpha*pi
    total = 0.0 + 0.0j
    logz = math.log(abs(z))
    zinv = 1.0 / z
    p = 1.0 + 0.0j
    prev_env = math.inf
    env = math.inf
    for k in range(1, 400):
        p *= zinv
        total += -p * special.rgamma(beta - alpha * k)
        # |1/Gamma(b - a k)| <= Gamma(1 - b + a k) / pi; the sine factor is
        # dropped so near-poles do not fake a divergence
        arg = alpha * k + 1.0 - beta
        if arg < 0.5:
            continue
        env = math.exp(-k * logz + special.gammaln(arg)) / math.pi
        if env > prev_env:
            break
        prev_env = env
        if env <= EPS * abs(total):
            return total, True
    return total, prev_env <= rtol * abs(total)


def _integral_neg_real(alpha: float, beta: float, x: float) -> float:
    """E_{alpha,beta}(-x) for 0 < alpha < 1, beta < 1 + alpha, x > 0."""
    s1 = math.sin(math.pi * (1.0 - beta))
    s2 = math.sin(math.pi * (1.0 - beta + alpha))
    c = math.cos(math.pi * alpha)
    expo = (1.0 - beta) / alpha
    inv_a = 1.0 / alpha
    norm = 1.0 / (math.pi * alpha)

    def smooth(r):
        return math.exp(-(r**inv_a)) * (r * s1 + x * s2) / (r * r + 2.0 * r * x * c + x * x) * norm

    def full(r):
        return r**expo * smooth(r)

    # the denominator nearly vanishes at r = x when alpha -> 1
    r_split = x
    opts = dict(epsabs=0.0, epsrel=2e-14, limit=400)
    if expo < 0.0:
        head, _ = integrate.quad(smooth, 0.0, r_split, weight="alg", wvar=(expo, 0.0), **opts)
    else:
        head, _ = integrate.quad(full, 0.0, r_split, **opts)
    tail, _ = integrate.quad(full, r_split, math.inf, **opts)
    return head + tail


def _neg_real_sector(alpha: float, beta: float, x: float, rtol: float) -> float:
    if x > Z_SWITCH:
        val, ok = _asymptotic(alpha, beta, complex(-x), rtol)
        if ok:
            return val.real
    depth = 0
    b = beta
    while b >= 1.0 + alpha:
        b -= alpha
        depth += 1
    val = _integral_neg_real(alpha, b, x)
    for _ in range(depth):
        val = (val - special.rgamma(b)) / (-x)
        b += alpha
    return val


def mittag_leffler(alpha: float, beta: float, z: complex, rtol: float = DEFAULT_RTOL) -> complex:
    """Two-parameter Mittag-Leffler function ``E_{alpha,beta}(z)``.

    Raises ``ValueError`` for non-finite ``z`` or invalid parameters, and
    :class:`MittagLefflerConvergenceError` (carrying the partial value) when
    no route reaches ``rtol``.
    """
    if alpha <= 0.0 or beta <= 0.0:
        raise ValueError("alpha and beta must be positive")
    z = complex(z)
    if not cmath.isfinite(z):
        raise ValueError(f"z={z} is not finite")
    if z == 0:
        return complex(special.rgamma(beta))
    if alpha == 1.0 and beta == 1.0:
        return cmath.exp(z)
    if alpha == 1.0 and beta == 2.0:
        return complex(np.expm1(z) / z)
    if alpha == 1.0 and beta > 2.0 and beta == int(beta) and abs(z) > 1.0:
        return (mittag_leffler(1.0, beta - 1.0, z, rtol) - special.rgamma(beta - 1.0)) / z

    on_neg_axis = z.imag == 0.0 and z.real < 0.0
    sector = abs(cmath.phase(z)) > alpha * math.pi

    partial = None
    # on the negative axis the largest term grows like exp(|z|^(1/alpha))
    hopeless = on_neg_axis and abs(z) ** (1.0 / alpha) > 40.0
    if abs(z) <= Z_SWITCH and not hopeless:
        partial, ok = _series(alpha, beta, z, rtol)
        if ok:
            return partial
    if on_neg_axis and alpha < 1.0:
        return complex(_neg_real_sector(alpha, beta, -z.real, rtol))
    if abs(z) > Z_SWITCH and sector:
        val, ok = _asymptotic(alpha, beta, z, rtol)
        if ok:
            return val
        partial = val
    if partial is None:
        partial, ok = _series(alpha, beta, z, rtol)
        if ok:
            return partial
    raise MittagLefflerConvergenceError(
        f"E_{{{alpha},{beta}}}({z}) could not be evaluated to rtol={rtol}", partial
    )


def _ml_real(alpha: float, beta: float, z: float) -> float:
    return mittag_leffler(alpha, beta, z).real


def _check_alpha_lam(alpha, lam):
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha={alpha} must lie in (0, 1]")
    if lam <= 0.0:
        raise ValueError(f"lam={lam} must be positive")


def _map(fn, t):
    arr = np.asarray(t, dtype=float)
    out = np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)
    return out if arr.ndim else float(out)


def ml_density(alpha: float, lam: float, t):
    """Mittag-Leffler density ``lam t^(alpha-1) E_{alpha,alpha}(-lam t^alpha)`` for t > 0."""
    _check_alpha_lam(alpha, lam)
    if np.any(np.asarray(t) <= 0.0):
        raise ValueError("the Mittag-Leffler density is defined for t > 0 only")
    if alpha == 1.0:
        return lam * np.exp(-lam * np.asarray(t, dtype=float)) if np.ndim(t) else lam * math.exp(-lam * t)
    return _map(lambda s: lam * s ** (alpha - 1.0) * _ml_real(alpha, alpha, -lam * s**alpha), t)


def _cdf_scalar(alpha, lam, t):
    if t == 0.0:
        return 0.0
    if alpha == 1.0:
        return -math.expm1(-lam * t)
    x = lam * t**alpha
    if x <= 1.0:
        # 1 - E_{a,1}(-x) = x E_{a,1+a}(-x), free of cancellation near 0
        return x * _ml_real(alpha, 1.0 + alpha, -x)
    return 1.0 - _ml_real(alpha, 1.0, -x)


def ml_cdf(alpha: float, lam: float, t):
    """Mittag-Leffler distribution function ``1 - E_{alpha,1}(-lam t^alpha)``."""
    _check_alpha_lam(alpha, lam)
    if np.any(np.asarray(t) < 0.0):
        raise ValueError("the Mittag-Leffler CDF is defined for t >= 0 only")
    return _map(lambda s: _cdf_scalar(alpha, lam, s), t)


def _cdf_integral_scalar(alpha, lam, t):
    if t == 0.0:
        return 0.0
    if alpha == 1.0:
        return t + math.expm1(-lam * t) / lam
    x = lam * t**alpha
    if x <= 1.0:
        return t * x * _ml_real(alpha, 2.0 + alpha, -x)
    return t * (1.0 - _ml_real(alpha, 2.0, -x))


def ml_cdf_integral(alpha: float, lam: float, t):
    """``int_0^t F(s) ds = t (1 - E_{alpha,2}(-lam t^alpha))``."""
    _check_alpha_lam(alpha, lam)
    if np.any(np.asarray(t) < 0.0):
        raise ValueError("t must be non-negative")
    return _map(lambda s: _cdf_integral_scalar(alpha, lam, s), t)


def _cdf_second_integral_scalar(alpha, lam, t):
    if t == 0.0:
        return 0.0
    if alpha == 1.0:
        return t * t / 2.0 - t / lam - math.expm1(-lam * t) / lam**2
    x = lam * t**alpha
    if x <= 1.0:
        return t * t * x * _ml_real(alpha, 3.0 + alpha, -x)
    return t * t * (0.5 - _ml_real(alpha, 3.0, -x))


def ml_cdf_second_integral(alpha: float, lam: float, t):
    """``int_0^t int_0^s F(u) du ds = t^2 (1/2 - E_{alpha,3}(-lam t^alpha))``."""
    _check_alpha_lam(alpha, lam)
    return _map(lambda s: _cdf_second_integral_scalar(alpha, lam, s), t)


def ml_cdf_inverse(alpha: float, lam: float, u: float, atol: float = 1e-10) -> float:
    """Quantile of the Mittag-Leffler distribution by bisection.

    The returned ``t`` satisfies ``|F(t) - u| <= atol``.
    """
    _check_alpha_lam(alpha, lam)
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u={u} must lie in [0, 1)")
    if u == 0.0:
        return 0.0
    if alpha == 1.0:
        return -math.log1p(-u) / lam

    def cdf(t):
        return _cdf_scalar(alpha, lam, t)

    # small-t: F ~ lam t^a / Gamma(1+a); large-t: 1-F ~ t^-a / (lam Gamma(1-a))
    lo_guess = (u * math.gamma(1.0 + alpha) / lam) ** (1.0 / alpha)
    hi_guess = (1.0 / (lam * math.gamma(1.0 - alpha) * (1.0 - u))) ** (1.0 / alpha)
    lo, hi = 0.0, max(lo_guess, hi_guess)
    while cdf(hi) < u:
        lo, hi = hi, 2.0 * hi
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        f = cdf(mid)
        if abs(f - u) <= 0.5 * atol:
            return mid
        if f < u:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4.0 * EPS * hi:
            return mid
    return 0.5 * (lo + hi)


def ml_sample(alpha: float, lam: float, size, rng: np.random.Generator) -> np.ndarray:
    """Draw Mittag-Leffler distributed variates.

    Uses the exact transformation of two independent uniforms
    ``t = -log(U) (sin(a pi)/tan(a pi V) - cos(a pi))^{1/a} lam^{-1/a}``,
    which reduces to an exponential draw for ``alpha = 1``.
    """
    _check_alpha_lam(alpha, lam)
    u = rng.random(size)
    v = 1.0 - rng.random(size)  # (0, 1], keeps sin(a pi v) away from 0
    expo = -np.log1p(-u)
    if alpha == 1.0:
        return expo / lam
    ap = alpha * math.pi
    # sin(a pi)/tan(a pi v) - cos(a pi), written without the pole of tan
    mix = np.sin(ap * (1.0 - v)) / np.sin(ap * v)
    return expo * (mix / lam) ** (1.0 / alpha)


@lru_cache(maxsize=32)
def cdf_spline(alpha: float, lam: float, horizon: float, n_nodes: int = 2049):
    """Cubic spline of ``F`` in the variable ``s = t^alpha`` on ``[0, horizon]``.

    ``F`` is analytic in ``s``, so the interpolant is accurate to roughly
    ``1e-11`` with the default node count. Call as ``spline(t**alpha)``.
    """
    s = np.linspace(0.0, horizon**alpha, n_nodes)
    values = np.asarray(ml_cdf(alpha, lam, s ** (1.0 / alpha)))
    return interpolate.CubicSpline(s, values)

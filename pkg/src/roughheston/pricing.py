"""European option pricing from a characteristic function.

Calls are priced with the Lewis formula (zero rates, zero dividends)

    C = S - sqrt(S K)/pi int_0^inf Re[exp(i u k) phi(u - i/2)] / (u^2 + 1/4) du,  k = log(S/K),

where ``phi(z) = E[exp(i z X_T)]`` is the CF of ``X_T = log(S_T / S_0)``.
A Gil-Pelaez put is kept as an independent route (different contour, different
integrand) for parity checks.

A *cf provider* is any callable mapping a complex array ``z`` to ``phi(z)``
for one fixed maturity; it is always called with a whole batch of nodes.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy import optimize, special

from .charfn import DEFAULT_STEPS, cf
from .heston_classical import heston_cf
from .riccati import RiccatiDivergenceError, RoughHestonParams

__all__ = [
    "OptionQuote",
    "SkewPoint",
    "PricingError",
    "ImpliedVolError",
    "QuadratureError",
    "PricingDiagnosticWarning",
    "QuadratureSettings",
    "gauss_kronrod",
    "rough_cf_provider",
    "heston_cf_provider",
    "lognormal_cf_provider",
    "lewis_call_prices",
    "lewis_call_price",
    "gil_pelaez_put_prices",
    "black_scholes_call",
    "implied_vol",
    "price_smile",
    "atm_skew_curve",
    "write_quotes_csv",
    "write_skew_csv",
]

CfProvider = Callable[[np.ndarray], np.ndarray]

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1]; abscissae
# in decreasing order, the last one is the centre.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point layout: -x0..-x6, 0, x6..x0
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_GAUSS_W = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod abscissae x1, x3, x5 and the centre
for _i, _w in zip((1, 3, 5), _WG[:3]):
    _GAUSS_W[_i] = _w
    _GAUSS_W[14 - _i] = _w
_GAUSS_W[7] = _WG[3]


class PricingError(ArithmeticError):
    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class QuadratureError(PricingError):
    pass


class ImpliedVolError(ValueError):
    def __init__(self, message: str, bound: str):
        super().__init__(message)
        self.bound = bound


class PricingDiagnosticWarning(UserWarning):
    pass


@dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = 1e-10
    tail_tol: float = 1e-11
    initial_panels: int = 16
    max_panels: int = 4000
    u_start: float = 8.0
    u_limit: float = 4096.0
    clamp_tol: float = 1e-8


DEFAULT_QUADRATURE = QuadratureSettings()


@dataclass(frozen=True)
class OptionQuote:
    strike: float
    maturity: float
    call_price: float
    implied_vol: float


@dataclass(frozen=True)
class SkewPoint:
    maturity: float
    atm_skew: float


# ------------------------------------------------------------------ quadrature


def gauss_kronrod(fn, lo: float, hi: float):
    """Single-panel G7-K15 of a vectorized ``fn``; returns ``(kronrod, gauss)``.

    ``fn(x)`` may return an array whose last axis runs over ``x``.
    """
    half = 0.5 * (hi - lo)
    x = 0.5 * (hi + lo) + half * _NODES
    y = np.asarray(fn(x))
    return half * (y @ _KRONROD_W), half * (y @ _GAUSS_W)


def _adaptive_gk(fn, lo: float, hi: float, settings: QuadratureSettings):
    """Adaptive G7-K15 of a batched integrand ``fn(u) -> (m, len(u))``.

    All panels awaiting evaluation are sent to ``fn`` in a single call. Returns
    the integral per row and the final error estimate (max over rows).
    """
    edges = np.linspace(lo, hi, settings.initial_panels + 1)
    pending = np.stack([edges[:-1], edges[1:]], axis=1)
    done_val = None
    done_err = 0.0
    n_panels = len(pending)
    while True:
        half = 0.5 * (pending[:, 1] - pending[:, 0])
        mid = 0.5 * (pending[:, 1] + pending[:, 0])
        x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
        y = np.asarray(fn(x))
        y = y.reshape(y.shape[0], len(pending), 15)
        kron = half * (y @ _KRONROD_W)
        gauss = half * (y @ _GAUSS_W)
        err = np.abs(kron - gauss).max(axis=0)
        # a panel is accepted when its error is below its share of the budget
        share = settings.abs_tol * (2.0 * half) / (hi - lo)
        ok = err <= share
        acc = kron[:, ok].sum(axis=1)
        done_val = acc if done_val is None else done_val + acc
        done_err += err[ok].sum()
        if ok.all():
            return done_val, done_err
        bad = pending[~ok]
        n_panels += len(bad)
        if n_panels > settings.max_panels:
            partial = done_val + kron[:, ~ok].sum(axis=1)
            raise QuadratureError(
                f"adaptive quadrature did not converge within {settings.max_panels} panels "
                f"(pending error {err[~ok].sum():.3g})",
                partial=partial,
            )
        m = 0.5 * (bad[:, 0] + bad[:, 1])
        pending = np.concatenate([np.stack([bad[:, 0], m], 1), np.stack([m, bad[:, 1]], 1)])


def _truncation(envelope, settings: QuadratureSettings) -> tuple[float, float]:
    """Upper limit ``U`` and tail estimate ``envelope(U)``.

    ``envelope(U)`` bounds the integrand's tail beyond ``U`` under the assumption
    that ``|phi|`` decays monotonically there; ``U`` doubles until the bound
    drops below ``tail_tol``.
    """
    u = settings.u_start
    while True:
        tail = float(envelope(u))
        if tail <= settings.tail_tol:
            return u, tail
        if u >= settings.u_limit:
            warnings.warn(
                f"integration range capped at u={u:g} with tail estimate {tail:.3g}",
                PricingDiagnosticWarning,
                stacklevel=4,
            )
            return u, tail
        u *= 2.0


def _call_provider(provider: CfProvider, z: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(provider(z), dtype=complex)
    except RiccatiDivergenceError as exc:
        raise PricingError(f"characteristic function diverged at a={exc.a}") from exc
    if not np.all(np.isfinite(out)):
        raise PricingError("characteristic function returned non-finite values")
    return out


# ------------------------------------------------------------------ providers


def rough_cf_provider(params: RoughHestonParams, maturity: float, n_steps: int = DEFAULT_STEPS) -> CfProvider:
    def provider(z):
        return cf(params, np.asarray(z, dtype=complex), maturity, n_steps)

    return provider


def heston_cf_provider(params, maturity: float) -> CfProvider:
    def provider(z):
        return heston_cf(params, np.asarray(z, dtype=complex), maturity)

    return provider


def lognormal_cf_provider(total_variance: float) -> CfProvider:
    """CF of ``X = -w/2 + sqrt(w) N(0, 1)``."""

    def provider(z):
        z = np.asarray(z, dtype=complex)
        return np.exp(-0.5 * total_variance * (z * z + 1j * z))

    return provider


# ------------------------------------------------------------------ pricing


def _check_inputs(spot, strikes, maturity):
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    if not spot > 0.0:
        raise ValueError(f"spot={spot} must be positive")
    if np.any(~(strikes > 0.0)):
        raise ValueError("strikes must be positive")
    if not maturity > 0.0:
        raise ValueError(f"maturity={maturity} must be positive")
    return strikes


def _clamp(values, lower, upper, settings, what):
    clamped = np.clip(values, lower, upper)
    excess = np.abs(clamped - values).max(initial=0.0)
    if excess > settings.clamp_tol:
        warnings.warn(
            f"{what} moved by {excess:.3g} onto the no-arbitrage band",
            PricingDiagnosticWarning,
            stacklevel=3,
        )
    return clamped


def lewis_call_prices(
    cf_provider: CfProvider,
    spot: float,
    strikes,
    maturity: float,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """Lewis call prices for a vector of strikes sharing one CF."""
    strikes = _check_inputs(spot, strikes, maturity)
    k = np.log(spot / strikes)

    def envelope(u):
        phi = _call_provider(cf_provider, np.array([u - 0.5j]))[0]
        return abs(phi) / u

    upper, tail = _truncation(envelope, settings)

    def integrand(u):
        phi = _call_provider(cf_provider, u - 0.5j)
        return (np.exp(1j * np.outer(k, u)) * phi).real / (u * u + 0.25)

    integral, _ = _adaptive_gk(integrand, 0.0, upper, settings)
    prices = spot - np.sqrt(spot * strikes) / math.pi * integral
    return _clamp(prices, np.maximum(spot - strikes, 0.0), spot, settings, "Lewis call price")


def lewis_call_price(cf_provider: CfProvider, spot: float, strike: float, maturity: float, **kw) -> float:
    return float(lewis_call_prices(cf_provider, spot, [strike], maturity, **kw)[0])


def gil_pelaez_put_prices(
    cf_provider: CfProvider,
    spot: float,
    strikes,
    maturity: float,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """Put prices from the two Gil-Pelaez exercise probabilities.

    ``P = K Q(S_T < K) - S Q^S(S_T < K)``; the share-measure probability uses
    ``phi(u - i)`` (``phi(-i) = 1`` for a martingale), the other ``phi(u)``.
    """
    strikes = _check_inputs(spot, strikes, maturity)
    x = np.log(strikes / spot)

    def envelope(u):
        phi = _call_provider(cf_provider, np.array([u, u - 1j]))
        return float(np.abs(phi).max()) / u

    upper, _ = _truncation(envelope, settings)

    def integrand(u):
        z = np.concatenate([u, u - 1j])
        phi = _call_provider(cf_provider, z)
        phi_q, phi_s = phi[: len(u)], phi[len(u) :]
        rot = np.exp(-1j * np.outer(x, u)) / (1j * u)
        return np.concatenate([(rot * phi_q).real, (rot * phi_s).real])

    integral, _ = _adaptive_gk(integrand, 0.0, upper, settings)
    n = len(strikes)
    prob_q = 0.5 + integral[:n] / math.pi  # Q(S_T > K)
    prob_s = 0.5 + integral[n:] / math.pi  # share measure
    puts = strikes * (1.0 - prob_q) - spot * (1.0 - prob_s)
    return _clamp(puts, np.maximum(strikes - spot, 0.0), strikes, settings, "Gil-Pelaez put price")


# ------------------------------------------------------------------ Black-Scholes


def black_scholes_call(spot: float, strike, maturity: float, sigma) -> np.ndarray | float:
    strike = np.asarray(strike, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    sd = sigma * math.sqrt(maturity)
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = np.log(spot / strike) / sd + 0.5 * sd
        price = spot * special.ndtr(d1) - strike * special.ndtr(d1 - sd)
    price = np.where(sd > 0.0, price, np.maximum(spot - strike, 0.0))
    return float(price) if price.ndim == 0 else price


def implied_vol(call_price: float, spot: float, strike: float, maturity: float) -> float:
    """Black-Scholes implied volatility by Brent's method."""
    lower = max(spot - strike, 0.0)
    if not call_price > lower:
        raise ImpliedVolError(f"price {call_price!r} is not above intrinsic value {lower!r}", "lower")
    if not call_price < spot:
        raise ImpliedVolError(f"price {call_price!r} is not below the spot {spot!r}", "upper")

    def gap(s):
        return black_scholes_call(spot, strike, maturity, s) - call_price

    hi = 1.0
    while gap(hi) < 0.0:
        hi *= 2.0
        if hi > 1e4:
            raise ImpliedVolError(f"price {call_price!r} too close to the spot to invert", "upper")
    lo = 0.0 if gap(0.0) < 0.0 else 1e-300
    sigma = optimize.brentq(gap, lo, hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=500)
    return float(sigma)


# ------------------------------------------------------------------ smiles and skew


def price_smile(
    params: RoughHestonParams,
    maturity: float,
    strikes,
    spot: float = 1.0,
    n_steps: int = DEFAULT_STEPS,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> list[OptionQuote]:
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    prices = lewis_call_prices(rough_cf_provider(params, maturity, n_steps), spot, strikes, maturity, settings)
    return [OptionQuote(float(k), float(maturity), float(c), implied_vol(c, spot, k, maturity)) for k, c in zip(strikes, prices)]


def atm_skew_curve(
    params: RoughHestonParams,
    maturities: Iterable[float],
    eps_k: float = 1e-3,
    spot: float = 1.0,
    n_steps: int = DEFAULT_STEPS,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> list[SkewPoint]:
    """Central difference of implied vol in log-strike ``log(K/S)`` at the money."""
    out = []
    for t in maturities:
        if not t > 0.0:
            raise ValueError(f"maturity {t} must be positive")
        strikes = spot * np.exp(np.array([-eps_k, eps_k]))
        prices = lewis_call_prices(rough_cf_provider(params, t, n_steps), spot, strikes, t, settings)
        vols = [implied_vol(c, spot, k, t) for k, c in zip(strikes, prices)]
        out.append(SkewPoint(float(t), (vols[1] - vols[0]) / (2.0 * eps_k)))
    return out


def _header_lines(metadata: Mapping[str, object]) -> list[str]:
    return [f"# {key} = {value}" for key, value in metadata.items()]


def write_quotes_csv(path, quotes: Iterable[OptionQuote], metadata: Mapping[str, object]) -> None:
    with open(path, "w", newline="") as fh:
        for line in _header_lines(metadata):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["maturity", "strike", "price", "implied_vol"])
        for q in quotes:
            w.writerow([repr(q.maturity), repr(q.strike), repr(q.call_price), repr(q.implied_vol)])


def write_skew_csv(path, columns: Mapping[str, list[SkewPoint]], metadata: Mapping[str, object]) -> None:
    """One maturity column plus one skew column per labelled curve."""
    labels = list(columns)
    maturities = [p.maturity for p in columns[labels[0]]]
    with open(path, "w", newline="") as fh:
        for line in _header_lines(metadata):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["maturity"] + [f"atm_skew_{lab}" for lab in labels])
        for i, t in enumerate(maturities):
            w.writerow([repr(t)] + [repr(columns[lab][i].atm_skew) for lab in labels])

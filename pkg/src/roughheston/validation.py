"""Acceptance checks shared by the test suite and ``roughheston validate``.

Each ``check_*`` returns a :class:`CriterionResult`; thresholds live in
:class:`Tolerances` so they can be overridden (and echoed) from the CLI.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable

import numpy as np
from scipy import integrate, special

from .charfn import cf
from .frac_grid import TimeGrid, frac_integral_on_grid
from .hawkes import (
    BaselineRate,
    HawkesMicroConfig,
    MittagLefflerKernel,
    empirical_cf,
    hawkes_cf_fixed_point,
    microprice_from_counts,
    psi_series_scaled,
    simulate_terminal_counts,
)
from .heston_classical import heston_cf
from .pricing import (
    atm_skew_curve,
    black_scholes_call,
    gil_pelaez_put_prices,
    heston_cf_provider,
    lewis_call_prices,
    rough_cf_provider,
)
from .riccati import RoughHestonParams, solve_riccati
from .special_functions import mittag_leffler, ml_density

__all__ = [
    "PAPER_PARAMS",
    "DESK_HAWKES",
    "Tolerances",
    "CriterionResult",
    "CHECKS",
    "run_all",
]

PAPER_PARAMS = RoughHestonParams(lam=2.0, theta=0.04, rho=-0.5, nu=0.05, v0=0.4, alpha=0.6)
DESK_HAWKES = HawkesMicroConfig(horizon_T=50.0, alpha=0.6, lam=2.0, mu=1.0, beta=1.0, xi=1.0, theta=1.0)
SKEW_MATURITIES = (0.025, 0.05, 0.1, 0.25, 0.5, 1.0)


@dataclass(frozen=True)
class Tolerances:
    alpha_one_gate: float = 1e-3
    min_order: float = 1.3
    laplace: float = 1e-6
    exp_identity: float = 1e-12
    power_law: float = 1e-3
    trivial: float = 1e-12
    parity: float = 1e-6
    rough_vs_closed_price: float = 1e-4
    black_scholes: float = 1e-6
    skew_explosion_ratio: float = 3.0
    skew_flat_ratio: float = 2.0
    mc_n_se: float = 3.0
    psi_identity: float = 1e-4

    def override(self, **changes) -> "Tolerances":
        known = {f.name for f in fields(self)}
        unknown = set(changes) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        return replace(self, **{k: float(v) for k, v in changes.items()})


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        meas = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        thr = ", ".join(f"{k}={_fmt(v)}" for k, v in self.thresholds.items())
        return f"criterion {self.number} [{status}] {self.name}: {meas} | limits: {thr}"

    def as_dict(self) -> dict:
        return asdict(self)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


# ------------------------------------------------------------------ 1


def check_alpha_one_gate(tol: Tolerances, params: RoughHestonParams = PAPER_PARAMS) -> CriterionResult:
    p = params.replace(alpha=1.0)
    a = np.array([0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0])
    worst = 0.0
    for t in (0.5, 1.0):
        rough = cf(p, a, t, int(round(t / 1e-3)))
        worst = max(worst, float(np.max(np.abs(rough - heston_cf(p, a, t)))))
    return CriterionResult(
        1, "alpha=1 rough CF vs closed-form Heston CF", worst <= tol.alpha_one_gate,
        {"max_abs_diff": worst}, {"max_abs_diff": tol.alpha_one_gate},
    )


# ------------------------------------------------------------------ 2


def scheme_errors(params: RoughHestonParams, a: complex = 1.0, deltas=(4e-3, 2e-3, 1e-3), ref_delta=1e-4, t_min=0.1):
    ref_grid = TimeGrid.from_delta(1.0, ref_delta)
    ref = solve_riccati(params, a, ref_grid).h
    errs = []
    for d in deltas:
        grid = TimeGrid.from_delta(1.0, d)
        h = solve_riccati(params, a, grid).h
        stride = ref_grid.n_steps // grid.n_steps
        mask = grid.nodes >= t_min - 1e-12
        errs.append(float(np.max(np.abs(h[mask] - ref[::stride][mask]))))
    return np.array(errs)


def check_scheme_order(tol: Tolerances, params: RoughHestonParams = PAPER_PARAMS) -> CriterionResult:
    deltas = np.array([4e-3, 2e-3, 1e-3])
    errs = scheme_errors(params.replace(alpha=0.6), 1.0, tuple(deltas))
    slope = float(np.polyfit(np.log(deltas), np.log(errs), 1)[0])
    pairwise = [float(np.log2(errs[i] / errs[i + 1])) for i in range(len(errs) - 1)]
    return CriterionResult(
        2, "Adams scheme convergence order (alpha=0.6, a=1, [0.1, 1])", slope >= tol.min_order,
        {"fitted_order": slope, "pairwise_orders": pairwise, "errors": errs.tolist()},
        {"min_order": tol.min_order},
    )


# ------------------------------------------------------------------ 3


def ml_laplace_numeric(alpha: float, lam: float, z: float) -> float:
    """``int_0^M f e^{-z s} ds`` plus a tail estimate, with ``M = 40/z``."""

    def smooth(s):
        return lam * mittag_leffler(alpha, alpha, -lam * s**alpha).real * math.exp(-z * s)

    # s^(alpha-1) handled by the algebraic weight on [0, 1]
    head, _ = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(alpha - 1.0, 0.0), epsabs=1e-13, epsrel=1e-12)
    upper = 40.0 / z
    body, _ = integrate.quad(lambda s: float(ml_density(alpha, lam, s)) * math.exp(-z * s), 1.0, upper,
                             epsabs=1e-13, epsrel=1e-12, limit=200)
    tail = float(ml_density(alpha, lam, upper)) * math.exp(-z * upper) / z
    return head + body + tail


def check_special_functions(tol: Tolerances) -> CriterionResult:
    lap = 0.0
    for alpha in (0.6, 0.8):
        for lam in (1.0, 2.0):
            for z in (0.5, 1.0, 2.0):
                lap = max(lap, abs(ml_laplace_numeric(alpha, lam, z) - lam / (lam + z**alpha)))
    xs = np.linspace(-10.0, 5.0, 301)
    exp_err = max(abs(mittag_leffler(1.0, 1.0, x).real - math.exp(x)) / math.exp(x) for x in xs)
    power = 0.0
    shrinks = True
    for r in (0.4, 0.6, 1.0):
        for gamma in (0.5, 1.0):
            errs = []
            for n in (500, 1000):
                g = TimeGrid(1.0, n)
                approx = frac_integral_on_grid(r, g.nodes**gamma, g)
                exact = special.gamma(gamma + 1) / special.gamma(gamma + 1 + r) * g.nodes ** (gamma + r)
                errs.append(float(np.max(np.abs(approx - exact))))
            power = max(power, errs[-1])
            # linear integrands are reproduced exactly; only compare above roundoff
            shrinks &= errs[0] < 1e-12 or errs[1] < errs[0]
    ok = lap <= tol.laplace and exp_err <= tol.exp_identity and power <= tol.power_law and shrinks
    return CriterionResult(
        3, "special-function identities", bool(ok),
        {"laplace_max_err": lap, "exp_rel_err": exp_err, "power_law_max_err": power, "refinement_decreases": shrinks},
        {"laplace": tol.laplace, "exp_identity": tol.exp_identity, "power_law": tol.power_law},
    )


# ------------------------------------------------------------------ 4


def check_trivial_exactness(tol: Tolerances, params: RoughHestonParams = PAPER_PARAMS) -> CriterionResult:
    unit = 0.0
    h0_exact = True
    herm = 0.0
    a = np.array([0.1, 0.5, 1.0, 2.0, 5.0, 10.0])
    for alpha in (0.6, 1.0):
        p = params.replace(alpha=alpha)
        for t in (0.1, 0.5, 1.0, 2.0):
            unit = max(unit, abs(cf(p, 0.0, t) - 1.0))
            both = cf(p, np.concatenate([a, -a]), t)
            herm = max(herm, float(np.max(np.abs(both[len(a):] - np.conj(both[: len(a)])))))
        for x in (0.0, 1.0, -3.0, 2.0 - 0.5j):
            h0_exact &= solve_riccati(p, x, TimeGrid(1.0, 50)).h[0] == 0.0
    ok = unit <= tol.trivial and herm <= tol.trivial and h0_exact
    return CriterionResult(
        4, "trivial exactness (cf(0)=1, h(a,0)=0, Hermitian symmetry)", bool(ok),
        {"max_abs_cf0_minus_1": unit, "h0_exactly_zero": h0_exact, "max_hermitian_gap": herm},
        {"trivial": tol.trivial},
    )


# ------------------------------------------------------------------ 5


def check_pricing(tol: Tolerances, params: RoughHestonParams = PAPER_PARAMS) -> CriterionResult:
    strikes = np.array([0.8, 0.9, 1.0, 1.1, 1.2])
    parity = 0.0
    for alpha in (0.6, 1.0):
        prov = rough_cf_provider(params.replace(alpha=alpha), 1.0)
        calls = lewis_call_prices(prov, 1.0, strikes, 1.0)
        puts = gil_pelaez_put_prices(prov, 1.0, strikes, 1.0)
        parity = max(parity, float(np.max(np.abs(calls - puts - (1.0 - strikes)))))
    p1 = params.replace(alpha=1.0)
    cross = 0.0
    for t in (0.25, 1.0):
        rough = lewis_call_prices(rough_cf_provider(p1, t, int(round(t / 1e-3))), 1.0, strikes, t)
        closed = lewis_call_prices(heston_cf_provider(p1, t), 1.0, strikes, t)
        cross = max(cross, float(np.max(np.abs(rough - closed))))
    flat = p1.replace(nu=1e-8)
    t = 1.0
    total_var = flat.theta * t + (flat.v0 - flat.theta) * (-math.expm1(-flat.lam * t)) / flat.lam
    det = lewis_call_prices(rough_cf_provider(flat, t), 1.0, strikes, t)
    bs = black_scholes_call(1.0, strikes, t, math.sqrt(total_var / t))
    bs_err = float(np.max(np.abs(det - bs)))
    ok = parity <= tol.parity and cross <= tol.rough_vs_closed_price and bs_err <= tol.black_scholes
    return CriterionResult(
        5, "pricing consistency", bool(ok),
        {"put_call_parity_gap": parity, "rough_vs_closed_price_gap": cross, "black_scholes_gap": bs_err},
        {"parity": tol.parity, "rough_vs_closed_price": tol.rough_vs_closed_price, "black_scholes": tol.black_scholes},
    )


# ------------------------------------------------------------------ 6


def check_skew(tol: Tolerances, params: RoughHestonParams = PAPER_PARAMS) -> CriterionResult:
    rough = np.abs([p.atm_skew for p in atm_skew_curve(params.replace(alpha=0.6), SKEW_MATURITIES)])
    flat = np.abs([p.atm_skew for p in atm_skew_curve(params.replace(alpha=1.0), (SKEW_MATURITIES[0], SKEW_MATURITIES[-1]))])
    # maturities ascend, so |skew| must strictly decrease along the array
    monotone = bool(np.all(np.diff(rough) < 0.0))
    ratio_rough = float(rough[0] / rough[-1])
    ratio_flat = float(flat[0] / flat[-1])
    slope = float(np.polyfit(np.log(SKEW_MATURITIES), np.log(rough), 1)[0])
    ok = monotone and ratio_rough >= tol.skew_explosion_ratio and ratio_flat <= tol.skew_flat_ratio
    return CriterionResult(
        6, "ATM skew term structure (explodes for alpha=0.6, flat for alpha=1)", ok,
        {"monotone_alpha_0.6": monotone, "ratio_alpha_0.6": ratio_rough, "ratio_alpha_1": ratio_flat,
         "loglog_slope_alpha_0.6": slope},
        {"min_ratio_alpha_0.6": tol.skew_explosion_ratio, "max_ratio_alpha_1": tol.skew_flat_ratio},
    )


# ------------------------------------------------------------------ 7


def count_cf_comparison(config: HawkesMicroConfig, n_paths: int, seed: int, a_values=(-0.1, 0.0, 0.1), n_steps=1000):
    """``(a, |emp - L|, se)`` rows for the count CF on an ``a`` grid."""
    counts = simulate_terminal_counts(config, n_paths, seed)
    grid = TimeGrid(config.horizon_T, n_steps)
    rate, kernel = BaselineRate(config), MittagLefflerKernel.from_config(config)
    rows = []
    for a1 in a_values:
        for a2 in a_values:
            L = hawkes_cf_fixed_point(rate, kernel, [a1, a2], grid).L[-1]
            value, se = empirical_cf(counts @ np.array([a1, a2]))
            rows.append(((a1, a2), abs(value - L), se))
    return rows


def microprice_discrepancies(config: HawkesMicroConfig, horizons, n_paths: int, seed: int, a_values=(0.5, 1.0)):
    """``{a: [(T, |emp - L_p(a, 1)|, se), ...]}``."""
    params = config.rough_params()
    targets = {a: cf(params, a, 1.0) for a in a_values}
    out = {a: [] for a in a_values}
    for T in horizons:
        cfg = config.replace(horizon_T=T)
        counts = simulate_terminal_counts(cfg, n_paths, seed)
        price = microprice_from_counts(cfg, counts[:, 0], counts[:, 1])
        for a in a_values:
            value, se = empirical_cf(a * price)
            out[a].append((T, abs(value - targets[a]), se))
    return out


def check_hawkes(tol: Tolerances, config: HawkesMicroConfig = DESK_HAWKES, n_paths: int = 10_000, seed: int = 20240611):
    rows = count_cf_comparison(config, n_paths, seed)
    z = [gap / se if se > 0 else (0.0 if gap < 1e-12 else math.inf) for _, gap, se in rows]
    grid_ok = all(v <= tol.mc_n_se for v in z)
    disc = microprice_discrepancies(config, (25.0, 50.0, 100.0), n_paths, seed + 1)
    trend_ok = True
    summary = {}
    for a, seq in disc.items():
        gaps = [g for _, g, _ in seq]
        summary[f"microprice_gap_a={a}"] = gaps
        for (_, g0, s0), (_, g1, s1) in zip(seq, seq[1:]):
            # nonincreasing up to the combined Monte Carlo noise of the two estimates
            trend_ok &= g1 <= g0 + tol.mc_n_se * math.hypot(s0, s1)
    return CriterionResult(
        7, "Hawkes fixed point vs Monte Carlo, microprice trend in T", bool(grid_ok and trend_ok),
        {"max_gap_in_se": max(z), "grid_ok": grid_ok, "trend_ok": bool(trend_ok), **summary},
        {"mc_n_se": tol.mc_n_se},
    )


# ------------------------------------------------------------------ 8


def check_psi_identity(tol: Tolerances, alpha: float = 0.6, lam: float = 2.0, horizon_T: float = 4.0) -> CriterionResult:
    t = np.geomspace(0.01, 5.0, 20)
    lhs = psi_series_scaled(alpha, lam, horizon_T, t, n_terms=25)
    a_T = 1.0 - lam * horizon_T ** (-alpha)
    rhs = a_T * np.asarray(ml_density(alpha, lam, t))
    err = float(np.max(np.abs(lhs - rhs)))
    return CriterionResult(
        8, "resolvent series identity (1-a_T) T psi^T(T t) = a_T f^{alpha,lam}(t)", err <= tol.psi_identity,
        {"max_abs_err": err, "a_T": a_T}, {"psi_identity": tol.psi_identity},
    )


CHECKS: dict[int, Callable[[Tolerances], CriterionResult]] = {
    1: check_alpha_one_gate,
    2: check_scheme_order,
    3: check_special_functions,
    4: check_trivial_exactness,
    5: check_pricing,
    6: check_skew,
    7: check_hawkes,
    8: check_psi_identity,
}


def run_all(tol: Tolerances | None = None, only=None) -> list[CriterionResult]:
    tol = tol or Tolerances()
    return [CHECKS[n](tol) for n in sorted(CHECKS) if only is None or n in only]

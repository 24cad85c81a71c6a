"""Rough Heston characteristic functions, Fourier pricing and Hawkes microstructure."""

__version__ = "0.1.0"

from .charfn import CharFnValue, cf, cf_value, log_cf, log_cf_batch
from .frac_grid import TimeGrid, corrector_weights, frac_integral_on_grid, predictor_weights
from .hawkes import (
    EventStream,
    HawkesMicroConfig,
    baseline_intensity,
    hawkes_cf_fixed_point,
    kernel_matrix,
    microprice_path,
    simulate_cluster_hawkes,
)
from .heston_classical import HestonClassicalParams, heston_cf, heston_riccati_closed_form
from .pricing import OptionQuote, SkewPoint, atm_skew_curve, implied_vol, lewis_call_price, lewis_call_prices
from .riccati import RiccatiSolution, RoughHestonParams, riccati_rhs, solve_riccati
from .special_functions import MLParams, mittag_leffler, ml_cdf, ml_cdf_inverse, ml_density

__all__ = [
    "__version__",
    "CharFnValue",
    "EventStream",
    "HawkesMicroConfig",
    "HestonClassicalParams",
    "MLParams",
    "OptionQuote",
    "RiccatiSolution",
    "RoughHestonParams",
    "SkewPoint",
    "TimeGrid",
    "atm_skew_curve",
    "baseline_intensity",
    "cf",
    "cf_value",
    "corrector_weights",
    "frac_integral_on_grid",
    "hawkes_cf_fixed_point",
    "heston_cf",
    "heston_riccati_closed_form",
    "implied_vol",
    "kernel_matrix",
    "lewis_call_price",
    "lewis_call_prices",
    "log_cf",
    "log_cf_batch",
    "microprice_path",
    "mittag_leffler",
    "ml_cdf",
    "ml_cdf_inverse",
    "ml_density",
    "predictor_weights",
    "riccati_rhs",
    "simulate_cluster_hawkes",
    "solve_riccati",
]

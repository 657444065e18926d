"""Weekday effects in daily index returns under GARCH-family conditional variance."""

from .data_ingest import (
    AlignedTable,
    FactorTable,
    PriceSeries,
    ReturnSeries,
    align,
    compute_returns,
    load_factor_csv,
    load_price_csv,
    load_return_csv,
    load_table_csv,
)
from .descriptives import paired_t_test, significance_stars, weekday_summary, welch_t_test
from .design import ReturnPanel, build_panel, restrict_dates, split_period
from .estimation import FitResult, OptimizerOptions, fit, ols_fit
from .simulation import SimulationConfig, inject_weekday_effect, simulate
from .volatility import MeanParams, ModelSpec, VarianceParams, filter_variance

__version__ = "0.1.0"

__all__ = [
    "AlignedTable", "FactorTable", "PriceSeries", "ReturnSeries", "align", "compute_returns",
    "load_factor_csv", "load_price_csv", "load_return_csv", "load_table_csv",
    "paired_t_test", "significance_stars", "weekday_summary", "welch_t_test",
    "ReturnPanel", "build_panel", "restrict_dates", "split_period",
    "FitResult", "OptimizerOptions", "fit", "ols_fit",
    "SimulationConfig", "inject_weekday_effect", "simulate",
    "MeanParams", "ModelSpec", "VarianceParams", "filter_variance",
]

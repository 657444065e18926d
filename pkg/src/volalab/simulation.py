"""Synthetic return panels with known parameters.

Normal variates come from ``numpy.random.Generator`` on the PCG64 bit
generator (ziggurat sampler), seeded explicitly per simulation; both names
are recorded in :attr:`SimulationResult.metadata`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .data_ingest import (
    FactorTable,
    PriceSeries,
    write_factor_csv,
    write_price_csv,
)
from .design import WEEKDAYS, ReturnPanel, weekday_dummies, weekday_index
from .volatility import (
    _FAMILY_CODE,
    MeanParams,
    VarianceParams,
    check_constraints,
    unconditional_variance,
)

__all__ = [
    "FactorModel",
    "SimulationConfig",
    "SimulationResult",
    "simulate",
    "inject_weekday_effect",
    "write_simulation",
    "RNG_ALGORITHM",
]

RNG_ALGORITHM = "numpy PCG64 / ziggurat standard_normal"


@dataclass(frozen=True)
class FactorModel:
    """Daily factor generator.

    ``rf`` follows a slow AR(1) around ``rf_mean``; the four return factors
    are jointly normal with the given standard deviations and correlation
    matrix (order: mkt_rf, smb, hml, umd).
    """

    rf_mean: float = 1e-4
    rf_sd: float = 2e-5
    rf_persistence: float = 0.99
    sds: tuple[float, float, float, float] = (0.012, 0.005, 0.005, 0.008)
    corr: Optional[np.ndarray] = None

    def generate(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Return an ``(n, 5)`` array ordered rf, mkt_rf, smb, hml, umd."""
        corr = np.eye(4) if self.corr is None else np.asarray(self.corr, dtype=np.float64)
        chol = np.linalg.cholesky(corr)
        f = rng.standard_normal((n, 4)) @ chol.T * np.asarray(self.sds)
        shocks = rng.standard_normal(n)
        rf = np.empty(n)
        level = 0.0
        innov_sd = self.rf_sd * math.sqrt(1.0 - self.rf_persistence ** 2)
        for t in range(n):
            level = self.rf_persistence * level + innov_sd * shocks[t]
            rf[t] = self.rf_mean + level
        return np.column_stack([rf, f])


@dataclass(frozen=True)
class SimulationConfig:
    family: str = "garch"
    mean_params: MeanParams = field(default_factory=lambda: MeanParams(lags=np.zeros(1)))
    variance_params: VarianceParams = field(
        default_factory=lambda: VarianceParams(0.05, 0.85, 0.10))
    n: int = 5000
    burn_in: int = 1000
    seed: int = 0
    weekday_effect: Optional[Sequence[float]] = None
    factor_model: FactorModel = field(default_factory=FactorModel)
    start_date: str = "2002-01-02"

    def __post_init__(self) -> None:
        if self.n <= 0 or self.burn_in < 0:
            raise ValueError("n must be positive and burn_in non-negative")
        if self.weekday_effect is not None and len(self.weekday_effect) != 5:
            raise ValueError("weekday_effect needs one offset per weekday, Monday..Friday")


@dataclass(eq=False)
class SimulationResult:
    panel: ReturnPanel
    q2: np.ndarray
    residuals: np.ndarray
    config: SimulationConfig
    metadata: dict = field(default_factory=dict)

    @property
    def standardized(self) -> np.ndarray:
        return self.residuals / np.sqrt(self.q2)


def _business_days(start, count: int, before: int) -> np.ndarray:
    """``before`` business days preceding ``start`` followed by ``count`` from it."""
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    origin = np.busday_offset(first, -before)
    return np.busday_offset(origin, np.arange(before + count))


def simulate(config: SimulationConfig) -> SimulationResult:
    """Run the mean and variance equations forward from a seeded normal stream.

    The first ``burn_in`` rows are generated and discarded; retained rows are
    dated on consecutive business days from ``config.start_date``. Lagged
    returns of the first retained rows come from the burn-in.
    """
    family = config.family.lower()
    vp = config.variance_params
    mp = config.mean_params
    check_constraints(vp, family)
    total = config.burn_in + config.n
    rng = np.random.default_rng(config.seed)

    dates = _business_days(config.start_date, config.n, config.burn_in)
    dummies = weekday_dummies(dates)
    factors = config.factor_model.generate(total, rng)
    z = rng.standard_normal(total)

    head = mp.coefficients()[:10]
    X = np.column_stack([np.ones(total), dummies, factors])
    base_mean = X @ head
    if config.weekday_effect is not None:
        base_mean = base_mean + np.asarray(config.weekday_effect, dtype=np.float64)[weekday_index(dates)]
    exog = np.column_stack([dummies, factors])
    exog_term = exog @ vp.vx if vp.vx is not None else np.zeros(total)

    try:
        q_init = unconditional_variance(vp, family)
    except ZeroDivisionError:
        q_init = math.nan
    if not (math.isfinite(q_init) and q_init > 0):
        q_init = math.exp(vp.vc) if family == "egarch" else vp.vc

    y, e, q = _kernels.simulate_path(
        _FAMILY_CODE[family], vp.vc, vp.va, vp.vb, 0.0 if vp.gamma is None else vp.gamma,
        np.ascontiguousarray(base_mean), np.ascontiguousarray(mp.lags),
        0.0 if mp.gamma_m is None else mp.gamma_m, np.ascontiguousarray(exog_term), z, q_init,
    )

    p = mp.lag_order
    keep = slice(config.burn_in, total)
    lags = np.zeros((config.n, p))
    idx = np.arange(config.burn_in, total)
    for i in range(1, p + 1):
        src = idx - i
        ok = src >= 0
        lags[ok, i - 1] = y[src[ok]]
    panel = ReturnPanel(
        dates=dates[keep], y=y[keep],
        rf=factors[keep, 0], mkt_rf=factors[keep, 1], smb=factors[keep, 2],
        hml=factors[keep, 3], umd=factors[keep, 4],
        d_tue=dummies[keep, 0], d_wed=dummies[keep, 1], d_thu=dummies[keep, 2],
        d_fri=dummies[keep, 3], y_lags=lags,
    )
    meta = {
        "rng": RNG_ALGORITHM,
        "seed": config.seed,
        "family": family,
        "n": config.n,
        "burn_in": config.burn_in,
        "q_init": q_init,
    }
    return SimulationResult(panel, q[keep].copy(), e[keep].copy(), config, meta)


def _offsets_for(dates: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    return offsets[weekday_index(dates)]


def inject_weekday_effect(panel: ReturnPanel, offsets: Sequence[float]) -> ReturnPanel:
    """Add a per-weekday constant (Monday..Friday) to every return.

    Lagged-return columns are shifted consistently, dating each lag on the
    previous panel row or, before the first row, the previous business day.
    """
    o = np.asarray(offsets, dtype=np.float64)
    if o.shape != (5,):
        raise ValueError(f"need 5 offsets ({', '.join(WEEKDAYS)})")
    y = panel.y + _offsets_for(panel.dates, o)
    lags = panel.y_lags.copy()
    n = len(panel)
    for i in range(1, panel.lag_order + 1):
        lag_dates = np.empty(n, dtype="datetime64[D]")
        lag_dates[i:] = panel.dates[:-i] if i < n else panel.dates[:0]
        head = min(i, n)
        lag_dates[:head] = np.busday_offset(panel.dates[:head], -i, roll="backward")
        lags[:, i - 1] += _offsets_for(lag_dates, o)
    return ReturnPanel(
        dates=panel.dates, y=y, rf=panel.rf, mkt_rf=panel.mkt_rf, smb=panel.smb,
        hml=panel.hml, umd=panel.umd, d_tue=panel.d_tue, d_wed=panel.d_wed,
        d_thu=panel.d_thu, d_fri=panel.d_fri, y_lags=lags,
    )


def write_simulation(panel: ReturnPanel, out_dir, start_price: float = 100.0,
                     factor_units: str = "percent") -> dict[str, Path]:
    """Write ``prices.csv``, ``market_prices.csv`` and ``factors.csv``.

    Returns are treated as log returns: prices are ``start_price * exp(cumsum)``,
    with the opening price dated one business day before the first row. The
    market's log return is ``rf + mkt_rf``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    first = np.busday_offset(panel.dates[0], -1, roll="backward")
    dates = np.concatenate([[first], panel.dates])
    dep = start_price * np.exp(np.concatenate([[0.0], np.cumsum(panel.y)]))
    mkt = start_price * np.exp(np.concatenate([[0.0], np.cumsum(panel.rf + panel.mkt_rf)]))
    paths = {
        "prices": out / "prices.csv",
        "market_prices": out / "market_prices.csv",
        "factors": out / "factors.csv",
    }
    write_price_csv(PriceSeries(dates, dep), paths["prices"])
    write_price_csv(PriceSeries(dates, mkt), paths["market_prices"])
    write_factor_csv(
        FactorTable(panel.dates, panel.rf, panel.mkt_rf, panel.smb, panel.hml, panel.umd),
        paths["factors"], units=factor_units,
    )
    return paths

"""Regression panel: weekday dummies (Monday is the reference), lagged returns,
and subperiod splits."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

from .data_ingest import FACTOR_COLUMNS, AlignedTable, _check_increasing, to_dates
from .errors import CutoffOutOfRange, TooFewRows, WeekendDate

__all__ = [
    "ReturnPanel",
    "WEEKDAYS",
    "DUMMY_NAMES",
    "MEAN_REGRESSORS",
    "weekday_index",
    "weekday_dummies",
    "build_panel",
    "split_period",
    "restrict_dates",
]

WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday")
DUMMY_NAMES = ("d_tue", "d_wed", "d_thu", "d_fri")
# order of the non-lag columns in the mean equation design matrix
MEAN_REGRESSORS = ("const",) + DUMMY_NAMES + ("rf", "mkt_rf", "smb", "hml", "umd")
VARIANCE_REGRESSORS = DUMMY_NAMES + ("rf", "mkt_rf", "smb", "hml", "umd")


def weekday_index(dates) -> np.ndarray:
    """0 for Monday through 6 for Sunday."""
    days = to_dates(dates).astype(np.int64)
    # 1970-01-01 was a Thursday
    return (days + 3) % 7


def weekday_dummies(dates) -> np.ndarray:
    """Return an ``(n, 4)`` 0/1 array for Tuesday..Friday; Monday rows are all zero."""
    wd = weekday_index(dates)
    if np.any(wd > 4):
        bad = to_dates(dates)[wd > 4][0]
        raise WeekendDate(f"{bad} falls on a weekend")
    return (wd[:, None] == np.arange(1, 5)[None, :]).astype(np.float64)


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    dates: np.ndarray
    y: np.ndarray
    rf: np.ndarray
    mkt_rf: np.ndarray
    smb: np.ndarray
    hml: np.ndarray
    umd: np.ndarray
    d_tue: np.ndarray
    d_wed: np.ndarray
    d_thu: np.ndarray
    d_fri: np.ndarray
    y_lags: np.ndarray

    def __post_init__(self) -> None:
        dates = to_dates(self.dates)
        n = dates.size
        object.__setattr__(self, "dates", dates)
        for f in fields(self):
            if f.name in ("dates", "y_lags"):
                continue
            col = np.asarray(getattr(self, f.name), dtype=np.float64)
            if col.shape != (n,):
                raise ValueError(f"column {f.name} must have length {n}")
            object.__setattr__(self, f.name, col)
        lags = np.asarray(self.y_lags, dtype=np.float64)
        if lags.ndim == 1 and lags.size == 0:
            lags = lags.reshape(n, 0)
        if lags.ndim != 2 or lags.shape[0] != n:
            raise ValueError("y_lags must be an (n, lag_order) array")
        if not np.all(np.isfinite(lags)):
            raise ValueError("y_lags contains missing values")
        object.__setattr__(self, "y_lags", lags)
        _check_increasing(dates)
        dummies = self.dummies
        if not np.all((dummies == 0) | (dummies == 1)) or np.any(dummies.sum(axis=1) > 1):
            raise ValueError("weekday dummies must be 0/1 with at most one set per row")

    def __len__(self) -> int:
        return self.dates.size

    @property
    def lag_order(self) -> int:
        return self.y_lags.shape[1]

    @property
    def dummies(self) -> np.ndarray:
        return np.column_stack([self.d_tue, self.d_wed, self.d_thu, self.d_fri])

    @property
    def factors(self) -> np.ndarray:
        return np.column_stack([getattr(self, c) for c in ("rf", "mkt_rf", "smb", "hml", "umd")])

    def regressor_names(self) -> list[str]:
        return list(MEAN_REGRESSORS) + [f"lag{i}" for i in range(1, self.lag_order + 1)]

    def design_matrix(self) -> np.ndarray:
        """Mean-equation regressors, columns ordered as :meth:`regressor_names`."""
        return np.column_stack(
            [np.ones(len(self)), self.dummies, self.factors, self.y_lags]
        )

    def variance_exog(self) -> np.ndarray:
        """The nine optional variance-equation regressors (dummies, then factors)."""
        return np.column_stack([self.dummies, self.factors])

    def take(self, index) -> "ReturnPanel":
        kw = {f.name: getattr(self, f.name)[index] for f in fields(self)}
        return ReturnPanel(**kw)

    def with_y(self, y: np.ndarray) -> "ReturnPanel":
        return replace(self, y=np.asarray(y, dtype=np.float64))


def build_panel(aligned: AlignedTable, lag_order: int = 1, y_column: str = "y") -> ReturnPanel:
    """Assemble the regression panel, dropping the first ``lag_order`` rows.

    ``aligned`` must hold the dependent return column ``y_column`` and the
    five factor columns. Lag column ``i`` holds ``y`` shifted by ``i`` rows.
    """
    if lag_order < 0:
        raise ValueError("lag_order must be >= 0")
    cols = aligned.columns()
    missing = [c for c in (y_column,) + FACTOR_COLUMNS if c not in cols]
    if missing:
        raise KeyError(f"aligned data lacks column(s) {missing}")
    n = len(aligned.dates)
    if n <= lag_order:
        raise TooFewRows(f"{n} rows cannot support {lag_order} lag(s)")
    y_all = np.asarray(cols[y_column], dtype=np.float64)
    keep = slice(lag_order, n)
    lags = np.empty((n - lag_order, lag_order))
    for i in range(1, lag_order + 1):
        lags[:, i - 1] = y_all[lag_order - i : n - i]
    dates = to_dates(aligned.dates)[keep]
    dummies = weekday_dummies(dates)
    return ReturnPanel(
        dates=dates,
        y=y_all[keep],
        rf=cols["rf"][keep],
        mkt_rf=cols["mkt_rf"][keep],
        smb=cols["smb"][keep],
        hml=cols["hml"][keep],
        umd=cols["umd"][keep],
        d_tue=dummies[:, 0],
        d_wed=dummies[:, 1],
        d_thu=dummies[:, 2],
        d_fri=dummies[:, 3],
        y_lags=lags,
    )


def split_period(panel: ReturnPanel, cutoff) -> tuple[ReturnPanel, ReturnPanel]:
    """Split at ``cutoff``: the cutoff date itself belongs to the first part."""
    cutoff = np.datetime64(cutoff, "D")
    if len(panel) == 0 or cutoff < panel.dates[0] or cutoff >= panel.dates[-1]:
        raise CutoffOutOfRange(
            f"cutoff {cutoff} must lie in [{panel.dates[0]}, {panel.dates[-1]})"
        )
    k = int(np.searchsorted(panel.dates, cutoff, side="right"))
    return panel.take(slice(0, k)), panel.take(slice(k, None))


def restrict_dates(panel: ReturnPanel, start=None, end=None) -> ReturnPanel:
    """Rows with ``start <= date <= end`` (either bound optional)."""
    mask = np.ones(len(panel), dtype=bool)
    if start is not None:
        mask &= panel.dates >= np.datetime64(start, "D")
    if end is not None:
        mask &= panel.dates <= np.datetime64(end, "D")
    if not mask.any():
        raise TooFewRows(f"no rows between {start} and {end}")
    return panel.take(mask)

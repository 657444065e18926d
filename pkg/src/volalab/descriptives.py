"""Per-weekday descriptive statistics and t-tests for two aligned return series.

The Student-t distribution function is evaluated through the regularized
incomplete beta function (continued fraction, modified Lentz), so the module
has no dependency on a statistics package.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .data_ingest import ReturnSeries, align
from .design import WEEKDAYS, weekday_index
from .errors import DegenerateSample, NoObservations

__all__ = [
    "WeekdayStats",
    "TTestResult",
    "betainc",
    "student_t_cdf",
    "student_t_two_sided",
    "normal_two_sided",
    "paired_t_test",
    "welch_t_test",
    "significance_stars",
    "weekday_summary",
]

_EPS = 1e-16
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, 100_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float, xc: float | None = None) -> float:
    """Regularized incomplete beta ``I_x(a, b)``.

    ``xc`` may carry ``1 - x`` computed without cancellation.
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if xc is None:
        xc = 1.0 - x
    if x <= 0.0:
        return 0.0
    if xc <= 0.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log(xc))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, xc) / b


def student_t_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    t2 = t * t
    x = df / (df + t2)
    xc = t2 / (df + t2)
    return min(1.0, max(0.0, betainc(0.5 * df, 0.5, x, xc)))


def student_t_cdf(t: float, df: float) -> float:
    half = 0.5 * student_t_two_sided(t, df)
    return half if t < 0 else 1.0 - half


def normal_two_sided(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


def significance_stars(p: float) -> str:
    """``***`` for p < 0.001, ``**`` for p < 0.01, ``*`` for p < 0.05."""
    if p is None or math.isnan(p):
        return ""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p-value {p} outside [0, 1]")
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float

    def __iter__(self):
        return iter((self.t, self.df, self.p))


def _sample(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64).ravel()


def paired_t_test(diffs: Sequence[float]) -> TTestResult:
    """One-sample t-test of same-day differences against zero."""
    d = _sample(diffs)
    n = d.size
    if n < 2:
        raise DegenerateSample(f"need at least 2 differences, got {n}")
    mean = math.fsum(d) / n
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, n - 1, 1.0)
        raise DegenerateSample("differences have zero variance but nonzero mean")
    t = mean / (sd / math.sqrt(n))
    return TTestResult(t, n - 1, student_t_two_sided(t, n - 1))


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Unequal-variance two-sample t-test with Welch-Satterthwaite df."""
    a, b = _sample(a), _sample(b)
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise DegenerateSample("each sample needs at least 2 observations")
    va, vb = np.var(a, ddof=1) / na, np.var(b, ddof=1) / nb
    diff = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0.0:
        if diff == 0.0:
            return TTestResult(0.0, na + nb - 2, 1.0)
        raise DegenerateSample("both samples are constant with different means")
    t = diff / math.sqrt(se2)
    df = se2 * se2 / (va * va / (na - 1) + vb * vb / (nb - 1))
    return TTestResult(float(t), float(df), student_t_two_sided(float(t), float(df)))


@dataclass(frozen=True)
class WeekdayStats:
    """One weekday row of the descriptive table.

    ``sd_*`` are daily standard deviations of returns, ``se_*`` the standard
    errors of the corresponding means (``sd / sqrt(n)``).
    """

    weekday: str
    mean_a: float
    mean_b: float
    mean_diff: float
    sd_a: float
    sd_b: float
    sd_diff: float
    se_a: float
    se_b: float
    se_diff: float
    n: int
    t: float
    df: float
    p: float
    stars: str

    def as_dict(self) -> dict:
        return asdict(self)


def weekday_summary(a: ReturnSeries, b: ReturnSeries, period=None,
                    test: str = "paired") -> list[WeekdayStats]:
    """Monday..Friday statistics over same-day pairs of ``a`` and ``b``.

    ``period`` is an inclusive ``(start, end)`` date pair; either end may be None.
    ``test`` selects ``"paired"`` (default) or ``"welch"`` for the t column.
    """
    a = ReturnSeries(a.dates, a.returns, a.method, name="a")
    b = ReturnSeries(b.dates, b.returns, b.method, name="b")
    joined = align(a, b)
    dates = joined.dates
    mask = np.ones(dates.size, dtype=bool)
    if period is not None:
        start, end = period
        if start is not None:
            mask &= dates >= np.datetime64(start, "D")
        if end is not None:
            mask &= dates <= np.datetime64(end, "D")
    if not mask.any():
        raise NoObservations(f"no shared observations in period {period}")
    ra, rb, wd = joined["a"][mask], joined["b"][mask], weekday_index(dates[mask])
    rows = []
    for k, label in enumerate(WEEKDAYS):
        sel = wd == k
        n = int(sel.sum())
        if n == 0:
            raise NoObservations(f"no {label} observations in period {period}")
        xa, xb = ra[sel], rb[sel]
        diff = xa - xb
        sd = [float(np.std(x, ddof=1)) if n > 1 else math.nan for x in (xa, xb, diff)]
        if n < 2:
            res = TTestResult(math.nan, math.nan, math.nan)
        elif test == "welch":
            res = welch_t_test(xa, xb)
        else:
            res = paired_t_test(diff)
        mean_a = math.fsum(xa) / n
        mean_b = math.fsum(xb) / n
        rows.append(WeekdayStats(
            weekday=label,
            mean_a=mean_a,
            mean_b=mean_b,
            mean_diff=math.fsum(diff) / n,
            sd_a=sd[0], sd_b=sd[1], sd_diff=sd[2],
            se_a=sd[0] / math.sqrt(n), se_b=sd[1] / math.sqrt(n), se_diff=sd[2] / math.sqrt(n),
            n=n, t=float(res.t), df=float(res.df), p=float(res.p),
            stars=significance_stars(res.p),
        ))
    return rows

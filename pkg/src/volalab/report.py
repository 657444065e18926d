"""Fixed-width text and CSV renderings of the descriptive and estimation tables."""

from __future__ import annotations

import csv
import io
import math
from typing import Sequence

from .descriptives import WeekdayStats
from .design import WEEKDAYS
from .estimation import FitResult

__all__ = [
    "STAR_LEGEND",
    "DESCRIBE_CSV_HEADER",
    "FIT_CSV_HEADER",
    "fit_rows",
    "format_describe",
    "describe_csv",
    "format_fit",
    "format_fit_grid",
    "fit_csv",
]

STAR_LEGEND = "*** p < .001, ** p < 0.01, * p < 0.05"
DESCRIBE_CSV_HEADER = ["period", "start", "end", "weekday", "series", "mean_pct", "sd_pct",
                       "se_pct", "n", "t", "df", "p", "stars"]
FIT_CSV_HEADER = ["block", "row", "param", "coef", "std_err", "z", "p", "stars"]

_MEAN_ROWS = [("Tue", "tue"), ("Wed", "wed"), ("Thu", "thu"), ("Fri", "fri"), ("Rf", "rf"),
              ("Rm-Rf", "mkt_rf"), ("SMB", "smb"), ("HML", "hml"), ("UMD", "umd")]
_VX_ROWS = [("V_Tue", "vx_tue"), ("V_Wed", "vx_wed"), ("V_Thu", "vx_thu"), ("V_Fri", "vx_fri"),
            ("V_Rf", "vx_rf"), ("V_Rm-Rf", "vx_mkt_rf"), ("V_SMB", "vx_smb"),
            ("V_HML", "vx_hml"), ("V_UMD", "vx_umd")]


def fit_rows(result: FitResult) -> list[tuple[str, str, str]]:
    """``(block, label, parameter)`` in report order.

    Mean block: Tue..Fri, Rf, Rm-Rf, SMB, HML, UMD, R_lag1.., then gamma_M when
    present. Variance block: a (``vb``), b (``va``), gamma for the asymmetric
    families, variance regressors when present, Intercept (``vc``).
    """
    names = set(result.names)
    rows = [("mean", label, p) for label, p in _MEAN_ROWS]
    lag = 1
    while f"lag{lag}" in names:
        rows.append(("mean", f"R_lag{lag}", f"lag{lag}"))
        lag += 1
    if "gamma_m" in names:
        rows.append(("mean", "gamma_M", "gamma_m"))
    rows += [("variance", "a", "vb"), ("variance", "b", "va")]
    if "gamma" in names:
        rows.append(("variance", "gamma", "gamma"))
    rows += [("variance", label, p) for label, p in _VX_ROWS if p in names]
    rows.append(("variance", "Intercept", "vc"))
    return rows


def _num(x: float, digits: int = 4) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "n/a"
    text = f"{x:.{digits}f}"
    return text[1:] if text.startswith("-") and float(text) == 0 else text


def _pct(x: float) -> str:
    if math.isnan(x):
        return "n/a"
    text = f"{100.0 * x:.3f}"
    return ("0.000" if text == "-0.000" else text) + "%"


def _text_label(label: str) -> str:
    return "γ" if label == "gamma" else label


# ------------------------------------------------------------------ describe


def format_describe(periods: Sequence[tuple[str, str, list[WeekdayStats]]],
                    name_a: str = "A", name_b: str = "B") -> str:
    """Weekday blocks with Mean(%), St. Dev, Std. Err, T-test, Significance, N rows.

    ``periods`` holds ``(label, date-range text, rows)``. St. Dev is the daily
    standard deviation; Std. Err is the standard error of the mean.
    """
    width = 14
    head1 = f"{'Day of the week':<16}" + "".join(
        f"{(label + ' ' + span)[: 3 * width - 1]:<{3 * width}}" for label, span, _ in periods)
    head2 = f"{'':<16}" + "".join(
        f"{name_a[:width - 1]:>{width}}{name_b[:width - 1]:>{width}}{'Difference':>{width}}"
        for _ in periods)
    lines = ["Descriptive statistics and t-tests", head1.rstrip(), head2.rstrip()]
    by_day = [{s.weekday: s for s in rows} for _, _, rows in periods]
    for day in WEEKDAYS:
        lines.append(day)
        cells = {"Mean(%)": [], "St. Dev": [], "Std. Err": [], "T-test": [],
                 "Significance": [], "N": []}
        for stats in by_day:
            s = stats[day]
            cells["Mean(%)"] += [_pct(s.mean_a), _pct(s.mean_b), _pct(s.mean_diff)]
            cells["St. Dev"] += [_pct(s.sd_a), _pct(s.sd_b), _pct(s.sd_diff)]
            cells["Std. Err"] += [_pct(s.se_a), _pct(s.se_b), _pct(s.se_diff)]
            cells["T-test"] += [_num(s.t), "", ""]
            cells["Significance"] += [s.stars, "", ""]
            cells["N"] += [str(s.n)] * 3
        for label, values in cells.items():
            lines.append((f"{label:<16}" + "".join(f"{v:>{width}}" for v in values)).rstrip())
    lines.append(STAR_LEGEND)
    lines.append("t-test: paired on same-day differences; p two-sided, Student t")
    return "\n".join(lines) + "\n"


def describe_csv(periods: Sequence[tuple[str, str, list[WeekdayStats]]],
                 name_a: str = "A", name_b: str = "B") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DESCRIBE_CSV_HEADER)
    for label, span, rows in periods:
        start, _, end = span.partition(" to ")
        for s in rows:
            for series, mean, sd, se in (
                (name_a, s.mean_a, s.sd_a, s.se_a),
                (name_b, s.mean_b, s.sd_b, s.se_b),
                ("difference", s.mean_diff, s.sd_diff, s.se_diff),
            ):
                w.writerow([label, start, end, s.weekday, series, repr(100 * mean),
                            repr(100 * sd), repr(100 * se), s.n, repr(s.t), repr(s.df),
                            repr(s.p), s.stars])
    return buf.getvalue()


# ----------------------------------------------------------------------- fit


def _footer(result: FitResult) -> list[str]:
    lines = []
    if "const" in result.names:
        r = result.row("const")
        lines.append(f"Mean intercept: {_num(r['coef'])} (std. err. {_num(r['se'])}) {r['stars']}".rstrip())
    lines.append(f"Log-likelihood: {result.loglik:.4f}")
    lines.append(f"N: {result.nobs}")
    lines.append(f"Converged: {'yes' if result.converged else 'no'} "
                 f"(iterations {result.iterations}, gradient norm {result.gradient_norm:.3g}, "
                 f"one-sided stationarity {result.stationarity:.3g})")
    if not result.hessian_ok:
        lines.append("Standard errors unavailable: singular Hessian; stars suppressed")
    dist = "normal approximation" if result.p_dist == "normal" else "Student t"
    lines.append(f"p-values: {dist}")
    lines.append(STAR_LEGEND)
    return lines


def format_fit(result: FitResult, title: str = "") -> str:
    """One family's estimates in the Coef. / Std. Err. / Sig. layout."""
    lines = [title] if title else []
    lines.append(f"{'':<12}{result.family.upper():^30}")
    lines.append(f"{'':<12}{'Coef.':>10}{'Std. Err.':>12}{'Sig.':>8}")
    in_var = False
    for block, label, param in fit_rows(result):
        if block == "variance" and not in_var:
            lines.append("Variance Equation")
            in_var = True
        r = result.row(param)
        lines.append(f"{_text_label(label):<12}{_num(r['coef']):>10}{_num(r['se']):>12}{r['stars']:>8}".rstrip())
    lines += _footer(result)
    return "\n".join(lines) + "\n"


def format_fit_grid(results: Sequence[FitResult], title: str = "") -> str:
    """Families side by side; rows a family lacks (gamma for GARCH) are left blank."""
    order: list[tuple[str, str, str]] = []
    for res in results:
        for row in fit_rows(res):
            if row not in order:
                order.append(row)
    mean_rows = [r for r in order if r[0] == "mean"]
    var_rows = [r for r in order if r[0] == "variance" and r[1] != "Intercept"]
    var_rows.append(("variance", "Intercept", "vc"))
    lines = [title] if title else []
    lines.append(f"{'':<12}" + "".join(f"{r.family.upper():^30}" for r in results))
    lines.append(f"{'':<12}" + f"{'Coef.':>10}{'Std. Err.':>12}{'Sig.':>8}" * len(results))
    for block_rows, heading in ((mean_rows, None), (var_rows, "Variance Equation")):
        if heading:
            lines.append(heading)
        for _, label, param in block_rows:
            cells = ""
            for res in results:
                if param in res.names:
                    r = res.row(param)
                    cells += f"{_num(r['coef']):>10}{_num(r['se']):>12}{r['stars']:>8}"
                else:
                    cells += " " * 30
            lines.append(f"{_text_label(label):<12}{cells}".rstrip())
    lines.append("N: " + ", ".join(f"{r.family.upper()} {r.nobs}" for r in results))
    lines.append("Converged: " + ", ".join(
        f"{r.family.upper()} {'yes' if r.converged else 'no'}" for r in results))
    lines.append(STAR_LEGEND)
    return "\n".join(lines) + "\n"


def fit_csv(result: FitResult) -> str:
    """Report rows in text order, then the mean intercept."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIT_CSV_HEADER)
    rows = fit_rows(result)
    if "const" in result.names:
        rows = rows + [("mean", "Const", "const")]
    for block, label, param in rows:
        r = result.row(param)
        w.writerow([block, label, param, repr(r["coef"]), repr(r["se"]), repr(r["t"]),
                    repr(r["p"]), r["stars"]])
    return buf.getvalue()

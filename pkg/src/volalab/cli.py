"""Command-line entry point: ``volalab describe|fit|plotdata|simulate``.

Every run option can come from a flat ``key=value`` file given with
``--config``; flags on the command line win over the file. Relative paths in a
config file are resolved against the file's directory.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .data_ingest import (
    AlignedTable,
    align,
    compute_returns,
    load_factor_csv,
    load_price_csv,
    write_return_csv,
    write_table_csv,
)
from .descriptives import weekday_summary
from .design import ReturnPanel, build_panel, restrict_dates
from .errors import ConfigError, NonConvergence, VolalabError
from .estimation import FitResult, OptimizerOptions, fit
from .report import describe_csv, fit_csv, format_describe, format_fit, format_fit_grid
from .simulation import SimulationConfig, simulate, write_simulation
from .volatility import FAMILIES, MeanParams, ModelSpec, VarianceParams

__all__ = ["RunConfig", "main", "read_config_file", "cmd_describe", "cmd_fit",
           "cmd_plotdata", "cmd_simulate", "load_simulation_config", "DEFAULT_SIMULATION"]

logger = logging.getLogger("volalab")

_PATH_KEYS = ("prices", "market_prices", "factors", "out")


# --------------------------------------------------------------------- config


def read_config_file(path) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key = key.strip().lower().replace("-", "_")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: {key} given twice")
        out[key] = value.strip()
    return out


@dataclass(frozen=True)
class RunConfig:
    prices: Optional[str] = None
    market_prices: Optional[str] = None
    factors: Optional[str] = None
    method: str = "log"
    families: tuple[str, ...] = FAMILIES
    start: Optional[str] = None
    end: Optional[str] = None
    split: Optional[str] = None
    lags: int = 1
    variance_regressors: str = "none"
    mean_variance: bool = False
    out: str = "volalab_out"
    seed: int = 0
    restarts: int = 0
    factor_units: str = "percent"

    def __post_init__(self) -> None:
        if self.method not in ("simple", "log"):
            raise ConfigError(f"method must be simple or log, not {self.method!r}")
        if self.factor_units not in ("percent", "decimal"):
            raise ConfigError(f"factor-units must be percent or decimal, not {self.factor_units!r}")
        if self.variance_regressors not in ("none", "all"):
            raise ConfigError("variance-regressors must be none or all")
        if self.lags < 0 or self.restarts < 0:
            raise ConfigError("lags and restarts must be non-negative")
        bad = [f for f in self.families if f not in FAMILIES]
        if bad or not self.families:
            raise ConfigError(f"unknown family {bad or self.families}")
        for key in ("prices", "market_prices", "factors", "out"):
            if getattr(self, key) is not None and not str(getattr(self, key)).strip():
                raise ConfigError(f"{key} must be a nonempty path")
        bounds = {}
        for key in ("start", "end", "split"):
            value = getattr(self, key)
            if value is not None:
                try:
                    bounds[key] = np.datetime64(value, "D")
                except ValueError:
                    raise ConfigError(f"{key}: bad date {value!r}") from None
        if "start" in bounds and "end" in bounds and not bounds["start"] < bounds["end"]:
            raise ConfigError("start must be before end")
        if "split" in bounds:
            if ("start" in bounds and bounds["split"] < bounds["start"]) or (
                    "end" in bounds and bounds["split"] >= bounds["end"]):
                raise ConfigError("split must lie in [start, end)")

    def require(self, *keys: str) -> None:
        missing = [k.replace("_", "-") for k in keys if getattr(self, k) is None]
        if missing:
            raise ConfigError("missing required option(s): " + ", ".join("--" + m for m in missing))


def _families(value: str) -> tuple[str, ...]:
    value = value.strip().lower()
    if value == "all":
        return FAMILIES
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def _int(key: str, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: not an integer: {value!r}") from None


_CONVERT = {
    "family": ("families", _families),
    "lags": ("lags", lambda v: _int("lags", v)),
    "seed": ("seed", lambda v: _int("seed", v)),
    "restarts": ("restarts", lambda v: _int("restarts", v)),
    "mean_variance": ("mean_variance", _bool),
}
_RUN_KEYS = {"prices", "market_prices", "factors", "method", "family", "start", "end",
             "split", "lags", "variance_regressors", "mean_variance", "out", "seed",
             "restarts", "factor_units"}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, object] = {}
    if getattr(args, "config", None):
        base = Path(args.config).resolve().parent
        for key, value in read_config_file(args.config).items():
            if key not in _RUN_KEYS:
                raise ConfigError(f"{args.config}: unknown key {key!r}")
            if key in _PATH_KEYS and value and not Path(value).is_absolute():
                value = str(base / value)
            values[key] = value
    for key in _RUN_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    kwargs = {}
    for key, value in values.items():
        target, conv = _CONVERT.get(key, (key, lambda v: v))
        kwargs[target] = conv(value)
    return RunConfig(**kwargs)


# ------------------------------------------------------------------- periods


def _periods(cfg: RunConfig, first, last) -> list[tuple[str, np.datetime64, np.datetime64]]:
    """``(label, start, end)`` with inclusive bounds clipped to the data."""
    lo = max(first, np.datetime64(cfg.start, "D")) if cfg.start else first
    hi = min(last, np.datetime64(cfg.end, "D")) if cfg.end else last
    out = [("full", lo, hi)]
    if cfg.split:
        cut = np.datetime64(cfg.split, "D")
        if not lo <= cut < hi:
            raise ConfigError(f"split {cut} outside the data range {lo} to {hi}")
        out += [("pre", lo, cut), ("post", cut + 1, hi)]
    return out


def _span(dates: np.ndarray, lo, hi) -> str:
    inside = dates[(dates >= lo) & (dates <= hi)]
    if inside.size == 0:
        return f"{lo} to {hi}"
    return f"{inside[0]} to {inside[-1]}"


def _write(path: Path, text: str) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _series_names(cfg: RunConfig) -> tuple[str, str]:
    a, b = Path(cfg.prices).stem, Path(cfg.market_prices).stem
    return (a, b) if a != b else ("a", "b")


# ------------------------------------------------------------------ commands


def cmd_describe(cfg: RunConfig) -> dict[str, Path]:
    """Weekday descriptives of the dependent and market series per period."""
    cfg.require("prices", "market_prices")
    name_a, name_b = _series_names(cfg)
    ra = compute_returns(load_price_csv(cfg.prices), cfg.method, name="a")
    rb = compute_returns(load_price_csv(cfg.market_prices), cfg.method, name="b")
    dates = align(ra, rb).dates
    blocks = []
    for label, lo, hi in _periods(cfg, dates[0], dates[-1]):
        blocks.append((label, _span(dates, lo, hi), weekday_summary(ra, rb, (lo, hi))))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"text": out / "describe.txt", "csv": out / "describe.csv"}
    _write(paths["text"], format_describe(blocks, name_a, name_b))
    _write(paths["csv"], describe_csv(blocks, name_a, name_b))
    return paths


def _fit_panel(cfg: RunConfig) -> ReturnPanel:
    returns = compute_returns(load_price_csv(cfg.prices), cfg.method, name="y")
    factors = load_factor_csv(cfg.factors, units=cfg.factor_units)
    return build_panel(align(returns, factors), lag_order=cfg.lags)


def _threads(jobs: int) -> int:
    raw = os.environ.get("VOLALAB_THREADS")
    if raw is None or raw.strip() == "":
        return max(1, min(jobs, os.cpu_count() or 1))
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"VOLALAB_THREADS must be an integer, not {raw!r}") from None
    if cap < 1:
        raise ConfigError("VOLALAB_THREADS must be at least 1")
    return max(1, min(jobs, cap))


def cmd_fit(cfg: RunConfig) -> tuple[dict[str, Path], list[FitResult]]:
    """Fit every requested family on every period; reports are written in grid order."""
    cfg.require("prices", "factors")
    panel = _fit_panel(cfg)
    periods = _periods(cfg, panel.dates[0], panel.dates[-1])
    panels = {label: restrict_dates(panel, lo, hi) for label, lo, hi in periods}
    spans = {label: _span(panel.dates, lo, hi) for label, lo, hi in periods}
    opts = OptimizerOptions(seed=cfg.seed, restarts=cfg.restarts)
    jobs = [(fam, label) for label, _, _ in periods for fam in cfg.families]

    def run(job):
        fam, label = job
        spec = ModelSpec(family=fam, lag_order=cfg.lags, include_mean_variance=cfg.mean_variance,
                         variance_regressors=cfg.variance_regressors)
        return fit(panels[label], spec, opts)

    with ThreadPoolExecutor(max_workers=_threads(len(jobs))) as pool:
        results = list(pool.map(run, jobs))

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    by_job = dict(zip(jobs, results))
    summary = ["family,period,start,end,nobs,loglik,converged,gradient_norm,stationarity,iterations"]
    for label, _, _ in periods:
        title_span = f"{label} period, {spans[label]}"
        group = []
        for fam in cfg.families:
            res = by_job[(fam, label)]
            group.append(res)
            stem = f"fit_{fam}_{label}"
            paths[stem + ".txt"] = out / f"{stem}.txt"
            paths[stem + ".csv"] = out / f"{stem}.csv"
            _write(paths[stem + ".txt"], format_fit(res, f"{fam.upper()} estimates, {title_span}"))
            _write(paths[stem + ".csv"], fit_csv(res))
            start, _, end = spans[label].partition(" to ")
            summary.append(f"{fam},{label},{start},{end},{res.nobs},{res.loglik!r},"
                           f"{str(res.converged).lower()},{res.gradient_norm!r},{res.stationarity!r},"
                           f"{res.iterations}")
        paths[f"fit_{label}.txt"] = out / f"fit_{label}.txt"
        _write(paths[f"fit_{label}.txt"], format_fit_grid(group, f"Estimates, {title_span}"))
    paths["fit_summary.csv"] = out / "fit_summary.csv"
    _write(paths["fit_summary.csv"], "\n".join(summary) + "\n")
    return paths, results


def cmd_plotdata(cfg: RunConfig) -> dict[str, Path]:
    """Daily return series per index and the two closing-price paths on shared dates."""
    cfg.require("prices", "market_prices")
    name_a, name_b = _series_names(cfg)
    pa, pb = load_price_csv(cfg.prices, "close_a"), load_price_csv(cfg.market_prices, "close_b")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, prices in ((name_a, pa), (name_b, pb)):
        rets = compute_returns(prices, cfg.method, name=name)
        lo = np.datetime64(cfg.start, "D") if cfg.start else rets.dates[0]
        hi = np.datetime64(cfg.end, "D") if cfg.end else rets.dates[-1]
        keep = (rets.dates >= lo) & (rets.dates <= hi)
        rets = replace(rets, dates=rets.dates[keep], returns=rets.returns[keep])
        paths[f"returns_{name}"] = out / f"returns_{name}.csv"
        write_return_csv(rets, paths[f"returns_{name}"])
    joined = align(pa, pb)
    lo = np.datetime64(cfg.start, "D") if cfg.start else joined.dates[0]
    hi = np.datetime64(cfg.end, "D") if cfg.end else joined.dates[-1]
    keep = (joined.dates >= lo) & (joined.dates <= hi)
    table = AlignedTable(joined.dates[keep], {k: v[keep] for k, v in joined.data.items()})
    paths["prices_compare"] = out / "prices_compare.csv"
    write_table_csv(table, paths["prices_compare"])
    return paths


# ---------------------------------------------------------------- simulation

# Daily-scale GARCH with a depressed Monday: unconditional volatility of 1%.
DEFAULT_SIMULATION = {
    "family": "garch",
    "n": "3520",
    "burn_in": "1000",
    "seed": "2002",
    "start_date": "2002-01-02",
    "const": "0.0003",
    "tue": "0.0", "wed": "0.0", "thu": "0.0", "fri": "0.0",
    "rf": "1.0",
    "mkt_rf": "0.9",
    "smb": "0.5",
    "hml": "-0.3",
    "umd": "0.05",
    "lags": "0.03",
    "vc": "2e-6",
    "va": "0.90",
    "vb": "0.08",
    "weekday_effect": "-0.001,0,0,0,0",
    "factor_units": "percent",
}
_SIM_KEYS = set(DEFAULT_SIMULATION) | {"gamma", "gamma_m", "vx"}


def _floats(key: str, text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{key}: bad number list {text!r}") from None


def load_simulation_config(path=None, seed: Optional[int] = None) -> tuple[SimulationConfig, str]:
    """Simulation settings from ``path`` layered over :data:`DEFAULT_SIMULATION`.

    Returns the config and the factor units for the emitted factor file.
    """
    values = dict(DEFAULT_SIMULATION)
    if path is not None:
        for key, value in read_config_file(path).items():
            if key not in _SIM_KEYS:
                raise ConfigError(f"{path}: unknown simulation key {key!r}")
            values[key] = value
    if seed is not None:
        values["seed"] = str(seed)
    num = {}
    for key in ("const", "tue", "wed", "thu", "fri", "rf", "mkt_rf", "smb", "hml", "umd",
                "vc", "va", "vb", "gamma", "gamma_m"):
        if values.get(key, "") != "":
            (num[key],) = _floats(key, values[key])
    family = values["family"].strip().lower()
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}")
    if family != "garch" and "gamma" not in num:
        num["gamma"] = 0.0
    mean = MeanParams(
        **{k: num[k] for k in ("const", "tue", "wed", "thu", "fri", "rf", "mkt_rf", "smb",
                               "hml", "umd")},
        lags=np.asarray(_floats("lags", values["lags"])),
        gamma_m=num.get("gamma_m"),
    )
    vx = _floats("vx", values["vx"]) if values.get("vx") else None
    var = VarianceParams(num["vc"], num["va"], num["vb"],
                         gamma=num.get("gamma") if family != "garch" else None,
                         vx=None if vx is None else np.asarray(vx))
    wd = _floats("weekday_effect", values["weekday_effect"]) if values.get("weekday_effect") else None
    try:
        cfg = SimulationConfig(
            family=family, mean_params=mean, variance_params=var,
            n=_int("n", values["n"]), burn_in=_int("burn_in", values["burn_in"]),
            seed=_int("seed", values["seed"]), weekday_effect=wd,
            start_date=values["start_date"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    units = values["factor_units"]
    if units not in ("percent", "decimal"):
        raise ConfigError(f"factor_units must be percent or decimal, not {units!r}")
    return cfg, units


def _truth_lines(cfg: SimulationConfig) -> list[str]:
    mp, vp = cfg.mean_params, cfg.variance_params
    rows = [("family", cfg.family), ("seed", cfg.seed), ("n", cfg.n), ("burn_in", cfg.burn_in)]
    rows += list(zip(mp.names(), (repr(float(v)) for v in mp.to_vector())))
    rows += list(zip(vp.names(cfg.family), (repr(float(v)) for v in vp.to_vector(cfg.family))))
    if cfg.weekday_effect is not None:
        for day, v in zip(("monday", "tuesday", "wednesday", "thursday", "friday"),
                          cfg.weekday_effect):
            rows.append((f"effect_{day}", repr(float(v))))
    return [f"{k},{v}" for k, v in rows]


def cmd_simulate(out_dir, sim_config=None, seed: Optional[int] = None) -> dict[str, Path]:
    """Simulate a panel and write ingestible price and factor files plus the truth."""
    cfg, units = load_simulation_config(sim_config, seed)
    result = simulate(cfg)
    out = Path(out_dir)
    paths = write_simulation(result.panel, out, factor_units=units)
    truth = _truth_lines(cfg)
    paths["truth"] = out / "truth.csv"
    _write(paths["truth"], "param,value\n" + "\n".join(truth) + "\n")
    lags = cfg.mean_params.lag_order
    paths["config"] = out / "volalab.conf"
    _write(paths["config"], "\n".join([
        "prices=prices.csv",
        "market-prices=market_prices.csv",
        "factors=factors.csv",
        f"factor-units={units}",
        "method=log",
        f"lags={lags}",
    ]) + "\n")
    print("true parameters:")
    for line in truth:
        print("  " + line.replace(",", " = ", 1))
    return paths


# ------------------------------------------------------------------- parsing


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override its entries")
    common.add_argument("--prices", help="dependent index closes (date,close)")
    common.add_argument("--market-prices", dest="market_prices", help="market index closes")
    common.add_argument("--factors", help="daily factor file")
    common.add_argument("--method", choices=("simple", "log"), default=None)
    common.add_argument("--family", help="garch, egarch, gjr, a comma list, or all")
    common.add_argument("--start", help="first date YYYY-MM-DD")
    common.add_argument("--end", help="last date YYYY-MM-DD")
    common.add_argument("--split", help="last date of the pre period YYYY-MM-DD")
    common.add_argument("--lags", type=int, default=None)
    common.add_argument("--variance-regressors", dest="variance_regressors",
                        choices=("none", "all"), default=None)
    common.add_argument("--mean-variance", dest="mean_variance", action="store_const",
                        const=True, default=None, help="add lagged variance to the mean")
    common.add_argument("--restarts", type=int, default=None, help="extra jittered starts")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--factor-units", dest="factor_units",
                        choices=("percent", "decimal"), default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="volalab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("describe", parents=[common], help="weekday descriptive statistics")
    sub.add_parser("fit", parents=[common], help="GARCH-family estimates")
    sub.add_parser("plotdata", parents=[common], help="return and price series for plotting")
    sim = sub.add_parser("simulate", parents=[common], help="write a simulated panel")
    sim.add_argument("--sim-config", dest="sim_config", help="simulation key=value file")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.command == "simulate":
            out = args.out
            if out is None and args.config:
                out = build_run_config(args).out
            cmd_simulate(out or "volalab_sim", args.sim_config, args.seed)
            return 0
        cfg = build_run_config(args)
        if args.command == "describe":
            cmd_describe(cfg)
        elif args.command == "plotdata":
            cmd_plotdata(cfg)
        else:
            _, results = cmd_fit(cfg)
            failed = [f"{r.family} (n={r.nobs})" for r in results if not r.converged]
            if failed:
                print("not converged: " + ", ".join(failed), file=sys.stderr)
                return NonConvergence.exit_code
        return 0
    except VolalabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

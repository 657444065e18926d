"""Loading daily price and factor files, return computation, date alignment.

File formats
------------
Price CSV::

    date,close
    2002-01-02,1234.5

Factor CSV (columns in any order)::

    date,mkt_rf,smb,hml,umd,rf

Both are UTF-8, LF or CRLF line endings, ISO ``YYYY-MM-DD`` dates and ``.`` as
the decimal point. Factor files are read as percent unless ``units="decimal"``.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
import re
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Literal, Mapping, Protocol, Sequence

import numpy as np

from .errors import (
    DuplicateDate,
    EmptyFile,
    EmptyIntersection,
    MalformedRow,
    MissingColumn,
    NonPositivePrice,
    TooShort,
)

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "FactorTable",
    "AlignedTable",
    "FACTOR_COLUMNS",
    "load_price_csv",
    "write_price_csv",
    "load_factor_csv",
    "write_factor_csv",
    "write_return_csv",
    "load_return_csv",
    "load_table_csv",
    "write_table_csv",
    "compute_returns",
    "align",
    "to_dates",
]

ReturnMethod = Literal["simple", "log"]
Units = Literal["percent", "decimal"]

FACTOR_COLUMNS = ("mkt_rf", "smb", "hml", "umd", "rf")
_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def to_dates(values) -> np.ndarray:
    """Coerce strings, ``datetime.date`` objects or datetime64 to ``datetime64[D]``."""
    return np.asarray(values, dtype="datetime64[D]")


def _check_increasing(dates: np.ndarray) -> None:
    if dates.size > 1:
        steps = np.diff(dates).astype(np.int64)
        if np.any(steps == 0):
            dup = dates[1:][steps == 0][0]
            raise DuplicateDate(f"duplicate date {dup}")
        if np.any(steps < 0):
            raise ValueError("dates must be strictly increasing")


class DatedTable(Protocol):
    dates: np.ndarray

    def columns(self) -> Mapping[str, np.ndarray]: ...


@dataclass(frozen=True, eq=False)
class PriceSeries:
    dates: np.ndarray
    closes: np.ndarray
    name: str = "close"

    def __post_init__(self) -> None:
        dates = to_dates(self.dates)
        closes = np.asarray(self.closes, dtype=np.float64)
        if dates.ndim != 1 or dates.shape != closes.shape:
            raise ValueError("dates and closes must be 1-d and of equal length")
        if dates.size < 2:
            raise TooShort("a price series needs at least two observations")
        if not np.all(closes > 0):
            raise NonPositivePrice("all closes must be positive")
        _check_increasing(dates)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "closes", closes)

    def __len__(self) -> int:
        return self.dates.size

    def columns(self) -> dict[str, np.ndarray]:
        return {self.name: self.closes}


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    dates: np.ndarray
    returns: np.ndarray
    method: ReturnMethod = "log"
    name: str = "returns"

    def __post_init__(self) -> None:
        dates = to_dates(self.dates)
        returns = np.asarray(self.returns, dtype=np.float64)
        if dates.ndim != 1 or dates.shape != returns.shape:
            raise ValueError("dates and returns must be 1-d and of equal length")
        _check_increasing(dates)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "returns", returns)

    def __len__(self) -> int:
        return self.dates.size

    def columns(self) -> dict[str, np.ndarray]:
        return {self.name: self.returns}


@dataclass(frozen=True, eq=False)
class FactorTable:
    """Daily factor returns, all stored as decimals."""

    dates: np.ndarray
    rf: np.ndarray
    mkt_rf: np.ndarray
    smb: np.ndarray
    hml: np.ndarray
    umd: np.ndarray

    def __post_init__(self) -> None:
        dates = to_dates(self.dates)
        object.__setattr__(self, "dates", dates)
        for name in FACTOR_COLUMNS:
            col = np.asarray(getattr(self, name), dtype=np.float64)
            if col.shape != dates.shape:
                raise ValueError(f"factor column {name} has wrong length")
            object.__setattr__(self, name, col)
        _check_increasing(dates)

    def __len__(self) -> int:
        return self.dates.size

    def columns(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in FACTOR_COLUMNS}


@dataclass(frozen=True, eq=False)
class AlignedTable:
    """Columns from several series restricted to their common dates."""

    dates: np.ndarray
    data: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return self.dates.size

    def __getitem__(self, key: str) -> np.ndarray:
        return self.data[key]

    def columns(self) -> dict[str, np.ndarray]:
        return dict(self.data)


# --------------------------------------------------------------------------- io


def _read_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    path = Path(path)
    with path.open("r", encoding="utf-8-sig", newline="") as fh:
        rows = [(i, row) for i, row in enumerate(csv.reader(fh), start=1)]
    rows = [(i, row) for i, row in rows if row and any(cell.strip() for cell in row)]
    if not rows:
        raise EmptyFile(f"{path}: no header")
    header = [cell.strip().lower() for cell in rows[0][1]]
    body = rows[1:]
    if not body:
        raise EmptyFile(f"{path}: no data rows")
    return header, body


def _parse_date(path, line: int, text: str) -> np.datetime64:
    text = text.strip()
    if not _ISO_DATE.match(text):
        raise MalformedRow(path, line, f"bad date {text!r}")
    try:
        return np.datetime64(dt.date.fromisoformat(text), "D")
    except ValueError:
        raise MalformedRow(path, line, f"bad date {text!r}") from None


def _parse_float(path, line: int, text: str) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise MalformedRow(path, line, f"bad number {text!r}") from None
    if not math.isfinite(value):
        raise MalformedRow(path, line, f"non-finite number {text!r}")
    return value


def _sorted_unique(path, dates: list, lines: list[int]) -> np.ndarray:
    arr = to_dates(dates)
    order = np.argsort(arr, kind="stable")
    arr = arr[order]
    if arr.size > 1:
        same = np.flatnonzero(arr[1:] == arr[:-1])
        if same.size:
            raise DuplicateDate(f"{path}: duplicate date {arr[same[0]]} "
                                f"(line {lines[order[same[0] + 1]]})")
    return order


def load_price_csv(path, name: str = "close") -> PriceSeries:
    """Read a ``date,close`` file into a date-sorted :class:`PriceSeries`."""
    header, body = _read_rows(path)
    if header != ["date", "close"]:
        raise MalformedRow(path, 1, f"expected header 'date,close', got {','.join(header)!r}")
    dates, closes, lines = [], [], []
    for line, row in body:
        if len(row) != 2:
            raise MalformedRow(path, line, f"expected 2 fields, got {len(row)}")
        dates.append(_parse_date(path, line, row[0]))
        close = _parse_float(path, line, row[1])
        if close <= 0:
            raise NonPositivePrice(f"{path}:{line}: close {close} is not positive")
        closes.append(close)
        lines.append(line)
    order = _sorted_unique(path, dates, lines)
    if len(order) < 2:
        raise TooShort(f"{path}: a price file needs at least two rows")
    return PriceSeries(to_dates(dates)[order], np.asarray(closes)[order], name=name)


def load_factor_csv(path, units: Units = "percent") -> FactorTable:
    """Read a daily factor file; percent inputs are divided by 100."""
    if units not in ("percent", "decimal"):
        raise ValueError(f"units must be 'percent' or 'decimal', not {units!r}")
    header, body = _read_rows(path)
    missing = [c for c in ("date",) + FACTOR_COLUMNS if c not in header]
    if missing:
        raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}")
    idx = {name: header.index(name) for name in ("date",) + FACTOR_COLUMNS}
    scale = 100.0 if units == "percent" else 1.0
    dates, lines = [], []
    values: dict[str, list[float]] = {name: [] for name in FACTOR_COLUMNS}
    for line, row in body:
        if len(row) != len(header):
            raise MalformedRow(path, line, f"expected {len(header)} fields, got {len(row)}")
        dates.append(_parse_date(path, line, row[idx["date"]]))
        for name in FACTOR_COLUMNS:
            values[name].append(_parse_float(path, line, row[idx[name]]) / scale)
        lines.append(line)
    order = _sorted_unique(path, dates, lines)
    cols = {name: np.asarray(v)[order] for name, v in values.items()}
    return FactorTable(to_dates(dates)[order], **cols)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_price_csv(series: PriceSeries, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("date,close\n")
        for d, c in zip(series.dates, series.closes):
            fh.write(f"{d},{_fmt(c)}\n")


def write_factor_csv(table: FactorTable, path, units: Units = "percent") -> None:
    scale = 100.0 if units == "percent" else 1.0
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("date," + ",".join(FACTOR_COLUMNS) + "\n")
        for i, d in enumerate(table.dates):
            cells = [_fmt(getattr(table, c)[i] * scale) for c in FACTOR_COLUMNS]
            fh.write(f"{d}," + ",".join(cells) + "\n")


def write_return_csv(series: ReturnSeries, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("date,return\n")
        for d, r in zip(series.dates, series.returns):
            fh.write(f"{d},{_fmt(r)}\n")


def load_return_csv(path, name: str = "returns", method: ReturnMethod = "log") -> ReturnSeries:
    """Read a ``date,return`` file written by :func:`write_return_csv`."""
    table = load_table_csv(path)
    if list(table.data) != ["return"]:
        raise MalformedRow(path, 1, "expected header 'date,return'")
    return ReturnSeries(table.dates, table["return"], method=method, name=name)


def load_table_csv(path) -> AlignedTable:
    """Read any ``date,<numeric>...`` file; columns keep their header order."""
    header, body = _read_rows(path)
    if not header or header[0] != "date" or len(header) < 2:
        raise MalformedRow(path, 1, "first column must be 'date' followed by numeric columns")
    if len(set(header)) != len(header):
        raise MalformedRow(path, 1, "repeated column name")
    dates, lines = [], []
    values: list[list[float]] = [[] for _ in header[1:]]
    for line, row in body:
        if len(row) != len(header):
            raise MalformedRow(path, line, f"expected {len(header)} fields, got {len(row)}")
        dates.append(_parse_date(path, line, row[0]))
        for col, text in zip(values, row[1:]):
            col.append(_parse_float(path, line, text))
        lines.append(line)
    order = _sorted_unique(path, dates, lines)
    data = {name: np.asarray(v)[order] for name, v in zip(header[1:], values)}
    return AlignedTable(to_dates(dates)[order], data)


def write_table_csv(table: AlignedTable, path) -> None:
    names = list(table.data)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["date"] + names) + "\n")
        for i, d in enumerate(table.dates):
            fh.write(f"{d}," + ",".join(_fmt(table.data[c][i]) for c in names) + "\n")


# ----------------------------------------------------------------- transforms


def compute_returns(prices: PriceSeries, method: ReturnMethod = "log",
                    name: str = "returns") -> ReturnSeries:
    """Day-over-day returns, each dated at the later of the two closes."""
    if method not in ("simple", "log"):
        raise ValueError(f"method must be 'simple' or 'log', not {method!r}")
    closes = prices.closes
    if closes.size < 2:
        raise TooShort("need at least two prices")
    if method == "log":
        rets = np.log(closes[1:] / closes[:-1])
    else:
        rets = closes[1:] / closes[:-1] - 1.0
    return ReturnSeries(prices.dates[1:], rets, method=method, name=name)


def align(*tables: DatedTable) -> AlignedTable:
    """Inner-join tables on their dates.

    Column names must not collide across inputs; rename series through their
    ``name`` field first.
    """
    if len(tables) == 1 and isinstance(tables[0], Sequence):
        tables = tuple(tables[0])
    if len(tables) < 2:
        raise ValueError("align needs at least two tables")
    common = reduce(np.intersect1d, (to_dates(t.dates) for t in tables))
    if common.size == 0:
        raise EmptyIntersection("input tables share no dates")
    data: dict[str, np.ndarray] = {}
    for t in tables:
        dates = to_dates(t.dates)
        pos = np.searchsorted(dates, common)
        for key, col in t.columns().items():
            if key in data:
                raise ValueError(f"column {key!r} appears in more than one input")
            data[key] = np.asarray(col)[pos]
    return AlignedTable(common, data)

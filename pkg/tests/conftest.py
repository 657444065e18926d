import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from volalab.data_ingest import FactorTable, PriceSeries, write_factor_csv, write_price_csv
from volalab.simulation import SimulationConfig, simulate
from volalab.volatility import MeanParams, VarianceParams

settings.register_profile(
    "default", max_examples=100, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def business_days(start: str, n: int) -> np.ndarray:
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    return np.busday_offset(first, np.arange(n))


@pytest.fixture
def write_prices(tmp_path):
    def _write(name, dates, closes):
        path = tmp_path / name
        write_price_csv(PriceSeries(np.asarray(dates, dtype="datetime64[D]"),
                                    np.asarray(closes, dtype=float)), path)
        return path
    return _write


@pytest.fixture
def write_text(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write


@pytest.fixture
def write_factors(tmp_path):
    def _write(name, dates, cols, units="percent"):
        path = tmp_path / name
        write_factor_csv(FactorTable(np.asarray(dates, dtype="datetime64[D]"), **cols), path,
                         units=units)
        return path
    return _write


@pytest.fixture(scope="session")
def daily_garch_panel():
    """A 3000-row daily-scale GARCH panel with factor loadings and one lag."""
    mp = MeanParams(const=2e-4, mkt_rf=0.9, smb=0.4, hml=-0.2, umd=0.05, lags=[0.05])
    cfg = SimulationConfig(family="garch", mean_params=mp,
                           variance_params=VarianceParams(2e-6, 0.90, 0.08), n=3000, seed=11)
    return simulate(cfg)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(capsys):
    """Print and record one ``ACCEPTANCE <n> PASS|FAIL`` line, then assert it."""
    def _verdict(number, title, ok, detail=""):
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return _verdict


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

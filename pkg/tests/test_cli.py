import csv
import shutil

import numpy as np
import pytest

from volalab import cli
from volalab.cli import RunConfig, build_run_config, load_simulation_config, main, read_config_file
from volalab.data_ingest import load_factor_csv, load_price_csv, load_return_csv, load_table_csv
from volalab.errors import EXIT_CODES, ConfigError, ConstraintViolation

from conftest import business_days


def _csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --------------------------------------------------------------------- config


def test_config_file_syntax(write_text):
    path = write_text("c.conf", "# comment\nmarket-prices = m.csv  # trailing\n\nLAGS=2\n")
    assert read_config_file(path) == {"market_prices": "m.csv", "lags": "2"}


@pytest.mark.parametrize("body", ["lags=1\nlags=2\n", "just a line\n"])
def test_config_file_errors(write_text, body):
    with pytest.raises(ConfigError):
        read_config_file(write_text("c.conf", body))


def test_flags_override_config(tmp_path, write_text):
    conf = write_text("c.conf", "prices=data/p.csv\nlags=3\nfamily=gjr\nsplit=2005-01-03\n")
    args = cli._parser().parse_args(["fit", "--config", str(conf), "--lags", "1"])
    cfg = build_run_config(args)
    assert cfg.lags == 1
    assert cfg.families == ("gjr",)
    assert cfg.split == "2005-01-03"
    assert cfg.prices == str(tmp_path / "data" / "p.csv")
    args = cli._parser().parse_args(["fit", "--config", str(conf), "--family", "all",
                                     "--prices", "q.csv"])
    cfg = build_run_config(args)
    assert cfg.families == ("garch", "egarch", "gjr")
    assert cfg.prices == "q.csv"


@pytest.mark.parametrize("kw", [
    {"start": "2010-01-01", "end": "2009-01-01"},
    {"start": "2010-01-01", "end": "2010-01-01"},
    {"split": "2011-01-01", "end": "2011-01-01"},
    {"prices": " "},
    {"families": ("arch",)},
    {"lags": -1},
    {"method": "pct"},
])
def test_run_config_invariants(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw)


def test_unknown_config_key_exit_code(tmp_path, write_text):
    conf = write_text("c.conf", "prices=p.csv\ncolour=blue\n")
    assert main(["describe", "--config", str(conf), "--out", str(tmp_path)]) == EXIT_CODES["config"]


def test_missing_option_exit_code(tmp_path):
    assert main(["describe", "--out", str(tmp_path)]) == EXIT_CODES["config"]


def test_missing_file_exit_code(tmp_path):
    rc = main(["plotdata", "--prices", str(tmp_path / "nope.csv"),
               "--market-prices", str(tmp_path / "nope.csv"), "--out", str(tmp_path)])
    assert rc == EXIT_CODES["ingest"]


def test_malformed_input_exit_code(tmp_path, write_text):
    bad = write_text("bad.csv", "date,close\n2002-01-02,1\n2002-01-03,x\n")
    rc = main(["plotdata", "--prices", str(bad), "--market-prices", str(bad),
               "--out", str(tmp_path)])
    assert rc == EXIT_CODES["ingest"]


def test_threads_env(monkeypatch):
    monkeypatch.setenv("VOLALAB_THREADS", "2")
    assert cli._threads(9) == 2
    assert cli._threads(1) == 1
    monkeypatch.setenv("VOLALAB_THREADS", "0")
    with pytest.raises(ConfigError):
        cli._threads(3)
    monkeypatch.setenv("VOLALAB_THREADS", "many")
    with pytest.raises(ConfigError):
        cli._threads(3)
    monkeypatch.delenv("VOLALAB_THREADS")
    assert 1 <= cli._threads(9) <= 9


# ------------------------------------------------------------------- plotdata


def test_two_row_prices_give_one_return(tmp_path, write_prices):
    days = business_days("2002-01-02", 2)
    a = write_prices("nbi.csv", days, [100.0, 101.0])
    b = write_prices("spx.csv", days, [50.0, 49.0])
    out = tmp_path / "out"
    assert main(["plotdata", "--prices", str(a), "--market-prices", str(b), "--out", str(out)]) == 0
    r = load_return_csv(out / "returns_nbi.csv")
    assert len(r) == 1
    assert r.returns[0] == pytest.approx(np.log(1.01), rel=1e-14)
    assert len(load_return_csv(out / "returns_spx.csv")) == 1


def test_prices_compare_is_intersection(tmp_path, write_prices):
    days = business_days("2002-01-02", 10)
    a = write_prices("a.csv", days[:8], np.arange(1.0, 9.0))
    b = write_prices("b.csv", days[3:], np.arange(1.0, 8.0))
    out = tmp_path / "out"
    assert main(["plotdata", "--prices", str(a), "--market-prices", str(b), "--out", str(out)]) == 0
    table = load_table_csv(out / "prices_compare.csv")
    assert list(table.data) == ["close_a", "close_b"]
    np.testing.assert_array_equal(table.dates, days[3:8])
    np.testing.assert_array_equal(table["close_a"], [4.0, 5.0, 6.0, 7.0, 8.0])
    np.testing.assert_array_equal(table["close_b"], [1.0, 2.0, 3.0, 4.0, 5.0])


# ------------------------------------------------------------------- simulate


@pytest.fixture(scope="module")
def default_sim(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--out", str(out)]) == 0
    return out


def test_simulate_defaults_reload(default_sim, capsys):
    for name in ("prices.csv", "market_prices.csv", "factors.csv", "truth.csv", "volalab.conf"):
        assert (default_sim / name).is_file()
    n = int(cli.DEFAULT_SIMULATION["n"])
    assert len(load_price_csv(default_sim / "prices.csv")) == n + 1
    assert len(load_price_csv(default_sim / "market_prices.csv")) == n + 1
    assert len(load_factor_csv(default_sim / "factors.csv")) == n
    truth = {r["param"]: r["value"] for r in _csv(default_sim / "truth.csv")}
    assert float(truth["va"]) == 0.90 and truth["seed"] == "2002"


def test_simulate_prints_truth(tmp_path, capsys):
    assert main(["simulate", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "true parameters:" in text and "vb = 0.08" in text


def test_simulate_byte_identical(default_sim, tmp_path):
    assert main(["simulate", "--out", str(tmp_path)]) == 0
    for f in default_sim.iterdir():
        assert (tmp_path / f.name).read_bytes() == f.read_bytes(), f.name


def test_simulate_seed_changes_output(default_sim, tmp_path):
    assert main(["simulate", "--out", str(tmp_path), "--seed", "7"]) == 0
    assert (tmp_path / "prices.csv").read_bytes() != (default_sim / "prices.csv").read_bytes()


def test_sim_config_rejects_bad_values(write_text, tmp_path):
    with pytest.raises(ConfigError):
        load_simulation_config(write_text("s.conf", "colour=red\n"))
    with pytest.raises(ConstraintViolation):
        cli.cmd_simulate(tmp_path, write_text("s.conf", "va=0.95\nvb=0.1\n"))
    rc = main(["simulate", "--out", str(tmp_path),
               "--sim-config", str(write_text("s2.conf", "va=0.95\nvb=0.1\n"))])
    assert rc == EXIT_CODES["model"]


# ------------------------------------------------------------------- describe


def test_equal_series_give_zero_t(tmp_path, write_prices):
    days = business_days("2002-01-07", 60)
    closes = 100 * np.exp(np.cumsum(np.random.default_rng(1).normal(0, 0.01, 60)))
    a = write_prices("x.csv", days, closes)
    b = write_prices("y.csv", days, closes)
    out = tmp_path / "out"
    assert main(["describe", "--prices", str(a), "--market-prices", str(b), "--out", str(out)]) == 0
    rows = [r for r in _csv(out / "describe.csv") if r["series"] == "difference"]
    assert len(rows) == 5
    assert all(float(r["t"]) == 0.0 and r["stars"] == "" for r in rows)


def test_monday_depressed_series_is_starred(tmp_path, write_prices):
    n = 1000
    days = business_days("2002-01-07", n + 1)
    rng = np.random.default_rng(2)
    market = rng.normal(0, 0.01, n)
    dep = market + rng.normal(0, 0.002, n)
    dep[(np.arange(n) + 1) % 5 == 0] -= 0.002  # returns dated on Mondays
    a = write_prices("nbi.csv", days, 100 * np.exp(np.concatenate([[0], np.cumsum(dep)])))
    b = write_prices("spx.csv", days, 100 * np.exp(np.concatenate([[0], np.cumsum(market)])))
    out = tmp_path / "out"
    assert main(["describe", "--prices", str(a), "--market-prices", str(b), "--out", str(out),
                 "--split", str(days[500])]) == 0
    rows = [r for r in _csv(out / "describe.csv") if r["series"] == "difference"]
    assert [r["period"] for r in rows] == ["full"] * 5 + ["pre"] * 5 + ["post"] * 5
    for r in rows:
        if r["weekday"] == "Monday":
            assert r["stars"] == "***" and float(r["t"]) < 0
    others = [r for r in rows if r["weekday"] != "Monday" and r["period"] == "full"]
    assert sum(r["stars"] != "" for r in others) <= 1
    text = (out / "describe.txt").read_text()
    assert text.splitlines()[2].split()[:3] == ["nbi", "spx", "Difference"]


def test_split_outside_data(default_sim, tmp_path):
    rc = main(["describe", "--config", str(default_sim / "volalab.conf"), "--out", str(tmp_path),
               "--split", "2030-01-01"])
    assert rc == EXIT_CODES["config"]


# ------------------------------------------------------------------------ fit


@pytest.fixture(scope="module")
def gjr_sim(tmp_path_factory):
    out = tmp_path_factory.mktemp("gjr")
    conf = out / "sim.conf"
    conf.write_text("family=gjr\ngamma=0\nn=3000\nseed=31\nweekday_effect=\n")
    assert main(["simulate", "--out", str(out), "--sim-config", str(conf)]) == 0
    return out


def test_gjr_on_symmetric_data_gamma_insignificant(gjr_sim, tmp_path):
    rc = main(["fit", "--config", str(gjr_sim / "volalab.conf"), "--family", "gjr",
               "--out", str(tmp_path)])
    assert rc == 0
    rows = {r["param"]: r for r in _csv(tmp_path / "fit_gjr_full.csv")}
    assert rows["gamma"]["stars"] == ""
    assert float(rows["gamma"]["p"]) > 0.05
    assert rows["vb"]["stars"] == "***"
    assert [r["row"] for r in _csv(tmp_path / "fit_gjr_full.csv")][-5:] == [
        "a", "b", "gamma", "Intercept", "Const"]


def test_nonconvergence_exit_code(gjr_sim, tmp_path, monkeypatch):
    real = cli.fit

    def stalled(panel, spec, opts):
        res = real(panel, spec, opts)
        res.converged = False
        return res

    monkeypatch.setattr(cli, "fit", stalled)
    rc = main(["fit", "--config", str(gjr_sim / "volalab.conf"), "--family", "garch",
               "--out", str(tmp_path)])
    assert rc == EXIT_CODES["nonconvergence"]
    summary = _csv(tmp_path / "fit_summary.csv")
    assert summary[0]["converged"] == "false"
    assert "Converged: no" in (tmp_path / "fit_garch_full.txt").read_text()


def test_fit_grid_files(gjr_sim, tmp_path, monkeypatch):
    monkeypatch.setenv("VOLALAB_THREADS", "1")
    shutil.copytree(gjr_sim, tmp_path / "in")
    rc = main(["fit", "--config", str(tmp_path / "in" / "volalab.conf"), "--family", "garch,gjr",
               "--split", "2007-01-02", "--out", str(tmp_path / "out")])
    assert rc == 0
    out = tmp_path / "out"
    for period in ("full", "pre", "post"):
        assert (out / f"fit_{period}.txt").is_file()
        for fam in ("garch", "gjr"):
            assert (out / f"fit_{fam}_{period}.csv").is_file()
    summary = _csv(out / "fit_summary.csv")
    assert [(r["family"], r["period"]) for r in summary] == [
        (f, p) for p in ("full", "pre", "post") for f in ("garch", "gjr")]
    full, pre, post = (int(summary[i]["nobs"]) for i in (0, 2, 4))
    assert pre + post == full
    assert summary[2]["end"] == "2007-01-02" and summary[4]["start"] == "2007-01-03"
    grid = (out / "fit_full.txt").read_text()
    assert "GARCH" in grid and "GJR" in grid and "γ" in grid

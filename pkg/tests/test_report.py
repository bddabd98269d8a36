import csv
import io
import json

import numpy as np
import pytest

from conftest import make_panel
from tzeff.config import Config, from_mapping
from tzeff.errors import EmptySeriesError, GapError
from tzeff.ingest import Panel
from tzeff.report import STAT_ROWS, Table, battery_report, error_marker, fmt, liquidity_profile, summary_table
from tzeff.synthetic import VolumeKind, VolumePattern


@pytest.mark.parametrize(
    "value, decimals, text",
    [
        (None, 3, "NA"),
        (True, 3, "true"),
        (1.23456, 3, "1.235"),
        (-0.0001, 3, "0.000"),
        (float("inf"), 3, "inf"),
        (float("-inf"), 3, "-inf"),
        (float("nan"), 3, "nan"),
        (7, 3, "7"),
        (np.int64(4), 3, "4"),
        (0.33333, 4, "0.3333"),
        ("abc", 3, "abc"),
    ],
)
def test_fmt(value, decimals, text):
    assert fmt(value, decimals) == text


def test_error_marker():
    assert error_marker(GapError("x")) == "ERR:" + GapError.code


def test_table_renderings():
    t = Table(["a", "b"])
    t.add(1, 0.5)
    t.add("x", None)
    assert t.to_csv() == "a,b\n1,0.500\nx,NA\n"
    md = t.to_markdown().splitlines()
    assert len(md) == 4 and md[1].startswith("|") and set(md[1]) <= set("|- :")
    assert t.column("b") == ["0.500", "NA"]
    with pytest.raises(ValueError):
        t.add(1)


def test_summary_table_layout(noisy_panel):
    t = summary_table(noisy_panel, ["Q11", "Y1"])
    assert t.header == ["statistic", "Q11", "Y1", "AQ11", "AY1"]
    assert t.column("statistic") == list(STAT_ROWS)
    mean = dict(zip(t.header[1:], [float(x) for x in t.rows[0][1:]]))
    assert mean["Q11"] == pytest.approx(mean["AQ11"], abs=0.5)


def test_constant_prices_have_zero_dispersion():
    panel = make_panel(seed=2, n_days=250, rw_vol=0.0, seasonal_amplitude=0.0)
    t = summary_table(panel, ["Q11", "Y1"])
    sd = t.rows[STAT_ROWS.index("sd")][1:]
    assert all(x == "0.000" for x in sd)
    skew = t.rows[STAT_ROWS.index("skewness")][1:]
    assert all(x in ("NA", "nan") for x in skew)


def test_summary_marks_unreplicable_column():
    panel = make_panel(seed=2, n_days=40, segments=("Q", "Y"))
    t = summary_table(panel, ["Q11"])
    assert t.rows[0][2].startswith("ERR:")


def test_liquidity_always_on():
    prof = liquidity_profile(make_panel(n_days=300))
    assert all(p == 100.0 for p in prof.pct if p is not None)
    assert prof.average_difference == 0.0


def test_liquidity_december_drought():
    prof = liquidity_profile(make_panel(n_days=600, volume_pattern=VolumePattern(VolumeKind.MONTHLY_DROUGHT, (12,))))
    assert prof.min_month == 12 and prof.pct[11] == 0.0
    assert prof.average_difference is None and all(d is None for d in prof.diff_vs_min)


def test_liquidity_bernoulli():
    prof = liquidity_profile(make_panel(n_days=1500, volume_pattern=VolumePattern(VolumeKind.BERNOULLI, p=0.6)))
    assert np.mean(prof.pct) == pytest.approx(60.0, abs=5.0)
    lo = min(prof.pct)
    assert prof.diff_vs_min[prof.min_month - 1] == 0.0
    assert prof.diff_vs_min[0] == pytest.approx(100 * (prof.pct[0] / lo - 1))


def test_liquidity_empty_panel():
    with pytest.raises(EmptySeriesError):
        liquidity_profile(Panel("DE", ()))


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_battery_files(tmp_path, noisy_panel):
    cfg = from_mapping({"targets": ["Q11", "Y1"]})
    res = battery_report(noisy_panel, cfg, tmp_path, {"seed": 5})
    expected = {"adf.csv", "johansen.csv", "convergence.csv", "varratio.csv", "pd_ledger.csv",
                "av_violations.csv", "metadata.json", "summary.md"}
    assert expected <= {p.name for p in tmp_path.iterdir()}
    assert res.ok, res.errors
    adf = read_csv(tmp_path / "adf.csv")
    assert len(adf) == 2 * 2 * 2
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["seed"] == 5 and meta["config_sha256"] == cfg.digest() and meta["n_errors"] == 0
    summary = (tmp_path / "summary.md").read_text()
    for heading in ("Descriptive statistics", "Johansen trace", "PD rule", "Liquidity by month"):
        assert f"## {heading}" in summary


def test_battery_partial_failure(tmp_path):
    panel = make_panel(seed=1, n_days=40)
    res = battery_report(panel, Config(targets=("Q11", "Q21")), tmp_path)
    assert not res.ok
    rows = read_csv(tmp_path / "johansen.csv")
    assert any(r["n"].startswith("ERR:") for r in rows)
    assert "## Errors" in (tmp_path / "summary.md").read_text()


def test_battery_empty_panel(tmp_path):
    with pytest.raises(EmptySeriesError):
        battery_report(Panel("DE", ()), Config(), tmp_path)


def test_biased_market_shows_significant_alpha(tmp_path):
    panel = make_panel(seed=9, n_days=600, bias_alpha=0.3, noise_vol=0.1)
    battery_report(panel, Config(targets=("Q11",)), tmp_path)
    row = next(r for r in read_csv(tmp_path / "convergence.csv") if r["sample"] == "full")
    assert float(row["alpha"]) == pytest.approx(0.3, abs=0.05)
    assert float(row["p_value"]) < 0.01

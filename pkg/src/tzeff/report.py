"""Tables and the full battery report.

All numbers are rendered with fixed decimals (3 for prices and statistics,
4 for weights) and rows are emitted in a stable order, so regenerating a
report from the same inputs gives byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .contract_calendar import Adjustment, ContinuousSeries, align, as_label
from .econometrics import (
    adf_test,
    convergence_test,
    descriptive_stats,
    diff_returns,
    johansen_trace,
    log_returns,
    variance_ratio_test,
)
from .errors import EmptySeriesError, TzeffError
from .ingest import Panel, positive_volume_mask
from .replication import WeightScheme, replicate
from .trading import av_rule, pd_rule

PRICE_DECIMALS = 3
WEIGHT_DECIMALS = 4
MISSING = "NA"
SAMPLES = ("full", "volume")


def fmt(value, decimals: int = PRICE_DECIMALS) -> str:
    """Fixed-decimal cell text; ``None`` renders as ``NA``."""
    if value is None:
        return MISSING
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    text = f"{v:.{decimals}f}"
    # Avoid "-0.000" so the sign of rounding noise cannot change the bytes.
    if text.lstrip("-").strip("0.") == "":
        text = text.lstrip("-")
    return text


def error_marker(exc: BaseException) -> str:
    code = getattr(exc, "code", None) or type(exc).__name__
    return f"ERR:{code}"


@dataclass
class Table:
    header: list[str]
    rows: list[list[str]] = field(default_factory=list)

    def add(self, *cells) -> None:
        if len(cells) != len(self.header):
            raise ValueError("row width does not match header")
        self.rows.append([fmt(c) for c in cells])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()

    def to_markdown(self) -> str:
        cols = [self.header] + self.rows
        width = [max(len(r[i]) for r in cols) for i in range(len(self.header))]

        def line(cells):
            return "| " + " | ".join(c.rjust(w) for c, w in zip(cells, width)) + " |"

        out = [line(self.header), "|" + "|".join("-" * (w + 2) for w in width) + "|"]
        out += [line(r) for r in self.rows]
        return "\n".join(out) + "\n"

    def column(self, name: str) -> list[str]:
        i = self.header.index(name)
        return [r[i] for r in self.rows]


STAT_ROWS = ("mean", "median", "max", "min", "sd", "skewness", "kurtosis", "n")


def summary_table(panel: Panel, targets: Sequence[str], scheme: WeightScheme = WeightScheme()) -> Table:
    """Descriptive statistics of settlement prices: one column per contract,
    then one per replicating portfolio (``A`` prefix)."""
    columns, stats = [], []
    for t in targets:
        columns.append(str(as_label(t)))
        stats.append(_safe(lambda: descriptive_stats(panel.series(t, Adjustment.NONE).raw_prices)))
    for t in targets:
        columns.append("A" + str(as_label(t)))
        stats.append(_safe(lambda: descriptive_stats(replicate(t, panel, scheme).raw_prices)))
    table = Table(["statistic"] + columns)
    for name in STAT_ROWS:
        table.add(name, *[s if isinstance(s, str) else getattr(s, name) for s in stats])
    return table


def _safe(fn: Callable):
    try:
        return fn()
    except (TzeffError, ValueError) as exc:
        return error_marker(exc)


@dataclass(frozen=True)
class LiquidityProfile:
    months: tuple[int, ...]
    days: tuple[int, ...]
    trading_days: tuple[int, ...]
    pct: tuple[float | None, ...]
    diff_vs_min: tuple[float | None, ...]
    min_month: int | None
    average_difference: float | None

    def table(self) -> Table:
        t = Table(["month", "days", "trading_days", "pct_trading", "diff_vs_min_pct"])
        for row in zip(self.months, self.days, self.trading_days, self.pct, self.diff_vs_min):
            t.add(*row)
        return t


def liquidity_profile(panel: Panel) -> LiquidityProfile:
    """Share of days per calendar month with positive volume in any contract,
    and each month's relative difference (in %) to the least liquid month.

    The average difference is taken over all months with data, the minimum
    month contributing zero.
    """
    if len(panel) == 0:
        raise EmptySeriesError("empty panel")
    traded = {o.date for o in panel.observations if o.volume > 0}
    days = [0] * 12
    trading = [0] * 12
    for d in panel.index:
        days[d.month - 1] += 1
        trading[d.month - 1] += d in traded
    pct = [100.0 * k / n if n else None for k, n in zip(trading, days)]
    present = [p for p in pct if p is not None]
    lo = min(present)
    min_month = pct.index(lo) + 1
    if lo == 0.0:
        diffs = [None] * 12
        avg = None
    else:
        diffs = [None if p is None else 100.0 * (p / lo - 1.0) for p in pct]
        avg = float(np.mean([d for d in diffs if d is not None]))
    return LiquidityProfile(tuple(range(1, 13)), tuple(days), tuple(trading), tuple(pct), tuple(diffs), min_month, avg)


@dataclass
class BatteryResult:
    out_dir: Path
    tables: dict[str, Table]
    errors: list[str]

    @property
    def ok(self) -> bool:
        return not self.errors


def _pair(panel: Panel, target: str, scheme: WeightScheme, sample: str):
    swap = panel.series(target, Adjustment.LEVEL_SHIFT)
    port = replicate(target, panel, scheme, Adjustment.LEVEL_SHIFT)
    swap, port = align(swap, port)
    if sample == "volume":
        keep = positive_volume_mask(swap, [port])
        swap, port = swap.subset(keep), port.subset(keep)
    if len(swap) == 0:
        raise EmptySeriesError(f"no aligned dates for {target} ({sample} sample)", target=target)
    return swap, port


def battery_report(panel: Panel, config, out_dir, metadata: dict | None = None) -> BatteryResult:
    """Run every test and trading rule for each configured target, on the
    full sample and on the positive-volume sample, and write the results.

    Failing cells carry an ``ERR:<code>`` marker; the remaining results are
    still written.
    """
    if len(panel) == 0:
        raise EmptySeriesError("cannot report on an empty panel")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scheme, costs, market = config.weights, config.costs, config.market
    returns = log_returns if config.returns == "log" else diff_returns
    errors: list[str] = []

    adf = Table(["target", "sample", "series", "n", "lags", "t_stat", "p_value", "reject_5pct"])
    joh = Table(["target", "sample", "n", "trace_rank0", "crit5_rank0", "trace_rank1", "crit5_rank1",
                 "beta_x", "beta_y", "beta_const", "se_y", "se_const", "degenerate"])
    conv = Table(["target", "sample", "n", "alpha", "nw_se", "t_stat", "p_value", "nw_lag", "degenerate", "small_sample"])
    vr = Table(["target", "sample", "sd_swap", "sd_portfolio", "F", "df1", "df2", "p_two_sided", "p_lower", "p_upper"])
    ledger = Table(["target", "sample", "date", "direction", "gross", "net"])
    pd_sum = Table(["target", "sample", "costs", "trades", "mean", "sd", "t_stat", "pl", "share_buy_swap"])
    av = Table(["target", "sample", "n", "pct_no_cost", "pct_sell_repl_with_cost", "pct_buy_repl_with_cost"])

    def fail(where, exc, table, prefix, width):
        errors.append(f"{where}: {exc}")
        table.add(*prefix, *([error_marker(exc)] * width))

    for target in config.targets:
        for sample in SAMPLES:
            key = (target, sample)
            try:
                swap, port = _pair(panel, target, scheme, sample)
            except (TzeffError, ValueError) as exc:
                for tbl, pre, w in ((adf, key + ("swap",), 5), (adf, key + ("portfolio",), 5), (joh, key, 11),
                                    (conv, key, 8), (vr, key, 8), (pd_sum, key + ("gross",), 6),
                                    (pd_sum, key + ("net",), 6), (av, key, 4)):
                    fail(f"{target}/{sample}", exc, tbl, pre, w)
                continue

            for name, s in (("swap", swap), ("portfolio", port)):
                try:
                    r = adf_test(s.prices)
                    adf.add(*key, name, r.n, r.lags, r.t_stat, r.p_value, r.rejects())
                except (TzeffError, ValueError) as exc:
                    fail(f"adf {target}/{sample}/{name}", exc, adf, key + (name,), 5)
            try:
                j = johansen_trace(swap.prices, port.prices, config.vecm_lags)
                joh.add(*key, j.n, j.trace_rank0, j.crit5_rank0, j.trace_rank1, j.crit5_rank1,
                        *j.beta, *j.beta_se, j.degenerate)
            except (TzeffError, ValueError) as exc:
                fail(f"johansen {target}/{sample}", exc, joh, key, 11)
            try:
                c = convergence_test(swap.raw_prices, port.raw_prices, config.nw_lag)
                conv.add(*key, c.n, c.alpha, c.nw_se, c.t_stat, c.p_value, c.nw_lag, c.degenerate, c.small_sample)
            except (TzeffError, ValueError) as exc:
                fail(f"convergence {target}/{sample}", exc, conv, key, 8)
            try:
                v = variance_ratio_test(returns(swap.prices), returns(port.prices))
                vr.add(*key, v.sd_x, v.sd_y, v.F, *v.df, v.p_two_sided, v.p_lower, v.p_upper)
            except (TzeffError, ValueError) as exc:
                fail(f"varratio {target}/{sample}", exc, vr, key, 8)
            try:
                led = pd_rule(swap, port, costs, market)
                for row in led.rows:
                    ledger.add(*key, row.date.isoformat(), row.direction.value, row.gross, row.net)
                for label, net in (("gross", False), ("net", True)):
                    tt = led.ttest(net)
                    pd_sum.add(*key, label, led.n, led.mean(net), led.sd(net), tt.t_stat, led.cumulative(net),
                               led.share_buy_swap())
            except (TzeffError, ValueError) as exc:
                fail(f"pd {target}/{sample}", exc, pd_sum, key + ("gross",), 6)
                pd_sum.add(*key, "net", *([error_marker(exc)] * 6))
            try:
                a = av_rule(swap, port, costs, market)
                av.add(*key, a.n, a.pct_no_cost, a.pct_sell_repl_with_cost, a.pct_buy_repl_with_cost)
            except (TzeffError, ValueError) as exc:
                fail(f"av {target}/{sample}", exc, av, key, 4)

    desc = summary_table(panel, config.targets, scheme)
    try:
        liq = liquidity_profile(panel).table()
        liq_avg = liquidity_profile(panel).average_difference
    except (TzeffError, ValueError) as exc:
        liq, liq_avg = Table(["error"], [[error_marker(exc)]]), None

    tables = {
        "adf.csv": adf, "johansen.csv": joh, "convergence.csv": conv, "varratio.csv": vr,
        "pd_ledger.csv": ledger, "av_violations.csv": av,
    }
    for name, tbl in tables.items():
        (out / name).write_text(tbl.to_csv(), encoding="utf-8", newline="")

    meta = {"market": market, "config_sha256": config.digest(), "n_observations": len(panel),
            "targets": list(config.targets), "n_errors": len(errors)}
    meta.update(metadata or {})
    (out / "metadata.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")

    md = [f"# Battery report: {market}", ""]
    md += [f"- {k}: {meta[k]}" for k in sorted(meta)]
    sections = [("Descriptive statistics", desc), ("ADF", adf), ("Johansen trace", joh),
                ("Convergence", conv), ("Variance ratio", vr), ("PD rule", pd_sum), ("AV rule", av),
                ("Liquidity by month", liq)]
    for title, tbl in sections:
        md += ["", f"## {title}", "", tbl.to_markdown().rstrip("\n")]
    md += ["", f"Average difference vs least liquid month: {fmt(liq_avg)} %"]
    if errors:
        md += ["", "## Errors", ""] + [f"- {e}" for e in errors]
    (out / "summary.md").write_text("\n".join(md) + "\n", encoding="utf-8", newline="")
    tables.update({"summary_stats": desc, "pd_summary": pd_sum, "liquidity": liq})
    return BatteryResult(out, tables, errors)

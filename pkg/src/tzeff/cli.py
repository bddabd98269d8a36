"""Command-line interface.

Subcommands share a cache directory (``--cache``, default ``.tzeff``) in
which ``ingest`` stores the validated panel. Errors are printed to stderr as a
single JSON object; exit codes are 0 on success, 2 for usage, label and
config errors, 3 when data are missing or insufficient, 4 when a report was
written with failed cells, and 1 otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import Config, load_config
from .contract_calendar import Adjustment, align, as_label
from .econometrics import (
    adf_test,
    convergence_test,
    diff_returns,
    johansen_trace,
    log_returns,
    variance_ratio_test,
)
from .errors import (
    ConfigError,
    EmptySeriesError,
    GapError,
    InsufficientDataError,
    LabelError,
    NotReplicableError,
    ParseError,
    TzeffError,
)
from .ingest import Panel, positive_volume_mask, read_price_file, write_price_file
from .replication import WeightMode, WeightScheme, replicate
from .report import WEIGHT_DECIMALS, Table, battery_report, fmt
from .synthetic import ScenarioSpec, gen_market
from .trading import CostModel, av_rule, pd_rule

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_DATA, EXIT_PARTIAL = 0, 1, 2, 3, 4
PANEL_FILE = "panel.csv"
PANEL_META = "panel.json"

_EXIT_CODES = {
    LabelError: EXIT_USAGE,
    ConfigError: EXIT_USAGE,
    NotReplicableError: EXIT_USAGE,
    ParseError: EXIT_DATA,
    EmptySeriesError: EXIT_DATA,
    InsufficientDataError: EXIT_DATA,
    GapError: EXIT_DATA,
}


class MissingCacheError(TzeffError):
    code = "missing_cache"


def _write(path: Path, table: Table) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table.to_csv(), encoding="utf-8", newline="")
    return path


def _load_panel(cache: Path, cfg: Config) -> tuple[Panel, dict]:
    data, meta = cache / PANEL_FILE, cache / PANEL_META
    if not data.is_file() or not meta.is_file():
        raise MissingCacheError(f"no ingested panel in {cache}; run `tzeff ingest` first", cache=cache)
    info = json.loads(meta.read_text(encoding="utf-8"))
    return Panel(info["market"], tuple(read_price_file(data)), max_gap=cfg.max_gap), info


def _pair(panel: Panel, target: str, scheme: WeightScheme, volume_filter: bool):
    swap = panel.series(target, Adjustment.LEVEL_SHIFT)
    port = replicate(target, panel, scheme, Adjustment.LEVEL_SHIFT)
    swap, port = align(swap, port)
    if volume_filter:
        keep = positive_volume_mask(swap, [port])
        swap, port = swap.subset(keep), port.subset(keep)
    if len(swap) == 0:
        raise EmptySeriesError(f"no aligned dates for {target}", target=target)
    return swap, port


def cmd_ingest(args, cfg: Config) -> int:
    observations = []
    for path in args.csv:
        observations.extend(read_price_file(path))
    panel = Panel(args.market, tuple(observations), max_gap=cfg.max_gap)
    if len(panel) == 0:
        raise EmptySeriesError("input files contain no observations")
    cache = Path(args.cache)
    cache.mkdir(parents=True, exist_ok=True)
    write_price_file(cache / PANEL_FILE, panel.observations)
    info = {"market": args.market, "sources": [Path(p).name for p in args.csv]}
    for path in args.csv:
        scen = Path(path).with_name("scenario.json")
        if scen.is_file():
            info["seed"] = json.loads(scen.read_text(encoding="utf-8")).get("seed")
    (cache / PANEL_META).write_text(json.dumps(info, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(f"ingested {len(panel)} observations, {len(panel.index)} dates, {len(panel.book)} contracts")
    return EXIT_OK


def cmd_series(args, cfg: Config) -> int:
    panel, _ = _load_panel(Path(args.cache), cfg)
    label = as_label(args.label)
    adjust = Adjustment.NONE if args.no_adjust else Adjustment.LEVEL_SHIFT
    s = panel.series(label, adjust)
    t = Table(["date", "contract", "price", "raw_price", "volume", "filled"])
    for row in zip(s.dates, s.contracts, s.prices, s.raw_prices, s.volumes, s.filled):
        t.add(row[0].isoformat(), *row[1:])
    rolls = Table(["date", "from_contract", "to_contract", "raw_jump", "shift"])
    for r in s.roll_log:
        rolls.add(r.date.isoformat(), r.from_contract, r.to_contract, r.raw_jump, r.shift)
    out = Path(args.out)
    print(_write(out / f"series_{label}.csv", t))
    print(_write(out / f"rolls_{label}.csv", rolls))
    return EXIT_OK


def cmd_replicate(args, cfg: Config) -> int:
    panel, _ = _load_panel(Path(args.cache), cfg)
    mode = WeightMode.EXACT if args.exact_weights else cfg.weight_mode
    scheme = WeightScheme(mode, cfg.rate if args.rate is None else args.rate, cfg.compounding)
    label = as_label(args.target)
    p = replicate(label, panel, scheme)
    k = p.leg_prices.shape[1]
    t = Table(["date", "contract", "composition", "price", "volume"]
              + [f"w{i + 1}" for i in range(k)] + [f"leg{i + 1}" for i in range(k)])
    last = None
    for i, d in enumerate(p.dates):
        if p.compositions[i] != last:
            last = p.compositions[i]
            print(f"{d.isoformat()} A{label} = {last}")
        weights = [fmt(w, WEIGHT_DECIMALS) for w in p.leg_weights[i]]
        t.add(d.isoformat(), p.contracts[i], p.compositions[i], p.raw_prices[i], p.volumes[i],
              *weights, *p.leg_prices[i])
    print(_write(Path(args.out) / f"portfolio_{label}.csv", t))
    return EXIT_OK


def cmd_test(args, cfg: Config) -> int:
    panel, _ = _load_panel(Path(args.cache), cfg)
    label = as_label(args.target)
    swap, port = _pair(panel, str(label), cfg.weights, args.volume_filter)
    kind = args.kind
    if kind == "adf":
        t = Table(["series", "n", "lags", "t_stat", "p_value", "reject_5pct"])
        for name, s in (("swap", swap), ("portfolio", port)):
            r = adf_test(s.prices)
            t.add(name, r.n, r.lags, r.t_stat, r.p_value, r.rejects())
    elif kind == "coint":
        j = johansen_trace(swap.prices, port.prices, cfg.vecm_lags)
        t = Table(["n", "trace_rank0", "crit5_rank0", "trace_rank1", "crit5_rank1",
                   "beta_x", "beta_y", "beta_const", "se_y", "se_const", "degenerate"])
        t.add(j.n, j.trace_rank0, j.crit5_rank0, j.trace_rank1, j.crit5_rank1, *j.beta, *j.beta_se, j.degenerate)
    elif kind == "converge":
        c = convergence_test(swap.raw_prices, port.raw_prices, cfg.nw_lag)
        t = Table(["n", "alpha", "nw_se", "t_stat", "p_value", "nw_lag", "degenerate", "small_sample"])
        t.add(c.n, c.alpha, c.nw_se, c.t_stat, c.p_value, c.nw_lag, c.degenerate, c.small_sample)
    else:
        ret = log_returns if cfg.returns == "log" else diff_returns
        v = variance_ratio_test(ret(swap.prices), ret(port.prices))
        t = Table(["sd_swap", "sd_portfolio", "F", "df1", "df2", "p_two_sided", "p_lower", "p_upper"])
        t.add(v.sd_x, v.sd_y, v.F, *v.df, v.p_two_sided, v.p_lower, v.p_upper)
    suffix = "_volume" if args.volume_filter else ""
    print(_write(Path(args.out) / f"test_{kind}_{label}{suffix}.csv", t))
    return EXIT_OK


def _cost_profile(name: str | None, cfg: Config) -> tuple[CostModel, str]:
    if name is None:
        return cfg.costs, cfg.market
    if name == "none":
        return CostModel.frictionless(), cfg.market
    if name not in cfg.costs.spreads:
        raise ConfigError(f"unknown cost profile {name!r}; use 'none' or one of {sorted(cfg.costs.spreads)}")
    return cfg.costs, name


def cmd_trade(args, cfg: Config) -> int:
    panel, _ = _load_panel(Path(args.cache), cfg)
    label = as_label(args.target)
    costs, market = _cost_profile(args.costs, cfg)
    swap, port = _pair(panel, str(label), cfg.weights, args.volume_filter)
    suffix = "_volume" if args.volume_filter else ""
    if args.rule == "pd":
        led = pd_rule(swap, port, costs, market)
        t = Table(["date", "direction", "gross", "net"])
        for r in led.rows:
            t.add(r.date.isoformat(), r.direction.value, r.gross, r.net)
        print(_write(Path(args.out) / f"pd_{label}{suffix}.csv", t))
        tt = led.ttest()
        print(f"trades={led.n} mean={fmt(led.mean())} sd={fmt(led.sd())} t={fmt(tt.t_stat)} pl={fmt(led.cumulative())}")
    else:
        a = av_rule(swap, port, costs, market)
        t = Table(["n", "pct_no_cost", "pct_sell_repl_with_cost", "pct_buy_repl_with_cost"])
        t.add(a.n, a.pct_no_cost, a.pct_sell_repl_with_cost, a.pct_buy_repl_with_cost)
        print(_write(Path(args.out) / f"av_{label}{suffix}.csv", t))
    return EXIT_OK


def _read_scenario(path: Path) -> ScenarioSpec:
    from .config import tomllib

    if not path.is_file():
        raise ConfigError(f"scenario file not found: {path}", path=path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}", path=path) from None
    data = data.get("scenario", data)
    try:
        return ScenarioSpec.from_mapping(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}", path=path) from None


def cmd_synth(args, cfg: Config) -> int:
    if args.spec:
        spec = _read_scenario(Path(args.spec))
    else:
        try:
            spec = ScenarioSpec.from_mapping(cfg.scenario)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid scenario in config: {exc}") from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_price_file(out / "prices.csv", gen_market(spec))
    (out / "scenario.json").write_text(json.dumps(spec.to_mapping(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(out / "prices.csv")
    return EXIT_OK


def cmd_report(args, cfg: Config) -> int:
    panel, info = _load_panel(Path(args.cache), cfg)
    seed = info.get("seed", cfg.scenario.get("seed"))
    result = battery_report(panel, cfg, args.out, {"seed": seed})
    print(result.out_dir)
    if result.errors:
        print(json.dumps({"error": "partial_report", "failed_cells": len(result.errors)}), file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tzeff", description="Time-zero efficiency tests for electricity swaps.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="TOML config file (overridden by $TZEFF_CONFIG)")
    p.add_argument("--cache", default=".tzeff", help="panel cache directory")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="validate settlement CSVs into the cache")
    s.add_argument("csv", nargs="+")
    s.add_argument("--market", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("series", help="continuous series and roll log")
    s.add_argument("--label", required=True)
    s.add_argument("--no-adjust", action="store_true")
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_series)

    s = sub.add_parser("replicate", help="replicating portfolio series")
    s.add_argument("--target", required=True)
    s.add_argument("--exact-weights", action="store_true")
    s.add_argument("--rate", type=float)
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_replicate)

    s = sub.add_parser("test", help="econometric test of a swap against its portfolio")
    s.add_argument("kind", choices=["adf", "coint", "converge", "varratio"])
    s.add_argument("--target", required=True)
    s.add_argument("--volume-filter", action="store_true")
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_test)

    s = sub.add_parser("trade", help="PD or AV trading rule")
    s.add_argument("rule", choices=["pd", "av"])
    s.add_argument("--target", required=True)
    s.add_argument("--costs", help="'none' or a market id from the spread table")
    s.add_argument("--volume-filter", action="store_true")
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_trade)

    s = sub.add_parser("synth", help="generate a synthetic market")
    s.add_argument("--spec", help="scenario TOML (defaults to [scenario] in the config)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("report", help="full battery report")
    s.add_argument("--all", action="store_true", required=True)
    s.add_argument("--out", default="report")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except TzeffError as exc:
        print(json.dumps(exc.as_dict(), sort_keys=True), file=sys.stderr)
        for cls, code in _EXIT_CODES.items():
            if isinstance(exc, cls):
                return code
        return EXIT_DATA if isinstance(exc, MissingCacheError) else EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

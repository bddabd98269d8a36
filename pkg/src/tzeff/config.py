"""Run configuration read from a TOML file.

Example::

    market = "DE"
    rate = 0.022543
    fee = 0.01
    weight_mode = "equal"        # or "exact"
    compounding = "continuous"   # or "annual"
    nw_lag = "auto"              # or an integer
    full_spread_on_side = false
    returns = "log"              # or "diff"
    targets = ["Q11", "Y1"]

    [spreads.DE]
    M = 0.008
    Q = 0.006
    Y = 0.003

    [scenario]                   # used by `synth`
    seed = 7
    n_days = 600
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .contract_calendar import Segment, as_label
from .errors import ConfigError, LabelError
from .replication import DEFAULT_RATE, Compounding, WeightMode, WeightScheme
from .trading import DEFAULT_FEE, DEFAULT_SPREADS, CostModel

ENV_VAR = "TZEFF_CONFIG"
DEFAULT_TARGETS = ("Q11", "Q12", "Q13", "Q14", "Q21", "Q22", "Q23", "Q24", "Y1")
_KEYS = {
    "market", "rate", "fee", "weight_mode", "compounding", "nw_lag", "full_spread_on_side",
    "returns", "targets", "spreads", "scenario", "vecm_lags", "max_gap",
}


@dataclass(frozen=True)
class Config:
    market: str = "DE"
    rate: float = DEFAULT_RATE
    fee: float = DEFAULT_FEE
    weight_mode: WeightMode = WeightMode.EQUAL
    compounding: Compounding = Compounding.CONTINUOUS
    nw_lag: int | None = None
    full_spread_on_side: bool = False
    returns: str = "log"
    targets: tuple[str, ...] = DEFAULT_TARGETS
    spreads: dict = field(default_factory=lambda: {m: dict(t) for m, t in DEFAULT_SPREADS.items()})
    scenario: dict = field(default_factory=dict)
    vecm_lags: int = 1
    max_gap: int = 10

    @property
    def weights(self) -> WeightScheme:
        return WeightScheme(self.weight_mode, self.rate, self.compounding)

    @property
    def costs(self) -> CostModel:
        return CostModel(self.fee, self.spreads, self.full_spread_on_side)

    def canonical(self) -> dict:
        return {
            "market": self.market,
            "rate": self.rate,
            "fee": self.fee,
            "weight_mode": self.weight_mode.value,
            "compounding": self.compounding.value,
            "nw_lag": "auto" if self.nw_lag is None else self.nw_lag,
            "full_spread_on_side": self.full_spread_on_side,
            "returns": self.returns,
            "targets": list(self.targets),
            "spreads": {m: {Segment(s).value: v for s, v in sorted(t.items())} for m, t in sorted(self.spreads.items())},
            "scenario": self.scenario,
            "vecm_lags": self.vecm_lags,
            "max_gap": self.max_gap,
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def from_mapping(data: dict) -> Config:
    unknown = set(data) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kw = {}
    try:
        if "market" in data:
            kw["market"] = str(data["market"])
        for key in ("rate", "fee"):
            if key in data:
                kw[key] = float(data[key])
        if "weight_mode" in data:
            kw["weight_mode"] = WeightMode(data["weight_mode"])
        if "compounding" in data:
            kw["compounding"] = Compounding(data["compounding"])
        if "nw_lag" in data:
            lag = data["nw_lag"]
            if lag == "auto":
                kw["nw_lag"] = None
            elif isinstance(lag, int) and not isinstance(lag, bool) and lag >= 0:
                kw["nw_lag"] = lag
            else:
                raise ConfigError(f"nw_lag must be 'auto' or a non-negative integer, got {lag!r}")
        if "full_spread_on_side" in data:
            if not isinstance(data["full_spread_on_side"], bool):
                raise ConfigError("full_spread_on_side must be a boolean")
            kw["full_spread_on_side"] = data["full_spread_on_side"]
        if "returns" in data:
            if data["returns"] not in ("log", "diff"):
                raise ConfigError("returns must be 'log' or 'diff'")
            kw["returns"] = data["returns"]
        if "targets" in data:
            kw["targets"] = tuple(str(as_label(t)) for t in data["targets"])
        if "spreads" in data:
            spreads = {m: dict(t) for m, t in DEFAULT_SPREADS.items()}
            for market, table in data["spreads"].items():
                spreads.setdefault(market, {}).update({Segment(k): float(v) for k, v in table.items()})
            kw["spreads"] = spreads
        if "scenario" in data:
            kw["scenario"] = dict(data["scenario"])
        for key in ("vecm_lags", "max_gap"):
            if key in data:
                kw[key] = int(data[key])
    except ConfigError:
        raise
    except (ValueError, TypeError, LabelError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from None
    cfg = Config(**kw)
    if kw.get("fee", 0.0) < 0 or cfg.rate < 0:
        raise ConfigError("fee and rate must be non-negative")
    try:
        cfg.costs.side_spread(cfg.market, Segment.MONTHLY)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str | os.PathLike | None = None) -> Config:
    """Load ``path``, else the file named by ``$TZEFF_CONFIG``, else defaults."""
    path = os.environ.get(ENV_VAR) or path
    if path is None:
        return Config()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}", path=p)
    try:
        data = tomllib.loads(p.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {p}: {exc}", path=p) from None
    return from_mapping(data)

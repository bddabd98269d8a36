"""PD (price-difference) and AV (arbitrage-violation) trading rules.

Both rules trade a swap against its replicating portfolio. Prices are
settlement prices, taken as the bid-ask midpoint; transaction costs add a
flat fee per transaction and a proportional spread per leg.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .contract_calendar import ContinuousSeries, Segment, require_aligned
from .errors import InsufficientDataError

DEFAULT_FEE = 0.01
VIOLATION_TOL = 1e-9

# Average relative bid-ask spreads by market and segment.
DEFAULT_SPREADS: dict[str, dict[Segment, float]] = {
    "DE": {Segment.MONTHLY: 0.008, Segment.QUARTERLY: 0.006, Segment.YEARLY: 0.003},
    "FR": {Segment.MONTHLY: 0.027, Segment.QUARTERLY: 0.019, Segment.YEARLY: 0.014},
    "ES": {Segment.MONTHLY: 0.032, Segment.QUARTERLY: 0.026, Segment.YEARLY: 0.019},
}


@dataclass(frozen=True)
class CostModel:
    """Flat fee per transaction plus relative spreads ``(ask - bid) / mid``.

    By default each side pays half the spread around the midpoint; with
    ``full_spread_on_side`` each side pays the full spread percentage.
    """

    trade_fee: float = DEFAULT_FEE
    spreads: Mapping[str, Mapping[Segment, float]] = field(default_factory=lambda: DEFAULT_SPREADS)
    full_spread_on_side: bool = False

    def __post_init__(self):
        if self.trade_fee < 0:
            raise ValueError("trade_fee must be non-negative")
        clean = {}
        for market, table in self.spreads.items():
            clean[market] = {}
            for seg, s in table.items():
                if not 0 <= s < 1:
                    raise ValueError(f"spread out of range for {market}/{seg}: {s}")
                clean[market][Segment(seg)] = float(s)
        object.__setattr__(self, "spreads", clean)

    @classmethod
    def frictionless(cls) -> "CostModel":
        return cls(trade_fee=0.0, spreads={m: {s: 0.0 for s in Segment} for m in DEFAULT_SPREADS})

    def side_spread(self, market: str, segment: Segment) -> float:
        try:
            s = self.spreads[market][Segment(segment)]
        except KeyError:
            raise KeyError(f"no spread configured for market {market!r}, segment {segment}") from None
        return s if self.full_spread_on_side else s / 2.0


class Direction(str, enum.Enum):
    BUY_SWAP = "BuySwap"
    SELL_SWAP = "SellSwap"


def effective_buy_price(mid: float, segment: Segment, market: str, costs: CostModel) -> float:
    return mid * (1.0 + costs.side_spread(market, segment)) + costs.trade_fee


def effective_sell_price(mid: float, segment: Segment, market: str, costs: CostModel) -> float:
    return mid * (1.0 - costs.side_spread(market, segment)) - costs.trade_fee


def portfolio_buy_price(legs: Sequence[float], weights: Sequence[float], segment: Segment, market: str, costs: CostModel) -> float:
    h = costs.side_spread(market, segment)
    return float(sum(w * p * (1.0 + h) for w, p in zip(weights, legs))) + costs.trade_fee


def portfolio_sell_price(legs: Sequence[float], weights: Sequence[float], segment: Segment, market: str, costs: CostModel) -> float:
    h = costs.side_spread(market, segment)
    return float(sum(w * p * (1.0 - h) for w, p in zip(weights, legs))) - costs.trade_fee


def _portfolio_legs(portfolio: ContinuousSeries, i: int):
    legs = getattr(portfolio, "leg_prices", None)
    if legs is not None and legs.size:
        return legs[i], portfolio.leg_weights[i], portfolio.leg_segment
    # A bare series is treated as a single-leg portfolio of its own segment.
    return [portfolio.raw_prices[i]], [1.0], portfolio.label.segment


def _trade_prices(swap, portfolio, i, buy_swap: bool, costs: CostModel | None, market: str):
    """(gross, net) profit of the time-zero position opened on row ``i``."""
    s = float(swap.raw_prices[i])
    p = float(portfolio.raw_prices[i])
    gross = (p - s) if buy_swap else (s - p)
    if costs is None:
        return gross, gross
    legs, weights, seg = _portfolio_legs(portfolio, i)
    sseg = swap.label.segment
    if buy_swap:
        net = portfolio_sell_price(legs, weights, seg, market, costs) - effective_buy_price(s, sseg, market, costs)
    else:
        net = effective_sell_price(s, sseg, market, costs) - portfolio_buy_price(legs, weights, seg, market, costs)
    return gross, net


@dataclass(frozen=True)
class TTest:
    t_stat: float | None
    p_value: float | None
    degenerate: bool


def profit_ttest(pnl) -> TTest:
    """One-sample t test that mean daily profit is zero."""
    x = np.asarray(pnl, dtype=np.float64)
    if len(x) < 3:
        raise InsufficientDataError("t test needs at least 3 observations", n=len(x))
    sd = float(np.std(x, ddof=1))
    if sd <= 1e-12 * max(1.0, float(np.abs(x).max())):
        return TTest(None, None, True)
    t = float(x.mean()) / (sd / math.sqrt(len(x)))
    return TTest(t, float(2.0 * stats.t.sf(abs(t), len(x) - 1)), False)


def ttest_from_moments(mean: float, sd: float, n: int) -> float:
    return mean / (sd / math.sqrt(n))


@dataclass(frozen=True)
class LedgerRow:
    date: date
    direction: Direction
    gross: float
    net: float


@dataclass(frozen=True)
class TradeLedger:
    rows: tuple[LedgerRow, ...]
    with_costs: bool

    def _pnl(self, net: bool) -> np.ndarray:
        return np.array([r.net if net else r.gross for r in self.rows], dtype=np.float64)

    @property
    def n(self) -> int:
        return len(self.rows)

    def mean(self, net: bool | None = None) -> float:
        x = self._pnl(self.with_costs if net is None else net)
        return float(x.mean()) if len(x) else 0.0

    def sd(self, net: bool | None = None) -> float:
        x = self._pnl(self.with_costs if net is None else net)
        return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0

    def cumulative(self, net: bool | None = None) -> float:
        return float(math.fsum(self._pnl(self.with_costs if net is None else net)))

    def ttest(self, net: bool | None = None) -> TTest:
        x = self._pnl(self.with_costs if net is None else net)
        if len(x) < 3:
            return TTest(None, None, True)
        return profit_ttest(x)

    def share_buy_swap(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r.direction is Direction.BUY_SWAP for r in self.rows) / len(self.rows)


def pd_rule(
    swap: ContinuousSeries,
    portfolio: ContinuousSeries,
    costs: CostModel | None = None,
    market: str = "DE",
) -> TradeLedger:
    """Each day buy whichever of swap and portfolio was cheaper on the
    previous aligned day and sell the other; profit is the price gap locked
    in at today's prices. No trade after a tie or across a contract roll."""
    require_aligned(swap, portfolio)
    if len(swap) < 3:
        raise InsufficientDataError("PD rule needs at least 3 aligned days", n=len(swap))
    rows = []
    for i in range(1, len(swap)):
        if swap.contracts[i] != swap.contracts[i - 1]:
            continue
        gap_prev = float(portfolio.raw_prices[i - 1] - swap.raw_prices[i - 1])
        if abs(gap_prev) <= VIOLATION_TOL:
            continue
        buy_swap = gap_prev > 0
        gross, net = _trade_prices(swap, portfolio, i, buy_swap, costs, market)
        rows.append(
            LedgerRow(swap.dates[i], Direction.BUY_SWAP if buy_swap else Direction.SELL_SWAP, gross, net)
        )
    return TradeLedger(tuple(rows), costs is not None)


@dataclass(frozen=True)
class ViolationReport:
    pct_no_cost: float
    pct_sell_repl_with_cost: float
    pct_buy_repl_with_cost: float
    n: int


def av_rule(
    swap: ContinuousSeries,
    portfolio: ContinuousSeries,
    costs: CostModel,
    market: str = "DE",
) -> ViolationReport:
    """Share of days (in %) with a price gap, and with a gap that stays
    profitable after costs when selling or buying the portfolio."""
    require_aligned(swap, portfolio)
    n = len(swap)
    if n == 0:
        return ViolationReport(0.0, 0.0, 0.0, 0)
    gaps = sells = buys = 0
    for i in range(n):
        if abs(float(portfolio.raw_prices[i] - swap.raw_prices[i])) > VIOLATION_TOL:
            gaps += 1
        _, net_sell_repl = _trade_prices(swap, portfolio, i, True, costs, market)
        _, net_buy_repl = _trade_prices(swap, portfolio, i, False, costs, market)
        sells += net_sell_repl > VIOLATION_TOL
        buys += net_buy_repl > VIOLATION_TOL
    return ViolationReport(100.0 * gaps / n, 100.0 * sells / n, 100.0 * buys / n, n)

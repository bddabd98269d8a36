"""Replicating portfolios for quarterly and yearly swaps.

A quarterly swap is replicated by the three monthly swaps delivering in its
quarter, a yearly swap by the four quarterly swaps of its year. Which relative
labels those are depends on the trading month, so compositions are computed
per date.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np

from .contract_calendar import (
    Adjustment,
    ContinuousSeries,
    ContractLabel,
    Segment,
    as_label,
    contract_for,
    month_within_quarter,
    quarter_of,
    splice_rolls,
)
from .errors import EmptySeriesError, NotReplicableError

DEFAULT_RATE = 0.022543  # average 3-month EURIBOR 2004-2012


class WeightMode(str, enum.Enum):
    EXACT = "exact"
    EQUAL = "equal"


class Compounding(str, enum.Enum):
    CONTINUOUS = "continuous"
    ANNUAL = "annual"


@dataclass(frozen=True)
class WeightScheme:
    mode: WeightMode = WeightMode.EQUAL
    annual_rate: float = DEFAULT_RATE
    compounding: Compounding = Compounding.CONTINUOUS

    def __post_init__(self):
        object.__setattr__(self, "mode", WeightMode(self.mode))
        object.__setattr__(self, "compounding", Compounding(self.compounding))
        if self.annual_rate < 0:
            raise ValueError("annual_rate must be non-negative")


def discount_weight(j: float, r: float, compounding=Compounding.CONTINUOUS) -> float:
    """Discount factor for delivery ``j`` months ahead at annual rate ``r``.

    Continuous compounding gives ``exp(-r j / 12)``; annual compounding gives
    ``(1 + r) ** (-j / 12)``. At r = 2.2543% and j = 3, 4, 5 the continuous
    factors truncate to 0.9943, 0.9925 and 0.9906; the annual ones to 0.9944,
    0.9925 and 0.9907.
    """
    if j < 0:
        raise ValueError("months to delivery must be non-negative")
    if r <= -1:
        raise ValueError("rate must exceed -1")
    if Compounding(compounding) is Compounding.ANNUAL:
        return (1.0 + r) ** (-j / 12.0)
    return math.exp(-r * j / 12.0)


def weight_function(
    index_set: Sequence[float],
    r: float = DEFAULT_RATE,
    mode=WeightMode.EXACT,
    compounding=Compounding.CONTINUOUS,
) -> tuple[float, ...]:
    """Normalized portfolio weights for legs ``index_set`` months ahead."""
    js = list(index_set)
    if not js:
        raise ValueError("index set must be non-empty")
    if WeightMode(mode) is WeightMode.EQUAL:
        return tuple(1.0 / len(js) for _ in js)
    w = np.array([discount_weight(j, r, compounding) for j in js])
    return tuple((w / w.sum()).tolist())


def quarterly_composition(b: int, c: int, j: int) -> tuple[ContractLabel, ContractLabel, ContractLabel]:
    """Monthly legs replicating ``Q_bc`` in calendar month ``j``.

    The first leg index is ``j - 3c - b + K`` with ``K = 4b + 2``, ``4b`` or
    ``4b - 2`` for the first, second and third month of a quarter.
    """
    if not 1 <= j <= 12:
        raise ValueError(f"month out of range: {j}")
    if c != (j - 1) // 3 + 1:
        raise NotReplicableError(f"month {j} is not in trade quarter {c}", b=b, c=c, month=j)
    k = {1: 4 * b + 2, 2: 4 * b, 0: 4 * b - 2}[j % 3]
    first = j - 3 * c - b + k
    idx = (first, first + 1, first + 2)
    if idx[0] < 1 or idx[-1] > 6:
        raise NotReplicableError(
            f"AQ{b}{c} not replicable in month {j}: needs M{idx[0]}..M{idx[-1]}", b=b, c=c, month=j
        )
    return tuple(ContractLabel(Segment.MONTHLY, i) for i in idx)


# Quarters-ahead offsets of the four legs of Y1, by trade quarter.
_YEARLY_OFFSETS = {1: (3, 6), 2: (1, 4), 3: (-1, 2), 4: (-3, 0)}


def yearly_composition(f: int, c: int) -> tuple[ContractLabel, ...]:
    """Quarterly legs replicating ``Y_f`` when trading in quarter ``c``.

    Leg indices are ``b(i) + 4(f - 1)``; read as a product the printed formula
    would give index 0 for ``f = 1``, which cannot be a listed contract.
    """
    if f != 1:
        raise NotReplicableError("only Y1 replication is supported", f=f)
    if c not in _YEARLY_OFFSETS:
        raise ValueError(f"trade quarter out of range: {c}")
    lo, hi = _YEARLY_OFFSETS[c]
    return tuple(ContractLabel(Segment.QUARTERLY, c + k + 4 * (f - 1), c) for k in range(lo, hi + 1))


def months_to_delivery(leg: ContractLabel, t: date) -> int:
    """Whole months from the trading month to the leg's first delivery month."""
    if leg.segment is Segment.MONTHLY:
        return leg.index
    if leg.segment is Segment.QUARTERLY:
        return 3 * (leg.index - 1) + 4 - month_within_quarter(t)
    return 13 - t.month + 12 * (leg.index - 1)


@dataclass(frozen=True)
class PortfolioComposition:
    target: ContractLabel
    as_of: date
    legs: tuple[tuple[ContractLabel, float], ...]

    @property
    def labels(self) -> tuple[ContractLabel, ...]:
        return tuple(label for label, _ in self.legs)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.legs)

    def __str__(self) -> str:
        return "+".join(str(label) for label in self.labels)


def composition_for(target: ContractLabel | str, t: date, scheme: WeightScheme = WeightScheme()) -> PortfolioComposition:
    target = as_label(target)
    c = quarter_of(t)
    if target.segment is Segment.QUARTERLY:
        if target.trade_quarter is not None and target.trade_quarter != c:
            raise NotReplicableError(f"{target} does not trade in quarter {c}", target=target, date=t)
        labels = quarterly_composition(target.index, c, t.month)
    elif target.segment is Segment.YEARLY:
        labels = yearly_composition(target.index, c)
    else:
        raise NotReplicableError(f"monthly contracts have no replicating portfolio: {target}", target=target)
    weights = weight_function(
        [months_to_delivery(l, t) for l in labels], scheme.annual_rate, scheme.mode, scheme.compounding
    )
    return PortfolioComposition(target, t, tuple(zip(labels, weights)))


@dataclass(frozen=True, eq=False)
class PortfolioSeries(ContinuousSeries):
    """Replicating-portfolio series. ``contracts`` holds the replicated
    target contract; ``compositions`` and ``leg_prices`` record the legs."""

    compositions: tuple[str, ...] = ()
    leg_prices: np.ndarray = None
    leg_weights: np.ndarray = None
    leg_segment: Segment = Segment.MONTHLY

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "compositions", tuple(self.compositions))
        for name in ("leg_prices", "leg_weights"):
            arr = np.array(getattr(self, name), dtype=np.float64).reshape(len(self.dates), -1)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def _take(self, idx, **overrides):
        fields = super()._take(idx, **overrides)
        fields.update(
            compositions=[self.compositions[i] for i in idx],
            leg_prices=self.leg_prices[idx],
            leg_weights=self.leg_weights[idx],
            leg_segment=self.leg_segment,
        )
        return fields


def replicate(
    target: ContractLabel | str,
    panel,
    scheme: WeightScheme = WeightScheme(),
    adjust: Adjustment | str = Adjustment.NONE,
) -> PortfolioSeries:
    """Price the replicating portfolio of ``target`` on every date where all
    legs settled. Volume is the minimum leg volume."""
    target = as_label(target)
    dates, prices, vols, codes, comps, legp, legw = [], [], [], [], [], [], []
    leg_segment = None
    for d in panel.index:
        if not target.is_active(d):
            continue
        try:
            comp = composition_for(target, d, scheme)
        except NotReplicableError:
            continue
        leg_obs = [panel.lookup(contract_for(l, d).code, d) for l in comp.labels]
        if any(o is None for o in leg_obs):
            continue
        p = np.array([o.settle for o in leg_obs])
        w = np.array(comp.weights)
        dates.append(d)
        prices.append(float(w @ p))
        vols.append(min(o.volume for o in leg_obs))
        codes.append(contract_for(target, d).code)
        comps.append(str(comp))
        legp.append(p)
        legw.append(w)
        leg_segment = comp.labels[0].segment
    if not dates:
        raise EmptySeriesError(f"no date with a complete replicating portfolio for {target}", target=target)
    adjusted, rolls = splice_rolls(dates, prices, codes, adjust)
    return PortfolioSeries(
        label=target,
        dates=dates,
        prices=adjusted,
        volumes=vols,
        contracts=codes,
        raw_prices=prices,
        roll_log=rolls,
        adjustment=Adjustment(adjust),
        compositions=comps,
        leg_prices=np.array(legp),
        leg_weights=np.array(legw),
        leg_segment=leg_segment,
    )

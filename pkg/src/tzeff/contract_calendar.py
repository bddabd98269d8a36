"""Contract labels, delivery periods, rolls and continuous series.

A *label* such as ``M1`` or ``Q11`` names a position on the term structure
relative to the trading date; a *contract* such as ``M-2013-02`` names an
absolute delivery period. Continuous series map a label onto the chain of
contracts it refers to as the trading date moves forward.
"""

from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import AlignmentError, EmptySeriesError, GapError, LabelError


class Segment(str, enum.Enum):
    MONTHLY = "M"
    QUARTERLY = "Q"
    YEARLY = "Y"


MAX_INDEX = {Segment.MONTHLY: 6, Segment.QUARTERLY: 7, Segment.YEARLY: 1}

_LABEL_RE = re.compile(r"^(?P<seg>[MQY])(?P<idx>[1-9])(?P<c>[1-4])?$")
_CONTRACT_RE = re.compile(
    r"^(?:M-(?P<my>\d{4})-(?P<mm>\d{2})|Q-(?P<qy>\d{4})Q(?P<qq>[1-4])|Y-(?P<yy>\d{4}))$"
)


def quarter_of(d: date) -> int:
    return (d.month - 1) // 3 + 1


def month_within_quarter(d: date) -> int:
    return (d.month - 1) % 3 + 1


@dataclass(frozen=True, order=True)
class ContractLabel:
    """Relative contract identity: segment, periods ahead and, for quarterly
    contracts, optionally the quarter in which the contract trades.

    ``Q4`` is the continuous four-quarters-ahead series; ``Q41`` is the same
    contract restricted to trading dates in the first quarter.
    """

    segment: Segment
    index: int
    trade_quarter: int | None = None

    def __post_init__(self):
        seg = Segment(self.segment)
        object.__setattr__(self, "segment", seg)
        if not 1 <= self.index <= MAX_INDEX[seg]:
            raise LabelError(f"index out of range for {seg.value}: {self.index}", label=self.index)
        if self.trade_quarter is not None:
            if seg is not Segment.QUARTERLY:
                raise LabelError("only quarterly labels carry a trade quarter")
            if not 1 <= self.trade_quarter <= 4:
                raise LabelError(f"trade quarter out of range: {self.trade_quarter}")

    @classmethod
    def parse(cls, text: str) -> "ContractLabel":
        m = _LABEL_RE.match(text.strip())
        if m is None:
            raise LabelError(f"invalid contract label: {text!r}", label=text)
        c = m.group("c")
        if c is not None and m.group("seg") != "Q":
            raise LabelError(f"invalid contract label: {text!r}", label=text)
        try:
            return cls(Segment(m.group("seg")), int(m.group("idx")), int(c) if c else None)
        except LabelError as exc:
            raise LabelError(f"invalid contract label: {text!r} ({exc})", label=text) from None

    def __str__(self) -> str:
        tail = "" if self.trade_quarter is None else str(self.trade_quarter)
        return f"{self.segment.value}{self.index}{tail}"

    def is_active(self, d: date) -> bool:
        return self.trade_quarter is None or quarter_of(d) == self.trade_quarter


def as_label(label: ContractLabel | str) -> ContractLabel:
    return label if isinstance(label, ContractLabel) else ContractLabel.parse(label)


@dataclass(frozen=True, order=True)
class Contract:
    """Absolute contract: a concrete delivery month, quarter or year."""

    segment: Segment
    year: int
    period: int = 1

    @functools.cached_property
    def code(self) -> str:
        if self.segment is Segment.MONTHLY:
            return f"M-{self.year:04d}-{self.period:02d}"
        if self.segment is Segment.QUARTERLY:
            return f"Q-{self.year:04d}Q{self.period}"
        return f"Y-{self.year:04d}"

    def __str__(self) -> str:
        return self.code

    @classmethod
    def parse(cls, code: str) -> "Contract":
        return _parse_contract(cls, code)

    @classmethod
    def _parse(cls, code: str) -> "Contract":
        m = _CONTRACT_RE.match(code)
        if m is None:
            raise LabelError(f"invalid contract code: {code!r}", contract=code)
        if m.group("my"):
            month = int(m.group("mm"))
            if not 1 <= month <= 12:
                raise LabelError(f"invalid contract code: {code!r}", contract=code)
            return cls(Segment.MONTHLY, int(m.group("my")), month)
        if m.group("qy"):
            return cls(Segment.QUARTERLY, int(m.group("qy")), int(m.group("qq")))
        return cls(Segment.YEARLY, int(m.group("yy")), 1)

    @property
    def delivery(self) -> tuple[date, date]:
        if self.segment is Segment.MONTHLY:
            first_month, months = self.period, 1
        elif self.segment is Segment.QUARTERLY:
            first_month, months = 3 * (self.period - 1) + 1, 3
        else:
            first_month, months = 1, 12
        start = date(self.year, first_month, 1)
        ey, em = divmod(first_month - 1 + months, 12)
        end = date(self.year + ey, em + 1, 1) - timedelta(days=1)
        return start, end


@functools.lru_cache(maxsize=4096)
def _parse_contract(cls, code: str) -> Contract:
    return cls._parse(code)


def contract_for(label: ContractLabel | str, t: date) -> Contract:
    """Absolute contract that ``label`` refers to on trading date ``t``."""
    return _contract_for(as_label(label), t.year, t.month)


@functools.lru_cache(maxsize=8192)
def _contract_for(label: ContractLabel, year: int, month: int) -> Contract:
    t = date(year, month, 1)
    if label.segment is Segment.MONTHLY:
        y, m = divmod(t.year * 12 + (t.month - 1) + label.index, 12)
        return Contract(Segment.MONTHLY, y, m + 1)
    if label.segment is Segment.QUARTERLY:
        y, q = divmod(t.year * 4 + (quarter_of(t) - 1) + label.index, 4)
        return Contract(Segment.QUARTERLY, y, q + 1)
    return Contract(Segment.YEARLY, t.year + label.index, 1)


def delivery_period(label: ContractLabel | str, t: date) -> tuple[date, date]:
    return contract_for(label, t).delivery


@dataclass(frozen=True)
class BusinessCalendar:
    """Weekdays minus an explicit holiday list."""

    holidays: frozenset[date] = frozenset()

    def is_business_day(self, d: date) -> bool:
        return d.weekday() < 5 and d not in self.holidays

    def on_or_after(self, d: date) -> date:
        while not self.is_business_day(d):
            d += timedelta(days=1)
        return d

    def days(self, start: date, end: date) -> Iterator[date]:
        d = start
        while d <= end:
            if self.is_business_day(d):
                yield d
            d += timedelta(days=1)

    def add(self, d: date, n: int) -> date:
        """The ``n``-th business day after ``d`` (``d`` itself when n == 0)."""
        d = self.on_or_after(d)
        for _ in range(n):
            d = self.on_or_after(d + timedelta(days=1))
        return d


WEEKDAYS = BusinessCalendar()


def roll_date(label: ContractLabel | str, t: date, calendar: BusinessCalendar = WEEKDAYS) -> date:
    """First business day of the current front contract's delivery period;
    from that day on the continuous series links to the next contract."""
    start, _ = delivery_period(label, t)
    return calendar.on_or_after(start)


class Adjustment(str, enum.Enum):
    NONE = "none"
    LEVEL_SHIFT = "level_shift"


@dataclass(frozen=True)
class RollEvent:
    date: date
    from_contract: str
    to_contract: str
    raw_jump: float
    shift: float


def _frozen(a, dtype=np.float64) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ContinuousSeries:
    """Daily series for one label. ``prices`` are adjusted per ``adjustment``;
    ``raw_prices`` always hold the traded contract's own settlement."""

    label: ContractLabel
    dates: tuple[date, ...]
    prices: np.ndarray
    volumes: np.ndarray
    contracts: tuple[str, ...]
    filled: np.ndarray = None
    raw_prices: np.ndarray = None
    roll_log: tuple[RollEvent, ...] = ()
    adjustment: Adjustment = Adjustment.NONE

    def __post_init__(self):
        n = len(self.dates)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "contracts", tuple(self.contracts))
        object.__setattr__(self, "prices", _frozen(self.prices))
        object.__setattr__(self, "volumes", _frozen(self.volumes))
        filled = np.zeros(n, bool) if self.filled is None else self.filled
        object.__setattr__(self, "filled", _frozen(filled, bool))
        raw = self.prices if self.raw_prices is None else self.raw_prices
        object.__setattr__(self, "raw_prices", _frozen(raw))
        object.__setattr__(self, "roll_log", tuple(self.roll_log))
        for arr in (self.prices, self.volumes, self.filled, self.raw_prices):
            if arr.shape != (n,):
                raise ValueError("series columns must match the date index")
        if len(self.contracts) != n:
            raise ValueError("series columns must match the date index")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.dates)

    def _take(self, idx: np.ndarray, **overrides):
        keep = set(self.dates[i] for i in idx)
        fields = dict(
            label=self.label,
            dates=[self.dates[i] for i in idx],
            prices=self.prices[idx],
            volumes=self.volumes[idx],
            contracts=[self.contracts[i] for i in idx],
            filled=self.filled[idx],
            raw_prices=self.raw_prices[idx],
            roll_log=[r for r in self.roll_log if r.date in keep],
            adjustment=self.adjustment,
        )
        fields.update(overrides)
        return fields

    def subset(self, dates: Iterable[date]) -> "ContinuousSeries":
        wanted = set(dates)
        idx = np.array([i for i, d in enumerate(self.dates) if d in wanted], dtype=int)
        return type(self)(**self._take(idx))

    def segment_breaks(self) -> np.ndarray:
        """Boolean mask, True for rows whose contract differs from the row before."""
        out = np.zeros(len(self), bool)
        for i in range(1, len(self)):
            out[i] = self.contracts[i] != self.contracts[i - 1]
        return out


def align(*series: ContinuousSeries) -> list[ContinuousSeries]:
    """Restrict every series to the dates common to all of them."""
    if not series:
        return []
    common = set(series[0].dates)
    for s in series[1:]:
        common &= set(s.dates)
    return [s.subset(common) for s in series]


def require_aligned(*series: ContinuousSeries) -> None:
    first = series[0].dates
    for s in series[1:]:
        if s.dates != first:
            raise AlignmentError(
                f"series {s.label} is not aligned with {series[0].label}",
                left=series[0].label,
                right=s.label,
            )


def index_observations(observations) -> Mapping[str, Mapping[date, object]]:
    if isinstance(observations, Mapping):
        return observations
    book: dict[str, dict[date, object]] = {}
    for o in observations:
        book.setdefault(o.contract_code, {})[o.date] = o
    return book


def build_continuous_series(
    observations,
    label: ContractLabel | str,
    adjust: Adjustment | str = Adjustment.LEVEL_SHIFT,
    *,
    calendar: BusinessCalendar = WEEKDAYS,
    max_gap: int = 10,
) -> ContinuousSeries:
    """Splice front-contract settlements for ``label`` into one series.

    Single missing business days are carried forward with zero volume and
    flagged in ``filled``; a run of more than ``max_gap`` missing days raises
    :class:`GapError`. With ``Adjustment.LEVEL_SHIFT`` the history before each
    roll is shifted so the old and new contract coincide on the roll day.
    """
    label = as_label(label)
    adjust = Adjustment(adjust)
    book = index_observations(observations)

    spans = [(min(v), max(v)) for v in book.values() if v]
    if not spans:
        raise EmptySeriesError(f"no observations for {label}", label=label)
    first = min(s for s, _ in spans)
    last = max(e for _, e in spans)

    days = [d for d in calendar.days(first, last) if label.is_active(d)]
    observed = [d for d in days if d in book.get(contract_for(label, d).code, {})]
    if not observed:
        raise EmptySeriesError(f"no observations for {label}", label=label)
    lo, hi = observed[0], observed[-1]

    dates, raw, vols, codes, filled = [], [], [], [], []
    seg_code, last_price, run, run_start, prev_day = None, None, 0, None, None
    day_set = set(days)
    for d in days:
        if d < lo or d > hi:
            continue
        if prev_day is not None and _skipped_active_gap(prev_day, d, calendar, day_set):
            run = 0
        prev_day = d
        code = contract_for(label, d).code
        if code != seg_code:
            seg_code, last_price = code, None
        obs = book.get(code, {}).get(d)
        if obs is not None:
            dates.append(d)
            raw.append(float(obs.settle))
            vols.append(float(obs.volume))
            codes.append(code)
            filled.append(False)
            last_price, run = float(obs.settle), 0
            continue
        run += 1
        if run == 1:
            run_start = d
        if run > max_gap:
            raise GapError(
                f"{label}: more than {max_gap} missing business days in {code} "
                f"from {run_start.isoformat()} to {d.isoformat()}",
                label=label,
                contract=code,
                start=run_start,
                end=d,
            )
        if last_price is not None:
            dates.append(d)
            raw.append(last_price)
            vols.append(0.0)
            codes.append(code)
            filled.append(True)

    raw_arr = np.array(raw)

    def old_price(i):
        obs = book.get(codes[i - 1], {}).get(dates[i])
        return float(obs.settle) if obs is not None else raw_arr[i - 1]

    adjusted, rolls = splice_rolls(dates, raw_arr, codes, adjust, old_price)

    return ContinuousSeries(
        label=label,
        dates=dates,
        prices=adjusted,
        volumes=vols,
        contracts=codes,
        filled=filled,
        raw_prices=raw_arr,
        roll_log=rolls,
        adjustment=adjust,
    )


def splice_rolls(dates, raw, codes, adjust, old_price=None):
    """Detect contract switches and apply the backward level shift.

    ``old_price(i)`` gives the outgoing contract's price for the roll at row
    ``i``; it defaults to the previous row's raw price.
    """
    raw = np.asarray(raw, dtype=np.float64)
    adjust = Adjustment(adjust)
    adjusted = raw.copy()
    rolls = []
    for i in range(1, len(dates)):
        if codes[i] == codes[i - 1]:
            continue
        ref = old_price(i) if old_price is not None else raw[i - 1]
        jump = float(raw[i] - ref)
        shift = jump if adjust is Adjustment.LEVEL_SHIFT else 0.0
        if shift:
            adjusted[:i] += shift
        rolls.append(RollEvent(dates[i], codes[i - 1], codes[i], jump, shift))
    return adjusted, rolls


def _skipped_active_gap(prev: date, d: date, calendar: BusinessCalendar, day_set: set) -> bool:
    # True when an inactive business day separates prev and d (seasonal Q_bc chains).
    nxt = calendar.on_or_after(prev + timedelta(days=1))
    return nxt != d and nxt not in day_set


def tiles(periods: Sequence[tuple[date, date]], target: tuple[date, date]) -> bool:
    """True when the periods, in order, cover ``target`` without gap or overlap."""
    if not periods:
        return False
    if periods[0][0] != target[0] or periods[-1][1] != target[1]:
        return False
    return all(b[0] == a[1] + timedelta(days=1) for a, b in zip(periods, periods[1:]))

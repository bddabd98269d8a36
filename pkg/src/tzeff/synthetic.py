"""Synthetic electricity swap markets with known ground truth.

Random numbers come from xoshiro256** seeded by SplitMix64 (both with their
published constants), so any implementation following the draw order
documented in :func:`gen_market` reproduces the output bit for bit.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta

import numpy as np

from . import kernels
from .contract_calendar import WEEKDAYS, Contract, ContractLabel, Segment, contract_for
from .ingest import PriceObservation

MASK64 = (1 << 64) - 1
NOISE_PHI = 0.5
PRICE_FLOOR = 1.0


def splitmix64(x: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (output, new state)."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31), x


class Xoshiro256:
    """xoshiro256** generator; state is four 64-bit words."""

    def __init__(self, seed: int):
        s = int(seed) & MASK64
        words = []
        for _ in range(4):
            out, s = splitmix64(s)
            words.append(out)
        self.state = np.array(words, dtype=np.uint64)

    def u64(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.uint64)
        kernels.fill_u64(self.state, out)
        return out

    def uniform(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.float64)
        kernels.fill_uniform(self.state, out)
        return out

    def normal(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.float64)
        kernels.fill_normal(self.state, out)
        return out


class VolumeKind(str, enum.Enum):
    ALWAYS_ON = "always_on"
    MONTHLY_DROUGHT = "monthly_drought"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class VolumePattern:
    kind: VolumeKind = VolumeKind.ALWAYS_ON
    dry_months: tuple[int, ...] = ()
    p: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", VolumeKind(self.kind))
        object.__setattr__(self, "dry_months", tuple(int(m) for m in self.dry_months))
        if any(not 1 <= m <= 12 for m in self.dry_months):
            raise ValueError("dry months must be in 1..12")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be a probability")


class Linkage(str, enum.Enum):
    REPLICATING = "replicating"
    INDEPENDENT = "independent"


BASE_VOLUME = {Segment.MONTHLY: 500.0, Segment.QUARTERLY: 1000.0, Segment.YEARLY: 5000.0}


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 0
    n_days: int = 500
    base_price: float = 50.0
    rw_vol: float = 0.01
    bias_alpha: float = 0.0
    noise_vol: float = 0.0
    volume_pattern: VolumePattern = field(default_factory=VolumePattern)
    start: date = date(2004, 6, 1)
    market: str = "DE"
    segments: tuple[str, ...] = ("M", "Q", "Y")
    seasonal_amplitude: float = 0.1
    linkage: Linkage = Linkage.REPLICATING

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.n_days < 30:
            raise ValueError("n_days must be at least 30")
        if self.rw_vol < 0 or self.noise_vol < 0:
            raise ValueError("volatilities must be non-negative")
        if self.base_price <= 0:
            raise ValueError("base_price must be positive")
        vp = self.volume_pattern
        if isinstance(vp, dict):
            vp = VolumePattern(**vp)
        object.__setattr__(self, "volume_pattern", vp)
        if isinstance(self.start, str):
            object.__setattr__(self, "start", date.fromisoformat(self.start))
        object.__setattr__(self, "segments", tuple(Segment(s).value for s in self.segments))
        object.__setattr__(self, "linkage", Linkage(self.linkage))

    @classmethod
    def from_mapping(cls, data: dict) -> "ScenarioSpec":
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown scenario keys: {sorted(extra)}")
        vp = data.pop("volume_pattern", None)
        if vp is not None:
            if isinstance(vp, str):
                vp = {"kind": vp}
            data["volume_pattern"] = VolumePattern(**vp)
        return cls(**data)

    def to_mapping(self) -> dict:
        d = asdict(self)
        d["start"] = self.start.isoformat()
        d["linkage"] = self.linkage.value
        d["volume_pattern"] = {
            "kind": self.volume_pattern.kind.value,
            "dry_months": list(self.volume_pattern.dry_months),
            "p": self.volume_pattern.p,
        }
        d["segments"] = list(self.segments)
        return d


def _month_key(c: Contract) -> int:
    return c.year * 12 + c.period - 1


_LISTED_LABELS = (
    [ContractLabel(Segment.MONTHLY, j) for j in range(1, 7)]
    + [ContractLabel(Segment.QUARTERLY, b) for b in range(1, 8)]
    + [ContractLabel(Segment.YEARLY, 1)]
)


def _listed(d: date) -> tuple[Contract, ...]:
    """Contracts quoted on ``d``: M1..M6, Q1..Q7 and Y1, in canonical order."""
    return _listed_in_month(d.year, d.month)


@functools.lru_cache(maxsize=1024)
def _listed_in_month(year: int, month: int) -> tuple[Contract, ...]:
    d = date(year, month, 1)
    return tuple(contract_for(label, d) for label in _LISTED_LABELS)


def _quarter_months(q: Contract) -> list[int]:
    first = q.year * 12 + 3 * (q.period - 1)
    return [first, first + 1, first + 2]


def gen_market(spec: ScenarioSpec) -> list[PriceObservation]:
    """Generate settlement observations for ``spec``.

    Per business day, in order: one normal per driving walk (one, or three
    under independent linkage: monthly, quarterly, yearly); one uniform when
    the volume pattern is Bernoulli; then one normal per listed contract in
    the order M1..M6, Q1..Q7, Y1 driving that contract's AR(1) noise.

    Monthly prices are ``base * exp(walk) * season(month) + noise``. A
    quarter's price is the mean of its three monthly prices (fair value for
    months not yet listed) plus ``bias_alpha`` and noise; the year is the mean
    of its four quarterly prices plus ``bias_alpha`` and noise.
    """
    rng = Xoshiro256(spec.seed)
    n_walks = 3 if spec.linkage is Linkage.INDEPENDENT else 1
    walks = np.zeros(n_walks)
    noise: dict[str, float] = {}
    stat_sd = spec.noise_vol
    innov_sd = spec.noise_vol * math.sqrt(1.0 - NOISE_PHI**2)
    amp = spec.seasonal_amplitude
    emit = set(spec.segments)
    vp = spec.volume_pattern

    out: list[PriceObservation] = []
    d = WEEKDAYS.on_or_after(spec.start)
    for step in range(spec.n_days):
        if step:
            walks = walks + spec.rw_vol * rng.normal(n_walks)
        active = True
        if vp.kind is VolumeKind.BERNOULLI:
            active = bool(rng.uniform(1)[0] < vp.p)
        elif vp.kind is VolumeKind.MONTHLY_DROUGHT:
            active = d.month not in vp.dry_months
        listed = _listed(d)
        z = rng.normal(len(listed))
        for c, zi in zip(listed, z):
            prev = noise.get(c.code)
            noise[c.code] = stat_sd * zi if prev is None else NOISE_PHI * prev + innov_sd * zi
        level = spec.base_price * np.exp(walks)
        m_level, q_level, y_level = (level[0], level[0], level[0]) if n_walks == 1 else level

        def fair_month(key, lvl):
            return lvl * (1.0 + amp * math.cos(2.0 * math.pi * (key % 12) / 12.0))

        month_price = {}
        for c in listed[:6]:
            k = _month_key(c)
            month_price[k] = fair_month(k, m_level) + noise[c.code]
        quarter_price = {}
        for c in listed[6:13]:
            legs = [month_price.get(k, fair_month(k, q_level)) if n_walks == 1 else fair_month(k, q_level)
                    for k in _quarter_months(c)]
            quarter_price[c.code] = sum(legs) / 3.0 + spec.bias_alpha + noise[c.code]
        ycon = listed[13]
        yq = [Contract(Segment.QUARTERLY, ycon.year, q).code for q in range(1, 5)]
        if n_walks == 1:
            y_legs = [quarter_price[q] for q in yq]
        else:
            y_legs = [sum(fair_month(k, y_level) for k in _quarter_months(Contract.parse(q))) / 3.0 for q in yq]
        year_price = sum(y_legs) / 4.0 + spec.bias_alpha + noise[ycon.code]

        for c in listed:
            if c.segment.value not in emit:
                continue
            if c.segment is Segment.MONTHLY:
                price = month_price[_month_key(c)]
            elif c.segment is Segment.QUARTERLY:
                price = quarter_price[c.code]
            else:
                price = year_price
            vol = BASE_VOLUME[c.segment] if active else 0.0
            out.append(PriceObservation(d, c.code, max(float(price), PRICE_FLOOR), vol))
        d = WEEKDAYS.on_or_after(d + timedelta(days=1))
    return out


class PairMode(str, enum.Enum):
    COINTEGRATED_GAP = "cointegrated_gap"
    INDEPENDENT_WALKS = "independent_walks"
    STATIONARY_BOTH = "stationary_both"


def gen_unit_root_pair(
    seed: int,
    n: int,
    mode: PairMode | str,
    alpha: float = 0.0,
    *,
    start: float = 50.0,
    step_sd: float = 1.0,
    noise_sd: float = 1.0,
    phi: float = NOISE_PHI,
) -> tuple[np.ndarray, np.ndarray]:
    """Two series with a known integration/cointegration structure.

    ``noise_sd`` is the innovation standard deviation of the AR(``phi``)
    noise. Draw order: ``n`` normals for the first process, then ``n`` for
    the second.
    """
    mode = PairMode(mode)
    rng = Xoshiro256(seed)
    z1 = rng.normal(n)
    z2 = rng.normal(n)
    if mode is PairMode.COINTEGRATED_GAP:
        x = start + np.cumsum(step_sd * z1)
        u = kernels.ar1_filter(noise_sd * z2, phi, noise_sd * z2[0] / math.sqrt(1 - phi**2))
        return x, x + alpha + u
    if mode is PairMode.INDEPENDENT_WALKS:
        return start + np.cumsum(step_sd * z1), start + np.cumsum(step_sd * z2)
    sd0 = noise_sd / math.sqrt(1 - phi**2)
    x = start + kernels.ar1_filter(noise_sd * z1, phi, sd0 * z1[0])
    y = start + kernels.ar1_filter(noise_sd * z2, phi, sd0 * z2[0])
    return x, y

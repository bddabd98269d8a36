"""Settlement-price files: parsing, validation and the observation panel.

The on-disk format is UTF-8 CSV with header ``date,contract_code,settle,volume``.
Exchange-specific contract codes (``F1BM-2013-02``, ``FTBQ-2012Q2`` ...) are
normalized to the canonical ``M-2013-02`` / ``Q-2012Q2`` / ``Y-2016`` form.
"""

from __future__ import annotations

import csv
import gzip
import io
import math
import re
from dataclasses import dataclass, field
from datetime import date
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .contract_calendar import (
    WEEKDAYS,
    Adjustment,
    BusinessCalendar,
    Contract,
    ContinuousSeries,
    ContractLabel,
    Segment,
    as_label,
    build_continuous_series,
    require_aligned,
)
from .errors import LabelError, ParseError

HEADER = ("date", "contract_code", "settle", "volume")

# EEX Phelix base (F1B*), Phelix-FR base (F7B*) and OMIP Spanish base (FTB*).
DEFAULT_PREFIXES: dict[str, Segment] = {
    "M": Segment.MONTHLY,
    "Q": Segment.QUARTERLY,
    "Y": Segment.YEARLY,
    "F1BM": Segment.MONTHLY,
    "F1BQ": Segment.QUARTERLY,
    "F1BY": Segment.YEARLY,
    "F7BM": Segment.MONTHLY,
    "F7BQ": Segment.QUARTERLY,
    "F7BY": Segment.YEARLY,
    "FTBM": Segment.MONTHLY,
    "FTBQ": Segment.QUARTERLY,
    "FTBY": Segment.YEARLY,
    "FTBYR": Segment.YEARLY,
}

_CODE_RE = re.compile(r"^(?P<prefix>[A-Z0-9]+)-(?P<rest>\d{4}(?:-\d{2}|Q[1-4])?)$")


@dataclass(frozen=True)
class PriceObservation:
    date: date
    contract_code: str
    settle: float
    volume: float
    volume_imputed: bool = False


def normalize_contract_code(code: str, prefixes: Mapping[str, Segment] | None = None) -> str:
    prefixes = DEFAULT_PREFIXES if prefixes is None else prefixes
    m = _CODE_RE.match(code.strip())
    if m is None or m.group("prefix") not in prefixes:
        raise LabelError(f"unrecognized contract code: {code!r}", contract=code)
    seg = Segment(prefixes[m.group("prefix")])
    rest = m.group("rest")
    # Contract.parse validates that the period shape matches the segment.
    return Contract.parse(f"{seg.value}-{rest}").code


def _fmt_number(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def parse_price_file(
    stream: IO[str] | Iterable[str], prefixes: Mapping[str, Segment] | None = None
) -> list[PriceObservation]:
    """Parse a settlement CSV into observations, one per data row."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file: missing header", line=1) from None
    if tuple(h.strip() for h in header) != HEADER:
        raise ParseError(f"bad header {header!r}; expected {','.join(HEADER)}", line=1)

    out: list[PriceObservation] = []
    seen: dict[tuple[str, date], int] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) not in (3, 4):
            raise ParseError(f"line {line}: expected 4 fields, got {len(row)}", line=line)
        raw_date, raw_code, raw_settle = (c.strip() for c in row[:3])
        raw_volume = row[3].strip() if len(row) == 4 else ""
        try:
            d = date.fromisoformat(raw_date)
        except ValueError:
            raise ParseError(f"line {line}: bad date {raw_date!r}", line=line, field="date") from None
        try:
            code = normalize_contract_code(raw_code, prefixes)
        except LabelError:
            raise ParseError(
                f"line {line}: bad contract_code {raw_code!r}", line=line, field="contract_code"
            ) from None
        try:
            settle = float(raw_settle)
        except ValueError:
            raise ParseError(f"line {line}: bad settle {raw_settle!r}", line=line, field="settle") from None
        if not math.isfinite(settle):
            raise ParseError(f"line {line}: non-finite settlement", line=line, field="settle")
        if settle <= 0:
            raise ParseError(f"non-positive settlement, line {line}", line=line, field="settle")
        imputed = raw_volume == ""
        try:
            volume = 0.0 if imputed else float(raw_volume)
        except ValueError:
            raise ParseError(f"line {line}: bad volume {raw_volume!r}", line=line, field="volume") from None
        if not math.isfinite(volume) or volume < 0:
            raise ParseError(f"line {line}: negative or non-finite volume", line=line, field="volume")
        key = (code, d)
        if key in seen:
            raise ParseError(
                f"duplicate ({d.isoformat()}, {code}) on lines {seen[key]} and {line}",
                line=line,
                first_line=seen[key],
            )
        seen[key] = line
        out.append(PriceObservation(d, code, settle, volume, imputed))
    return out


def serialize_observations(observations: Iterable[PriceObservation], stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(HEADER)
    for o in observations:
        vol = "" if o.volume_imputed else _fmt_number(o.volume)
        w.writerow([o.date.isoformat(), o.contract_code, _fmt_number(o.settle), vol])


def _open_text(path: Path, mode: str):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, mode + "b"), encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


def read_price_file(path, prefixes: Mapping[str, Segment] | None = None) -> list[PriceObservation]:
    path = Path(path)
    with _open_text(path, "r") as fh:
        return parse_price_file(fh, prefixes)


def write_price_file(path, observations: Iterable[PriceObservation]) -> None:
    path = Path(path)
    if path.suffix == ".gz":
        # mtime=0 keeps compressed output byte-stable across runs.
        buf = io.StringIO()
        serialize_observations(observations, buf)
        with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as gz:
            gz.write(buf.getvalue().encode("utf-8"))
        return
    with _open_text(path, "w") as fh:
        serialize_observations(observations, fh)


def sort_observations(observations: Iterable[PriceObservation]) -> list[PriceObservation]:
    return sorted(observations, key=lambda o: (o.date, Contract.parse(o.contract_code)))


@dataclass(frozen=True, eq=False)
class Panel:
    """All observations of one market plus lazily built continuous series."""

    market: str
    observations: tuple[PriceObservation, ...]
    calendar: BusinessCalendar = WEEKDAYS
    max_gap: int = 10
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(sort_observations(self.observations)))
        seen = set()
        for o in self.observations:
            key = (o.contract_code, o.date)
            if key in seen:
                raise ParseError(f"duplicate observation {o.date} {o.contract_code}")
            seen.add(key)

    @cached_property
    def book(self) -> dict[str, dict[date, PriceObservation]]:
        book: dict[str, dict[date, PriceObservation]] = {}
        for o in self.observations:
            book.setdefault(o.contract_code, {})[o.date] = o
        return book

    @cached_property
    def index(self) -> tuple[date, ...]:
        """Every date on which the market published at least one settlement."""
        return tuple(sorted({o.date for o in self.observations}))

    def lookup(self, code: str, d: date) -> PriceObservation | None:
        return self.book.get(code, {}).get(d)

    def series(self, label: ContractLabel | str, adjust: Adjustment | str = Adjustment.LEVEL_SHIFT) -> ContinuousSeries:
        key = (as_label(label), Adjustment(adjust))
        if key not in self._cache:
            self._cache[key] = build_continuous_series(
                self.book, key[0], key[1], calendar=self.calendar, max_gap=self.max_gap
            )
        return self._cache[key]

    def __len__(self) -> int:
        return len(self.observations)


def positive_volume_mask(target: ContinuousSeries, components: Sequence[ContinuousSeries]) -> set[date]:
    """Dates on which the target and every component traded positive volume."""
    require_aligned(target, *components)
    ok = target.volumes > 0
    for c in components:
        ok = ok & (c.volumes > 0)
    return {d for d, flag in zip(target.dates, ok) if flag}

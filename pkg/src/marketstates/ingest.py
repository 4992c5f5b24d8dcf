"""Price tables, arithmetic returns and panel alignment."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import (
    EmptyOutputError,
    EmptyRangeError,
    InsufficientUniverseError,
    ParseError,
    ValidationError,
)


def parse_instant(text: str) -> datetime:
    """Parse ``YYYY-MM-DD`` or ``YYYY-MM-DDTHH:MM:SS``."""
    text = text.strip()
    try:
        if len(text) == 10:
            return datetime.combine(date.fromisoformat(text), time())
        return datetime.fromisoformat(text)
    except ValueError:
        raise ValueError(f"not an ISO-8601 instant: {text!r}") from None


def format_instant(t: datetime) -> str:
    if t.time() == time() and t.tzinfo is None:
        return t.date().isoformat()
    return t.isoformat()


@dataclass(frozen=True)
class PriceSeries:
    symbol: str
    timestamps: tuple
    prices: np.ndarray

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        if len(self.timestamps) != len(prices):
            raise ValidationError(f"{self.symbol}: timestamps and prices differ in length")
        if np.any(~(prices > 0)):
            raise ValidationError(f"{self.symbol}: prices must be positive")
        if any(b <= a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise ValidationError(f"{self.symbol}: timestamps must be strictly increasing")

    def __len__(self):
        return len(self.timestamps)

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (
            self.symbol == other.symbol
            and self.timestamps == other.timestamps
            and np.array_equal(self.prices, other.prices)
        )


@dataclass(frozen=True)
class ReturnSeries:
    symbol: str
    timestamps: tuple
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        if len(self.timestamps) != len(values):
            raise ValidationError(f"{self.symbol}: timestamps and values differ in length")
        if any(b <= a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise ValidationError(f"{self.symbol}: timestamps must be strictly increasing")

    def __len__(self):
        return len(self.timestamps)


@dataclass(frozen=True)
class ReturnPanel:
    """K aligned return series over a common grid of T timestamps."""

    symbols: tuple
    timestamps: tuple
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        if values.shape != (len(self.symbols), len(self.timestamps)):
            raise ValidationError(
                f"panel values have shape {values.shape}, expected "
                f"({len(self.symbols)}, {len(self.timestamps)})"
            )
        if len(self.symbols) < 2:
            raise InsufficientUniverseError("a panel needs at least 2 symbols")
        if len(self.timestamps) < 2:
            raise EmptyRangeError("a panel needs at least 2 timestamps")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValidationError("duplicate symbols in panel")
        if not np.all(np.isfinite(values)):
            raise ValidationError("panel contains missing or non-finite cells")

    @property
    def K(self) -> int:
        return len(self.symbols)

    @property
    def T(self) -> int:
        return len(self.timestamps)

    def series(self) -> list[ReturnSeries]:
        return [
            ReturnSeries(s, self.timestamps, self.values[i], self.normalized)
            for i, s in enumerate(self.symbols)
        ]


@dataclass(frozen=True)
class PriceTableFormat:
    date_column: str = "date"
    symbol_column: str = "symbol"
    price_column: str = "price"
    delimiter: str = ","


def parse_price_table(stream: TextIO | str, fmt: PriceTableFormat = PriceTableFormat()) -> list[PriceSeries]:
    """Read a long-format ``date,symbol,price`` table.

    Returns one series per symbol, in order of first appearance, each sorted
    by timestamp.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream, delimiter=fmt.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty price table", line=1) from None
    header = [h.strip() for h in header]
    try:
        di = header.index(fmt.date_column)
        si = header.index(fmt.symbol_column)
        pi = header.index(fmt.price_column)
    except ValueError:
        raise ParseError(
            f"header must contain {fmt.date_column!r}, {fmt.symbol_column!r}, {fmt.price_column!r}",
            line=1,
        ) from None

    rows = defaultdict(dict)
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=line)
        symbol = row[si].strip()
        if not symbol:
            raise ParseError("empty symbol", line=line)
        try:
            t = parse_instant(row[di])
        except ValueError as exc:
            raise ParseError(str(exc), line=line) from None
        try:
            price = float(row[pi])
        except ValueError:
            raise ParseError(f"not a number: {row[pi]!r}", line=line) from None
        if not price > 0 or not np.isfinite(price):
            raise ValidationError(f"line {line}: price must be positive, got {row[pi].strip()!r}")
        if t in rows[symbol]:
            raise ValidationError(f"line {line}: duplicate timestamp {format_instant(t)} for {symbol}")
        rows[symbol][t] = price

    out = []
    for symbol, by_time in rows.items():
        ts = sorted(by_time)
        out.append(PriceSeries(symbol, ts, [by_time[t] for t in ts]))
    return out


def write_price_table(series: Iterable[PriceSeries], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["date", "symbol", "price"])
    for s in series:
        for t, p in zip(s.timestamps, s.prices):
            writer.writerow([format_instant(t), s.symbol, repr(float(p))])


@dataclass(frozen=True)
class SessionWindow:
    """Intraday clock range (inclusive) for the start instant of each return."""

    start: time = time(10, 45)
    end: time = time(14, 45)

    def __post_init__(self):
        if self.end < self.start:
            raise ValidationError("session end precedes session start")

    @classmethod
    def parse(cls, text: str) -> "SessionWindow":
        try:
            a, b = text.split("-")
            return cls(time.fromisoformat(a.strip()), time.fromisoformat(b.strip()))
        except ValueError:
            raise ValidationError(f"bad session window {text!r}, expected HH:MM-HH:MM") from None


def compute_returns(
    series: PriceSeries,
    horizon: int | timedelta = 1,
    stride: int | timedelta = 1,
    session: SessionWindow | None = None,
) -> ReturnSeries:
    """Arithmetic returns ``(S(t+h) - S(t)) / S(t)`` stamped at ``t``.

    Integer ``horizon``/``stride`` count observations (trading days for a daily
    table). ``timedelta`` values work on the clock: ``t`` runs over a grid
    anchored at the session start of each calendar day (or at the first
    observation of the day without a session) and both ``S(t)`` and
    ``S(t + horizon)`` must be present in the table.
    """
    if len(series) < 2:
        raise ValidationError(f"{series.symbol}: need at least 2 prices")
    clock = isinstance(horizon, timedelta)
    if clock != isinstance(stride, timedelta):
        raise ValidationError("horizon and stride must both be counts or both be durations")

    if not clock:
        if horizon < 1 or stride < 1:
            raise ValidationError("horizon and stride must be positive")
        p = series.prices
        idx = np.arange(0, len(p) - horizon, stride)
        ts = [series.timestamps[i] for i in idx]
        values = (p[idx + horizon] - p[idx]) / p[idx]
        if session is not None:
            keep = [i for i, t in enumerate(ts) if session.start <= t.time() <= session.end]
            ts = [ts[i] for i in keep]
            values = values[keep]
    else:
        if horizon <= timedelta(0) or stride <= timedelta(0):
            raise ValidationError("horizon and stride must be positive")
        price_at = dict(zip(series.timestamps, series.prices))
        ts, vals = [], []
        for day in sorted({t.date() for t in series.timestamps}):
            if session is not None:
                t = datetime.combine(day, session.start)
                stop = datetime.combine(day, session.end)
            else:
                day_ts = [u for u in series.timestamps if u.date() == day]
                t, stop = day_ts[0], day_ts[-1]
            while t <= stop:
                a = price_at.get(t)
                b = price_at.get(t + horizon)
                if a is not None and b is not None:
                    ts.append(t)
                    vals.append((b - a) / a)
                t += stride
        values = np.asarray(vals, dtype=float)

    if len(ts) == 0:
        raise EmptyOutputError(f"{series.symbol}: no computable returns")
    return ReturnSeries(series.symbol, ts, values)


def align_universe(
    collection: Sequence[ReturnSeries],
    start: datetime | None = None,
    end: datetime | None = None,
) -> ReturnPanel:
    """Complete-case alignment of return series into a panel.

    The grid holds every timestamp inside ``[start, end]`` that more than half
    of the series report. Series missing any grid timestamp are dropped;
    timestamps reported by a minority of series are ignored.
    """
    if start is not None and end is not None and end < start:
        raise EmptyRangeError("range end precedes range start")

    def in_range(t):
        return (start is None or t >= start) and (end is None or t <= end)

    lookup = []
    counts = defaultdict(int)
    for s in collection:
        m = {t: v for t, v in zip(s.timestamps, s.values) if in_range(t)}
        lookup.append(m)
        for t in m:
            counts[t] += 1
    n = len(collection)
    grid = sorted(t for t, c in counts.items() if 2 * c > n)
    if not grid:
        raise EmptyRangeError("no common timestamps in range")

    symbols, rows = [], []
    for s, m in zip(collection, lookup):
        if all(t in m for t in grid):
            symbols.append(s.symbol)
            rows.append([m[t] for t in grid])
    if len(symbols) < 2:
        raise InsufficientUniverseError(
            f"only {len(symbols)} symbol(s) cover the common grid of {len(grid)} timestamps"
        )
    if len(grid) < 2:
        raise EmptyRangeError("common grid has fewer than 2 timestamps")
    normalized = bool(collection) and all(s.normalized for s in collection)
    return ReturnPanel(symbols, grid, np.array(rows, dtype=float), normalized)


def read_returns_table(stream: TextIO | str) -> list[ReturnSeries]:
    """Read a long-format ``date,symbol,return`` table."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    header = [h.strip() for h in next(reader, [])]
    if header[:3] != ["date", "symbol", "return"]:
        raise ParseError("header must be date,symbol,return", line=1)
    rows = defaultdict(dict)
    for row in reader:
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line=reader.line_num)
        try:
            rows[row[1].strip()][parse_instant(row[0])] = float(row[2])
        except ValueError as exc:
            raise ParseError(str(exc), line=reader.line_num) from None
    out = []
    for symbol, m in rows.items():
        ts = sorted(m)
        out.append(ReturnSeries(symbol, ts, [m[t] for t in ts]))
    return out


def write_returns_table(panel: ReturnPanel, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["date", "symbol", "return"])
    for j, t in enumerate(panel.timestamps):
        stamp = format_instant(t)
        for i, s in enumerate(panel.symbols):
            writer.writerow([stamp, s, format(panel.values[i, j], ".17g")])

"""Characterizing market states: averages, sector ordering, histograms."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .corr import CorrelationWindow, average_matrix
from .errors import IncompatibleUniverseError, MissingSectorError, ParseError, ValidationError

# display order of the ten GICS sectors
SECTORS = ("E", "M", "I", "CD", "CS", "H", "F", "IT", "C", "U")
SECTOR_NAMES = {
    "E": "Energy",
    "M": "Materials",
    "I": "Industrials",
    "CD": "Consumer Discretionary",
    "CS": "Consumer Staples",
    "H": "Health Care",
    "F": "Financials",
    "IT": "Information Technology",
    "C": "Communication",
    "U": "Utilities",
}


@dataclass(frozen=True)
class SectorMap:
    mapping: dict

    def __post_init__(self):
        bad = {s: c for s, c in self.mapping.items() if c not in SECTORS}
        if bad:
            sym, code = next(iter(bad.items()))
            raise ValidationError(f"unknown sector code {code!r} for {sym}")

    def __getitem__(self, symbol):
        try:
            return self.mapping[symbol]
        except KeyError:
            raise MissingSectorError(f"no sector for symbol {symbol!r}") from None

    @classmethod
    def read_csv(cls, stream) -> "SectorMap":
        if isinstance(stream, str):
            stream = io.StringIO(stream)
        reader = csv.reader(stream)
        header = [h.strip() for h in next(reader, [])]
        if header != ["symbol", "sector"]:
            raise ParseError("header must be symbol,sector", line=1)
        mapping = {}
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", line=reader.line_num)
            sym, code = row[0].strip(), row[1].strip()
            if sym in mapping:
                raise ValidationError(f"line {reader.line_num}: symbol {sym} listed twice")
            mapping[sym] = code
        return cls(mapping)

    def write_csv(self, stream) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["symbol", "sector"])
        for sym, code in self.mapping.items():
            writer.writerow([sym, code])


@dataclass(frozen=True)
class SectorBlock:
    sector: str
    start: int
    stop: int


def state_average(mapping: dict, windows: list[CorrelationWindow]) -> dict[int, CorrelationWindow]:
    members = defaultdict(list)
    for k, sid in mapping.items():
        members[sid].append(windows[k])
    return {sid: average_matrix(members[sid]) for sid in sorted(members)}


def sector_permutation(symbols, smap: SectorMap) -> list[int]:
    rank = {code: i for i, code in enumerate(SECTORS)}
    return sorted(range(len(symbols)), key=lambda i: (rank[smap[symbols[i]]], symbols[i]))


def sector_sort(window: CorrelationWindow, smap: SectorMap) -> tuple[CorrelationWindow, list[SectorBlock]]:
    """Permute rows and columns into sector blocks.

    Symbols are grouped by sector in display order and alphabetically within
    a sector. Returns the permuted window and the block boundaries.
    """
    perm = sector_permutation(window.symbols, smap)
    symbols = [window.symbols[i] for i in perm]
    values = window.values[np.ix_(perm, perm)]
    blocks = []
    for i, sym in enumerate(symbols):
        code = smap[sym]
        if blocks and blocks[-1].sector == code:
            blocks[-1] = SectorBlock(code, blocks[-1].start, i + 1)
        else:
            blocks.append(SectorBlock(code, i, i + 1))
    out = CorrelationWindow(
        values, symbols, window.window_start, window.window_end, window.label_date, window.sample_count
    )
    return out, blocks


def diff_to_overall(state_avg: CorrelationWindow, overall: CorrelationWindow) -> np.ndarray:
    if state_avg.symbols != overall.symbols:
        raise IncompatibleUniverseError("state and overall matrices cover different symbols")
    out = state_avg.values - overall.values
    np.fill_diagonal(out, 0.0)
    return out


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    source: object = None

    @property
    def bins(self) -> int:
        return len(self.counts)


def coefficient_histogram(
    window: CorrelationWindow, bins: int = 40, include_diagonal: bool = False, source=None
) -> Histogram:
    """Equal-width histogram of correlation coefficients over [-1, 1].

    Each pair is counted once (strict upper triangle) unless the diagonal is
    included, in which case the diagonal entries are added too. Bins are
    left-closed with the last one closed on both sides; a value within
    rounding of an edge counts in the bin to its right.
    """
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    k = window.K
    rows, cols = np.triu_indices(k, 0 if include_diagonal else 1)
    data = window.values[rows, cols]
    edges = np.linspace(-1.0, 1.0, bins + 1)
    pos = (np.clip(data, -1.0, 1.0) + 1.0) * (bins / 2.0)
    idx = np.minimum(np.floor(pos + 1e-9).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    if source is None:
        source = window.label_date
    return Histogram(edges, counts.astype(np.int64), source)


def occupied_clusters(hist: Histogram) -> list[tuple[int, int, int]]:
    """Runs of adjacent non-empty bins as ``(first_bin, last_bin, count)``."""
    runs = []
    for i, c in enumerate(hist.counts):
        if c == 0:
            continue
        if runs and runs[-1][1] == i - 1:
            a, _, n = runs[-1]
            runs[-1] = (a, i, n + int(c))
        else:
            runs.append((i, i, int(c)))
    return runs

"""Windowed Pearson correlation matrices."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import (
    DegenerateSeriesError,
    IncompatibleUniverseError,
    ValidationError,
    WindowTooLongError,
)
from .ingest import ReturnPanel

DISJOINT = "disjoint"
SLIDING = "sliding"

# 42 trading days at 21 per month
TWO_MONTHS = 42


@dataclass(frozen=True)
class WindowSpec:
    length: int = TWO_MONTHS
    stride: int = 1
    mode: str = DISJOINT

    def __post_init__(self):
        if self.mode not in (DISJOINT, SLIDING):
            raise ValidationError(f"unknown window mode {self.mode!r}")
        if self.length < 2:
            raise ValidationError("window length must be >= 2")
        if self.stride < 1:
            raise ValidationError("window stride must be >= 1")
        if self.mode == DISJOINT:
            object.__setattr__(self, "stride", self.length)


@dataclass(frozen=True, eq=False)
class CorrelationWindow:
    values: np.ndarray
    symbols: tuple
    window_start: datetime | None = None
    window_end: datetime | None = None
    label_date: datetime | None = None
    sample_count: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "symbols", tuple(self.symbols))
        k = len(self.symbols)
        if values.shape != (k, k):
            raise ValidationError(f"matrix shape {values.shape} does not match {k} symbols")

    @property
    def K(self) -> int:
        return len(self.symbols)


def rolling_windows(panel: ReturnPanel, spec: WindowSpec) -> list[range]:
    """Index ranges into ``panel.timestamps``, oldest first.

    Disjoint windows are laid back to back so that the last one ends on the
    final timestamp; the oldest remainder is dropped.
    """
    T = panel.T if isinstance(panel, ReturnPanel) else int(panel)
    if T < spec.length:
        raise WindowTooLongError(f"window of {spec.length} exceeds panel length {T}")
    if spec.mode == DISJOINT:
        count = T // spec.length
        first = T - count * spec.length
        return [range(first + i * spec.length, first + (i + 1) * spec.length) for i in range(count)]
    return [range(end - spec.length + 1, end + 1) for end in range(spec.length - 1, T, spec.stride)]


def pearson_matrix(panel: ReturnPanel, rng: range | None = None) -> CorrelationWindow:
    """Pearson correlation matrix with population moments over ``rng``."""
    if rng is None:
        rng = range(panel.T)
    if len(rng) < 2:
        raise ValidationError("a correlation window needs at least 2 observations")
    x = panel.values[:, rng.start:rng.stop:rng.step]
    t = x.shape[1]
    centered = x - x.mean(axis=1, keepdims=True)
    std = np.sqrt((centered * centered).mean(axis=1))
    scale = np.abs(x).max(axis=1)
    for i in np.flatnonzero(std <= 1e-14 * scale):
        raise DegenerateSeriesError(panel.symbols[i])
    z = centered / std[:, None]
    c = (z @ z.T) / t
    c = 0.5 * (c + c.T)
    np.clip(c, -1.0, 1.0, out=c)
    np.fill_diagonal(c, 1.0)
    return CorrelationWindow(
        c,
        panel.symbols,
        window_start=panel.timestamps[rng[0]],
        window_end=panel.timestamps[rng[-1]],
        label_date=panel.timestamps[rng[-1]],
        sample_count=t,
    )


def correlation_windows(panel: ReturnPanel, spec: WindowSpec) -> list[CorrelationWindow]:
    return [pearson_matrix(panel, r) for r in rolling_windows(panel, spec)]


def check_universe(windows) -> tuple:
    symbols = windows[0].symbols
    for w in windows[1:]:
        if w.symbols != symbols:
            raise IncompatibleUniverseError("correlation windows cover different symbol lists")
    return symbols


def _midpoint(dates):
    dates = [d for d in dates if d is not None]
    if not dates:
        return None
    lo, hi = min(dates), max(dates)
    return lo + (hi - lo) / 2


def average_matrix(matrices: list[CorrelationWindow]) -> CorrelationWindow:
    """Elementwise mean of correlation windows."""
    if not matrices:
        raise ValidationError("cannot average an empty list of matrices")
    symbols = check_universe(matrices)
    values = np.mean(np.stack([m.values for m in matrices]), axis=0)
    starts = [m.window_start for m in matrices if m.window_start is not None]
    ends = [m.window_end for m in matrices if m.window_end is not None]
    return CorrelationWindow(
        values,
        symbols,
        window_start=min(starts) if starts else None,
        window_end=max(ends) if ends else None,
        label_date=_midpoint([m.label_date for m in matrices]),
        sample_count=sum(m.sample_count for m in matrices),
    )

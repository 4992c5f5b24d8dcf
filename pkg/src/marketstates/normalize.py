"""Local normalization of return series.

Each return is standardized by the mean and population standard deviation of
the ``n`` most recent points, the current one included. The first ``n - 1``
points have no full window and are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateWindowError, ValidationError
from .ingest import ReturnPanel, ReturnSeries

EMIT_ZERO = "emit-zero"
ERROR = "error"


@dataclass(frozen=True)
class LocalNormConfig:
    n: int = 13
    degenerate_policy: str = EMIT_ZERO

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError(f"local normalization window must be >= 2, got {self.n}")
        if self.degenerate_policy not in (EMIT_ZERO, ERROR):
            raise ValidationError(f"unknown degenerate policy {self.degenerate_policy!r}")


def _normalize_rows(values: np.ndarray, cfg: LocalNormConfig, labels) -> np.ndarray:
    # values: (K, T) -> (K, T - n + 1)
    windows = sliding_window_view(values, cfg.n, axis=-1)
    mean = windows.mean(axis=-1)
    # two-pass variance; the one-pass <r^2> - <r>^2 form cancels badly
    std = np.sqrt(((windows - mean[..., None]) ** 2).mean(axis=-1))
    scale = np.abs(windows).max(axis=-1)
    degenerate = std <= 1e-12 * scale
    current = values[..., cfg.n - 1:]
    if np.any(degenerate):
        if cfg.degenerate_policy == ERROR:
            k, j = np.argwhere(degenerate)[0]
            raise DegenerateWindowError(
                f"zero local variance for {labels[k]} at position {j + cfg.n - 1}"
            )
        std = np.where(degenerate, 1.0, std)
    out = (current - mean) / std
    out[degenerate] = 0.0
    return out


def local_normalize(series: ReturnSeries, cfg: LocalNormConfig = LocalNormConfig()) -> ReturnSeries:
    if len(series) < cfg.n:
        raise ValidationError(
            f"{series.symbol}: series of length {len(series)} shorter than window {cfg.n}"
        )
    out = _normalize_rows(series.values[None, :], cfg, [series.symbol])[0]
    return ReturnSeries(series.symbol, series.timestamps[cfg.n - 1:], out, normalized=True)


def normalize_panel(panel: ReturnPanel, cfg: LocalNormConfig = LocalNormConfig()) -> ReturnPanel:
    """Row-wise :func:`local_normalize` over an aligned panel."""
    if panel.T < cfg.n + 1:
        raise ValidationError(f"panel of length {panel.T} too short for window {cfg.n}")
    out = _normalize_rows(panel.values, cfg, panel.symbols)
    return ReturnPanel(panel.symbols, panel.timestamps[cfg.n - 1:], out, normalized=True)

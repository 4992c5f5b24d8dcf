"""Synthetic regime-switching return panels with known correlation targets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .ingest import PriceSeries, ReturnPanel

GAUSSIAN = "gaussian"
STUDENT_T = "student-t"


def uniform_correlation(k: int, c: float) -> np.ndarray:
    m = np.full((k, k), float(c))
    np.fill_diagonal(m, 1.0)
    return m


def block_correlation(sizes, within: float, cross: float) -> np.ndarray:
    """Groups correlated at ``within`` internally and ``cross`` between groups."""
    labels = np.repeat(np.arange(len(sizes)), sizes)
    m = np.where(labels[:, None] == labels[None, :], within, cross).astype(float)
    np.fill_diagonal(m, 1.0)
    return m


def symmetric_sqrt(target: np.ndarray) -> np.ndarray:
    target = np.asarray(target, dtype=float)
    if target.ndim != 2 or target.shape[0] != target.shape[1]:
        raise ValidationError("target correlation must be square")
    if not np.allclose(target, target.T, atol=1e-12, rtol=0):
        raise ValidationError("target correlation must be symmetric")
    if not np.allclose(np.diag(target), 1.0, atol=1e-12, rtol=0):
        raise ValidationError("target correlation must have a unit diagonal")
    w, v = np.linalg.eigh(target)
    if w.min() < -1e-10:
        raise ValidationError(f"target correlation is not positive semidefinite (min eigenvalue {w.min():.3g})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


@dataclass(frozen=True)
class Segment:
    length: int
    target: np.ndarray
    noise: float = 0.01
    label: int | None = None


@dataclass(frozen=True)
class RegimeSpec:
    K: int
    segments: tuple
    seed: int = 0
    innovations: str = GAUSSIAN
    df: float = 3.0
    start: str = "2000-01-03"

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.K < 2:
            raise ValidationError("K must be >= 2")
        if not self.segments:
            raise ValidationError("need at least one segment")
        if self.innovations not in (GAUSSIAN, STUDENT_T):
            raise ValidationError(f"unknown innovations {self.innovations!r}")
        for s in self.segments:
            if s.length < 2:
                raise ValidationError("segment lengths must be >= 2")
            if np.shape(s.target) != (self.K, self.K):
                raise ValidationError(f"segment target must be {self.K}x{self.K}")
            if not s.noise > 0:
                raise ValidationError("segment noise must be positive")

    @classmethod
    def from_json(cls, data: dict, base: Path | None = None) -> "RegimeSpec":
        k = int(data["K"])
        segments = []
        for raw in data["segments"]:
            if "c" in raw:
                target = uniform_correlation(k, raw["c"])
            elif "matrix_file" in raw:
                from .io import read_matrix_csv

                path = Path(raw["matrix_file"])
                if base is not None and not path.is_absolute():
                    path = base / path
                target, _, _ = read_matrix_csv(path)
            else:
                raise ValidationError("segment needs 'c' or 'matrix_file'")
            segments.append(Segment(int(raw["length"]), target, float(raw.get("noise", 0.01)), raw.get("label")))
        return cls(
            k,
            segments,
            seed=int(data.get("seed", 0)),
            innovations=data.get("innovations", GAUSSIAN),
            df=float(data.get("df", 3.0)),
            start=data.get("start", "2000-01-03"),
        )

    @classmethod
    def load(cls, path) -> "RegimeSpec":
        path = Path(path)
        return cls.from_json(json.loads(path.read_text()), path.parent)


@dataclass(frozen=True, eq=False)
class SyntheticPanel:
    panel: ReturnPanel
    labels: np.ndarray  # regime label per timestamp
    segment_index: np.ndarray = field(default=None)


def _segment_labels(spec: RegimeSpec) -> list[int]:
    labels, seen = [], []
    for s in spec.segments:
        if s.label is not None:
            labels.append(int(s.label))
            continue
        for i, t in enumerate(seen):
            if np.array_equal(t, s.target):
                labels.append(i)
                break
        else:
            labels.append(len(seen))
        seen.append(s.target)
    return labels


def business_days(start: str, count: int) -> list[datetime]:
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    days = np.busday_offset(first, np.arange(count), roll="forward")
    return [datetime.fromisoformat(str(d)) for d in days]


def generate_regime_panel(spec: RegimeSpec) -> SyntheticPanel:
    """Zero-mean returns with a piecewise-constant correlation structure."""
    rng = np.random.default_rng(spec.seed)
    chunks, labels, seg_idx = [], [], []
    for i, (seg, lab) in enumerate(zip(spec.segments, _segment_labels(spec))):
        root = symmetric_sqrt(seg.target)
        z = rng.standard_normal((spec.K, seg.length))
        if spec.innovations == STUDENT_T:
            # common chi-square mixing keeps the correlation structure
            mix = np.sqrt(spec.df / rng.chisquare(spec.df, size=seg.length))
            z = z * mix
        chunks.append(seg.noise * (root @ z))
        labels += [lab] * seg.length
        seg_idx += [i] * seg.length
    values = np.concatenate(chunks, axis=1)
    symbols = [f"S{i:03d}" for i in range(spec.K)]
    panel = ReturnPanel(symbols, business_days(spec.start, values.shape[1]), values)
    return SyntheticPanel(panel, np.array(labels), np.array(seg_idx))


def panel_to_prices(panel: ReturnPanel, initial: float = 100.0) -> list[PriceSeries]:
    """Price paths whose one-step arithmetic returns reproduce ``panel``.

    Return ``r(t)`` runs from ``t`` to the next timestamp, so the price path
    carries one extra business day at the end.
    """
    last = panel.timestamps[-1]
    extra = business_days(str(np.busday_offset(np.datetime64(last.date(), "D"), 1, roll="forward")), 1)[0]
    timestamps = list(panel.timestamps) + [extra]
    out = []
    for i, sym in enumerate(panel.symbols):
        prices = initial * np.concatenate([[1.0], np.cumprod(1.0 + panel.values[i])])
        out.append(PriceSeries(sym, timestamps, prices))
    return out

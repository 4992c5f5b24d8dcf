"""Matplotlib report figures: state timeline and coefficient histograms.

Figures are written as SVG with a fixed hash salt and no date stamp so that
reruns produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

RC = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "marketstates",
    "svg.fonttype": "none",
}


def save_svg(fig, path) -> Path:
    path = Path(path)
    with plt.rc_context(RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def _figure(width=7.0, height=2.6):
    with plt.rc_context(RC):
        return plt.subplots(figsize=(width, height))


def plot_timeline(sequence, path):
    """Market state against window label date, one marker per window."""
    with plt.rc_context(RC):
        fig, ax = _figure()
        dates, states = sequence.dates, sequence.states
        ax.step(dates, states, where="post", color="0.7", lw=0.8)
        ax.scatter(dates, states, s=12, c=states, cmap="tab10", zorder=3)
        n = max(states) if states else 1
        ax.set_yticks(range(1, n + 1))
        ax.set_ylim(0.5, n + 0.5)
        ax.set_xlabel("window end")
        ax.set_ylabel("market state")
        fig.autofmt_xdate()
        fig.tight_layout()
    return save_svg(fig, path)


def plot_histogram_surface(histograms, path, dates=None):
    """Counts per bin over time on a log color scale."""
    with plt.rc_context(RC):
        fig, ax = _figure(height=3.2)
        counts = np.array([h.counts for h in histograms], dtype=float).T
        edges = histograms[0].bin_edges
        x = np.arange(len(histograms) + 1)
        masked = np.ma.masked_less_equal(counts, 0)
        vmax = max(float(counts.max()), 1.0)
        mesh = ax.pcolormesh(x, edges, masked, cmap="viridis", norm=LogNorm(vmin=1, vmax=max(vmax, 1.0 + 1e-9)))
        fig.colorbar(mesh, ax=ax, label="count")
        if dates is not None:
            step = max(1, len(dates) // 8)
            ticks = list(range(0, len(dates), step))
            ax.set_xticks([t + 0.5 for t in ticks])
            ax.set_xticklabels([str(dates[t])[:10] for t in ticks], rotation=30, ha="right")
        ax.set_ylabel("correlation coefficient")
        fig.tight_layout()
    return save_svg(fig, path)


def plot_histograms(histograms, path, labels=None):
    """Overlaid step histograms for a handful of windows."""
    with plt.rc_context(RC):
        fig, ax = _figure(width=4.5, height=3.0)
        styles = ["-", "--", ":", "-."]
        for i, h in enumerate(histograms):
            lab = labels[i] if labels is not None else str(h.source)
            ax.stairs(h.counts, h.bin_edges, linestyle=styles[i % len(styles)], label=lab)
        ax.set_xlim(-1, 1)
        ax.set_xlabel("correlation coefficient")
        ax.set_ylabel("count")
        ax.legend(frameon=False)
        fig.tight_layout()
    return save_svg(fig, path)

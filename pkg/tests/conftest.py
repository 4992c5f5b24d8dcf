import sys
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from marketstates.corr import CorrelationWindow  # noqa: E402
from marketstates.ingest import ReturnPanel  # noqa: E402
from marketstates.synth import uniform_correlation  # noqa: E402


def dates(n, start=datetime(2020, 1, 1)):
    return [start + timedelta(days=i) for i in range(n)]


def make_panel(values, symbols=None, normalized=False):
    values = np.asarray(values, dtype=float)
    k, t = values.shape
    symbols = symbols or [f"S{i}" for i in range(k)]
    return ReturnPanel(symbols, dates(t), values, normalized)


def random_panel(rng, k, t):
    return make_panel(rng.standard_normal((k, t)))


def uniform_window(k, c, label=None):
    return CorrelationWindow(uniform_correlation(k, c), [f"S{i}" for i in range(k)], label_date=label)


def random_correlation(rng, k, t=None):
    t = t or 2 * k + 5
    x = rng.standard_normal((k, t)) + rng.standard_normal(t) * rng.uniform(0, 1.5)
    c = np.corrcoef(x)
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return CorrelationWindow(np.clip(c, -1, 1), [f"S{i}" for i in range(k)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


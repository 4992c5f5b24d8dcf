"""Distances between correlation matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corr import CorrelationWindow, check_universe
from .errors import IncompatibleUniverseError, NonConvergenceError, ValidationError

ZETA = "zeta"
ZETA_ALT = "zeta_alt"
MEASURES = (ZETA, ZETA_ALT)


@dataclass(frozen=True)
class EigenSummary:
    lambda_max: float
    iterations: int
    residual: float


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    values: np.ndarray
    labels: tuple
    measure: str = ZETA


def _values(m) -> np.ndarray:
    return m.values if isinstance(m, CorrelationWindow) else np.asarray(m, dtype=float)


def _same_universe(a, b):
    if isinstance(a, CorrelationWindow) and isinstance(b, CorrelationWindow):
        if a.symbols != b.symbols:
            raise IncompatibleUniverseError("matrices cover different symbol lists")
    if _values(a).shape != _values(b).shape:
        raise IncompatibleUniverseError("matrices have different shapes")


def zeta(a, b) -> float:
    """Mean absolute elementwise difference over all K*K entries."""
    _same_universe(a, b)
    return float(np.abs(_values(a).ravel() - _values(b).ravel()).mean())


def largest_eigenvalue(c, tol: float = 1e-10, max_iter: int = 10_000) -> EigenSummary:
    """Dominant eigenvalue of a symmetric matrix by shifted power iteration.

    Iterates on ``C + s*I`` where ``s`` lifts the Gershgorin lower bound of
    the spectrum to zero. The shifted spectrum is then non-negative, so the
    dominant eigenvector belongs to the largest eigenvalue of ``C``. For
    entries in [-1, 1] the shift never exceeds ``K``. Stops once the
    residual ``max|Cv - lambda*v|`` drops to ``tol``.
    """
    m = _values(c)
    k = m.shape[0]
    if m.shape != (k, k):
        raise ValidationError("matrix must be square")
    if not np.allclose(m, m.T, rtol=0, atol=1e-12):
        raise ValidationError("matrix must be symmetric")
    off = np.abs(m).sum(axis=1) - np.abs(np.diag(m))
    shift = max(0.0, float(np.max(off - np.diag(m))))
    shifted = m + shift * np.eye(k)
    # a slight ramp keeps the start off eigenvectors orthogonal to all-ones
    v = 1.0 + 0.5 * np.arange(k) / max(k - 1, 1)
    v /= np.linalg.norm(v)
    lam = float(v @ m @ v)
    residual = np.inf
    for it in range(1, max_iter + 1):
        w = shifted @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            # v spans the null space of the shifted matrix
            return EigenSummary(-shift, it, 0.0)
        v = w / norm
        cv = m @ v
        lam = float(v @ cv)
        residual = float(np.abs(cv - lam * v).max())
        if residual <= tol:
            return EigenSummary(lam, it, residual)
    raise NonConvergenceError(
        f"power iteration did not converge in {max_iter} iterations", lam, residual
    )


def zeta_alt(a, b, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Absolute difference of the largest eigenvalues."""
    _same_universe(a, b)
    la = largest_eigenvalue(a, tol, max_iter).lambda_max
    lb = largest_eigenvalue(b, tol, max_iter).lambda_max
    return abs(la - lb)


def similarity_matrix(windows: list[CorrelationWindow], measure: str = ZETA, **eig_kw) -> SimilarityMatrix:
    """All pairwise distances between windows under ``measure``."""
    if len(windows) < 2:
        raise ValidationError("need at least 2 windows")
    if measure not in MEASURES:
        raise ValidationError(f"unknown measure {measure!r}")
    check_universe(windows)
    w = len(windows)
    out = np.zeros((w, w))
    if measure == ZETA:
        flat = np.stack([x.values.ravel() for x in windows])
        for i in range(w - 1):
            d = np.abs(flat[i + 1:] - flat[i]).mean(axis=1)
            out[i, i + 1:] = d
            out[i + 1:, i] = d
    else:
        lam = np.array([largest_eigenvalue(x, **eig_kw).lambda_max for x in windows])
        out = np.abs(lam[:, None] - lam[None, :])
        np.fill_diagonal(out, 0.0)
    return SimilarityMatrix(out, tuple(x.label_date for x in windows), measure)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marketstates.corr import CorrelationWindow, WindowSpec, correlation_windows
from marketstates.errors import IncompatibleUniverseError, NonConvergenceError, ValidationError
from marketstates.similarity import largest_eigenvalue, similarity_matrix, zeta, zeta_alt
from marketstates.synth import RegimeSpec, Segment, generate_regime_panel, uniform_correlation

from conftest import random_correlation, uniform_window
from oracles import zeta_loops


def test_zeta_self_is_zero(rng):
    c = random_correlation(rng, 6)
    assert zeta(c, c) == 0.0


def test_zeta_identity_vs_ones():
    a = CorrelationWindow(np.eye(2), ["A", "B"])
    b = CorrelationWindow(np.ones((2, 2)), ["A", "B"])
    assert zeta(a, b) == 0.5


def test_zeta_uniform_closed_form():
    assert zeta(uniform_window(3, 0.2), uniform_window(3, 0.6)) == pytest.approx(6 * 0.4 / 9, abs=1e-12)


def test_zeta_matches_loops(rng):
    a, b = random_correlation(rng, 7), random_correlation(rng, 7)
    assert zeta(a, b) == pytest.approx(zeta_loops(a.values.tolist(), b.values.tolist()), abs=1e-15)


def test_zeta_universe_mismatch():
    with pytest.raises(IncompatibleUniverseError):
        zeta(CorrelationWindow(np.eye(2), ["A", "B"]), CorrelationWindow(np.eye(2), ["A", "C"]))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31), k=st.integers(2, 15))
def test_zeta_metric_properties(seed, k):
    rng = np.random.default_rng(seed)
    a, b, c = (random_correlation(rng, k) for _ in range(3))
    assert zeta(a, b) == zeta(b, a)
    assert zeta(a, c) <= zeta(a, b) + zeta(b, c) + 1e-12
    assert 0.0 <= zeta(a, b) <= 2.0


@pytest.mark.parametrize("k", [1, 4, 9])
def test_identity_eigenvalue(k):
    e = largest_eigenvalue(np.eye(k))
    assert e.lambda_max == pytest.approx(1.0, abs=1e-12)
    assert e.residual <= 1e-10


def test_uniform_eigenvalue():
    assert largest_eigenvalue(uniform_correlation(5, 0.5)).lambda_max == pytest.approx(3.0, abs=1e-10)


def test_top_eigenvector_orthogonal_to_ones():
    # eigenvalues 0.5 (along ones) and 1.5 (along (1, -1))
    m = np.array([[1.0, -0.5], [-0.5, 1.0]])
    assert largest_eigenvalue(m).lambda_max == pytest.approx(1.5, abs=1e-10)


def test_negative_spectrum_handled():
    m = -np.eye(3)
    assert largest_eigenvalue(m).lambda_max == pytest.approx(-1.0, abs=1e-10)


def test_eigenvalue_matches_dense_solver(rng):
    c = random_correlation(rng, 8)
    assert largest_eigenvalue(c).lambda_max == pytest.approx(np.linalg.eigvalsh(c.values)[-1], abs=1e-9)


def test_eigen_nonconvergence_carries_estimate(rng):
    c = random_correlation(rng, 10)
    with pytest.raises(NonConvergenceError) as info:
        largest_eigenvalue(c, tol=1e-15, max_iter=3)
    assert np.isfinite(info.value.estimate)
    assert info.value.residual > 1e-15


def test_eigen_rejects_asymmetric():
    with pytest.raises(ValidationError):
        largest_eigenvalue(np.array([[1.0, 0.2], [0.3, 1.0]]))


def test_zeta_alt_cases(rng):
    c = random_correlation(rng, 6)
    assert zeta_alt(c, c) == 0.0
    assert zeta_alt(uniform_window(10, 0.2), uniform_window(10, 0.5)) == pytest.approx(2.7, abs=1e-9)
    a, b = random_correlation(rng, 9), random_correlation(rng, 9)
    dense = abs(np.linalg.eigvalsh(a.values)[-1] - np.linalg.eigvalsh(b.values)[-1])
    assert zeta_alt(a, b) == pytest.approx(dense, abs=1e-9)


def test_zeta_alt_bounded_by_scaled_zeta(rng):
    for _ in range(20):
        k = int(rng.integers(2, 12))
        a, b = random_correlation(rng, k), random_correlation(rng, k)
        assert zeta_alt(a, b) <= k * k * zeta(a, b) + 1e-12


@pytest.mark.parametrize("k", [3, 10, 25])
def test_uniform_ordering_agreement(k):
    levels = [0.0, 0.1, 0.3, 0.6, 0.9]
    base = uniform_window(k, levels[0])
    zs = [zeta(base, uniform_window(k, c)) for c in levels]
    alts = [zeta_alt(base, uniform_window(k, c)) for c in levels]
    assert all(x < y for x, y in zip(zs, zs[1:]))
    assert all(x < y for x, y in zip(alts, alts[1:]))
    np.testing.assert_allclose(zs, [c * (k * k - k) / k**2 for c in levels], atol=1e-12)
    np.testing.assert_allclose(alts, [(k - 1) * c for c in levels], atol=1e-9)


def test_similarity_identical_pair():
    s = similarity_matrix([uniform_window(4, 0.3), uniform_window(4, 0.3)])
    assert s.values.tolist() == [[0.0, 0.0], [0.0, 0.0]]


def test_similarity_block_structure():
    w = [uniform_window(4, 0.3), uniform_window(4, 0.3), uniform_window(4, 0.8)]
    s = similarity_matrix(w).values
    assert s[0, 1] == 0.0
    assert s[0, 2] == s[1, 2] > 0


@pytest.mark.parametrize("measure", ["zeta", "zeta_alt"])
def test_similarity_matrix_shape(rng, measure):
    ws = [random_correlation(rng, 5) for _ in range(6)]
    s = similarity_matrix(ws, measure)
    assert s.measure == measure
    assert np.array_equal(s.values, s.values.T)
    assert np.all(np.diag(s.values) == 0.0)
    assert np.all(s.values >= 0)
    fn = zeta if measure == "zeta" else zeta_alt
    assert s.values[1, 4] == pytest.approx(fn(ws[1], ws[4]), abs=1e-12)


def test_planted_regimes_separate():
    k = 12
    segs = [Segment(60, uniform_correlation(k, c)) for c in (0.1, 0.7, 0.1, 0.7)]
    syn = generate_regime_panel(RegimeSpec(k, segs, seed=7))
    ws = correlation_windows(syn.panel, WindowSpec(30))
    truth = np.array([syn.labels[r] for r in range(29, 240, 30)])
    s = similarity_matrix(ws).values
    same = truth[:, None] == truth[None, :]
    off = ~np.eye(len(ws), dtype=bool)
    assert s[same & off].mean() < s[~same].mean()


def test_similarity_needs_two_windows():
    with pytest.raises(ValidationError):
        similarity_matrix([uniform_window(3, 0.1)])

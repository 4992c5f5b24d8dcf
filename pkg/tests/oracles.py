"""Slow reference implementations, independent of the package code paths."""

import math


def pearson_two_pass(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def pearson_matrix_loops(rows):
    k = len(rows)
    return [[1.0 if i == j else pearson_two_pass(rows[i], rows[j]) for j in range(k)] for i in range(k)]


def zeta_loops(a, b):
    k = len(a)
    return sum(abs(a[i][j] - b[i][j]) for i in range(k) for j in range(k)) / (k * k)


def mean_matrix(ms):
    k = len(ms[0])
    return [[sum(m[i][j] for m in ms) / len(ms) for j in range(k)] for i in range(k)]


def best_two_partition(matrices):
    """Exhaustive search for the 2-partition minimizing summed zeta to the side means."""
    m = len(matrices)
    best, best_cost = None, math.inf
    for mask in range(1, 2 ** (m - 1)):
        left = [i for i in range(m) if mask >> i & 1]
        right = [i for i in range(m) if not mask >> i & 1]
        cost = 0.0
        for side in (left, right):
            center = mean_matrix([matrices[i] for i in side])
            cost += sum(zeta_loops(matrices[i], center) for i in side)
        if cost < best_cost:
            best, best_cost = (frozenset(left), frozenset(right)), cost
    return {best[0], best[1]}, best_cost


def best_two_partition_np(flat):
    """Same search as :func:`best_two_partition` on an (m, K*K) array."""
    import numpy as np

    m = flat.shape[0]
    best, best_cost = None, math.inf
    for mask in range(1, 2 ** (m - 1)):
        sel = np.array([(mask >> i) & 1 for i in range(m)], dtype=bool)
        cost = 0.0
        for side in (sel, ~sel):
            pts = flat[side]
            cost += np.abs(pts - pts.mean(axis=0)).mean(axis=1).sum()
        if cost < best_cost:
            best_cost = cost
            best = (frozenset(np.flatnonzero(sel).tolist()), frozenset(np.flatnonzero(~sel).tolist()))
    return {best[0], best[1]}, best_cost

"""Top-down clustering of correlation matrices.

The set of windows starts as one cluster. A cluster is split in two by a
2-means loop under the zeta distance, with centers recast as elementwise
means, for as long as the mean distance from its center to its members
exceeds a threshold. The resulting binary tree can afterwards be cut at any
threshold to obtain market states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .corr import CorrelationWindow, average_matrix, check_universe
from .errors import ValidationError

FARTHEST_PAIR = "farthest-pair"
SEEDED_RANDOM = "seeded-random"

DEFAULT_THRESHOLD = 0.1465


@dataclass(frozen=True)
class ClusterConfig:
    threshold: float = DEFAULT_THRESHOLD
    max_kmeans_iter: int = 100
    init_policy: str = FARTHEST_PAIR
    seed: int = 0

    def __post_init__(self):
        if not self.threshold >= 0:
            raise ValidationError("threshold must be >= 0")
        if self.max_kmeans_iter < 1:
            raise ValidationError("max_kmeans_iter must be >= 1")
        if self.init_policy not in (FARTHEST_PAIR, SEEDED_RANDOM):
            raise ValidationError(f"unknown init policy {self.init_policy!r}")


@dataclass
class ClusterNode:
    members: list
    center: CorrelationWindow | None
    mean_center_distance: float
    branch_length: float = 0.0
    children: list = field(default_factory=list)
    state_id: int | None = None
    converged: bool = True
    degenerate: bool = False

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        """Pre-order traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> list["ClusterNode"]:
        return [n for n in self.walk() if n.is_leaf]


@dataclass(frozen=True)
class Bisection:
    left: list
    right: list
    converged: bool
    degenerate: bool
    iterations: int

    def __iter__(self):
        return iter((self.left, self.right))


def _distances(flat: np.ndarray, center: np.ndarray) -> np.ndarray:
    return np.abs(flat - center).mean(axis=1)


def _assign(flat, centers, previous):
    d0 = _distances(flat, centers[0])
    d1 = _distances(flat, centers[1])
    if previous is None:
        return (d1 < d0).astype(int)
    # ties keep the current label
    labels = previous.copy()
    labels[d1 < d0] = 1
    labels[d0 < d1] = 0
    return labels


def _repair(flat, labels):
    """Move the member farthest from the occupied side's center to the empty side."""
    for side in (0, 1):
        if not np.any(labels == side):
            center = flat[labels != side].mean(axis=0)
            far = int(np.argmax(_distances(flat, center)))
            labels = labels.copy()
            labels[far] = side
            return labels, True
    return labels, False


def _initial_pair(flat, cfg):
    m = flat.shape[0]
    if cfg.init_policy == SEEDED_RANDOM:
        rng = np.random.default_rng(cfg.seed)
        i, j = sorted(rng.choice(m, size=2, replace=False))
        return int(i), int(j)
    best, pair = -1.0, (0, 1)
    for i in range(m - 1):
        d = _distances(flat[i + 1:], flat[i])
        j = int(np.argmax(d))
        if d[j] > best:
            best, pair = float(d[j]), (i, i + 1 + j)
    return pair


def kmeans_bisect(members: list[CorrelationWindow], cfg: ClusterConfig = ClusterConfig()) -> Bisection:
    """Split ``members`` in two; returns positions into ``members``.

    A labeling seen before (a cycle) ends the loop and is accepted; the result
    is then flagged as not converged, as is hitting ``max_kmeans_iter``.
    """
    if len(members) < 2:
        raise ValidationError("bisection needs at least 2 members")
    check_universe(members)
    flat = np.stack([m.values.ravel() for m in members])
    i, j = _initial_pair(flat, cfg)
    labels = _assign(flat, (flat[i], flat[j]), None)
    labels, degenerate = _repair(flat, labels)
    seen = {labels.tobytes()}
    converged = False
    it = 0
    while it < cfg.max_kmeans_iter:
        it += 1
        centers = (flat[labels == 0].mean(axis=0), flat[labels == 1].mean(axis=0))
        new = _assign(flat, centers, labels)
        new, fixed = _repair(flat, new)
        degenerate = degenerate or fixed
        if np.array_equal(new, labels):
            converged = True
            break
        key = new.tobytes()
        labels = new
        if key in seen:
            break
        seen.add(key)
    return Bisection(
        left=[int(k) for k in np.flatnonzero(labels == 0)],
        right=[int(k) for k in np.flatnonzero(labels == 1)],
        converged=converged,
        degenerate=degenerate,
        iterations=it,
    )


def _mean_distance(center: CorrelationWindow, windows) -> float:
    flat = np.stack([w.values.ravel() for w in windows])
    return float(_distances(flat, center.values.ravel()).mean())


def _make_node(windows, members, parent_center=None) -> ClusterNode:
    sub = [windows[k] for k in members]
    center = average_matrix(sub)
    branch = 0.0
    if parent_center is not None:
        branch = float(np.abs(center.values.ravel() - parent_center.values.ravel()).mean())
    return ClusterNode(list(members), center, _mean_distance(center, sub), branch)


def build_tree(windows: list[CorrelationWindow], cfg: ClusterConfig = ClusterConfig()) -> ClusterNode:
    """Recursively bisect while a node's mean center distance exceeds the threshold."""
    if not windows:
        raise ValidationError("need at least one window")
    check_universe(windows)
    root = _make_node(windows, range(len(windows)))
    stack = [root]
    while stack:
        node = stack.pop()
        if len(node.members) < 2 or node.mean_center_distance <= cfg.threshold:
            continue
        split = kmeans_bisect([windows[k] for k in node.members], cfg)
        node.converged, node.degenerate = split.converged, split.degenerate
        for side in (split.left, split.right):
            node.children.append(_make_node(windows, [node.members[k] for k in side], node.center))
        stack.extend(reversed(node.children))
    return root


@dataclass
class StateCut:
    states: list
    mapping: dict

    @property
    def n_states(self) -> int:
        return len(self.states)


def cut_to_states(root: ClusterNode, threshold: float, label_dates: list | None = None) -> StateCut:
    """Shallowest nodes whose mean center distance is within ``threshold``.

    States are numbered from 1 in order of their earliest member, by label
    date when ``label_dates`` is given (window index otherwise). The chosen
    nodes get their ``state_id`` set; all other nodes are cleared.
    """
    for node in root.walk():
        node.state_id = None
    chosen = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node.is_leaf or node.mean_center_distance <= threshold:
            chosen.append(node)
        else:
            stack.extend(node.children)

    def first(node):
        if label_dates is None:
            return (min(node.members),)
        return min((label_dates[k], k) for k in node.members)

    chosen.sort(key=first)
    mapping = {}
    for sid, node in enumerate(chosen, start=1):
        node.state_id = sid
        for k in node.members:
            mapping[k] = sid
    return StateCut(chosen, dict(sorted(mapping.items())))


@dataclass(frozen=True)
class StateSequence:
    entries: tuple

    @property
    def dates(self):
        return [d for d, _ in self.entries]

    @property
    def states(self):
        return [s for _, s in self.entries]

    def __len__(self):
        return len(self.entries)


def state_timeline(mapping: dict, windows: list[CorrelationWindow]) -> StateSequence:
    entries = sorted(
        ((w.label_date, mapping[k]) for k, w in enumerate(windows)),
        key=lambda e: (e[0] is None, e[0] or datetime.min),
    )
    return StateSequence(tuple(entries))

"""Delimited and JSON file formats."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .cluster import ClusterNode, StateSequence
from .corr import CorrelationWindow
from .errors import ParseError, StorageError
from .ingest import format_instant, parse_instant
from .similarity import SimilarityMatrix
from .states import Histogram


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _label(x) -> str:
    if x is None:
        return ""
    if hasattr(x, "isoformat"):
        return format_instant(x)
    return str(x)


def write_matrix_csv(matrix, path, labels=None) -> Path:
    """Square matrix with labels in the first row and column.

    ``matrix`` is a :class:`CorrelationWindow`, a :class:`SimilarityMatrix`
    or a plain array with ``labels``.
    """
    if isinstance(matrix, CorrelationWindow):
        values, labels = matrix.values, matrix.symbols
    elif isinstance(matrix, SimilarityMatrix):
        values, labels = matrix.values, matrix.labels
    else:
        values = np.asarray(matrix, dtype=float)
    if labels is None:
        labels = [str(i) for i in range(values.shape[0])]
    labels = [_label(x) for x in labels]
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([""] + labels)
            for lab, row in zip(labels, values):
                writer.writerow([lab] + [_fmt(v) for v in row])
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc
    return path


def read_matrix_csv(path) -> tuple[np.ndarray, list[str], list[str]]:
    """Inverse of :func:`write_matrix_csv`; returns ``(values, row_labels, col_labels)``."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParseError("empty matrix file", line=1)
    cols = rows[0][1:]
    n = len(cols)
    values, row_labels = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n + 1:
            raise ParseError(f"expected {n + 1} fields, got {len(row)}", line=i)
        row_labels.append(row[0])
        try:
            values.append([float(v) for v in row[1:]])
        except ValueError as exc:
            raise ParseError(str(exc), line=i) from None
    if len(values) != n:
        raise ParseError(f"expected {n} data rows, got {len(values)}", line=len(rows))
    return np.array(values, dtype=float).reshape(n, n), row_labels, cols


def read_correlation_csv(path) -> CorrelationWindow:
    values, rows, cols = read_matrix_csv(path)
    if rows != cols:
        raise ParseError("row and column labels differ")
    return CorrelationWindow(values, cols)


def write_histogram_csv(hist: Histogram, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_left", "bin_right", "count"])
        for a, b, c in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts):
            writer.writerow([_fmt(a), _fmt(b), int(c)])
    return path


def read_histogram_csv(path) -> Histogram:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["bin_left", "bin_right", "count"]:
        raise ParseError("header must be bin_left,bin_right,count", line=1)
    body = rows[1:]
    edges = [float(r[0]) for r in body] + [float(body[-1][1])]
    return Histogram(np.array(edges), np.array([int(r[2]) for r in body]))


def write_timeline_csv(seq: StateSequence, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label_date", "state_id"])
        for d, s in seq.entries:
            writer.writerow([_label(d), s])
    return path


def read_timeline_csv(path) -> StateSequence:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["label_date", "state_id"]:
        raise ParseError("header must be label_date,state_id", line=1)
    return StateSequence(tuple((parse_instant(d), int(s)) for d, s in rows[1:]))


def tree_to_dict(node: ClusterNode, labels=None) -> dict:
    def members(n):
        return [_label(labels[k]) if labels is not None else k for k in n.members]

    def convert(n):
        out = {
            "members": members(n),
            "branch_length": n.branch_length,
            "mean_center_distance": n.mean_center_distance,
        }
        if n.state_id is not None:
            out["state_id"] = n.state_id
        if n.children:
            out["converged"] = n.converged
            out["degenerate"] = n.degenerate
        out["children"] = [convert(c) for c in n.children]
        return out

    return convert(node)


def tree_from_dict(data: dict) -> ClusterNode:
    """Rebuild a tree without centers; members keep their serialized form."""
    node = ClusterNode(
        list(data["members"]),
        None,
        float(data.get("mean_center_distance", 0.0)),
        float(data.get("branch_length", 0.0)),
        state_id=data.get("state_id"),
        converged=data.get("converged", True),
        degenerate=data.get("degenerate", False),
    )
    node.children = [tree_from_dict(c) for c in data.get("children", [])]
    return node


def write_json(data, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=False) + "\n")
    return path


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()

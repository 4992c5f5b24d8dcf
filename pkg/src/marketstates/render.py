"""Standalone SVG drawings of matrices and cluster trees."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .cluster import ClusterNode
from .corr import CorrelationWindow
from .errors import RenderError
from .ingest import format_instant
from .similarity import SimilarityMatrix

BLUE = (33, 102, 172)
WHITE = (255, 255, 255)
RED = (178, 24, 43)


def diverging_color(t: float) -> str:
    """Blue at 0, white at 0.5, red at 1."""
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        a, b, u = BLUE, WHITE, t / 0.5
    else:
        a, b, u = WHITE, RED, (t - 0.5) / 0.5
    r, g, bl = (round(x + (y - x) * u) for x, y in zip(a, b))
    return f"#{r:02x}{g:02x}{bl:02x}"


def _svg(width, height, body):
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.0f}" height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">\n'
        '<rect class="background" x="0" y="0" width="100%" height="100%" fill="white"/>\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def render_heatmap(matrix, labels=None, value_range=None, blocks=None, title=None, max_size=600.0) -> str:
    """One ``rect.cell`` per matrix entry on a blue-white-red scale.

    The scale spans [-1, 1] for correlation-like input and [0, max] for a
    :class:`SimilarityMatrix`, unless ``value_range`` is given. ``blocks``
    (sector blocks) are outlined along the diagonal.
    """
    if isinstance(matrix, CorrelationWindow):
        values, labels = matrix.values, labels or matrix.symbols
        default_range = (-1.0, 1.0)
    elif isinstance(matrix, SimilarityMatrix):
        values = matrix.values
        labels = labels or ["" if d is None else format_instant(d) for d in matrix.labels]
        finite = values[np.isfinite(values)]
        default_range = (0.0, float(finite.max()) if finite.size else 1.0)
    else:
        values = np.asarray(matrix, dtype=float)
        default_range = (-1.0, 1.0)
    if values.ndim != 2:
        raise RenderError("heatmap needs a 2-D matrix")
    bad = np.argwhere(~np.isfinite(values))
    if len(bad):
        i, j = bad[0]
        raise RenderError(f"non-finite entry at cell ({i}, {j})")
    lo, hi = value_range or default_range
    if hi <= lo:
        hi = lo + 1.0

    n_rows, n_cols = values.shape
    cell = max(1.0, min(20.0, max_size / max(n_rows, n_cols)))
    show_labels = labels is not None and max(n_rows, n_cols) <= 60
    left = 80.0 if show_labels else 10.0
    top = (30.0 if title else 10.0) + (60.0 if show_labels else 0.0)
    width = left + n_cols * cell + 70.0
    height = top + n_rows * cell + 10.0

    body = []
    if title:
        body.append(f'<text class="title" x="{left:.2f}" y="20" font-size="14">{escape(str(title))}</text>')
    for i in range(n_rows):
        for j in range(n_cols):
            color = diverging_color((values[i, j] - lo) / (hi - lo))
            body.append(
                f'<rect class="cell" x="{left + j * cell:.2f}" y="{top + i * cell:.2f}" '
                f'width="{cell:.2f}" height="{cell:.2f}" fill="{color}"/>'
            )
    if show_labels:
        fs = max(5.0, min(10.0, cell * 0.8))
        for i, lab in enumerate(labels[:n_rows]):
            y = top + (i + 0.5) * cell + fs / 3
            body.append(
                f'<text class="row-label" x="{left - 4:.2f}" y="{y:.2f}" font-size="{fs:.1f}" '
                f'text-anchor="end">{escape(str(lab))}</text>'
            )
        for j, lab in enumerate(labels[:n_cols]):
            x = left + (j + 0.5) * cell
            body.append(
                f'<text class="col-label" x="{x:.2f}" y="{top - 4:.2f}" font-size="{fs:.1f}" '
                f'transform="rotate(-90 {x:.2f} {top - 4:.2f})">{escape(str(lab))}</text>'
            )
    for b in blocks or ():
        x0, size = left + b.start * cell, (b.stop - b.start) * cell
        body.append(
            f'<rect class="block" x="{x0:.2f}" y="{top + b.start * cell:.2f}" width="{size:.2f}" '
            f'height="{size:.2f}" fill="none" stroke="black" stroke-width="1"/>'
        )
        body.append(
            f'<text class="block-label" x="{left + n_cols * cell + 4:.2f}" '
            f'y="{top + (b.start + b.stop) / 2 * cell + 4:.2f}" font-size="10">{escape(b.sector)}</text>'
        )

    # color bar
    bar_x, bar_h = left + n_cols * cell + 30.0, n_rows * cell
    steps = 50
    for s in range(steps):
        t = 1.0 - (s + 0.5) / steps
        body.append(
            f'<rect class="legend" x="{bar_x:.2f}" y="{top + s * bar_h / steps:.2f}" width="10" '
            f'height="{bar_h / steps + 0.01:.2f}" fill="{diverging_color(t)}"/>'
        )
    body.append(f'<text class="legend-label" x="{bar_x + 12:.2f}" y="{top + 8:.2f}" font-size="8">{hi:.3g}</text>')
    body.append(
        f'<text class="legend-label" x="{bar_x + 12:.2f}" y="{top + bar_h:.2f}" font-size="8">{lo:.3g}</text>'
    )
    return _svg(width, height, body)


def _leaf_text(node: ClusterNode, labels) -> str:
    names = [str(labels[k]) if labels is not None else str(k) for k in node.members]
    if len(names) == 1:
        return names[0]
    return f"{names[0]} .. {names[-1]} ({len(names)})"


def render_tree(root: ClusterNode, labels=None, width: float = 600.0, row_height: float = 14.0) -> str:
    """Horizontal dendrogram; each edge's length is proportional to its branch length.

    ``labels`` maps member entries (window indices) to display strings;
    members are shown as they are stored when omitted.
    """
    depth = {}
    stack = [(root, 0.0)]
    while stack:
        node, d = stack.pop()
        depth[id(node)] = d
        for c in node.children:
            stack.append((c, d + c.branch_length))
    reach = max(depth.values())
    margin, label_room = 20.0, 200.0
    scale = (width - margin - label_room) / reach if reach > 0 else 0.0

    leaves = root.leaves()
    ypos = {id(n): 20.0 + i * row_height for i, n in enumerate(leaves)}

    for node in reversed(list(root.walk())):
        if node.children:
            ypos[id(node)] = sum(ypos[id(c)] for c in node.children) / len(node.children)

    def y_of(node):
        return ypos[id(node)]

    def x_of(node):
        return margin + depth[id(node)] * scale

    body = []
    for node in root.walk():
        px, py = x_of(node), y_of(node)
        for c in node.children:
            cx, cy = x_of(c), y_of(c)
            body.append(
                f'<line class="connector" x1="{px:.4f}" y1="{py:.4f}" x2="{px:.4f}" y2="{cy:.4f}" '
                f'stroke="black" stroke-width="1"/>'
            )
            body.append(
                f'<line class="edge" x1="{px:.4f}" y1="{cy:.4f}" x2="{cx:.4f}" y2="{cy:.4f}" '
                f'stroke="black" stroke-width="1" data-branch-length="{c.branch_length!r}"/>'
            )
        if node.state_id is not None:
            body.append(
                f'<text class="state-label" x="{px + 3:.4f}" y="{py - 3:.4f}" font-size="12" '
                f'font-weight="bold">{node.state_id}</text>'
            )
    for node in leaves:
        x, y = x_of(node), y_of(node)
        body.append(f'<circle class="leaf" cx="{x:.4f}" cy="{y:.4f}" r="2" fill="black"/>')
        body.append(
            f'<text class="leaf-label" x="{x + 5:.4f}" y="{y + 3:.4f}" font-size="9">'
            f"{escape(_leaf_text(node, labels))}</text>"
        )
    height = 40.0 + len(leaves) * row_height
    return _svg(width, height, body)

"""Hand-written SVG figures: class-coloured scatter maps and classifier
decision surfaces over 2-D embeddings.

Output is byte-deterministic: coordinates are printed with fixed precision
and nothing time- or random-dependent is emitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .errors import DimensionMismatch, PreconditionError

# Scatter maps: safe purple, failed yellow.
SCATTER_COLORS = {-1: "#440154", 1: "#fde725"}
# Decision surfaces: safe red, failed blue; regions in lighter tints.
POINT_COLORS = {-1: "#d62728", 1: "#1f77b4"}
REGION_COLORS = {-1: "#f6c4c4", 1: "#c4d8f6"}
CLASS_NAMES = {-1: "safe", 1: "failed"}
TEST_OPACITY = 0.35

PANEL_W, PANEL_H = 360, 300
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 50, 20, 44, 36


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Scores at cell centres; ``scores[r, c]`` is at row r (y, from y_min up)
    and column c (x, from x_min right)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    resolution: int
    scores: np.ndarray
    threshold: float = 0.5

    def cell_centers(self):
        return _cell_centers((self.x_min, self.x_max, self.y_min, self.y_max), self.resolution)


def grid_bounds(points, margin=0.1):
    """Bounding box of ``points`` padded by ``margin`` of the span on each side."""
    P = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if P.shape[0] == 0:
        return (-1.0, 1.0, -1.0, 1.0)
    lo, hi = P.min(axis=0), P.max(axis=0)
    span = hi - lo
    pad = np.where(span > 0, margin * span, 1.0)
    return (float(lo[0] - pad[0]), float(hi[0] + pad[0]), float(lo[1] - pad[1]), float(hi[1] + pad[1]))


def _cell_centers(bounds, resolution):
    x0, x1, y0, y1 = bounds
    xs = x0 + (np.arange(resolution) + 0.5) * (x1 - x0) / resolution
    ys = y0 + (np.arange(resolution) + 0.5) * (y1 - y0) / resolution
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def decision_surface(model, bounds, resolution: int = 200) -> SurfaceGrid:
    """Evaluate ``model.predict_score`` at every cell centre (row-major)."""
    if resolution < 2:
        raise PreconditionError("resolution must be >= 2")
    if getattr(model, "d_", None) != 2:
        raise DimensionMismatch(f"decision surfaces need a model trained on 2-D data, got d={model.d_}")
    x0, x1, y0, y1 = (float(b) for b in bounds)
    scores = np.asarray(model.predict_score(_cell_centers((x0, x1, y0, y1), resolution)), dtype=np.float64)
    return SurfaceGrid(x0, x1, y0, y1, resolution, scores.reshape(resolution, resolution),
                       float(model.threshold))


def _f(v):
    return f"{v:.2f}"


class _Frame:
    """Maps data coordinates into one panel's plotting box."""

    def __init__(self, bounds, ox=0.0, oy=0.0, w=PANEL_W, h=PANEL_H):
        self.x0, self.x1, self.y0, self.y1 = bounds
        self.left = ox + MARGIN_L
        self.top = oy + MARGIN_T
        self.width = w - MARGIN_L - MARGIN_R
        self.height = h - MARGIN_T - MARGIN_B
        self.ox, self.oy, self.w, self.h = ox, oy, w, h

    def px(self, x):
        return self.left + (x - self.x0) / (self.x1 - self.x0) * self.width

    def py(self, y):
        return self.top + (self.y1 - y) / (self.y1 - self.y0) * self.height


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _axes(fr: _Frame, title):
    out = [
        f'<rect class="frame" x="{_f(fr.left)}" y="{_f(fr.top)}" width="{_f(fr.width)}" '
        f'height="{_f(fr.height)}" fill="none" stroke="#333" stroke-width="1"/>'
    ]
    bottom = fr.top + fr.height
    for t in _ticks(fr.x0, fr.x1):
        x = fr.px(t)
        out.append(f'<line x1="{_f(x)}" y1="{_f(bottom)}" x2="{_f(x)}" y2="{_f(bottom + 4)}" stroke="#333"/>')
        out.append(f'<text x="{_f(x)}" y="{_f(bottom + 15)}" font-size="9" text-anchor="middle">{t:.1f}</text>')
    for t in _ticks(fr.y0, fr.y1):
        y = fr.py(t)
        out.append(f'<line x1="{_f(fr.left - 4)}" y1="{_f(y)}" x2="{_f(fr.left)}" y2="{_f(y)}" stroke="#333"/>')
        out.append(f'<text x="{_f(fr.left - 6)}" y="{_f(y + 3)}" font-size="9" text-anchor="end">{t:.1f}</text>')
    if title:
        out.append(
            f'<text class="title" x="{_f(fr.left)}" y="{_f(fr.oy + 18)}" font-size="13">{escape(title)}</text>'
        )
    return out


def _legend(fr: _Frame, classes, colors, opacity=None):
    out = []
    # in the top margin, right-aligned, so it never hides data
    for i, c in enumerate(classes):
        x = fr.left + fr.width - 52 * (len(classes) - i)
        yy = fr.top - 7
        op = "" if opacity is None else f' fill-opacity="{opacity}"'
        out.append(f'<circle class="legend" cx="{_f(x)}" cy="{_f(yy)}" r="4" fill="{colors[c]}"{op}/>')
        out.append(f'<text x="{_f(x + 8)}" y="{_f(yy + 3)}" font-size="10">{CLASS_NAMES[c]}</text>')
    return out


def _doc(width, height, body):
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>\n'
    )
    return head + "\n".join(body) + ("\n" if body else "") + "</svg>\n"


def _check_points(points, labels):
    P = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    y = np.asarray(labels).reshape(-1)
    if P.shape[0] != y.shape[0]:
        raise PreconditionError("points and labels must have the same length")
    if not np.all(np.isfinite(P)):
        raise PreconditionError("point coordinates must be finite")
    return P, y


def _class_order(y):
    # majority drawn first so the minority stays visible
    classes = [c for c in (-1, 1) if np.any(y == c)]
    return sorted(classes, key=lambda c: -int(np.sum(y == c)))


def _scatter_group(P, y, fr, title, radius=2.2):
    body = _axes(fr, title)
    for c in _class_order(y):
        for x, yy in P[y == c]:
            body.append(
                f'<circle class="pt" cx="{_f(fr.px(x))}" cy="{_f(fr.py(yy))}" r="{radius}" '
                f'fill="{SCATTER_COLORS[c]}"/>'
            )
    body += _legend(fr, [c for c in (-1, 1) if np.any(y == c)], SCATTER_COLORS)
    return body


def scatter_svg(embedding, labels, title: str = "", bounds=None) -> str:
    """One class-coloured circle per point with axes, title and legend."""
    P, y = _check_points(embedding, labels)
    fr = _Frame(bounds or grid_bounds(P, 0.05))
    return _doc(PANEL_W, PANEL_H, _scatter_group(P, y, fr, title))


def scatter_panels_svg(panels, ncols=2) -> str:
    """Several scatter panels side by side; ``panels`` is a list of
    ``(points, labels, title)``."""
    ncols = max(1, min(ncols, len(panels))) if panels else 1
    nrows = max(1, -(-len(panels) // ncols))
    body = []
    for k, (pts, labs, title) in enumerate(panels):
        P, y = _check_points(pts, labs)
        fr = _Frame(grid_bounds(P, 0.05), (k % ncols) * PANEL_W, (k // ncols) * PANEL_H)
        body += _scatter_group(P, y, fr, title)
    return _doc(ncols * PANEL_W, nrows * PANEL_H, body)


def _surface_group(grid: SurfaceGrid, train_points, train_labels, test_points, test_labels, fr, title):
    R = grid.resolution
    positive = grid.scores >= grid.threshold
    background = 1 if positive.sum() * 2 > positive.size else -1
    body = [
        '<g shape-rendering="crispEdges">',
        f'<rect class="region" x="{_f(fr.left)}" y="{_f(fr.top)}" width="{_f(fr.width)}" '
        f'height="{_f(fr.height)}" fill="{REGION_COLORS[background]}"/>',
    ]
    other = -background
    paint = positive if other == 1 else ~positive
    cw = fr.width / R
    ch = fr.height / R
    for r in range(R):
        row = paint[r]
        if not row.any():
            continue
        edges = np.flatnonzero(np.diff(np.concatenate([[0], row.astype(np.int8), [0]])))
        top = fr.top + (R - 1 - r) * ch
        for a, b in zip(edges[::2], edges[1::2]):
            body.append(
                f'<rect class="region" x="{_f(fr.left + a * cw)}" y="{_f(top)}" '
                f'width="{_f((b - a) * cw)}" height="{_f(ch)}" fill="{REGION_COLORS[other]}"/>'
            )
    body.append("</g>")
    body += _axes(fr, title)
    Ptr, ytr = _check_points(train_points, train_labels)
    Pte, yte = _check_points(test_points, test_labels)
    for c in _class_order(ytr):
        for x, yy in Ptr[ytr == c]:
            body.append(
                f'<circle class="train-pt" cx="{_f(fr.px(x))}" cy="{_f(fr.py(yy))}" r="2.2" '
                f'fill="{POINT_COLORS[c]}"/>'
            )
    for c in _class_order(yte):
        for x, yy in Pte[yte == c]:
            body.append(
                f'<circle class="test-pt" cx="{_f(fr.px(x))}" cy="{_f(fr.py(yy))}" r="2.2" '
                f'fill="{POINT_COLORS[c]}" fill-opacity="{TEST_OPACITY}"/>'
            )
    present = sorted(set(ytr.tolist()) | set(yte.tolist()))
    body += _legend(fr, present, POINT_COLORS)
    return body


def surface_svg(grid: SurfaceGrid, train_points, train_labels, test_points=None, test_labels=None,
                title: str = "") -> str:
    """Two-colour decision regions split at the model threshold, solid
    training markers and semi-transparent test markers."""
    if test_points is None:
        test_points, test_labels = np.empty((0, 2)), np.empty(0)
    fr = _Frame((grid.x_min, grid.x_max, grid.y_min, grid.y_max))
    return _doc(PANEL_W, PANEL_H,
                _surface_group(grid, train_points, train_labels, test_points, test_labels, fr, title))


def surface_grid_svg(panels, ncols=3, title: str = "") -> str:
    """Compose several decision-surface panels into one document.

    ``panels`` is a list of ``(grid, train_points, train_labels, test_points,
    test_labels, panel_title)``.
    """
    ncols = max(1, min(ncols, len(panels))) if panels else 1
    nrows = max(1, -(-len(panels) // ncols))
    header = 28 if title else 0
    body = []
    if title:
        body.append(
            f'<text class="doc-title" x="{_f(ncols * PANEL_W / 2)}" y="20" font-size="15" '
            f'text-anchor="middle">{escape(title)}</text>'
        )
    for k, (grid, trp, trl, tep, tel, ptitle) in enumerate(panels):
        fr = _Frame((grid.x_min, grid.x_max, grid.y_min, grid.y_max),
                    (k % ncols) * PANEL_W, header + (k // ncols) * PANEL_H)
        body += _surface_group(grid, trp, trl, tep, tel, fr, ptitle)
    return _doc(ncols * PANEL_W, header + nrows * PANEL_H, body)

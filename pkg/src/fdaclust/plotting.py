"""Standalone SVG charts for cohorts, clusterings, memberships and FPCA.

The writer emits plain SVG 1.1 text with fixed number formatting, so the
same input always renders to the same bytes.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
GREY = "#9e9e9e"


def _f(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


class Canvas:
    def __init__(self, width: int, height: int, title: str = ""):
        self.width, self.height = width, height
        self.parts: list[str] = []
        if title:
            self.text(width / 2, 20, title, size=14, anchor="middle")

    def path(self, xs, ys, color="#000", width=1.0, opacity=1.0):
        pts = " L ".join(f"{_f(x)} {_f(y)}" for x, y in zip(xs, ys))
        self.parts.append(
            f'<path d="M {pts}" fill="none" stroke="{color}" stroke-width="{_f(width)}" '
            f'stroke-opacity="{_f(opacity)}"/>'
        )

    def rect(self, x, y, w, h, color):
        self.parts.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{color}"/>')

    def circle(self, x, y, r, color):
        self.parts.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" fill="{color}"/>')

    def text(self, x, y, s, size=10, anchor="start"):
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" font-family="sans-serif" '
            f'text-anchor="{anchor}">{escape(str(s))}</text>'
        )

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="#ffffff"/>\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


class Panel:
    """Axis box mapping data coordinates into a canvas rectangle."""

    def __init__(self, canvas: Canvas, x0, y0, w, h, xlim, ylim, xlabel="", ylabel="", ticks=True):
        self.c = canvas
        self.x0, self.y0, self.w, self.h = x0, y0, w, h
        self.xlim = _pad(xlim)
        self.ylim = _pad(ylim)
        canvas.path([x0, x0 + w, x0 + w, x0, x0], [y0, y0, y0 + h, y0 + h, y0], color="#333", width=0.8)
        if ticks:
            for v in np.linspace(*self.xlim, 5):
                canvas.text(self.sx(v), y0 + h + 12, _tick(v), size=8, anchor="middle")
            for v in np.linspace(*self.ylim, 5):
                canvas.text(x0 - 4, self.sy(v) + 3, _tick(v), size=8, anchor="end")
        if xlabel:
            canvas.text(x0 + w / 2, y0 + h + 26, xlabel, anchor="middle")
        if ylabel:
            canvas.text(x0, y0 - 6, ylabel)

    def sx(self, v):
        lo, hi = self.xlim
        return self.x0 + (np.asarray(v, dtype=float) - lo) / (hi - lo) * self.w

    def sy(self, v):
        lo, hi = self.ylim
        return self.y0 + self.h - (np.asarray(v, dtype=float) - lo) / (hi - lo) * self.h

    def line(self, xs, ys, **kw):
        self.c.path(self.sx(xs), self.sy(ys), **kw)

    def points(self, xs, ys, color, r=2.0):
        for x, y in zip(self.sx(xs), self.sy(ys)):
            self.c.circle(x, y, r, color)


def _pad(lim):
    lo, hi = float(lim[0]), float(lim[1])
    if hi - lo <= 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _tick(v: float) -> str:
    s = f"{v:.3g}"
    return "0" if s in ("-0", "-0.0") else s


def _legend(canvas: Canvas, x, y, entries):
    for i, (name, color) in enumerate(entries):
        canvas.rect(x, y + 14 * i - 8, 10, 10, color)
        canvas.text(x + 14, y + 14 * i, name)


def curves_svg(grid, values, groups=None, title="Curves", ylabel="value", group_names=None) -> str:
    """Spaghetti plot; ``groups`` (1-based) colours curves per cluster."""
    grid = np.asarray(grid, dtype=float)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    canvas = Canvas(640, 420, title)
    panel = Panel(canvas, 60, 40, 450, 330, (grid[0], grid[-1]), (values.min(), values.max()), "t", ylabel)
    for i, row in enumerate(values):
        color = GREY if groups is None else PALETTE[(int(groups[i]) - 1) % len(PALETTE)]
        panel.line(grid, row, color=color, width=1.0, opacity=0.6)
    if groups is not None:
        k = int(np.max(groups))
        names = group_names or [f"cluster {c}" for c in range(1, k + 1)]
        _legend(canvas, 525, 60, [(names[c], PALETTE[c % len(PALETTE)]) for c in range(k)])
    return canvas.render()


def membership_svg(membership, title="Membership degree") -> str:
    """Stacked bars: one column per item, one colour per cluster."""
    u = np.asarray(membership, dtype=float)
    n, k = u.shape
    canvas = Canvas(max(400, 60 + 6 * n + 120), 320, title)
    panel = Panel(canvas, 50, 40, 6 * n, 240, (0, n), (0, 1), "item", "membership", ticks=False)
    bar = panel.w / n
    for i in range(n):
        top = 0.0
        for c in range(k):
            y1 = panel.sy(top)
            y2 = panel.sy(top + u[i, c])
            canvas.rect(panel.x0 + i * bar, y2, max(bar - 0.5, 0.5), y1 - y2, PALETTE[c % len(PALETTE)])
            top += u[i, c]
    _legend(canvas, panel.x0 + panel.w + 15, 60, [(f"cluster {c + 1}", PALETTE[c % len(PALETTE)]) for c in range(k)])
    return canvas.render()


def scree_svg(eigenvalues, title="Principal component variance") -> str:
    """Eigenvalues (left) and cumulative explained variance (right)."""
    ev = np.asarray(eigenvalues, dtype=float)
    ev = ev[ev > 0] if np.any(ev > 0) else ev[:1]
    idx = np.arange(1, ev.size + 1)
    total = ev.sum() if ev.sum() > 0 else 1.0
    cum = np.cumsum(ev) / total
    canvas = Canvas(760, 360, title)
    left = Panel(canvas, 60, 40, 290, 270, (0.5, ev.size + 0.5), (0, ev.max()), "component", "variance")
    right = Panel(canvas, 440, 40, 290, 270, (0.5, ev.size + 0.5), (0, 1), "component", "cumulative fraction")
    left.line(idx, ev, color=PALETTE[0], width=1.5)
    left.points(idx, ev, PALETTE[0], 3)
    right.line(idx, cum, color=PALETTE[1], width=1.5)
    right.points(idx, cum, PALETTE[1], 3)
    right.line([0.5, ev.size + 0.5], [0.95, 0.95], color=GREY, width=0.8)
    return canvas.render()


def scatter_matrix_svg(scores, groups=None, title="Principal component scores") -> str:
    """Pairwise score scatter plots; the diagonal shows component names."""
    x = np.atleast_2d(np.asarray(scores, dtype=float))
    q = x.shape[1]
    cell = 110 if q > 3 else 160
    size = 60 + q * cell
    canvas = Canvas(size, size + 20, title)
    colors = [GREY] * x.shape[0] if groups is None else [PALETTE[(int(g) - 1) % len(PALETTE)] for g in groups]
    for r in range(q):
        for c in range(q):
            x0, y0 = 40 + c * cell, 40 + r * cell
            if r == c:
                canvas.path([x0, x0 + cell - 8, x0 + cell - 8, x0, x0], [y0, y0, y0 + cell - 8, y0 + cell - 8, y0], color="#333", width=0.8)
                canvas.text(x0 + (cell - 8) / 2, y0 + (cell - 8) / 2, f"PC{r + 1}", size=12, anchor="middle")
                continue
            panel = Panel(canvas, x0, y0, cell - 8, cell - 8, (x[:, c].min(), x[:, c].max()), (x[:, r].min(), x[:, r].max()), ticks=False)
            for xi, yi, col in zip(panel.sx(x[:, c]), panel.sy(x[:, r]), colors):
                canvas.circle(xi, yi, 1.8, col)
    return canvas.render()

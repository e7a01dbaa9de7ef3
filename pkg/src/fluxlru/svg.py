"""Minimal SVG emitters for line plots and heatmaps (no plotting library needed)."""

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=30, bottom=50)


def _scale(v, lo, hi, a, b):
    if hi == lo:
        return 0.5 * (a + b)
    return a + (v - lo) * (b - a) / (hi - lo)


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return list(np.linspace(lo, hi, n))


def _frame(title, xlabel, ylabel, xlim, ylim, ylog=False):
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for t in _ticks(*xlim):
        x = _scale(t, *xlim, x0, x1)
        out.append(f'<line x1="{x:.1f}" y1="{y0}" x2="{x:.1f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{y0 + 18}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(*ylim):
        y = _scale(t, *ylim, y0, y1)
        label = f"1e{t:.1f}" if ylog else f"{t:.4g}"
        out.append(f'<line x1="{x0 - 5}" y1="{y:.1f}" x2="{x0}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{y + 4:.1f}" text-anchor="end">{label}</text>')
    return out, (x0, x1, y0, y1)


def line_plot(path, x, series, title="", xlabel="", ylabel="", ylog=False):
    """Write a line plot; ``series`` maps a legend label to y values."""
    x = np.asarray(x, dtype=float)
    ys = {}
    for k, v in series.items():
        v = np.asarray(v, dtype=float)
        ys[k] = np.log10(np.clip(v, 1e-12, None)) if ylog else v
    allv = np.concatenate([v[np.isfinite(v)] for v in ys.values()]) if ys else np.array([0.0])
    xlim = (float(x.min()), float(x.max()))
    ylim = (float(allv.min()), float(allv.max()))
    out, (x0, x1, y0, y1) = _frame(title, xlabel, ylabel, xlim, ylim, ylog)
    for n, (label, v) in enumerate(ys.items()):
        color = PALETTE[n % len(PALETTE)]
        pts = " ".join(f"{_scale(a, *xlim, x0, x1):.2f},{_scale(b, *ylim, y0, y1):.2f}"
                       for a, b in zip(x, v) if np.isfinite(b))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{x1 - 5}" y="{y1 + 16 + 14 * n}" text-anchor="end" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _color(v):
    # white -> dark blue
    v = float(np.clip(v, 0.0, 1.0))
    r = int(round(255 * (1 - v) + 8 * v))
    g = int(round(255 * (1 - v) + 48 * v))
    b = int(round(255 * (1 - v) + 107 * v))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(path, x, y, z, title="", xlabel="", ylabel="", log=True):
    """Heatmap of ``z[i, j]`` over ``x[i]`` (horizontal) and ``y[j]`` (vertical)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    v = np.log10(np.clip(z, 1e-6, None)) if log else z
    lo, hi = float(np.nanmin(v)), float(np.nanmax(v))
    norm = (v - lo) / (hi - lo) if hi > lo else np.zeros_like(v)
    dx = np.diff(x).min() if len(x) > 1 else 1.0
    dy = np.diff(y).min() if len(y) > 1 else 1.0
    xlim = (float(x.min() - dx / 2), float(x.max() + dx / 2))
    ylim = (float(y.min() - dy / 2), float(y.max() + dy / 2))
    out, (x0, x1, y0, y1) = _frame(title, xlabel, ylabel, xlim, ylim)
    for i, xi in enumerate(x):
        for j, yj in enumerate(y):
            ax = _scale(xi - dx / 2, *xlim, x0, x1)
            bx = _scale(xi + dx / 2, *xlim, x0, x1)
            ay = _scale(yj + dy / 2, *ylim, y0, y1)
            by = _scale(yj - dy / 2, *ylim, y0, y1)
            out.append(f'<rect x="{ax:.2f}" y="{ay:.2f}" width="{bx - ax:.2f}" height="{by - ay:.2f}" '
                       f'fill="{_color(1 - norm[i, j])}"/>')
    scale = "log10 " if log else ""
    out.append(f'<text x="{x1}" y="{y1 - 6}" text-anchor="end">{scale}range [{lo:.3g}, {hi:.3g}]</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")

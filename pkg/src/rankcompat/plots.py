"""Dependency-free SVG charts.

Each plotted series is emitted as one ``<g class="series">`` element so the
output can be checked structurally. The CSV files written alongside are the
authoritative data; these charts are only a quick look.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

import numpy as np

W, H = 640, 420
ML, MR, MT, MB = 70, 150, 40, 55
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"]


def _range(values):
    v = np.asarray([x for x in values if math.isfinite(x)], dtype=float)
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.03 * (hi - lo)
    return lo - pad, hi + pad


class _Frame:
    def __init__(self, xr, yr):
        self.x0, self.x1 = xr
        self.y0, self.y1 = yr

    def x(self, v):
        return ML + (v - self.x0) / (self.x1 - self.x0) * (W - ML - MR)

    def y(self, v):
        return H - MB - (v - self.y0) / (self.y1 - self.y0) * (H - MT - MB)


def _header(title, xlabel, ylabel, frame):
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" height="{H - MT - MB}" '
           'fill="none" stroke="black"/>',
           f'<text x="{ML + (W - ML - MR) / 2:.1f}" y="{H - 12}" text-anchor="middle">'
           f'{escape(xlabel)}</text>',
           f'<text x="16" y="{MT + (H - MT - MB) / 2:.1f}" text-anchor="middle" '
           f'transform="rotate(-90 16 {MT + (H - MT - MB) / 2:.1f})">{escape(ylabel)}</text>']
    if frame is not None:
        for t in np.linspace(frame.x0, frame.x1, 5):
            out.append(f'<text x="{frame.x(t):.1f}" y="{H - MB + 15}" '
                       f'text-anchor="middle">{t:.3g}</text>')
        for t in np.linspace(frame.y0, frame.y1, 5):
            out.append(f'<text x="{ML - 5}" y="{frame.y(t) + 4:.1f}" '
                       f'text-anchor="end">{t:.3g}</text>')
    return out


def _legend(labels):
    out = []
    for i, label in enumerate(labels):
        y = MT + 12 + 16 * i
        out.append(f'<rect x="{W - MR + 12}" y="{y - 8}" width="10" height="10" '
                   f'fill="{PALETTE[i % len(PALETTE)]}"/>')
        out.append(f'<text x="{W - MR + 27}" y="{y + 1}">{escape(str(label))}</text>')
    return out


def line_chart(series, title="", xlabel="", ylabel="", markers=None) -> str:
    """``series`` is a list of ``(label, xs, ys)``; ``markers`` optional ``(x, y)`` per series."""
    frame = _Frame(_range([v for _, xs, _ in series for v in xs]),
                   _range([v for _, _, ys in series for v in ys]))
    out = _header(title, xlabel, ylabel, frame)
    for i, (label, xs, ys) in enumerate(series):
        colour = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{frame.x(x):.2f},{frame.y(y):.2f}"
                       for x, y in zip(xs, ys) if math.isfinite(y))
        out.append(f'<g class="series" data-label={quoteattr(str(label))}>')
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        if markers is not None and markers[i] is not None:
            mx, my = markers[i]
            out.append(f'<circle cx="{frame.x(mx):.2f}" cy="{frame.y(my):.2f}" r="3.5" '
                       f'fill="{colour}"/>')
        out.append("</g>")
    out += _legend([s[0] for s in series])
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter_chart(series, title="", xlabel="", ylabel="") -> str:
    frame = _Frame(_range([v for _, xs, _ in series for v in xs]),
                   _range([v for _, _, ys in series for v in ys]))
    out = _header(title, xlabel, ylabel, frame)
    for i, (label, xs, ys) in enumerate(series):
        colour = PALETTE[i % len(PALETTE)]
        out.append(f'<g class="series" data-label={quoteattr(str(label))} fill="{colour}" '
                   'fill-opacity="0.6">')
        out += [f'<circle cx="{frame.x(x):.2f}" cy="{frame.y(y):.2f}" r="2.5"/>'
                for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
        out.append("</g>")
    out += _legend([s[0] for s in series])
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap(values, row_labels, col_labels, title="", xlabel="", ylabel="",
            label="value") -> str:
    """Grid of cells coloured on [min, max]; NaN cells are hatched grey."""
    v = np.asarray(values, dtype=float)
    finite = v[np.isfinite(v)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = hi - lo or 1.0
    out = _header(title, xlabel, ylabel, None)
    nr, nc = v.shape
    cw = (W - ML - MR) / nc
    ch = (H - MT - MB) / nr
    out.append(f'<g class="series" data-label={quoteattr(label)}>')
    for a in range(nr):
        for b in range(nc):
            x, y = ML + b * cw, H - MB - (a + 1) * ch
            if math.isfinite(v[a, b]):
                t = (v[a, b] - lo) / span
                fill = f"rgb({int(255 * (1 - t))},{int(90 + 120 * t)},{int(255 * t)})"
            else:
                fill = "#cccccc"
            out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.3:.2f}" '
                       f'height="{ch + 0.3:.2f}" fill="{fill}"/>')
    out.append("</g>")
    step_r = max(1, nr // 10)
    for a in range(0, nr, step_r):
        out.append(f'<text x="{ML - 5}" y="{H - MB - (a + 0.5) * ch + 4:.1f}" '
                   f'text-anchor="end">{escape(str(row_labels[a]))}</text>')
    step_c = max(1, nc // 10)
    for b in range(0, nc, step_c):
        out.append(f'<text x="{ML + (b + 0.5) * cw:.1f}" y="{H - MB + 15}" '
                   f'text-anchor="middle">{escape(str(col_labels[b]))}</text>')
    out.append(f'<text x="{W - MR + 12}" y="{MT + 12}">{escape(label)}: '
               f'{lo:.3g} (red) .. {hi:.3g} (blue)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, svg: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(svg)

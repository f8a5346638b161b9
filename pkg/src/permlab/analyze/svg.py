"""Minimal self-contained SVG rendering (no plotting dependencies).

Every document embeds its styling inline so the files open anywhere.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

_FONT = "font-family='Helvetica, Arial, sans-serif'"


def _diverging_color(value: float, scale: float) -> str:
    """Blue (negative) through white to red (positive)."""
    if scale <= 0 or not math.isfinite(value):
        return "#ffffff"
    t = max(-1.0, min(1.0, value / scale))
    if t >= 0:
        r, g, b = 255, round(255 * (1 - t)), round(255 * (1 - t))
    else:
        r, g, b = round(255 * (1 + t)), round(255 * (1 + t)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def svg_heatmap(matrix, row_labels, col_labels, title: str = "") -> str:
    """Coefficient heatmap with a symmetric diverging palette."""
    n_rows = len(row_labels)
    n_cols = len(col_labels)
    cell = 14
    left = 10 + (max((len(str(r)) for r in row_labels), default=1)) * 7
    top = 30 + (max((len(str(c)) for c in col_labels), default=1)) * 6
    width = left + n_cols * cell + 20
    height = top + n_rows * cell + 20
    scale = 0.0
    for row in matrix:
        for v in row:
            if math.isfinite(v):
                scale = max(scale, abs(v))

    parts = [
        f"<svg xmlns='http://www.w3.org/2000/svg' width='{width}' height='{height}' "
        f"viewBox='0 0 {width} {height}'>",
        f"<rect width='{width}' height='{height}' fill='white'/>",
    ]
    if title:
        parts.append(
            f"<text x='10' y='18' {_FONT} font-size='13' font-weight='bold'>"
            f"{escape(title)}</text>"
        )
    for j, name in enumerate(col_labels):
        x = left + j * cell + cell / 2
        parts.append(
            f"<text x='{x:.1f}' y='{top - 4}' {_FONT} font-size='8' "
            f"transform='rotate(-60 {x:.1f} {top - 4})'>{escape(str(name))}</text>"
        )
    for i, row in enumerate(matrix):
        y = top + i * cell
        parts.append(
            f"<text x='4' y='{y + cell - 4}' {_FONT} font-size='9'>"
            f"{escape(str(row_labels[i]))}</text>"
        )
        for j, v in enumerate(row):
            color = _diverging_color(float(v), scale)
            parts.append(
                f"<rect x='{left + j * cell}' y='{y}' width='{cell}' height='{cell}' "
                f"fill='{color}' stroke='#cccccc' stroke-width='0.5'/>"
            )
    parts.append("</svg>")
    return "\n".join(parts)


def svg_boxes(groups, title: str = "", y_label: str = "") -> str:
    """Quartile-box glyphs: groups = [(label, (min, q1, median, q3, max))]."""
    groups = [(label, stats) for label, stats in groups if stats is not None]
    n = len(groups)
    box_w = 34
    gap = 26
    left, top, bottom = 60, 40, 60
    width = left + n * (box_w + gap) + 20
    height = 320
    plot_h = height - top - bottom

    finite = [v for _, s in groups for v in s if math.isfinite(v)]
    lo = min(finite) if finite else 0.0
    hi = max(finite) if finite else 1.0
    if hi == lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def y_of(v: float) -> float:
        return top + plot_h * (hi - v) / (hi - lo)

    parts = [
        f"<svg xmlns='http://www.w3.org/2000/svg' width='{width}' height='{height}' "
        f"viewBox='0 0 {width} {height}'>",
        f"<rect width='{width}' height='{height}' fill='white'/>",
    ]
    if title:
        parts.append(
            f"<text x='10' y='20' {_FONT} font-size='13' font-weight='bold'>"
            f"{escape(title)}</text>"
        )
    if y_label:
        parts.append(
            f"<text x='14' y='{top + plot_h / 2:.1f}' {_FONT} font-size='10' "
            f"transform='rotate(-90 14 {top + plot_h / 2:.1f})'>{escape(y_label)}</text>"
        )
    # axis with min/max ticks
    parts.append(
        f"<line x1='{left - 8}' y1='{top}' x2='{left - 8}' y2='{top + plot_h}' "
        f"stroke='black' stroke-width='1'/>"
    )
    for v in (lo + pad, hi - pad):
        parts.append(
            f"<text x='{left - 12}' y='{y_of(v) + 3:.1f}' {_FONT} font-size='8' "
            f"text-anchor='end'>{v:.2f}</text>"
        )
    for idx, (label, stats) in enumerate(groups):
        vmin, q1, med, q3, vmax = stats
        cx = left + idx * (box_w + gap) + box_w / 2
        x0 = cx - box_w / 2
        parts.extend(
            [
                f"<line x1='{cx:.1f}' y1='{y_of(vmax):.1f}' x2='{cx:.1f}' "
                f"y2='{y_of(q3):.1f}' stroke='black' stroke-width='1'/>",
                f"<line x1='{cx:.1f}' y1='{y_of(q1):.1f}' x2='{cx:.1f}' "
                f"y2='{y_of(vmin):.1f}' stroke='black' stroke-width='1'/>",
                f"<rect x='{x0:.1f}' y='{y_of(q3):.1f}' width='{box_w}' "
                f"height='{max(y_of(q1) - y_of(q3), 0.5):.1f}' fill='#9ecae1' "
                f"stroke='black' stroke-width='1'/>",
                f"<line x1='{x0:.1f}' y1='{y_of(med):.1f}' x2='{x0 + box_w:.1f}' "
                f"y2='{y_of(med):.1f}' stroke='black' stroke-width='1.5'/>",
                f"<text x='{cx:.1f}' y='{height - 34}' {_FONT} font-size='9' "
                f"text-anchor='middle'>{escape(str(label))}</text>",
            ]
        )
    parts.append("</svg>")
    return "\n".join(parts)

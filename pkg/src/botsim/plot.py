"""Minimal deterministic SVG line chart for in-degree time series."""

from __future__ import annotations

import math
from typing import List, Mapping, Sequence, Tuple
from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]

WIDTH, HEIGHT = 720, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 30, 55


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if raw <= mult * mag:
            return mult * mag
    return 10 * mag


def _num(x: float) -> str:
    text = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def render_plot(series: Mapping[str, Sequence[Tuple[float, float]]],
                title: str = "Mean sensor in-degree") -> str:
    """Render ``{label: [(time_s, mean_in_degree), ...]}`` as an SVG string.

    Series are drawn in the mapping's order. Time is shown in days.
    """
    points = [(t / 86400.0, y) for pts in series.values() for t, y in pts]
    x_max = max((x for x, _ in points), default=0.0)
    y_max = max((y for _, y in points), default=0.0)
    x_max = x_max if x_max > 0 else 1.0
    y_step = _nice_step(y_max if y_max > 0 else 1.0)
    y_top = y_step * max(1, math.ceil((y_max if y_max > 0 else 1.0) / y_step))
    x_step = _nice_step(x_max, 7)

    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM

    def sx(x: float) -> float:
        return LEFT + plot_w * x / x_max

    def sy(y: float) -> float:
        return TOP + plot_h * (1 - y / y_top)

    out: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT}" y="{TOP - 10}" font-size="14">{escape(title)}</text>',
    ]
    # grid and ticks
    k = 0
    while k * y_step <= y_top + 1e-9:
        y = sy(k * y_step)
        out.append(f'<line x1="{LEFT}" y1="{_num(y)}" x2="{LEFT + plot_w}" y2="{_num(y)}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{LEFT - 6}" y="{_num(y + 4)}" text-anchor="end">{_num(k * y_step)}</text>')
        k += 1
    k = 0
    while k * x_step <= x_max + 1e-9:
        x = sx(k * x_step)
        out.append(f'<line x1="{_num(x)}" y1="{TOP + plot_h}" x2="{_num(x)}" y2="{TOP + plot_h + 5}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{_num(x)}" y="{TOP + plot_h + 18}" text-anchor="middle">{_num(k * x_step)}</text>')
        k += 1
    out.append(f'<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>')
    out.append(f'<text x="{LEFT + plot_w / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle">'
               f'simulated time (days)</text>')
    out.append(f'<text x="18" y="{TOP + plot_h / 2:.0f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + plot_h / 2:.0f})">mean sensor in-degree</text>')

    for i, (label, pts) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{_num(sx(t / 86400.0))},{_num(sy(y))}" for t, y in pts)
        if not coords:
            coords = f"{_num(sx(0))},{_num(sy(0))}"
        out.append(f'<polyline class="series" data-label="{escape(label)}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5" points="{coords}"/>')
        ly = TOP + 10 + 18 * i
        lx = LEFT + plot_w + 15
        out.append(f'<g class="legend"><line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/><text x="{lx + 26}" y="{ly + 4}">{escape(label)}</text></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

"""Minimal static SVG: one log-log data series with an optional fitted line."""

from __future__ import annotations

import math
from typing import Optional, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 24, 40, 56


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _decades(lo: float, hi: float) -> list:
    a, b = math.floor(lo), math.ceil(hi)
    if b == a:
        b = a + 1
    return list(range(a, b + 1))


def loglog_plot(
    xs: Sequence[float],
    ys: Sequence[float],
    *,
    title: str,
    xlabel: str,
    ylabel: str,
    fit_slope: Optional[float] = None,
    fit_intercept: Optional[float] = None,
) -> str:
    """Return the SVG document as text.  Non-positive points are dropped."""
    pts = [(math.log10(x), math.log10(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if pts:
        lx = [p[0] for p in pts]
        ly = [p[1] for p in pts]
        x_ticks = _decades(min(lx), max(lx))
        y_ticks = _decades(min(ly), max(ly))
    else:
        x_ticks, y_ticks = [0, 1], [0, 1]
    x0, x1 = x_ticks[0], x_ticks[-1]
    y0, y1 = y_ticks[0], y_ticks[-1]
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def py(v):
        return TOP + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in x_ticks:
        x = _fmt(px(t))
        out.append(f'<line x1="{x}" y1="{TOP}" x2="{x}" y2="{TOP + ph}" stroke="#dddddd"/>')
        out.append(
            f'<text x="{x}" y="{TOP + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">1e{t}</text>'
        )
    for t in y_ticks:
        y = _fmt(py(t))
        out.append(f'<line x1="{LEFT}" y1="{y}" x2="{LEFT + pw}" y2="{y}" stroke="#dddddd"/>')
        out.append(
            f'<text x="{LEFT - 6}" y="{y}" text-anchor="end" dominant-baseline="middle" '
            f'font-family="sans-serif" font-size="11">1e{t}</text>'
        )
    out.append(
        f'<text x="{LEFT + pw // 2}" y="{HEIGHT - 14}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13">{escape(xlabel)}</text>'
    )
    out.append(
        f'<text x="18" y="{TOP + ph // 2}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {TOP + ph // 2})">{escape(ylabel)}</text>'
    )
    if fit_slope is not None and fit_intercept is not None and pts:
        # the fit is ln y = slope ln x + intercept
        a, b = min(p[0] for p in pts), max(p[0] for p in pts)
        ya = fit_slope * a + fit_intercept / math.log(10)
        yb = fit_slope * b + fit_intercept / math.log(10)
        out.append(
            f'<line x1="{_fmt(px(a))}" y1="{_fmt(py(ya))}" x2="{_fmt(px(b))}" y2="{_fmt(py(yb))}" '
            f'stroke="#d62728" stroke-dasharray="6 4" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{LEFT + pw - 8}" y="{TOP + 16}" text-anchor="end" font-family="sans-serif" '
            f'font-size="12" fill="#d62728">fit slope {fit_slope:.3f}</text>'
        )
    if pts:
        path = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>')
        for x, y in pts:
            out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" fill="#1f77b4"/>')
    else:
        out.append(
            f'<text x="{LEFT + pw // 2}" y="{TOP + ph // 2}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="13">no positive values to plot</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"

"""Deterministic dual-axis SVG: |S21| in dB (left) and group delay in ns (right)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from .analysis import SweepResult

WIDTH, HEIGHT = 800, 450
LEFT, RIGHT, TOP, BOTTOM = 70, 70, 40, 50
MAG_COLOR = "#1f77b4"
TAU_COLOR = "#d62728"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _label(x: float) -> str:
    return f"{x:.6g}"


def _polylines(xs, ys, color):
    out, run = [], []
    for x, y in zip(xs, ys):
        if math.isfinite(y):
            run.append(f"{_fmt(x)},{_fmt(y)}")
        elif run:
            out.append(run)
            run = []
    if run:
        out.append(run)
    return [
        f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(r)}"/>'
        for r in out if len(r) > 1
    ]


def sweep_svg(result: SweepResult, title: str = "") -> str:
    f_ghz = result.freq / 1e9
    mag = np.where(np.isfinite(result.mag_db), result.mag_db, np.nan)
    tau_ns = np.where(result.undefined, np.nan, result.tau * 1e9)

    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM
    x_lo, x_hi = float(f_ghz[0]), float(f_ghz[-1])

    def span(values):
        finite = values[np.isfinite(values)]
        if finite.size == 0:
            return 0.0, 1.0
        ticks = _nice_ticks(float(finite.min()), float(finite.max()))
        return ticks[0], max(ticks[-1], float(finite.max()))

    m_lo, m_hi = span(mag)
    t_lo, t_hi = span(tau_ns)

    def sx(v):
        return LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v, lo, hi):
        return TOP + plot_h - (v - lo) / ((hi - lo) or 1.0) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>',
    ]
    if title:
        parts.append(f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle">{escape(title)}</text>')
    for t in _nice_ticks(x_lo, x_hi):
        if x_lo <= t <= x_hi:
            x = sx(t)
            parts.append(f'<line x1="{_fmt(x)}" y1="{TOP + plot_h}" x2="{_fmt(x)}" '
                         f'y2="{TOP + plot_h + 5}" stroke="black"/>')
            parts.append(f'<text x="{_fmt(x)}" y="{TOP + plot_h + 18}" '
                         f'text-anchor="middle">{_label(t)}</text>')
    for t in _nice_ticks(m_lo, m_hi):
        if m_lo <= t <= m_hi:
            y = sy(t, m_lo, m_hi)
            parts.append(f'<text x="{LEFT - 6}" y="{_fmt(y + 4)}" text-anchor="end" '
                         f'fill="{MAG_COLOR}">{_label(t)}</text>')
    for t in _nice_ticks(t_lo, t_hi):
        if t_lo <= t <= t_hi:
            y = sy(t, t_lo, t_hi)
            parts.append(f'<text x="{WIDTH - RIGHT + 6}" y="{_fmt(y + 4)}" '
                         f'fill="{TAU_COLOR}">{_label(t)}</text>')
    parts.append(f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">'
                 f'Frequency (GHz)</text>')
    parts.append(f'<text x="16" y="{TOP + plot_h / 2:.1f}" fill="{MAG_COLOR}" '
                 f'transform="rotate(-90 16 {TOP + plot_h / 2:.1f})" text-anchor="middle">'
                 f'|S21| (dB)</text>')
    parts.append(f'<text x="{WIDTH - 14}" y="{TOP + plot_h / 2:.1f}" fill="{TAU_COLOR}" '
                 f'transform="rotate(90 {WIDTH - 14} {TOP + plot_h / 2:.1f})" '
                 f'text-anchor="middle">Group delay (ns)</text>')
    xs = [sx(v) for v in f_ghz]
    parts += _polylines(xs, [sy(v, m_lo, m_hi) for v in mag], MAG_COLOR)
    parts += _polylines(xs, [sy(v, t_lo, t_hi) for v in tau_ns], TAU_COLOR)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

"""Minimal standalone SVG line plots."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=80, right=160, top=30, bottom=60)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def is_log_spaced(values) -> bool:
    v = np.asarray(values, dtype=float)
    if v.size < 3 or np.any(v <= 0):
        return False
    r = np.diff(np.log(v))
    return bool(np.allclose(r, r[0], rtol=1e-6) and not np.allclose(np.diff(v), np.diff(v)[0], rtol=1e-6))


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Axis:
    def __init__(self, values, log: bool, length: float):
        v = np.asarray(values, dtype=float)
        v = v[np.isfinite(v)]
        if log:
            v = v[v > 0]
        lo, hi = (float(v.min()), float(v.max())) if v.size else (1.0, 10.0)
        self.log = log
        if log:
            lo, hi = 10 ** math.floor(math.log10(lo)), 10 ** math.ceil(math.log10(hi))
            if lo == hi:
                hi = lo * 10
            self.lo, self.hi = math.log10(lo), math.log10(hi)
        else:
            if lo == hi:
                lo, hi = lo - 0.5, hi + 0.5
            self.lo, self.hi = lo, hi
        self.length = length

    def pos(self, x: float) -> float:
        u = math.log10(x) if self.log else x
        return (u - self.lo) / (self.hi - self.lo) * self.length

    def ticks(self) -> list[tuple[float, str]]:
        if self.log:
            return [(10.0 ** k, f"1e{k}") for k in range(int(self.lo), int(self.hi) + 1)]
        return [(x, f"{x:.3g}") for x in np.linspace(self.lo, self.hi, 6)]


def line_plot(x: Sequence[float], series: Sequence[tuple[str, Sequence[float], str]],
              xlabel: str, ylabel: str, title: str = "") -> str:
    """Render one polyline per ``(label, y, dash)`` series as an SVG string.

    The x axis is logarithmic when ``x`` is log-spaced. The y axis is
    logarithmic when every y value is positive.
    """
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for _, y, _ in series]
    allv = np.concatenate(ys) if ys else np.array([1.0])
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    xa = _Axis(x, is_log_spaced(x), pw)
    ya = _Axis(allv, bool(np.all(allv > 0)), ph)
    ox, oy = MARGIN["left"], MARGIN["top"] + ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{ox}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{ox + pw / 2:.2f}" y="18" text-anchor="middle">{escape(title)}</text>')
    for val, label in xa.ticks():
        px = ox + xa.pos(val)
        out.append(f'<line x1="{_fmt(px)}" y1="{oy}" x2="{_fmt(px)}" y2="{oy + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(px)}" y="{oy + 18}" text-anchor="middle">{escape(label)}</text>')
    for val, label in ya.ticks():
        py = oy - ya.pos(val)
        out.append(f'<line x1="{ox - 5}" y1="{_fmt(py)}" x2="{ox}" y2="{_fmt(py)}" stroke="black"/>')
        out.append(f'<text x="{ox - 8}" y="{_fmt(py + 4)}" text-anchor="end">{escape(label)}</text>')
    out.append(f'<text x="{ox + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="18" y="{MARGIN["top"] + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {MARGIN["top"] + ph / 2:.2f})">{escape(ylabel)}</text>'
    )
    for i, ((label, _, dash), y) in enumerate(zip(series, ys)):
        color = COLORS[i % len(COLORS)]
        ok = np.isfinite(y) & ((y > 0) if ya.log else True)
        pts = " ".join(f"{_fmt(ox + xa.pos(a))},{_fmt(oy - ya.pos(b))}" for a, b in zip(x[ok], y[ok]))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash_attr}/>')
        ly = MARGIN["top"] + 15 + 16 * i
        lx = ox + pw + 10
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}"{dash_attr}/>')
        out.append(f'<text x="{lx + 25}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

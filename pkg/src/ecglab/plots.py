"""Standalone SVG 1.1 line and step plots with a fixed layout."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 50
COLOURS = ("#1f4e9c", "#c0392b", "#27864a", "#7d3c98", "#b9770e")


@dataclass(frozen=True)
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    step: bool = False


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick(v: float) -> str:
    return f"{v:.3g}"


def line_plot(series: Sequence[Series], title: str, xlabel: str, ylabel: str, logy: bool = False) -> str:
    pts = [(x, y) for s in series for x, y in zip(s.x, s.y)]
    if not pts:
        raise ValueError("nothing to plot")
    if logy:
        pts = [(x, y) for x, y in pts if y > 0]
        if not pts:
            raise ValueError("no positive values for a log axis")
    tf = (lambda y: math.log10(y)) if logy else (lambda y: y)
    xs = [p[0] for p in pts]
    ys = [tf(p[1]) for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for i in range(6):
        fx = x0 + (x1 - x0) * i / 5
        fy = y0 + (y1 - y0) * i / 5
        label_y = 10 ** fy if logy else fy
        out.append(f'<line x1="{_fmt(sx(fx))}" y1="{TOP + ph}" x2="{_fmt(sx(fx))}" y2="{TOP + ph + 5}" stroke="#444"/>')
        out.append(
            f'<text x="{_fmt(sx(fx))}" y="{TOP + ph + 18}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{_tick(fx)}</text>'
        )
        out.append(f'<line x1="{LEFT - 5}" y1="{_fmt(sy(fy))}" x2="{LEFT}" y2="{_fmt(sy(fy))}" stroke="#444"/>')
        out.append(
            f'<text x="{LEFT - 8}" y="{_fmt(sy(fy) + 4)}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{_tick(label_y)}</text>'
        )
    out.append(
        f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13">{escape(xlabel)}</text>'
    )
    ylab = ylabel + (" (log scale)" if logy else "")
    out.append(
        f'<text x="16" y="{TOP + ph / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {TOP + ph / 2})">{escape(ylab)}</text>'
    )
    for k, s in enumerate(series):
        colour = COLOURS[k % len(COLOURS)]
        pairs = [(x, tf(y)) for x, y in zip(s.x, s.y) if not logy or y > 0]
        if not pairs:
            continue
        coords = []
        for j, (x, y) in enumerate(pairs):
            if s.step and j:
                coords.append(f"{_fmt(sx(x))},{_fmt(sy(pairs[j - 1][1]))}")
            coords.append(f"{_fmt(sx(x))},{_fmt(sy(y))}")
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.6" points="{" ".join(coords)}"/>')
        if not s.step and len(pairs) <= 60:
            for x, y in pairs:
                out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2.5" fill="{colour}"/>')
        ly = TOP + 16 + 16 * k
        out.append(f'<line x1="{LEFT + pw - 150}" y1="{ly}" x2="{LEFT + pw - 130}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(
            f'<text x="{LEFT + pw - 125}" y="{ly + 4}" font-family="sans-serif" font-size="11">{escape(s.label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"

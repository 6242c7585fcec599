"""Minimal dependency-free SVG line plots."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]


@dataclass
class Series:
    label: str
    xs: list[float]
    ys: list[float]
    markers: bool = True
    dashed: bool = False
    color: str | None = None


@dataclass
class Panel:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)
    logx: bool = False
    logy: bool = False
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        return [10.0**e for e in range(math.floor(lo), math.ceil(hi) + 1)]
    span = hi - lo or 1.0
    raw = span / 5
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * span:
        out.append(round(v, 12))
        v += step
    return out


def _tick_label(v: float) -> str:
    if v != 0 and (abs(v) >= 1e4 or abs(v) < 1e-3):
        return f"{v:.0e}"
    return f"{v:g}"


def _render_panel(p: Panel, x0: float, y0: float, w: float, h: float) -> list[str]:
    ml, mr, mt, mb = 60, 15, 30, 45
    pw, ph = w - ml - mr, h - mt - mb

    def tx(v):
        return math.log10(v) if p.logx else v

    def ty(v):
        return math.log10(v) if p.logy else v

    pts = [
        (tx(x), ty(y))
        for s in p.series
        for x, y in zip(s.xs, s.ys)
        if (not p.logx or x > 0) and (not p.logy or y > 0)
    ]
    if p.xlim:
        xmin, xmax = tx(p.xlim[0]), tx(p.xlim[1])
    else:
        xmin, xmax = (min(q[0] for q in pts), max(q[0] for q in pts)) if pts else (0.0, 1.0)
    if p.ylim:
        ymin, ymax = ty(p.ylim[0]), ty(p.ylim[1])
    else:
        ymin, ymax = (min(q[1] for q in pts), max(q[1] for q in pts)) if pts else (0.0, 1.0)
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0

    def px(v):
        return x0 + ml + (v - xmin) / (xmax - xmin) * pw

    def py(v):
        return y0 + mt + ph - (v - ymin) / (ymax - ymin) * ph

    out = [
        f'<rect x="{_fmt(x0 + ml)}" y="{_fmt(y0 + mt)}" width="{_fmt(pw)}" height="{_fmt(ph)}" '
        'fill="none" stroke="#333"/>',
        f'<text x="{_fmt(x0 + ml + pw / 2)}" y="{_fmt(y0 + 18)}" text-anchor="middle" '
        f'font-size="14">{escape(p.title)}</text>',
        f'<text x="{_fmt(x0 + ml + pw / 2)}" y="{_fmt(y0 + h - 8)}" text-anchor="middle" '
        f'font-size="12">{escape(p.xlabel)}</text>',
        f'<text x="{_fmt(x0 + 14)}" y="{_fmt(y0 + mt + ph / 2)}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 {_fmt(x0 + 14)} {_fmt(y0 + mt + ph / 2)})">{escape(p.ylabel)}</text>',
    ]
    for t in _ticks(xmin, xmax, p.logx):
        v = math.log10(t) if p.logx else t
        if xmin - 1e-9 <= v <= xmax + 1e-9:
            out.append(
                f'<text x="{_fmt(px(v))}" y="{_fmt(y0 + mt + ph + 16)}" text-anchor="middle" '
                f'font-size="10">{_tick_label(t)}</text>'
            )
    for t in _ticks(ymin, ymax, p.logy):
        v = math.log10(t) if p.logy else t
        if ymin - 1e-9 <= v <= ymax + 1e-9:
            out.append(
                f'<text x="{_fmt(x0 + ml - 4)}" y="{_fmt(py(v) + 3)}" text-anchor="end" '
                f'font-size="10">{_tick_label(t)}</text>'
            )
    for i, s in enumerate(p.series):
        color = s.color or PALETTE[i % len(PALETTE)]
        coords = [
            (px(tx(x)), py(ty(y)))
            for x, y in zip(s.xs, s.ys)
            if (not p.logx or x > 0) and (not p.logy or y > 0)
        ]
        if len(coords) > 1:
            dash = ' stroke-dasharray="5,4"' if s.dashed else ""
            path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in coords)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}"{dash}/>')
        if s.markers:
            for a, b in coords:
                out.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="2.5" fill="{color}"/>')
        ly = y0 + mt + 14 + 14 * i
        out.append(
            f'<text x="{_fmt(x0 + ml + pw - 6)}" y="{_fmt(ly)}" text-anchor="end" '
            f'font-size="10" fill="{color}">{escape(s.label)}</text>'
        )
    return out


def render_svg(panels: list[Panel], width: int = 480, height: int = 360) -> str:
    total_w = width * len(panels)
    body = []
    for i, panel in enumerate(panels):
        body.extend(_render_panel(panel, i * width, 0, width, height))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{height}" '
        f'viewBox="0 0 {total_w} {height}" font-family="sans-serif">\n'
        '<rect width="100%" height="100%" fill="white"/>\n' + "\n".join(body) + "\n</svg>\n"
    )

"""Small self-contained SVG figures."""

from __future__ import annotations

import math
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

POS = "#d95f02"
NEG = "#1b9e77"
INK = "#333333"
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _f(x) -> str:
    return f"{float(x):.2f}"


class _Svg:
    def __init__(self, width: int, height: int):
        self.w, self.h = width, height
        self.parts: list = []

    def add(self, s: str):
        self.parts.append(s)

    def line(self, x1, y1, x2, y2, color=INK, width=1.0, dash: Optional[str] = None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                 f'stroke="{color}" stroke-width="{width}"{d}/>')

    def polyline(self, pts, color=INK, width=1.5, dash: Optional[str] = None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        self.add(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                 f'stroke-width="{width}"{d}/>')

    def circle(self, x, y, r, stroke=INK, fill="none", width=1.0, dash: Optional[str] = None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" stroke="{stroke}" '
                 f'fill="{fill}" stroke-width="{width}"{d}/>')

    def text(self, x, y, s, size=12, anchor="middle", color=INK):
        self.add(f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}" '
                 f'text-anchor="{anchor}" fill="{color}">{escape(str(s))}</text>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">')
        bg = f'<rect width="{self.w}" height="{self.h}" fill="white"/>'
        return "\n".join([head, bg, *self.parts, "</svg>"]) + "\n"


def region_wheel(points, coefficients, locations, eta=None, title: str = "") -> str:
    """Unit circle cut by the data hyperplanes, atoms, and the certificate as a radial curve.

    The curve is drawn at radius ``1 + 0.25 eta(theta)``; dashed circles mark ``eta = +-1``.
    """
    X = np.asarray(points, dtype=float)
    S = _Svg(460, 480)
    cx, cy, R = 230.0, 250.0, 140.0

    def to_px(v, rad=1.0):
        return cx + R * rad * v[0], cy - R * rad * v[1]

    S.text(cx, 24, title, size=14)
    S.circle(cx, cy, R, width=1.2)
    for lvl, col in ((1.25, POS), (0.75, NEG)):
        S.circle(cx, cy, R * lvl, stroke=col, dash="4 3")
    for j, x in enumerate(X):
        t = np.array([-x[1], x[0]]) / np.linalg.norm(x)
        a, b = to_px(t, 1.55), to_px(-t, 1.55)
        S.line(a[0], a[1], b[0], b[1], color="#999999", width=0.8)
        lx, ly = to_px(x / np.linalg.norm(x), 1.62)
        S.text(lx, ly + 4, f"x{j + 1}", size=11)
    if eta is not None:
        th = np.linspace(0, 2 * math.pi, len(eta), endpoint=False)
        rad = 1.0 + 0.25 * np.asarray(eta)
        pts = [to_px((math.cos(a), math.sin(a)), r) for a, r in zip(th, rad)]
        pts.append(pts[0])
        S.polyline(pts, color=INK, width=1.2)
    for c, w in zip(coefficients, locations):
        px, py = to_px(w)
        S.circle(px, py, 5, stroke=INK, fill=POS if c > 0 else NEG)
        S.line(cx, cy, px, py, color=POS if c > 0 else NEG, width=1.5)
    return S.render()


def line_plot(series: Sequence[dict], xlabel: str, ylabel: str, title: str = "",
              logx: bool = False, logy: bool = False) -> str:
    """Line/marker plot; each series is ``{"x", "y", "label", "style": "line"|"marker"}``."""
    S = _Svg(560, 400)
    left, right, top, bottom = 70.0, 540.0, 40.0, 340.0

    def tx(v):
        return math.log10(v) if logx else v

    def ty(v):
        return math.log10(v) if logy else v

    xs = [tx(v) for s in series for v in s["x"] if (v > 0 or not logx)]
    ys = [ty(v) for s in series for v in s["y"] if (v > 0 or not logy)]
    if not xs or not ys:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return left + (tx(v) - x0) / (x1 - x0) * (right - left)

    def py(v):
        return bottom - (ty(v) - y0) / (y1 - y0) * (bottom - top)

    S.text((left + right) / 2, 22, title, size=14)
    S.line(left, bottom, right, bottom)
    S.line(left, bottom, left, top)
    for k in range(5):
        fx = x0 + k * (x1 - x0) / 4
        fy = y0 + k * (y1 - y0) / 4
        xv = 10 ** fx if logx else fx
        yv = 10 ** fy if logy else fy
        gx = left + k * (right - left) / 4
        gy = bottom - k * (bottom - top) / 4
        S.line(gx, bottom, gx, bottom + 4)
        S.text(gx, bottom + 16, f"{xv:.3g}", size=10)
        S.line(left - 4, gy, left, gy)
        S.text(left - 6, gy + 3, f"{yv:.3g}", size=10, anchor="end")
    S.text((left + right) / 2, bottom + 36, xlabel, size=12)
    S.add(f'<text x="18" y="{_f((top + bottom) / 2)}" font-family="sans-serif" font-size="12" '
          f'text-anchor="middle" transform="rotate(-90 18 {_f((top + bottom) / 2)})">'
          f'{escape(ylabel)}</text>')
    for k, s in enumerate(series):
        col = s.get("color", PALETTE[k % len(PALETTE)])
        pts = [(px(a), py(b)) for a, b in zip(s["x"], s["y"])
               if (a > 0 or not logx) and (b > 0 or not logy)]
        if s.get("style", "line") == "line":
            S.polyline(pts, color=col, dash=s.get("dash"))
        else:
            for a, b in pts:
                S.circle(a, b, 3, stroke=col, fill=col)
        S.text(right - 4, top + 14 * (k + 1), s.get("label", ""), size=11, anchor="end", color=col)
    return S.render()

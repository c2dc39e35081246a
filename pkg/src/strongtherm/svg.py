"""Minimal native SVG line charts (polylines and axes, no plotting dependency)."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=90, right=30, top=50, bottom=70)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def nice_ticks(lo: float, hi: float, n: int = 6) -> np.ndarray:
    """Round tick positions covering ``[lo, hi]``."""
    if not np.isfinite(lo) or not np.isfinite(hi):
        return np.array([0.0])
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step - 1e-9) * step
    ticks = np.arange(start, hi + 0.5 * step, step)
    return ticks[(ticks >= lo - 1e-9 * step) & (ticks <= hi + 1e-9 * step)]


def decimate(x, y, buckets: int = 800):
    """Keep first, min and max of each bucket so oscillations survive thinning."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) <= 3 * buckets:
        return x, y
    idx = [0]
    for chunk in np.array_split(np.arange(len(x)), buckets):
        seg = y[chunk]
        idx.extend(sorted({chunk[0], chunk[np.argmin(seg)], chunk[np.argmax(seg)]}))
    idx.append(len(x) - 1)
    idx = np.unique(idx)
    return x[idx], y[idx]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_chart(path, series, xlabel: str, ylabel: str, title: str = "", dashed=()) -> Path:
    """Write one 800 x 600 panel.

    Parameters
    ----------
    series : list of (label, x, y)
    dashed : collection of labels drawn with a dashed stroke
    """
    path = Path(path)
    ml, mr, mt, mb = MARGIN["left"], MARGIN["right"], MARGIN["top"], MARGIN["bottom"]
    pw, ph = WIDTH - ml - mr, HEIGHT - mt - mb
    xs = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.zeros(1)
    ys = np.concatenate([np.asarray(s[2], float) for s in series]) if series else np.zeros(1)
    ys = ys[np.isfinite(ys)] if np.any(np.isfinite(ys)) else np.zeros(1)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    pad = 0.05 * (y1 - y0) if y1 > y0 else max(abs(y0), 1.0) * 0.05
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return ml + (np.asarray(x) - x0) / (x1 - x0) * pw

    def py(y):
        return mt + ph - (np.asarray(y) - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
           f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="14">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for tx in nice_ticks(x0, x1):
        X = _fmt(px(tx))
        out.append(f'<line x1="{X}" y1="{mt + ph}" x2="{X}" y2="{mt + ph + 6}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{mt + ph + 22}" text-anchor="middle">{_fmt(tx)}</text>')
    for ty in nice_ticks(y0, y1):
        Y = _fmt(py(ty))
        out.append(f'<line x1="{ml - 6}" y1="{Y}" x2="{ml}" y2="{Y}" stroke="black"/>')
        out.append(f'<line x1="{ml}" y1="{Y}" x2="{ml + pw}" y2="{Y}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{ml - 10}" y="{Y}" text-anchor="end" dominant-baseline="middle">{_fmt(ty)}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{HEIGHT - 20}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="22" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 22 {mt + ph / 2})">{escape(ylabel)}</text>')
    for k, (label, x, y) in enumerate(series):
        xd, yd = decimate(x, y)
        ok = np.isfinite(yd)
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px(xd[ok]), py(yd[ok])))
        color = PALETTE[k % len(PALETTE)]
        dash = ' stroke-dasharray="6 4"' if label in dashed else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{pts}"/>')
        ly = mt + 18 + 20 * k
        out.append(f'<line x1="{ml + pw - 170}" y1="{ly}" x2="{ml + pw - 140}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{ml + pw - 132}" y="{ly}" dominant-baseline="middle">{escape(label)}</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n", encoding="utf-8", newline="\n")
    return path

"""Observed-vs-predicted scatter plots as standalone SVG text."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 420, 420
MARGIN = 60


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=mag * 10)
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-9 * span:
        out.append(round(v, 12))
        v += step
    return out


def scatter_svg(observed, predicted, title: str, rmse: float | None = None, r: float | None = None,
                xlabel: str = "Observed", ylabel: str = "Predicted") -> str:
    """Scatter of ``predicted`` against ``observed`` with the identity line.

    Both axes share one range so the identity line is the diagonal.
    """
    obs = np.asarray(observed, dtype=float)
    pred = np.asarray(predicted, dtype=float)
    vals = np.concatenate([obs, pred])
    vals = vals[np.isfinite(vals)]
    lo, hi = (float(vals.min()), float(vals.max())) if vals.size else (0.0, 1.0)
    if hi - lo <= 0:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    plot = WIDTH - 2 * MARGIN

    def sx(v):
        return MARGIN + (v - lo) / (hi - lo) * plot

    def sy(v):
        return HEIGHT - MARGIN - (v - lo) / (hi - lo) * plot

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="black"/>',
        f'<line class="identity" x1="{_fmt(sx(lo))}" y1="{_fmt(sy(lo))}" x2="{_fmt(sx(hi))}" y2="{_fmt(sy(hi))}" '
        'stroke="gray" stroke-dasharray="4 3"/>',
    ]
    for t in _ticks(lo, hi):
        parts.append(f'<line x1="{_fmt(sx(t))}" y1="{HEIGHT - MARGIN}" x2="{_fmt(sx(t))}" y2="{HEIGHT - MARGIN + 4}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(sx(t))}" y="{HEIGHT - MARGIN + 16}" font-size="10" text-anchor="middle">{t:g}</text>')
        parts.append(f'<line x1="{MARGIN - 4}" y1="{_fmt(sy(t))}" x2="{MARGIN}" y2="{_fmt(sy(t))}" stroke="black"/>')
        parts.append(f'<text x="{MARGIN - 6}" y="{_fmt(sy(t) + 3)}" font-size="10" text-anchor="end">{t:g}</text>')
    for o, p in zip(obs, pred):
        if np.isfinite(o) and np.isfinite(p):
            parts.append(f'<circle cx="{_fmt(sx(o))}" cy="{_fmt(sy(p))}" r="3" fill="steelblue" fill-opacity="0.7"/>')
    parts.append(f'<text x="{WIDTH / 2:.0f}" y="{MARGIN / 2:.0f}" font-size="14" text-anchor="middle">{escape(title)}</text>')
    parts.append(f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 15}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(
        f'<text x="15" y="{HEIGHT / 2:.0f}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {HEIGHT / 2:.0f})">{escape(ylabel)}</text>'
    )
    notes = []
    if rmse is not None and np.isfinite(rmse):
        notes.append(f"RMSE = {rmse:.3f}")
    if r is not None and np.isfinite(r):
        notes.append(f"r = {r:.3f}")
    for i, note in enumerate(notes):
        parts.append(f'<text class="annotation" x="{MARGIN + 8}" y="{MARGIN + 16 + 14 * i}" font-size="11">{note}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

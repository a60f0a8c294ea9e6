"""Self-contained SVG chart emitters.

No external renderer: charts are assembled as plain SVG text with fixed
two-decimal coordinate formatting, so identical inputs produce identical
bytes (diffable artifacts, no timestamps or generated ids).
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

WIDTH = 720
HEIGHT = 440
MARGIN_L = 72
MARGIN_R = 24
MARGIN_T = 40
MARGIN_B = 56

PALETTE = ("#1f6fb2", "#d95f02", "#2a9d4e", "#7b3294", "#8c564b", "#4d4d4d")


def _f(x: float) -> str:
    return f"{float(x):.2f}"


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def _nice_ticks(lo: float, hi: float, target: int = 6):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("axis bounds must be finite")
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(1, target - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = 10.0 * mag
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mult * mag >= raw:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * (hi - lo):
        ticks.append(0.0 if abs(t) < 1e-12 else t)
        t += step
    return ticks


def _tick_label(v: float) -> str:
    if v == int(v) and abs(v) < 1e7:
        return str(int(v))
    return f"{v:g}"


class _Frame:
    """Affine map from data coordinates to the pixel plot area."""

    def __init__(self, x_lo, x_hi, y_lo, y_hi):
        if x_hi <= x_lo:
            x_hi = x_lo + 1.0
        if y_hi <= y_lo:
            y_hi = y_lo + 1.0
        self.x_lo, self.x_hi = float(x_lo), float(x_hi)
        self.y_lo, self.y_hi = float(y_lo), float(y_hi)
        self.px_w = WIDTH - MARGIN_L - MARGIN_R
        self.px_h = HEIGHT - MARGIN_T - MARGIN_B

    def x(self, v: float) -> float:
        return MARGIN_L + (v - self.x_lo) / (self.x_hi - self.x_lo) * self.px_w

    def y(self, v: float) -> float:
        return (HEIGHT - MARGIN_B
                - (v - self.y_lo) / (self.y_hi - self.y_lo) * self.px_h)

    def polyline_points(self, xs, ys) -> str:
        return " ".join(f"{_f(self.x(a))},{_f(self.y(b))}"
                        for a, b in zip(xs, ys))


def _axes(frame: _Frame, title: str, xlabel: str, ylabel: str) -> list:
    parts = []
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    for tv in _nice_ticks(frame.x_lo, frame.x_hi):
        px = frame.x(tv)
        parts.append(f'<line x1="{_f(px)}" y1="{y0}" x2="{_f(px)}" y2="{y1}" '
                     'stroke="#e0e0e0" stroke-width="1"/>')
        parts.append(f'<text x="{_f(px)}" y="{y0 + 18}" font-size="12" '
                     f'text-anchor="middle" fill="#333">'
                     f'{_esc(_tick_label(tv))}</text>')
    for tv in _nice_ticks(frame.y_lo, frame.y_hi):
        py = frame.y(tv)
        parts.append(f'<line x1="{x0}" y1="{_f(py)}" x2="{x1}" y2="{_f(py)}" '
                     'stroke="#e0e0e0" stroke-width="1"/>')
        parts.append(f'<text x="{x0 - 8}" y="{_f(py + 4)}" font-size="12" '
                     f'text-anchor="end" fill="#333">'
                     f'{_esc(_tick_label(tv))}</text>')
    parts.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" '
                 f'height="{y0 - y1}" fill="none" stroke="#333" '
                 'stroke-width="1"/>')
    parts.append(f'<text x="{(x0 + x1) // 2}" y="{MARGIN_T - 14}" '
                 f'font-size="15" text-anchor="middle" fill="#111">'
                 f'{_esc(title)}</text>')
    parts.append(f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 14}" '
                 f'font-size="13" text-anchor="middle" fill="#111">'
                 f'{_esc(xlabel)}</text>')
    parts.append(f'<text x="18" y="{(y0 + y1) // 2}" font-size="13" '
                 f'text-anchor="middle" fill="#111" '
                 f'transform="rotate(-90 18 {(y0 + y1) // 2})">'
                 f'{_esc(ylabel)}</text>')
    return parts


def _document(body: Sequence[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n'
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')
    return head + "\n" + "\n".join(body) + "\n</svg>\n"


def _legend(parts: list, labels_colors) -> None:
    x = MARGIN_L + 12
    y = MARGIN_T + 16
    for i, (label, color) in enumerate(labels_colors):
        yy = y + 18 * i
        parts.append(f'<line x1="{x}" y1="{yy - 4}" x2="{x + 26}" '
                     f'y2="{yy - 4}" stroke="{color}" stroke-width="2.5"/>')
        parts.append(f'<text x="{x + 32}" y="{yy}" font-size="12" '
                     f'fill="#111">{_esc(label)}</text>')


def line_chart(series: Sequence[dict], title: str, xlabel: str,
               ylabel: str, out_path: Optional[Path] = None) -> str:
    """Render line series, each optionally with a shaded confidence band.

    Parameters
    ----------
    series : sequence of dict
        Each with keys x, y (1D arrays) and optional label, band (lo, hi).
    """
    if not series:
        raise ValueError("line_chart needs at least one series")
    xs_all, ys_all = [], []
    for s in series:
        x = np.asarray(s["x"], dtype=np.float64)
        y = np.asarray(s["y"], dtype=np.float64)
        if x.size == 0 or x.shape != y.shape:
            raise ValueError("series x/y must be equal-length and non-empty")
        xs_all.append(x)
        ys_all.append(y)
        if s.get("band") is not None:
            lo, hi = s["band"]
            ys_all.append(np.asarray(lo, dtype=np.float64))
            ys_all.append(np.asarray(hi, dtype=np.float64))
    x_lo = min(float(a.min()) for a in xs_all)
    x_hi = max(float(a.max()) for a in xs_all)
    y_lo = min(float(a.min()) for a in ys_all)
    y_hi = max(float(a.max()) for a in ys_all)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    frame = _Frame(x_lo, x_hi, y_lo - pad, y_hi + pad)
    parts = _axes(frame, title, xlabel, ylabel)
    labels = []
    for i, s in enumerate(series):
        color = s.get("color", PALETTE[i % len(PALETTE)])
        x = np.asarray(s["x"], dtype=np.float64)
        y = np.asarray(s["y"], dtype=np.float64)
        if s.get("band") is not None:
            lo = np.asarray(s["band"][0], dtype=np.float64)
            hi = np.asarray(s["band"][1], dtype=np.float64)
            ring_x = np.concatenate([x, x[::-1]])
            ring_y = np.concatenate([hi, lo[::-1]])
            parts.append(f'<polygon points='
                         f'"{frame.polyline_points(ring_x, ring_y)}" '
                         f'fill="{color}" fill-opacity="0.18" stroke="none"/>')
        parts.append(f'<polyline points="{frame.polyline_points(x, y)}" '
                     f'fill="none" stroke="{color}" stroke-width="2"/>')
        labels.append((s.get("label", f"series {i + 1}"), color))
    if len(labels) > 1 or labels[0][0] != "series 1":
        _legend(parts, labels)
    doc = _document(parts)
    if out_path is not None:
        Path(out_path).write_text(doc, encoding="utf-8")
    return doc


def histogram_chart(values, title: str, xlabel: str, bins: int = 20,
                    out_path: Optional[Path] = None) -> str:
    """Render a single-variable histogram as filled bars."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        raise ValueError("histogram needs at least one value")
    counts, edges = np.histogram(vals, bins=bins)
    frame = _Frame(float(edges[0]), float(edges[-1]), 0.0,
                   float(counts.max()) * 1.08 or 1.0)
    parts = _axes(frame, title, xlabel, "count")
    for c, e0, e1 in zip(counts, edges[:-1], edges[1:]):
        if c == 0:
            continue
        x0 = frame.x(float(e0))
        x1 = frame.x(float(e1))
        y0 = frame.y(0.0)
        y1 = frame.y(float(c))
        parts.append(f'<rect x="{_f(x0)}" y="{_f(y1)}" '
                     f'width="{_f(max(x1 - x0 - 1.0, 0.5))}" '
                     f'height="{_f(y0 - y1)}" fill="{PALETTE[0]}" '
                     'fill-opacity="0.85" stroke="#ffffff"/>')
    doc = _document(parts)
    if out_path is not None:
        Path(out_path).write_text(doc, encoding="utf-8")
    return doc


def trajectory_chart(rows: Sequence[dict], driveway_y,
                     collided: bool, title: str = "trajectory",
                     out_path: Optional[Path] = None) -> str:
    """Overlay pedestrian and vehicle paths on the road geometry.

    The driveway band driveway_y = (y_min, y_max) is shaded; sidewalk
    regions stay white. A marker at the final pedestrian position flags a
    collision.
    """
    if not rows:
        raise ValueError("trajectory needs at least one row")
    dw_lo, dw_hi = float(driveway_y[0]), float(driveway_y[1])
    xp = np.array([r["x_ped"] for r in rows], dtype=np.float64)
    yp = np.array([r["y_ped"] for r in rows], dtype=np.float64)
    xv = np.array([r["x_veh"] for r in rows], dtype=np.float64)
    yv = np.array([r["y_veh"] for r in rows], dtype=np.float64)
    x_lo = min(xp.min(), xv.min()) - 2.0
    x_hi = max(xp.max(), xv.max()) + 2.0
    y_lo = min(yp.min(), yv.min(), dw_lo) - 2.0
    y_hi = max(yp.max(), yv.max(), dw_hi) + 2.0
    frame = _Frame(x_lo, x_hi, y_lo, y_hi)
    parts = []
    band_top = frame.y(dw_hi)
    band_bot = frame.y(dw_lo)
    parts.append(f'<rect x="{MARGIN_L}" y="{_f(band_top)}" '
                 f'width="{WIDTH - MARGIN_L - MARGIN_R}" '
                 f'height="{_f(band_bot - band_top)}" fill="#d9d9d9"/>')
    parts.append(f'<text x="{MARGIN_L + 8}" y="{_f(band_top + 16)}" '
                 'font-size="11" fill="#555">driveway</text>')
    parts.append(f'<text x="{MARGIN_L + 8}" y="{_f(band_top - 8)}" '
                 'font-size="11" fill="#777">sidewalk</text>')
    parts.extend(_axes(frame, title, "x [m]", "y [m]"))
    parts.append(f'<polyline points="{frame.polyline_points(xv, yv)}" '
                 f'fill="none" stroke="{PALETTE[1]}" stroke-width="2.5"/>')
    parts.append(f'<polyline points="{frame.polyline_points(xp, yp)}" '
                 f'fill="none" stroke="{PALETTE[0]}" stroke-width="2"/>')
    parts.append(f'<circle cx="{_f(frame.x(xp[0]))}" '
                 f'cy="{_f(frame.y(yp[0]))}" r="4" fill="{PALETTE[0]}"/>')
    if collided:
        cx, cy = frame.x(xp[-1]), frame.y(yp[-1])
        parts.append(f'<line x1="{_f(cx - 6)}" y1="{_f(cy - 6)}" '
                     f'x2="{_f(cx + 6)}" y2="{_f(cy + 6)}" stroke="#c81e1e" '
                     'stroke-width="3"/>')
        parts.append(f'<line x1="{_f(cx - 6)}" y1="{_f(cy + 6)}" '
                     f'x2="{_f(cx + 6)}" y2="{_f(cy - 6)}" stroke="#c81e1e" '
                     'stroke-width="3"/>')
    _legend(parts, [("pedestrian", PALETTE[0]), ("vehicle", PALETTE[1])])
    doc = _document(parts)
    if out_path is not None:
        Path(out_path).write_text(doc, encoding="utf-8")
    return doc

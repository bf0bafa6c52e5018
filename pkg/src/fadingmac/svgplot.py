"""Self-contained SVG line plots of sweep results.

One polyline per bound kind, SNR in dB on the x axis, rate on the y axis,
with a legend, tick labels, and error bars where the statistical error is
visible (above 0.5% of the value).  No plotting dependency is used; the
files are plain hand-assembled SVG.
"""

from __future__ import annotations

import math

from .errors import DomainError

__all__ = ["emit_plot"]

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
)

_WIDTH, _HEIGHT = 640, 480
_ML, _MR, _MT, _MB = 70, 30, 30, 55


def _ticks(lo: float, hi: float, count: int = 6):
    """Round tick positions covering [lo, hi]."""
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / max(count - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if span / step <= count:
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-9 * span:
        out.append(round(t, 10))
        t += step
    return out or [lo]


def _fmt_num(x: float) -> str:
    return format(x, ".6g")


def emit_plot(results, path, units: str = "nats") -> None:
    """Write the sweep curves as a standalone SVG file.

    results are PointResult-like records (kind, snr_db, value, std_error);
    failed cells (NaN values) are skipped.  Axis ranges cover the data
    with a 5% margin on each side.
    """
    points = [p for p in results if not math.isnan(p.value)]
    if not points:
        raise DomainError("emit_plot requires at least one plottable result")

    kinds = sorted({p.kind for p in points})
    xs = [p.snr_db for p in points]
    ys = []
    for p in points:
        ys.append(p.value)
        if p.std_error > 0:
            ys.extend([p.value - p.std_error, p.value + p.std_error])
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_pad = 0.05 * (x_hi - x_lo) or 0.5
    y_pad = 0.05 * (y_hi - y_lo) or 0.5
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    pw = _WIDTH - _ML - _MR
    ph = _HEIGHT - _MT - _MB

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return _MT + (y_hi - y) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_MT + ph}" x2="{_ML + pw}" y2="{_MT + ph}" '
        'stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + ph}" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi):
        x = sx(t)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MT + ph}" x2="{x:.2f}" '
            f'y2="{_MT + ph + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_MT + ph + 18}" font-size="11" '
            f'text-anchor="middle">{_fmt_num(t)}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        y = sy(t)
        parts.append(
            f'<line x1="{_ML - 5}" y1="{y:.2f}" x2="{_ML}" y2="{y:.2f}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{y + 4:.2f}" font-size="11" '
            f'text-anchor="end">{_fmt_num(t)}</text>'
        )
    parts.append(
        f'<text x="{_ML + pw / 2:.1f}" y="{_HEIGHT - 12}" font-size="13" '
        'text-anchor="middle">SNR (dB)</text>'
    )
    parts.append(
        f'<text x="18" y="{_MT + ph / 2:.1f}" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 18 {_MT + ph / 2:.1f})">'
        f"rate ({units}/channel use)</text>"
    )

    for idx, kind in enumerate(kinds):
        color = _PALETTE[idx % len(_PALETTE)]
        curve = sorted((p for p in points if p.kind == kind), key=lambda p: p.snr_db)
        coords = " ".join(f"{sx(p.snr_db):.2f},{sy(p.value):.2f}" for p in curve)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            'stroke-width="1.6"/>'
        )
        for p in curve:
            if p.std_error > 0.005 * abs(p.value):
                x = sx(p.snr_db)
                y1, y2 = sy(p.value - p.std_error), sy(p.value + p.std_error)
                parts.append(
                    f'<line x1="{x:.2f}" y1="{y1:.2f}" x2="{x:.2f}" '
                    f'y2="{y2:.2f}" stroke="{color}" stroke-width="1.2"/>'
                )
                for yy in (y1, y2):
                    parts.append(
                        f'<line x1="{x - 3:.2f}" y1="{yy:.2f}" x2="{x + 3:.2f}" '
                        f'y2="{yy:.2f}" stroke="{color}" stroke-width="1.2"/>'
                    )
        ly = _MT + 16 + 16 * idx
        lx = _ML + pw - 140
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.6"/>'
        )
        parts.append(
            f'<text x="{lx + 28}" y="{ly}" font-size="12">{kind}</text>'
        )
    parts.append("</svg>")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"could not write SVG to {path!r}: {exc}") from exc

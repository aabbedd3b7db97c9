"""Minimal deterministic SVG line charts plus their backing CSV series.

Hand-rolled on purpose: the emitted bytes are a pure function of the data,
which keeps run artifacts reproducible byte-for-byte.
"""

from __future__ import annotations

import csv
from pathlib import Path

__all__ = ["svg_line_chart", "write_series_csv"]

_WIDTH = 720
_HEIGHT = 360
_MARGIN = 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def write_series_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _scale(values: list[float], lo: float, hi: float, out_lo: float, out_hi: float) -> list[float]:
    span = hi - lo
    if span == 0:
        return [(out_lo + out_hi) / 2 for _ in values]
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def svg_line_chart(
    path: str | Path,
    x: list[float],
    series: dict[str, list[float]],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
) -> None:
    """Write one polyline per named series over a shared x axis."""
    if not x or not series:
        raise ValueError("chart needs at least one point and one series")
    for name, ys in series.items():
        if len(ys) != len(x):
            raise ValueError(f"series {name!r} length {len(ys)} != x length {len(x)}")

    all_y = [v for ys in series.values() for v in ys]
    x_lo, x_hi = min(x), max(x)
    y_lo, y_hi = min(all_y), max(all_y)

    left, right = _MARGIN, _WIDTH - _MARGIN
    top, bottom = _MARGIN, _HEIGHT - _MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH // 2}" y="24" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{title}</text>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
        f'<text x="{_WIDTH // 2}" y="{_HEIGHT - 10}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif">{x_label}</text>',
        f'<text x="14" y="{_HEIGHT // 2}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif" transform="rotate(-90 14 {_HEIGHT // 2})">{y_label}</text>',
        f'<text x="{left}" y="{bottom + 16}" font-size="10" font-family="sans-serif">{x_lo:g}</text>',
        f'<text x="{right}" y="{bottom + 16}" text-anchor="end" font-size="10" '
        f'font-family="sans-serif">{x_hi:g}</text>',
        f'<text x="{left - 4}" y="{bottom}" text-anchor="end" font-size="10" '
        f'font-family="sans-serif">{y_lo:g}</text>',
        f'<text x="{left - 4}" y="{top + 4}" text-anchor="end" font-size="10" '
        f'font-family="sans-serif">{y_hi:g}</text>',
    ]
    xs = _scale(list(x), x_lo, x_hi, left, right)
    for idx, (name, ys) in enumerate(series.items()):
        color = _COLORS[idx % len(_COLORS)]
        pts = _scale(list(ys), y_lo, y_hi, bottom, top)
        points = " ".join(f"{px:.2f},{py:.2f}" for px, py in zip(xs, pts))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )
        parts.append(
            f'<text x="{right - 6}" y="{top + 14 + 14 * idx}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")

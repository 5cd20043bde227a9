"""Tiny deterministic SVG writer: grouped bar charts and annotated heatmaps.

CSV is the normative experiment output; these plots are advisory. Output
bytes depend only on the input values (fixed float formatting, no
timestamps), so golden-file comparisons are stable.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

MODE_COLORS = {"Close": "#4c72b0", "Open": "#dd8452", "OpenGAN": "#55a868"}
_FALLBACK_COLORS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860")


def _svg(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def bar_chart(
    group_labels: Sequence[str],
    series: dict[str, Sequence[float]],
    title: str,
    y_label: str,
    y_max: float | None = None,
) -> str:
    """Grouped vertical bars, one group per label, one bar per series."""
    width, height = 640, 360
    left, right, top, bottom = 60, 20, 40, 50
    plot_w, plot_h = width - left - right, height - top - bottom
    if y_max is None:
        peak = max((max(v) for v in series.values() if len(v)), default=1.0)
        y_max = max(peak * 1.15, 1e-9)
    n_groups = max(len(group_labels), 1)
    n_series = max(len(series), 1)
    group_w = plot_w / n_groups
    bar_w = group_w * 0.8 / n_series

    body = [f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>']
    body.append(
        f'<text x="14" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + plot_h / 2:.1f})">{y_label}</text>'
    )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = top + plot_h * (1 - frac)
        body.append(f'<line x1="{left}" y1="{y:.1f}" x2="{width - right}" y2="{y:.1f}" '
                    f'stroke="#dddddd"/>')
        body.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">'
                    f'{_fmt(frac * y_max)}</text>')
    for s, (name, values) in enumerate(series.items()):
        color = MODE_COLORS.get(name, _FALLBACK_COLORS[s % len(_FALLBACK_COLORS)])
        for g, value in enumerate(values):
            h = plot_h * min(value / y_max, 1.0)
            x = left + g * group_w + group_w * 0.1 + s * bar_w
            y = top + plot_h - h
            body.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" '
                        f'height="{h:.1f}" fill="{color}"/>')
        lx = left + plot_w - 110
        ly = top + 14 * s
        body.append(f'<rect x="{lx}" y="{ly}" width="10" height="10" fill="{color}"/>')
        body.append(f'<text x="{lx + 14}" y="{ly + 9}">{name}</text>')
    for g, label in enumerate(group_labels):
        x = left + g * group_w + group_w / 2
        body.append(f'<text x="{x:.1f}" y="{height - bottom + 16}" '
                    f'text-anchor="middle">{label}</text>')
    return _svg(width, height, body)


def _heat_color(frac: float) -> str:
    # white -> steel blue ramp
    frac = min(max(frac, 0.0), 1.0)
    r = round(255 + (70 - 255) * frac)
    g = round(255 + (114 - 255) * frac)
    b = round(255 + (176 - 255) * frac)
    return f"rgb({r},{g},{b})"


def heatmap(
    row_labels: Sequence[str],
    col_labels: Sequence[str],
    values: Sequence[Sequence[float | None]],
    title: str,
    annotations: Sequence[Sequence[str]] | None = None,
) -> str:
    """Grid heatmap with the value printed in each cell; ``annotations`` adds
    a second line per cell (e.g. the std across subjects)."""
    cell = 64
    left, top = 110, 60
    width = left + cell * len(col_labels) + 20
    height = top + cell * len(row_labels) + 30
    flat = [v for row in values for v in row if v is not None]
    lo = min(flat, default=0.0)
    hi = max(flat, default=1.0)
    span = (hi - lo) or 1.0

    body = [f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="14">{title}</text>']
    for j, label in enumerate(col_labels):
        x = left + j * cell + cell / 2
        body.append(f'<text x="{x:.1f}" y="{top - 8}" text-anchor="middle">{label}</text>')
    for i, row_label in enumerate(row_labels):
        y = top + i * cell
        body.append(f'<text x="{left - 8}" y="{y + cell / 2 + 4:.1f}" '
                    f'text-anchor="end">{row_label}</text>')
        for j, value in enumerate(values[i]):
            x = left + j * cell
            if value is None:
                body.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                            f'fill="#f5f5f5" stroke="#cccccc"/>')
                continue
            color = _heat_color((value - lo) / span)
            body.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                        f'fill="{color}" stroke="#ffffff"/>')
            body.append(f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 1:.1f}" '
                        f'text-anchor="middle">{value:.3f}</text>')
            if annotations is not None and annotations[i][j]:
                body.append(f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 14:.1f}" '
                            f'text-anchor="middle" font-size="9" fill="#333333">'
                            f'{annotations[i][j]}</text>')
    return _svg(width, height, body)


def write_svg(path: str | Path, content: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
    return path

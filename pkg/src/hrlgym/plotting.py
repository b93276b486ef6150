"""Byte-deterministic SVG rendering of learning curves.

Hand-rolled markup (no plotting library) so identical inputs always produce
identical bytes.
"""

from __future__ import annotations

from .errors import EmptyInput

WIDTH, HEIGHT = 820, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 20, 30, 45


def moving_average(values, window: int) -> list[float]:
    """Trailing mean over the last min(i+1, window) points."""
    if window < 1:
        raise EmptyInput("window must be >= 1")
    out = []
    acc = 0.0
    for i, v in enumerate(values):
        acc += v
        if i >= window:
            acc -= values[i - window]
        out.append(acc / min(i + 1, window))
    return out


def _x(i: int, n: int) -> float:
    span = WIDTH - MARGIN_L - MARGIN_R
    return MARGIN_L + (span * i / max(1, n - 1))


def _y(v: float, lo: float, hi: float) -> float:
    span = HEIGHT - MARGIN_T - MARGIN_B
    if hi <= lo:
        return MARGIN_T + span / 2.0
    return MARGIN_T + span * (1.0 - (v - lo) / (hi - lo))


def render_curve_svg(values, window: int = 100, title: str = "normalized reward",
                     y_range: tuple[float, float] | None = None) -> str:
    """SVG learning curve: raw series in light grey, moving average on top."""
    if not values:
        raise EmptyInput("no values to plot")
    smooth = moving_average(values, window)
    lo, hi = y_range if y_range else (min(min(values), 0.0), max(max(values), 1.0))
    n = len(values)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title} (window {window})</text>',
    ]
    # axes
    x0, y0 = MARGIN_L, HEIGHT - MARGIN_B
    x1, y1 = WIDTH - MARGIN_R, MARGIN_T
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for k in range(5):
        v = lo + (hi - lo) * k / 4.0
        yy = _y(v, lo, hi)
        parts.append(f'<line x1="{x0 - 4}" y1="{yy:.2f}" x2="{x0}" y2="{yy:.2f}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8}" y="{yy + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{v:.2f}</text>')
    for k in range(5):
        i = round((n - 1) * k / 4.0)
        xx = _x(i, n)
        parts.append(f'<line x1="{xx:.2f}" y1="{y0}" x2="{xx:.2f}" y2="{y0 + 4}" stroke="black"/>')
        parts.append(f'<text x="{xx:.2f}" y="{y0 + 18}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{i}</text>')
    parts.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 8}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12">episode</text>')

    def polyline(series, color, width):
        pts = " ".join(f"{_x(i, n):.2f},{_y(v, lo, hi):.2f}" for i, v in enumerate(series))
        return f'<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{pts}"/>'

    if window > 1:
        parts.append(polyline(values, "#bbbbbb", 1))
    parts.append(polyline(smooth, "#1f6fb2", 2))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

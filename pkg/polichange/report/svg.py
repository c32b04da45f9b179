"""Static SVG line charts of monthly series with change points.

Output is plain text built from fixed-precision coordinates, so identical
inputs give identical bytes.
"""

import logging
import re
from collections.abc import Mapping, Sequence
from pathlib import Path

from polichange.ingest.schemas import CategoryMatrix, Month

logger = logging.getLogger(__name__)

WIDTH = 720
HEIGHT = 360
PAD = 48
Y_TICKS = 5
LINE_COLOR = "#4e79a7"
DIVIDER_COLOR = "#e15759"


def _esc(text: str) -> str:
    """Escape XML special characters."""
    return (
        (text or "")
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def chart_filename(label: str) -> str:
    """File-system safe name for a category chart."""
    slug = re.sub(r"[^A-Za-z0-9]+", "-", label).strip("-").lower()
    return f"{slug or 'series'}.svg"


def line_chart_svg(
    title: str,
    start_month: Month,
    values: Sequence[float],
    dividers: Sequence[int] = (),
    width: int = WIDTH,
    height: int = HEIGHT,
) -> str:
    """SVG line chart of one monthly series.

    Interior dividers are drawn as dashed vertical lines at the boundary
    between month t-1 and month t. January of each year gets an x tick.

    Args:
        title: Chart title.
        start_month: Month of values[0].
        values: Monthly values.
        dividers: Divider indices; 0 and len(values) are not drawn.
        width: Width in pixels.
        height: Height in pixels.

    Returns:
        str: SVG markup.
    """
    n = len(values)
    lo = min(values) if n else 0.0
    hi = max(values) if n else 1.0
    span_y = hi - lo if hi > lo else 1.0
    span_x = max(1, n - 1)
    inner_w = width - 2 * PAD
    inner_h = height - 2 * PAD

    def sx(t: float) -> float:
        return PAD + t / span_x * inner_w

    def sy(v: float) -> float:
        return height - PAD - (v - lo) / span_y * inner_h

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" role="img" aria-label="{_esc(title)}">',
        f"<title>{_esc(title)}</title>",
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<line class="axis" x1="{PAD}" y1="{height - PAD}" x2="{width - PAD}" y2="{height - PAD}" stroke="#333"/>',
        f'<line class="axis" x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{height - PAD}" stroke="#333"/>',
    ]

    for i in range(Y_TICKS + 1):
        v = lo + span_y * i / Y_TICKS
        y = sy(v)
        lines.append(f'<line class="tick" x1="{PAD - 4}" y1="{y:.1f}" x2="{PAD}" y2="{y:.1f}" stroke="#333"/>')
        lines.append(
            f'<text x="{PAD - 6}" y="{y + 3:.1f}" text-anchor="end" font-size="9">{v:.4g}</text>'
        )

    for t in range(n):
        month = start_month.shift(t)
        if month.month == 1 or t == 0:
            x = sx(t)
            lines.append(
                f'<line class="tick" x1="{x:.1f}" y1="{height - PAD}" x2="{x:.1f}" y2="{height - PAD + 4}" stroke="#333"/>'
            )
            lines.append(
                f'<text x="{x:.1f}" y="{height - PAD + 16}" text-anchor="middle" font-size="9">{month.iso()}</text>'
            )

    if n:
        points = " ".join(f"{sx(t):.1f},{sy(v):.1f}" for t, v in enumerate(values))
        lines.append(
            f'<polyline class="series" points="{points}" fill="none" stroke="{LINE_COLOR}" stroke-width="2"/>'
        )

    for t in dividers:
        if 0 < t < n:
            x = sx(t - 0.5)
            lines.append(
                f'<line class="divider" x1="{x:.1f}" y1="{PAD}" x2="{x:.1f}" y2="{height - PAD}" '
                f'stroke="{DIVIDER_COLOR}" stroke-width="1.5" stroke-dasharray="6,4"/>'
            )

    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_svg_chart(
    matrix: CategoryMatrix,
    dividers: Mapping[str, Sequence[int]],
    destination: Path,
) -> list[Path]:
    """Write one SVG chart per category.

    Args:
        matrix: Monthly series to plot.
        dividers: Divider indices per category label; missing labels get no
            dashed lines.
        destination: Directory receiving the charts.

    Labels that share a file name get "-2", "-3", ... suffixes in category
    order.

    Returns:
        list[Path]: Written files, in category order.

    Raises:
        OSError: If a chart cannot be written.
    """
    destination = Path(destination)
    destination.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    used: set[str] = set()
    for label in matrix.categories:
        svg = line_chart_svg(label, matrix.start_month, matrix.row(label).tolist(), dividers.get(label, ()))
        name = chart_filename(label)
        stem = name.removesuffix(".svg")
        suffix = 1
        while name in used:
            suffix += 1
            name = f"{stem}-{suffix}.svg"
        if suffix > 1:
            logger.warning("chart of %r renamed to %s to avoid overwriting another", label, name)
        used.add(name)
        path = destination / name
        path.write_text(svg, encoding="utf-8")
        written.append(path)
    logger.debug("rendered %d chart(s) into %s", len(written), destination)
    return written

"""Export helpers for interpretation artifacts.

Shape curves and pair surfaces go out as CSV (exact repr floats) or as
self-contained SVG. The SVG is written by hand so reports stay dependency
free and byte-deterministic; curves carry a training-density histogram along
the bottom edge when sample values are provided.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ConfigError
from .network import ContributionReport

SVG_W, SVG_H = 720, 440
MARGIN = 54


def density_histogram(sample_values, grid) -> np.ndarray:
    """Fraction of samples falling nearest each grid point."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size < 2:
        raise ConfigError("density needs a grid of at least 2 points")
    sample_values = np.asarray(sample_values, dtype=np.float64)
    mids = (grid[:-1] + grid[1:]) / 2.0
    edges = np.concatenate([[-np.inf], mids, [np.inf]])
    counts, _ = np.histogram(sample_values, bins=edges)
    if sample_values.size == 0:
        return np.zeros(grid.size)
    return counts / sample_values.size


def _fmt(v: float) -> str:
    return repr(float(v))


def write_shape_csv(path, values, contributions, density=None) -> None:
    values = np.asarray(values, dtype=np.float64)
    contributions = np.asarray(contributions, dtype=np.float64)
    density = np.zeros(values.size) if density is None else np.asarray(density)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("value,contribution,density\n")
        for v, c, d in zip(values, contributions, density):
            fh.write(f"{_fmt(v)},{_fmt(c)},{_fmt(d)}\n")


def write_pair_csv(path, grid_i, grid_j, matrix) -> None:
    grid_i = np.asarray(grid_i, dtype=np.float64)
    grid_j = np.asarray(grid_j, dtype=np.float64)
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("value_a,value_b,contribution\n")
        for a, u in enumerate(grid_i):
            for b, v in enumerate(grid_j):
                fh.write(f"{_fmt(u)},{_fmt(v)},{_fmt(matrix[a, b])}\n")


def write_contribution_csv(path, report: ContributionReport, feature_names) -> None:
    names = list(feature_names)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("order,features,contribution\n")
        fh.write(f"0,bias,{_fmt(report.bias)}\n")
        for i, c in enumerate(report.first_order):
            fh.write(f"1,{names[i]},{_fmt(c)}\n")
        for combo in sorted(report.interactions):
            label = "*".join(names[i] for i in combo)
            fh.write(f"{len(combo)},{label},{_fmt(report.interactions[combo])}\n")
        for order in sorted(report.aggregates):
            fh.write(f"{order},(all order-{order} subsets),{_fmt(report.aggregates[order])}\n")
        fh.write(f",total,{_fmt(report.total())}\n")
        fh.write(f",prediction,{_fmt(report.prediction)}\n")


def _xml_escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def _scale(values, lo_px, hi_px):
    values = np.asarray(values, dtype=np.float64)
    vmin, vmax = float(values.min()), float(values.max())
    if vmax == vmin:
        vmax = vmin + 1.0
    return lambda v: lo_px + (np.asarray(v) - vmin) * (hi_px - lo_px) / (vmax - vmin)


def render_shape_svg(path, values, contributions, density=None, title="shape") -> None:
    """Line plot of a shape curve with an optional density strip at the base."""
    values = np.asarray(values, dtype=np.float64)
    contributions = np.asarray(contributions, dtype=np.float64)
    if values.size != contributions.size or values.size < 2:
        raise ConfigError("shape plot needs matching grids of at least 2 points")
    x_of = _scale(values, MARGIN, SVG_W - MARGIN)
    y_of = _scale(contributions, SVG_H - MARGIN - 70, MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
        f'viewBox="0 0 {SVG_W} {SVG_H}">',
        f'<rect width="{SVG_W}" height="{SVG_H}" fill="white"/>',
        f'<text x="{SVG_W / 2:.1f}" y="28" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{_xml_escape(title)}</text>',
    ]
    if density is not None:
        density = np.asarray(density, dtype=np.float64)
        peak = density.max() if density.size and density.max() > 0 else 1.0
        base = SVG_H - MARGIN
        width = (SVG_W - 2 * MARGIN) / max(1, density.size)
        for v, d in zip(values, density):
            h = 50.0 * d / peak
            if h <= 0:
                continue
            parts.append(
                f'<rect x="{float(x_of(v)) - width / 2:.2f}" y="{base - h:.2f}" '
                f'width="{width:.2f}" height="{h:.2f}" fill="#d9534f" opacity="0.6"/>')
    points = " ".join(f"{float(x_of(v)):.2f},{float(y_of(c)):.2f}"
                      for v, c in zip(values, contributions))
    parts.append(f'<polyline points="{points}" fill="none" stroke="#1f5fbf" stroke-width="2"/>')
    axis_y = SVG_H - MARGIN
    parts.append(f'<line x1="{MARGIN}" y1="{axis_y}" x2="{SVG_W - MARGIN}" y2="{axis_y}" '
                 f'stroke="black"/>')
    parts.append(f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{axis_y}" '
                 f'stroke="black"/>')
    for v in (values.min(), values.max()):
        parts.append(f'<text x="{float(x_of(v)):.1f}" y="{axis_y + 18}" text-anchor="middle" '
                     f'font-size="11" font-family="sans-serif">{v:.3g}</text>')
    for c in (contributions.min(), contributions.max()):
        parts.append(f'<text x="{MARGIN - 6}" y="{float(y_of(c)):.1f}" text-anchor="end" '
                     f'font-size="11" font-family="sans-serif">{c:.3g}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def _diverging_color(t: float) -> str:
    """t in [-1, 1]: blue for negative, white for zero, red for positive."""
    t = float(np.clip(t, -1.0, 1.0))
    if t >= 0:
        r, g, b = 255, round(255 * (1 - t * 0.75)), round(255 * (1 - t * 0.85))
    else:
        r, g, b = round(255 * (1 + t * 0.85)), round(255 * (1 + t * 0.70)), 255
    return f"rgb({r},{g},{b})"


def render_pair_svg(path, grid_i, grid_j, matrix, title="pair interaction") -> None:
    """Heat map of an order-2 contribution surface."""
    grid_i = np.asarray(grid_i, dtype=np.float64)
    grid_j = np.asarray(grid_j, dtype=np.float64)
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape != (grid_i.size, grid_j.size):
        raise ConfigError(f"matrix shape {matrix.shape} does not match grids")
    span = float(np.abs(matrix).max()) or 1.0
    cell_w = (SVG_W - 2 * MARGIN) / grid_j.size
    cell_h = (SVG_H - 2 * MARGIN - 20) / grid_i.size
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
        f'viewBox="0 0 {SVG_W} {SVG_H}">',
        f'<rect width="{SVG_W}" height="{SVG_H}" fill="white"/>',
        f'<text x="{SVG_W / 2:.1f}" y="26" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{_xml_escape(title)}</text>',
    ]
    top = MARGIN + 10
    for a in range(grid_i.size):
        for b in range(grid_j.size):
            color = _diverging_color(matrix[a, b] / span)
            parts.append(
                f'<rect x="{MARGIN + b * cell_w:.2f}" y="{top + a * cell_h:.2f}" '
                f'width="{cell_w:.2f}" height="{cell_h:.2f}" fill="{color}"/>')
    parts.append(f'<text x="{MARGIN}" y="{SVG_H - 16}" font-size="11" '
                 f'font-family="sans-serif">columns {grid_j.min():.3g} to {grid_j.max():.3g}; '
                 f'rows {grid_i.min():.3g} to {grid_i.max():.3g}; '
                 f'range +/-{span:.3g}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")

"""
Filled-contour SVG rendering of landscape grids with trajectory overlays
"""
import logging
import math
import xml.etree.ElementTree as ET
from typing import List, Tuple

import numpy as np

from landscape.grid import LandscapeGrid
from render.colormap import ColorScale, band_index, colormap_rgb, contour_levels, effective_spacing, hex_color
from render.contour import marching_squares
from schemas import RenderStyle

logger = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"
MISSING_FILL = "#d9d9d9"
NEUTRAL_FILL = "#ffffff"
THICK_STROKE = "2.5"
THIN_STROKE = "0.6"


def _fmt(value: float) -> str:
    return f"{value:.3f}"


class _Canvas:
    """Latent window -> pixel coordinates, y pointing up"""

    def __init__(self, grid: LandscapeGrid, style: RenderStyle):
        self.x1, self.x2, self.y1, self.y2 = grid.spec.window
        self.width, self.height = style.width, style.height

    def px(self, x: float) -> float:
        return (x - self.x1) / (self.x2 - self.x1) * self.width

    def py(self, y: float) -> float:
        return self.height - (y - self.y1) / (self.y2 - self.y1) * self.height


def band_rectangles(bands: np.ndarray) -> List[Tuple[int, int, int, int, int]]:
    """
    Merge a (rows, cols) band-index array into rectangles (row0, row1, col0, col1, band),
    half-open, merging horizontal runs first and then identical runs of consecutive rows.
    Negative band indices (missing cells) are kept as their own runs.
    """
    rows, cols = bands.shape
    open_rects = {}
    done = []
    for r in range(rows):
        runs = []
        c = 0
        while c < cols:
            start = c
            while c + 1 < cols and bands[r, c + 1] == bands[r, start]:
                c += 1
            runs.append((start, c + 1, int(bands[r, start])))
            c += 1
        next_open = {}
        for run in runs:
            if run in open_rects:
                next_open[run] = open_rects.pop(run)
            else:
                next_open[run] = r
        for (c0, c1, band), r0 in open_rects.items():
            done.append((r0, r, c0, c1, band))
        open_rects = next_open
    for (c0, c1, band), r0 in open_rects.items():
        done.append((r0, rows, c0, c1, band))
    return sorted(done)


def render_svg(grid: LandscapeGrid, style: RenderStyle = RenderStyle()) -> str:
    values = grid.values
    vmin, vmax = grid.finite_range
    levels = contour_levels(vmin, vmax, style)
    spacing = effective_spacing(style, vmin) if math.isfinite(vmin) else style.spacing
    n_bands = max(levels.size - 1, 1)
    canvas = _Canvas(grid, style)

    root = ET.Element("svg", {
        "xmlns": SVG_NS,
        "width": str(style.width),
        "height": str(style.height),
        "viewBox": f"0 0 {style.width} {style.height}",
    })
    title = ET.SubElement(root, "title")
    title.text = f"{grid.method}: {grid.field_name}"

    # bands, colored by the band of each cell-center value
    centers = 0.25 * (values[:-1, :-1] + values[:-1, 1:] + values[1:, :-1] + values[1:, 1:])
    bands = np.full(centers.shape, -1, dtype=np.int64)
    for (r, c), value in np.ndenumerate(centers):
        if np.isfinite(value):
            bands[r, c] = band_index(value, levels)
    group = ET.SubElement(root, "g", {"class": "bands"})
    for r0, r1, c0, c1, band in band_rectangles(bands):
        x0, x1 = canvas.px(grid.xs[c0]), canvas.px(grid.xs[c1])
        y_top, y_bottom = canvas.py(grid.ys[r1]), canvas.py(grid.ys[r0])
        fill = MISSING_FILL if band < 0 else hex_color(colormap_rgb((band + 0.5) / n_bands, style.colormap))
        ET.SubElement(group, "rect", {
            "x": _fmt(x0), "y": _fmt(y_top), "width": _fmt(x1 - x0), "height": _fmt(y_bottom - y_top),
            "fill": fill, "data-band": str(band),
        })

    if style.isolines and levels.size:
        group = ET.SubElement(root, "g", {"class": "isolines", "fill": "none", "stroke": "#000000",
                                          "stroke-opacity": "0.35", "stroke-width": "0.5"})
        for level in levels:
            for line in marching_squares(values, float(level), grid.xs, grid.ys):
                points = " ".join(f"{_fmt(canvas.px(x))},{_fmt(canvas.py(y))}" for x, y in line)
                ET.SubElement(group, "polyline", {"points": points, "data-level": repr(float(level))})

    if levels.size:
        group = ET.SubElement(root, "g", {"class": "legend", "font-size": "8", "font-family": "sans-serif"})
        for i, level in enumerate(levels):
            label = ET.SubElement(group, "text", {
                "class": "level-label", "data-level": repr(float(level)),
                "x": _fmt(style.width - 4.0), "y": _fmt(10.0 + 9.0 * i), "text-anchor": "end",
            })
            label.text = f"{level:.3g}"

    _overlay(root, grid, style, canvas, levels, spacing)
    return ET.tostring(root, encoding="unicode")


def overlay_scale(grid: LandscapeGrid, levels: np.ndarray, spacing) -> ColorScale:
    """Recorded losses share the field's scale; error overlays get their own"""
    if grid.overlay_values is None:
        return None
    if grid.overlay_name == grid.field_name:
        return ColorScale.for_levels(levels, spacing) or ColorScale.for_values(grid.overlay_values, spacing)
    return ColorScale.for_values(grid.overlay_values, spacing)


def overlay_fill(value: float, scale: ColorScale, style: RenderStyle) -> str:
    if scale is None or not math.isfinite(value):
        return NEUTRAL_FILL
    return hex_color(colormap_rgb(scale.position(value), style.colormap))


def _overlay(root, grid: LandscapeGrid, style: RenderStyle, canvas: _Canvas, levels, spacing) -> None:
    points = grid.overlay_points
    if len(points) == 0:
        return
    segments = grid.segments or (("run", 0, len(points)),)
    scale = overlay_scale(grid, levels, spacing)
    group = ET.SubElement(root, "g", {"class": "overlay"})
    for label, start, stop in segments:
        path = " ".join(f"{_fmt(canvas.px(x))},{_fmt(canvas.py(y))}" for x, y in points[start:stop])
        ET.SubElement(group, "polyline", {"class": "path", "data-segment": str(label), "points": path,
                                          "fill": "none", "stroke": "#000000", "stroke-width": "0.8"})
    for label, start, stop in segments:
        for i in range(start, stop):
            value = math.nan if grid.overlay_values is None else float(grid.overlay_values[i])
            first = style.highlight_first and i == start
            last = style.highlight_last and i == stop - 1
            classes = ["checkpoint"] + (["first"] if first else []) + (["last"] if last else [])
            ET.SubElement(group, "circle", {
                "class": " ".join(classes),
                "cx": _fmt(canvas.px(points[i][0])),
                "cy": _fmt(canvas.py(points[i][1])),
                "r": _fmt(style.marker_size * (1.5 if first or last else 1.0)),
                "fill": overlay_fill(value, scale, style),
                "stroke": "#000000",
                "stroke-width": THICK_STROKE if first or last else THIN_STROKE,
                "data-index": str(i),
                "data-value": repr(value),
            })

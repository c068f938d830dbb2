"""
Contour extraction and SVG rendering
"""
from render.colormap import colormap_rgb, contour_levels
from render.contour import marching_squares
from render.svg import render_svg

__all__ = ["colormap_rgb", "contour_levels", "marching_squares", "render_svg"]

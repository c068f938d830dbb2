"""
Piecewise-linear colormaps and contour level selection
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from models import LevelSpacing
from schemas import RenderStyle

logger = logging.getLogger(__name__)

RGB = Tuple[int, int, int]


def colormap_rgb(t: float, anchors: Sequence[RGB]) -> RGB:
    """Color at position t in [0, 1] along equally spaced anchor colors"""
    if not math.isfinite(t):
        t = 0.0
    t = min(max(t, 0.0), 1.0)
    scaled = t * (len(anchors) - 1)
    index = min(int(math.floor(scaled)), len(anchors) - 2)
    frac = scaled - index
    lo, hi = anchors[index], anchors[index + 1]
    return tuple(int(round(a + frac * (b - a))) for a, b in zip(lo, hi))


def hex_color(rgb: RGB) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def effective_spacing(style: RenderStyle, vmin: float) -> LevelSpacing:
    if style.spacing is LevelSpacing.LOG and not vmin > 0:
        logger.warning("log-spaced levels need a positive field; falling back to linear")
        return LevelSpacing.LINEAR
    return style.spacing


def contour_levels(vmin: float, vmax: float, style: RenderStyle) -> np.ndarray:
    """Strictly increasing iso-levels, empty for a constant (or empty) field"""
    if isinstance(style.levels, list):
        return np.array(style.levels, dtype=np.float64)
    if not (math.isfinite(vmin) and math.isfinite(vmax)) or vmax <= vmin:
        return np.zeros(0)
    if effective_spacing(style, vmin) is LevelSpacing.LOG:
        return np.logspace(math.log10(vmin), math.log10(vmax), style.levels)
    return np.linspace(vmin, vmax, style.levels)


class ColorScale:
    """Maps values onto [0, 1] over the level range, in log or linear space"""

    def __init__(self, lo: float, hi: float, log: bool):
        self.lo, self.hi, self.log = lo, hi, log

    @classmethod
    def for_levels(cls, levels: np.ndarray, spacing: LevelSpacing) -> Optional["ColorScale"]:
        if levels.size < 2:
            return None
        log = spacing is LevelSpacing.LOG and levels[0] > 0
        return cls(float(levels[0]), float(levels[-1]), log)

    @classmethod
    def for_values(cls, values: np.ndarray, spacing: LevelSpacing) -> Optional["ColorScale"]:
        finite = values[np.isfinite(values)]
        if finite.size == 0 or finite.max() <= finite.min():
            return None
        log = spacing is LevelSpacing.LOG and finite.min() > 0
        return cls(float(finite.min()), float(finite.max()), log)

    def position(self, value: float) -> float:
        if self.log:
            if value <= 0:
                return 0.0
            return (math.log10(value) - math.log10(self.lo)) / (math.log10(self.hi) - math.log10(self.lo))
        return (value - self.lo) / (self.hi - self.lo)


def band_index(value: float, levels: np.ndarray) -> int:
    """Band of a value among len(levels) - 1 bands; out-of-range values clamp to the end bands"""
    if levels.size < 2:
        return 0
    return int(np.clip(np.searchsorted(levels, value, side="right") - 1, 0, levels.size - 2))

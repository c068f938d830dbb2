"""
JSON and CSV export of landscape grids

Floats are written as their shortest round-trip decimal; NaN sentinels become
null (JSON) or "nan" (CSV).
"""
import io
import json
import math
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from landscape.grid import LandscapeGrid
from schemas import GridSpec


def _num(value) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def _nums(array) -> list:
    if array is None:
        return None
    return [_num(v) for v in np.asarray(array).reshape(-1)]


def grid_to_dict(grid: LandscapeGrid) -> dict:
    n = grid.spec.resolution
    return {
        "spec": grid.spec.model_dump(mode="json"),
        "field_name": grid.field_name,
        "method": grid.method,
        "xs": _nums(grid.xs),
        "ys": _nums(grid.ys),
        "field": [_nums(grid.values[iy]) for iy in range(n)],
        "overlay": {
            "points": [_nums(p) for p in grid.overlay_points],
            "values": _nums(grid.overlay_values),
            "name": grid.overlay_name,
        },
        "segments": [list(s) for s in grid.segments],
        "failed_points": grid.failed_points,
        "provenance": grid.provenance,
    }


def grid_to_json(grid: LandscapeGrid) -> str:
    return json.dumps(grid_to_dict(grid), sort_keys=True, indent=1, allow_nan=False)


def _floats(values) -> np.ndarray:
    return np.array([math.nan if v is None else v for v in values], dtype=np.float64)


def grid_from_dict(data: dict) -> LandscapeGrid:
    overlay = data["overlay"]
    points = np.array([_floats(p) for p in overlay["points"]], dtype=np.float64).reshape(-1, 2)
    return LandscapeGrid(
        spec=GridSpec.model_validate(data["spec"]),
        xs=_floats(data["xs"]),
        ys=_floats(data["ys"]),
        values=np.array([_floats(row) for row in data["field"]]),
        field_name=data["field_name"],
        method=data["method"],
        overlay_points=points,
        overlay_values=None if overlay["values"] is None else _floats(overlay["values"]),
        overlay_name=overlay["name"],
        segments=tuple(tuple(s) for s in data["segments"]),
        failed_points=data["failed_points"],
        provenance=data["provenance"],
    )


def grid_to_csv(grid: LandscapeGrid) -> str:
    """One (x, y, value) row per mesh point, row-major over (iy, ix)"""
    gx, gy = np.meshgrid(grid.xs, grid.ys)
    frame = pd.DataFrame({
        "x": [repr(float(v)) for v in gx.reshape(-1)],
        "y": [repr(float(v)) for v in gy.reshape(-1)],
        "value": [repr(float(v)) for v in grid.values.reshape(-1)],
    })
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def write_grid(path: Union[str, Path], grid: LandscapeGrid, fmt: str = "json") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = grid_to_csv(grid) if fmt == "csv" else grid_to_json(grid)
    path.write_text(text, encoding="utf-8")
    return path


def load_grid(path: Union[str, Path]) -> LandscapeGrid:
    return grid_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

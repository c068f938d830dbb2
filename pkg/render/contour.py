"""
Marching squares over a field sampled as values[iy, ix] at (xs[ix], ys[iy])

Cell corners: c0 = (ix, iy), c1 = (ix+1, iy), c2 = (ix+1, iy+1), c3 = (ix, iy+1).
Cell edges: e0 = c0-c1, e1 = c1-c2, e2 = c2-c3, e3 = c3-c0.
Bit k of the case index is set when corner k lies above the level.
"""
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

import numpy as np

EdgeKey = Tuple[str, int, int]

CASES: Dict[int, List[Tuple[int, int]]] = {
    1: [(3, 0)],
    2: [(0, 1)],
    3: [(3, 1)],
    4: [(1, 2)],
    6: [(0, 2)],
    7: [(3, 2)],
    8: [(2, 3)],
    9: [(0, 2)],
    11: [(1, 2)],
    12: [(1, 3)],
    13: [(0, 1)],
    14: [(3, 0)],
}

# saddles, keyed by (case, center above level)
SADDLES: Dict[Tuple[int, bool], List[Tuple[int, int]]] = {
    (5, True): [(0, 1), (2, 3)],
    (5, False): [(3, 0), (1, 2)],
    (10, True): [(3, 0), (1, 2)],
    (10, False): [(0, 1), (2, 3)],
}


def _edge_key(edge: int, ix: int, iy: int) -> EdgeKey:
    # shared edges get one key so neighbouring cells produce the same point
    return (
        ("h", ix, iy),
        ("v", ix + 1, iy),
        ("h", ix, iy + 1),
        ("v", ix, iy),
    )[edge]


def _edge_point(key: EdgeKey, values: np.ndarray, xs: np.ndarray, ys: np.ndarray, level: float) -> Tuple[float, float]:
    kind, ix, iy = key
    if kind == "h":
        v0, v1 = values[iy, ix], values[iy, ix + 1]
        t = min(max((level - v0) / (v1 - v0), 0.0), 1.0)
        return float(xs[ix] + t * (xs[ix + 1] - xs[ix])), float(ys[iy])
    v0, v1 = values[iy, ix], values[iy + 1, ix]
    t = min(max((level - v0) / (v1 - v0), 0.0), 1.0)
    return float(xs[ix]), float(ys[iy] + t * (ys[iy + 1] - ys[iy]))


def cell_segments(values: np.ndarray, level: float) -> List[Tuple[EdgeKey, EdgeKey]]:
    """Iso-segments of every cell as pairs of edge keys; cells touching NaN are skipped"""
    ny, nx = values.shape
    segments = []
    for iy in range(ny - 1):
        for ix in range(nx - 1):
            corners = (values[iy, ix], values[iy, ix + 1], values[iy + 1, ix + 1], values[iy + 1, ix])
            if any(np.isnan(c) for c in corners):
                continue
            case = sum(1 << k for k, c in enumerate(corners) if c > level)
            if case in (5, 10):
                pairs = SADDLES[(case, float(np.mean(corners)) > level)]
            else:
                pairs = CASES.get(case, [])
            for a, b in pairs:
                segments.append((_edge_key(a, ix, iy), _edge_key(b, ix, iy)))
    return segments


def _join(segments: List[Tuple[EdgeKey, EdgeKey]]) -> List[List[EdgeKey]]:
    neighbours: Dict[EdgeKey, List[EdgeKey]] = defaultdict(list)
    for a, b in segments:
        neighbours[a].append(b)
        neighbours[b].append(a)
    visited = set()

    def walk(start: EdgeKey) -> List[EdgeKey]:
        chain = [start]
        previous: Optional[EdgeKey] = None
        current = start
        while True:
            step = next((n for n in neighbours[current] if n != previous and (current, n) not in visited), None)
            if step is None:
                return chain
            visited.add((current, step))
            visited.add((step, current))
            chain.append(step)
            if step == start:
                return chain
            previous, current = current, step

    chains = []
    # open chains start at their endpoints, closed loops anywhere
    for node in [n for n in neighbours if len(neighbours[n]) == 1] + list(neighbours):
        if any((node, n) not in visited for n in neighbours[node]):
            chains.append(walk(node))
    return chains


def marching_squares(values: np.ndarray, level: float, xs: Optional[np.ndarray] = None,
                     ys: Optional[np.ndarray] = None) -> List[np.ndarray]:
    """
    Iso-lines of `values` at `level` as polylines of (x, y) points.
    A closed loop repeats its first point at the end.
    """
    values = np.asarray(values, dtype=np.float64)
    ny, nx = values.shape
    xs = np.arange(nx, dtype=np.float64) if xs is None else np.asarray(xs, dtype=np.float64)
    ys = np.arange(ny, dtype=np.float64) if ys is None else np.asarray(ys, dtype=np.float64)
    points: Dict[EdgeKey, Tuple[float, float]] = {}
    polylines = []
    for chain in _join(cell_segments(values, level)):
        for key in chain:
            if key not in points:
                points[key] = _edge_point(key, values, xs, ys, level)
        polylines.append(np.array([points[key] for key in chain]))
    return polylines

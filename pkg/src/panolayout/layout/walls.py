"""
walls.py

Manhattan wall fitting on the aligned floor-boundary points.

Overview:
---------
1. Points are ordered by azimuth around the camera and each gets a local tangent from its
   azimuth neighbours, snapped to one of the two Manhattan directions.
2. Greedy line growing: among the points of one direction, the offset with the most
   inliers wins; its largest azimuth-contiguous run becomes a wall line and its inliers
   are removed. Repeat while runs of at least `min_points` remain.
3. ICP-style refinement: each point is assigned to the nearest line of its direction whose
   azimuth window covers it, offsets are refit as inlier means, until the assignment
   stops changing.
4. `fit_walls` walks the lines in azimuth order, merges near-identical parallel
   neighbours, inserts a perpendicular connector between the remaining parallel ones and
   intersects consecutive lines into polygon corners. A chain that does not close into a
   simple polygon around the camera loses its weakest line and is closed again.

`reject_range_outliers` is meant to run first: range spikes left by mislabelled
boundary pixels otherwise seed short spurious lines.
Offsets and thresholds are in the units of the input cloud. With `range_scale` set, the
inlier threshold grows as tau * (1 + (rho / range_scale)^2) to follow the back-projection
error of distant boundary pixels.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from shapely.geometry import Point, Polygon

from panolayout.exceptions import DegenerateLayoutError, SceneValidationError
from panolayout.models import REFERENCE_WALL_HEIGHT, Wall

logger = logging.getLogger(__name__)

ALONG_X = 0.0
ALONG_Y = 90.0


@dataclass(frozen=True)
class WallLine:
    """
    An infinite Manhattan line plus the azimuth window of the points that support it.

    Attributes:
        orientation (float): 0 for a line y = offset, 90 for x = offset.
        offset (float): Constant coordinate of the line.
        az_start (float): Azimuth of the first supporting point, degrees.
        az_end (float): Azimuth of the last supporting point (counter-clockwise from `az_start`).
        first_point (np.ndarray): Supporting point at `az_start`.
        last_point (np.ndarray): Supporting point at `az_end`.
        count (int): Number of supporting points.
    """

    orientation: float
    offset: float
    az_start: float
    az_end: float
    first_point: np.ndarray
    last_point: np.ndarray
    count: int

    @property
    def span(self) -> float:
        return (self.az_end - self.az_start) % 360.0

    @property
    def az_center(self) -> float:
        return (self.az_start + self.span / 2.0) % 360.0


def _coord(xy: np.ndarray, orientation: float) -> np.ndarray:
    return xy[:, 1] if orientation == ALONG_X else xy[:, 0]


def _in_window(az: np.ndarray, start: float, end: float, margin: float = 0.0) -> np.ndarray:
    lo = start - margin
    width = (end - start) % 360.0 + 2.0 * margin
    return (az - lo) % 360.0 <= width


def classify_tangents(xy: np.ndarray, half_window: int = 3) -> np.ndarray:
    """Manhattan direction (0 or 90) of the local tangent of azimuth-ordered points."""

    n = len(xy)
    if n < 2:
        return np.full(n, ALONG_X)
    k = min(half_window, (n - 1) // 2) if n > 2 else 1
    idx = (np.arange(n)[:, None] + np.arange(-k, k + 1)[None, :]) % n
    nb = xy[idx]
    centered = nb - nb.mean(axis=1, keepdims=True)
    var_x = np.sum(centered[:, :, 0] ** 2, axis=1)
    var_y = np.sum(centered[:, :, 1] ** 2, axis=1)
    return np.where(var_x >= var_y, ALONG_X, ALONG_Y)


def _split_runs(positions: np.ndarray, az: np.ndarray, max_gap: float) -> list[np.ndarray]:
    """Split azimuth-sorted positions at gaps wider than `max_gap`, joining across 0/360."""

    if len(positions) == 0:
        return []
    a = az[positions]
    breaks = np.nonzero(np.diff(a) > max_gap)[0]
    runs = np.split(positions, breaks + 1)
    if len(runs) > 1 and (a[0] + 360.0 - a[-1]) <= max_gap:
        runs[0] = np.concatenate([runs[-1], runs[0]])
        runs.pop()
    return runs


def _line_from_members(orientation: float, offset: float, members: np.ndarray, xy: np.ndarray,
                       az: np.ndarray, reference: float) -> WallLine:
    rel = (az[members] - reference) % 360.0
    first, last = members[np.argmin(rel)], members[np.argmax(rel)]
    return WallLine(orientation=orientation, offset=float(offset), az_start=float(az[first]),
                    az_end=float(az[last]), first_point=xy[first].copy(), last_point=xy[last].copy(),
                    count=int(len(members)))


def _largest_run(cand: np.ndarray, coord: np.ndarray, thr: np.ndarray, az: np.ndarray,
                 max_gap: float) -> Optional[np.ndarray]:
    c, t = coord[cand], thr[cand]
    inliers = np.abs(c[:, None] - c[None, :]) < t[None, :]
    counts = inliers.sum(axis=1)
    best: Optional[np.ndarray] = None
    for s in np.argsort(-counts, kind="stable"):
        if best is not None and counts[s] <= len(best):
            break
        for run in _split_runs(cand[inliers[s]], az, max_gap):
            if best is None or len(run) > len(best):
                best = run
    return best


def reject_range_outliers(points: np.ndarray, window: int = 7, tolerance: float = 0.15) -> np.ndarray:
    """
    Keep-mask of floor points whose range agrees with their azimuth neighbours.

    Points are ordered by azimuth; a point is dropped when its distance to the camera differs
    from the median distance of the `window` neighbours on either side by more than
    `tolerance` times that median. Isolated spikes go, wall runs and corners stay.

    Returns:
        np.ndarray: (n,) bool, in the order of `points`.
    """

    xy = np.asarray(points, dtype=float)[:, :2]
    n = len(xy)
    keep = np.ones(n, dtype=bool)
    if n < 3 or window < 1:
        return keep
    k = min(window, (n - 1) // 2)
    order = np.argsort(np.arctan2(xy[:, 1], xy[:, 0]), kind="stable")
    rho = np.hypot(xy[order, 0], xy[order, 1])
    offsets = np.concatenate([np.arange(-k, 0), np.arange(1, k + 1)])
    neighbours = rho[(np.arange(n)[:, None] + offsets[None, :]) % n]
    med = np.median(neighbours, axis=1)
    keep[order] = np.abs(rho - med) <= tolerance * med
    return keep


def fit_wall_lines(points: np.ndarray, threshold: float = 0.03, min_points: int = 8, max_iterations: int = 50,
                   range_scale: Optional[float] = None, max_gap: float = 5.0,
                   window_margin: float = 5.0) -> list[WallLine]:
    """
    Greedy Manhattan line extraction followed by ICP-style refinement.

    Args:
        points (np.ndarray): (n, 2) or (n, 3) floor points around the camera.
        threshold (float): Inlier distance tau.
        min_points (int): Smallest supporting run that still forms a line.
        max_iterations (int): ICP iteration cap.
        range_scale (float, optional): Distance at which the threshold has doubled.
        max_gap (float): Azimuth gap, degrees, that splits a run.
        window_margin (float): Azimuth slack, degrees, when assigning points to a line.

    Returns:
        list[WallLine]: Lines sorted by the azimuth of their center, possibly open.
    """

    xy = np.asarray(points, dtype=float)[:, :2]
    if len(xy) < 2:
        raise DegenerateLayoutError(f"wall fitting needs at least 2 points, got {len(xy)}")
    az_all = np.mod(np.rad2deg(np.arctan2(xy[:, 1], xy[:, 0])), 360.0)
    order = np.argsort(az_all, kind="stable")
    xy, az = xy[order], az_all[order]
    rho = np.hypot(xy[:, 0], xy[:, 1])
    thr = threshold * (1.0 + (rho / range_scale) ** 2) if range_scale else np.full(len(xy), threshold)
    cls = classify_tangents(xy)
    coords = {o: _coord(xy, o) for o in (ALONG_X, ALONG_Y)}

    remaining = np.ones(len(xy), dtype=bool)
    lines: list[WallLine] = []
    while True:
        best_run, best_orient = None, None
        for orient in (ALONG_X, ALONG_Y):
            cand = np.nonzero(remaining & (cls == orient))[0]
            if len(cand) < min_points:
                continue
            run = _largest_run(cand, coords[orient], thr, az, max_gap)
            if run is not None and (best_run is None or len(run) > len(best_run)):
                best_run, best_orient = run, orient
        if best_run is None or len(best_run) < min_points:
            break
        offset = float(np.mean(coords[best_orient][best_run]))
        line = _line_from_members(best_orient, offset, best_run, xy, az, az[best_run[0]])
        absorbed = remaining & (np.abs(coords[best_orient] - offset) < thr) & _in_window(az, line.az_start, line.az_end)
        absorbed[best_run] = True
        remaining &= ~absorbed
        lines.append(line)
        logger.debug("greedy line %d: orientation %.0f offset %.4f, %d points", len(lines), best_orient, offset,
                     len(best_run))

    if not lines:
        return []

    previous = None
    for it in range(max_iterations):
        assign = np.full(len(xy), -1)
        best_d = np.full(len(xy), np.inf)
        for k, line in enumerate(lines):
            d = np.abs(coords[line.orientation] - line.offset)
            ok = (cls == line.orientation) & _in_window(az, line.az_start, line.az_end, window_margin)
            ok &= (d < 3.0 * thr) & (d < best_d)
            assign[ok] = k
            best_d[ok] = d[ok]
        if previous is not None and np.array_equal(assign, previous):
            logger.debug("wall ICP converged after %d iterations", it)
            break
        refit = []
        for k, line in enumerate(lines):
            members = np.nonzero(assign == k)[0]
            if len(members) == 0:
                refit.append(line)
                continue
            offset = float(np.mean(coords[line.orientation][members]))
            refit.append(_line_from_members(line.orientation, offset, members, xy, az, line.az_start - window_margin))
        lines = refit
        previous = assign

    return sorted(lines, key=lambda ln: ln.az_center)


def _intersect(a: WallLine, b: WallLine) -> np.ndarray:
    if a.orientation == b.orientation:
        raise DegenerateLayoutError("parallel wall lines do not intersect")
    if a.orientation == ALONG_X:
        return np.array([b.offset, a.offset])
    return np.array([a.offset, b.offset])


def _merge_parallel(lines: list[WallLine], tolerance: float) -> list[WallLine]:
    lines = list(lines)
    merged = True
    while merged and len(lines) > 1:
        merged = False
        for i in range(len(lines)):
            j = (i + 1) % len(lines)
            a, b = lines[i], lines[j]
            if i == j or a.orientation != b.orientation or abs(a.offset - b.offset) >= tolerance:
                continue
            offset = (a.offset * a.count + b.offset * b.count) / (a.count + b.count)
            joined = replace(a, offset=offset, az_end=b.az_end, last_point=b.last_point, count=a.count + b.count)
            lines[i] = joined
            del lines[j]
            merged = True
            break
    return lines


def _connector(a: WallLine, b: WallLine) -> WallLine:
    """Perpendicular line halfway between the end of `a` and the start of `b`."""

    orientation = ALONG_Y if a.orientation == ALONG_X else ALONG_X
    dim = 0 if a.orientation == ALONG_X else 1
    offset = (a.last_point[dim] + b.first_point[dim]) / 2.0
    return WallLine(orientation=orientation, offset=float(offset), az_start=a.az_end, az_end=b.az_start,
                    first_point=a.last_point, last_point=b.first_point, count=0)


def _close_polygon(lines: list[WallLine], height: float) -> list[Wall]:
    chain: list[WallLine] = []
    for i, a in enumerate(lines):
        b = lines[(i + 1) % len(lines)]
        chain.append(a)
        if a.orientation == b.orientation:
            chain.append(_connector(a, b))

    m = len(chain)
    if m < 4:
        raise DegenerateLayoutError(f"only {m} wall lines after closing, need at least 4")
    corners = [_intersect(chain[i], chain[(i + 1) % m]) for i in range(m)]
    try:
        walls = [Wall.from_segment(corners[i - 1], corners[i], height) for i in range(m)]
    except SceneValidationError as e:
        raise DegenerateLayoutError(f"wall lines collapse: {e}") from e

    poly = Polygon([w.start for w in walls])
    if not poly.is_valid or poly.area <= 0.0:
        raise DegenerateLayoutError("fitted wall polygon is self-intersecting")
    if not poly.exterior.is_ccw:
        raise DegenerateLayoutError("fitted wall polygon is not counter-clockwise around the camera")
    if not poly.contains(Point(0.0, 0.0)):
        raise DegenerateLayoutError("fitted wall polygon does not contain the camera")
    return walls


def walls_from_lines(lines: list[WallLine], height: float = REFERENCE_WALL_HEIGHT,
                     merge_tolerance: float = 0.1) -> list[Wall]:
    """
    Close azimuth-ordered lines into a counter-clockwise Manhattan polygon.

    When the lines do not close into a simple polygon around the camera, the line with the
    fewest supporting points is dropped and the rest are closed again, until two lines remain.

    Raises:
        DegenerateLayoutError: If no subset of the lines forms a simple polygon around the camera.
    """

    lines = _merge_parallel(sorted(lines, key=lambda ln: ln.az_center), merge_tolerance)
    while True:
        if len(lines) < 2:
            raise DegenerateLayoutError(f"{len(lines)} wall line(s) cannot close a polygon")
        try:
            return _close_polygon(lines, height)
        except DegenerateLayoutError as e:
            if len(lines) <= 2:
                raise
            weakest = min(range(len(lines)), key=lambda i: lines[i].count)
            logger.debug("dropping wall line at %.1f deg (%d points): %s", lines[weakest].az_center,
                         lines[weakest].count, e)
            lines = _merge_parallel(lines[:weakest] + lines[weakest + 1:], merge_tolerance)


def fit_walls(points: np.ndarray, height: float = REFERENCE_WALL_HEIGHT, threshold: float = 0.03,
              min_points: int = 8, max_iterations: int = 50, range_scale: Optional[float] = None,
              merge_tolerance: Optional[float] = None) -> list[Wall]:
    """
    Closed Manhattan wall polygon from aligned floor points.

    Raises:
        DegenerateLayoutError: If the points do not support a closed polygon (e.g. all collinear).
    """

    lines = fit_wall_lines(points, threshold, min_points, max_iterations, range_scale)
    logger.debug("fitted %d wall lines", len(lines))
    tolerance = merge_tolerance if merge_tolerance is not None else 3.0 * threshold
    return walls_from_lines(lines, height, tolerance)

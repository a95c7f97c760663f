"""
Planar helpers on the floor plane: point-to-segment distances, closest wall, footprint
overlap areas (shapely polygon clipping) and ray / polygon intersections.
"""

import numpy as np
from shapely.geometry import Polygon

from panolayout.models import SceneObject, Wall


def point_segment_distances(point, segments: np.ndarray) -> np.ndarray:
    """Distance from `point` to each of `segments` (shape (n, 2, 2))."""

    p = np.asarray(point, dtype=float)
    a, b = segments[:, 0, :], segments[:, 1, :]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.hypot(*(p - closest).T)


def wall_segments(walls) -> np.ndarray:
    return np.array([[w.start, w.end] for w in walls])


def closest_wall(obj: SceneObject, walls: list[Wall]) -> int:
    """
    Index of the wall segment nearest to the object's position; ties go to the lowest index.

    Raises:
        ValueError: If `walls` is empty.
    """

    if not walls:
        raise ValueError("closest_wall needs at least one wall")
    d = point_segment_distances(obj.position, wall_segments(walls))
    # argmin returns the first minimum
    return int(np.argmin(d))


def rectangle_polygon(center, width: float, depth: float, yaw_deg: float) -> Polygon:
    """Oriented rectangle with `depth` along the yaw direction and `width` across it."""

    t = np.deg2rad(yaw_deg)
    n = np.array([np.cos(t), np.sin(t)])
    s = np.array([-n[1], n[0]])
    c = np.asarray(center, dtype=float)
    hd, hw = depth / 2.0, width / 2.0
    return Polygon([c + n * hd + s * hw, c - n * hd + s * hw, c - n * hd - s * hw, c + n * hd - s * hw])


def footprint_intersection_area(a: Polygon, b: Polygon) -> float:
    """Exact area of the intersection of two convex footprints."""

    if not a.intersects(b):
        return 0.0
    return float(a.intersection(b).area)


def ray_polygon_distance(polygon: Polygon, bearing_deg: float) -> float:
    """
    Distance from the origin along `bearing_deg` to the first crossing of the polygon boundary.

    Returns:
        float: Hit distance, `inf` when the ray misses.
    """

    coords = np.asarray(polygon.exterior.coords)
    segments = np.stack([coords[:-1], coords[1:]], axis=1)
    return float(ray_segments_distance(np.deg2rad(bearing_deg), segments))


def ray_segments_distance(angles, segments: np.ndarray) -> np.ndarray:
    """
    Vectorized 2D ray cast from the origin.

    Args:
        angles: Ray angles in radians, any shape.
        segments (np.ndarray): (n, 2, 2) segments.

    Returns:
        np.ndarray: Per ray, the nearest positive hit distance (`inf` if none), shape of `angles`.
    """

    return ray_segments_hit(angles, segments)[0]


def ray_segments_hit(angles, segments: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Like `ray_segments_distance` but also returns the index of the hit segment (-1 on a miss)."""

    angles = np.asarray(angles, dtype=float)
    dx, dy = np.cos(angles)[..., None], np.sin(angles)[..., None]
    a, b = segments[:, 0, :], segments[:, 1, :]
    ex, ey = (b - a)[:, 0], (b - a)[:, 1]
    ax, ay = a[:, 0], a[:, 1]
    denom = dx * (-ey) - dy * (-ex)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ax * (-ey) - ay * (-ex)) / denom
        u = (dx * ay - dy * ax) / denom
    valid = (np.abs(denom) > 1e-12) & (t > 1e-9) & (u >= -1e-12) & (u <= 1.0 + 1e-12)
    t = np.where(valid, t, np.inf)
    idx = np.argmin(t, axis=-1)
    dist = np.take_along_axis(t, idx[..., None], axis=-1)[..., 0]
    return dist, np.where(np.isfinite(dist), idx, -1)

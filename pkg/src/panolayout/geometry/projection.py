"""
projection.py

Spherical panorama geometry: equirectangular <-> perspective mappings and floor
back-projection.

Conventions:
------------
- Pano column coordinate x maps linearly to azimuth x / W * 360 (x = 0 is azimuth 0, the
  left edge); row coordinate y maps to elevation 90 - y / H * 180 (top row = +90).
- Pixel (row i, column j) has its center at (j + 0.5, i + 0.5).
- A perspective view looks along (cos yaw, sin yaw, 0); its image x axis grows with
  azimuth like the panorama's, its y axis points down.

Vectorized variants (suffix `s`) take and return numpy arrays and are what the renderer and
the layout initializer use; the scalar functions wrap them with domain types.
"""

import logging

import numpy as np

from panolayout.exceptions import ConfigurationError, NoFloorIntersectionError, OutOfFrustumError
from panolayout.models import CameraModel, PerspectiveView, SphericalDirection

logger = logging.getLogger(__name__)

_FRUSTUM_EPS = 1e-12


def pano_to_views(pano_width: int, pano_height: int, k: int = 6, fov: float = 90.0, overlap: float = 30.0,
                  view_width: int | None = None, view_height: int | None = None) -> list[PerspectiveView]:
    """
    Decompose a panorama into a ring of `k` perspective views.

    Args:
        pano_width (int): Panorama width in pixels.
        pano_height (int): Panorama height in pixels.
        k (int): Number of views.
        fov (float): Horizontal field of view of each view, degrees.
        overlap (float): Overlap between ring neighbours, degrees.
        view_width (int, optional): Defaults to the pano's pixel density over `fov`.
        view_height (int, optional): Defaults to twice the width so close floor stays in view.

    Returns:
        list[PerspectiveView]: Views centered at 0, fov-overlap, 2(fov-overlap), ...

    Raises:
        ConfigurationError: If k * (fov - overlap) != 360 or the fov is out of range.
    """

    if not (0.0 < fov < 180.0):
        raise ConfigurationError(f"view fov must lie in (0, 180), got {fov}")
    step = fov - overlap
    if k < 1 or not np.isclose(k * step, 360.0, atol=1e-9):
        raise ConfigurationError(f"{k} views of {fov} deg with {overlap} deg overlap cover {k * step} deg, not 360")
    if view_width is None:
        view_width = max(4, int(round(pano_width * fov / 360.0)))
    if view_height is None:
        view_height = 2 * view_width
    return [PerspectiveView(yaw_center=i * step, fov=fov, width=view_width, height=view_height) for i in range(k)]


def pano_pixels_to_directions(xs, ys, pano_width: int, pano_height: int) -> tuple[np.ndarray, np.ndarray]:
    """Continuous pano coordinates -> (azimuth, elevation) in degrees."""

    az = np.mod(np.asarray(xs, dtype=float) / pano_width * 360.0, 360.0)
    el = 90.0 - np.asarray(ys, dtype=float) / pano_height * 180.0
    return az, el


def directions_to_pano_pixels(az, el, pano_width: int, pano_height: int) -> tuple[np.ndarray, np.ndarray]:
    """(azimuth, elevation) in degrees -> continuous pano coordinates; azimuth is taken modulo 360."""

    xs = np.mod(np.asarray(az, dtype=float), 360.0) / 360.0 * pano_width
    ys = (90.0 - np.asarray(el, dtype=float)) / 180.0 * pano_height
    return xs, ys


def direction_to_pano_pixel(direction: SphericalDirection, pano_width: int, pano_height: int) -> tuple[float, float]:
    x, y = directions_to_pano_pixels(direction.azimuth, direction.elevation, pano_width, pano_height)
    return float(x), float(y)


def pano_pixel_to_direction(x: float, y: float, pano_width: int, pano_height: int) -> SphericalDirection:
    az, el = pano_pixels_to_directions(x, y, pano_width, pano_height)
    return SphericalDirection.of(float(az), float(el))


def _view_axes(view: PerspectiveView) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    psi = np.deg2rad(view.yaw_center)
    forward = np.array([np.cos(psi), np.sin(psi), 0.0])
    right = np.array([-np.sin(psi), np.cos(psi), 0.0])
    up = np.array([0.0, 0.0, 1.0])
    return forward, right, up


def view_pixels_to_vectors(view: PerspectiveView, xs, ys) -> np.ndarray:
    """Continuous view coordinates -> unit ray vectors, shape (..., 3)."""

    forward, right, up = _view_axes(view)
    u = np.asarray(xs, dtype=float) - view.width / 2.0
    v = view.height / 2.0 - np.asarray(ys, dtype=float)
    rays = view.focal * forward + u[..., None] * right + v[..., None] * up
    return rays / np.linalg.norm(rays, axis=-1, keepdims=True)


def vectors_to_directions(vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vectors = np.asarray(vectors, dtype=float)
    az = np.mod(np.rad2deg(np.arctan2(vectors[..., 1], vectors[..., 0])), 360.0)
    el = np.rad2deg(np.arctan2(vectors[..., 2], np.hypot(vectors[..., 0], vectors[..., 1])))
    return az, el


def directions_to_vectors(az, el) -> np.ndarray:
    a, e = np.deg2rad(np.asarray(az, dtype=float)), np.deg2rad(np.asarray(el, dtype=float))
    return np.stack([np.cos(e) * np.cos(a), np.cos(e) * np.sin(a), np.sin(e)], axis=-1)


def view_pixels_to_directions(view: PerspectiveView, xs, ys) -> tuple[np.ndarray, np.ndarray]:
    return vectors_to_directions(view_pixels_to_vectors(view, xs, ys))


def view_pixel_to_direction(view: PerspectiveView, x: float, y: float) -> SphericalDirection:
    """
    Direction of the ray through continuous view coordinate (x, y).

    The center pixel of a view (x = width/2, y = height/2) maps to the view's yaw at
    elevation 0.
    """

    az, el = view_pixels_to_directions(view, np.asarray(x), np.asarray(y))
    return SphericalDirection.of(float(az), float(el))


def directions_to_view_pixels(view: PerspectiveView, az, el) -> tuple[np.ndarray, np.ndarray]:
    """
    Inverse of `view_pixels_to_directions`.

    Raises:
        OutOfFrustumError: If any direction lies on or behind the view plane.
    """

    forward, right, up = _view_axes(view)
    vec = directions_to_vectors(az, el)
    depth = vec @ forward
    if np.any(depth <= _FRUSTUM_EPS):
        raise OutOfFrustumError(f"direction behind the image plane of the view at yaw {view.yaw_center}")
    xs = view.width / 2.0 + view.focal * (vec @ right) / depth
    ys = view.height / 2.0 - view.focal * (vec @ up) / depth
    return xs, ys


def direction_to_view_pixel(view: PerspectiveView, direction: SphericalDirection) -> tuple[float, float]:
    xs, ys = directions_to_view_pixels(view, direction.azimuth, direction.elevation)
    return float(xs), float(ys)


def resample_pano_to_view(labels: np.ndarray, view: PerspectiveView) -> np.ndarray:
    """
    Nearest-neighbour resampling of a label panorama into a perspective view.

    Returns:
        np.ndarray: (view.height, view.width) array of the pano's dtype.
    """

    pano_h, pano_w = labels.shape
    jj, ii = np.meshgrid(np.arange(view.width) + 0.5, np.arange(view.height) + 0.5)
    az, el = view_pixels_to_directions(view, jj, ii)
    px, py = directions_to_pano_pixels(az, el, pano_w, pano_h)
    cols = np.mod(np.floor(px).astype(int), pano_w)
    rows = np.clip(np.floor(py).astype(int), 0, pano_h - 1)
    return labels[rows, cols]


def view_pixels_to_pano_pixels(view: PerspectiveView, xs, ys, pano_width: int, pano_height: int) -> tuple[np.ndarray, np.ndarray]:
    """Integer pano (column, row) containing each continuous view coordinate."""

    az, el = view_pixels_to_directions(view, xs, ys)
    px, py = directions_to_pano_pixels(az, el, pano_width, pano_height)
    return np.mod(np.floor(px).astype(int), pano_width), np.clip(np.floor(py).astype(int), 0, pano_height - 1)


def backproject_floor(az, el, height: float) -> np.ndarray:
    """
    Vectorized floor back-projection of rays from a camera `height` above z=0.

    Raises:
        NoFloorIntersectionError: If any elevation is >= 0.
    """

    az, el = np.asarray(az, dtype=float), np.asarray(el, dtype=float)
    if np.any(el >= 0.0):
        raise NoFloorIntersectionError("ray at or above the horizon never meets the floor")
    dist = height / np.tan(np.deg2rad(-el))
    a = np.deg2rad(az)
    return np.stack([dist * np.cos(a), dist * np.sin(a), np.zeros_like(dist)], axis=-1)


def backproject_floor_pixel(direction: SphericalDirection, camera: CameraModel) -> np.ndarray:
    """
    Intersect the camera ray along `direction` with the floor plane.

    Returns:
        np.ndarray: (x, y, 0) with horizontal distance height / tan(-elevation).

    Raises:
        NoFloorIntersectionError: If the elevation is >= 0.
    """

    if direction.elevation >= 0.0:
        raise NoFloorIntersectionError(f"elevation {direction.elevation} deg does not meet the floor")
    if direction.elevation <= -90.0:
        return np.zeros(3)
    return backproject_floor(direction.azimuth, direction.elevation, camera.height)

"""
panorama.py

Ray-cast equirectangular renders of a scene hypothesis: the orientation label map of the
walls, floor and ceiling, and binary silhouettes of the objects.

Walls are vertical, so every pixel column shares one 2D ray: the column is cast once
against the wall segments and the rows only decide between floor, wall and ceiling.
Objects are ray-cast only inside the angular footprint of their bounding sphere.
"""

import logging

import numpy as np

from panolayout.geometry.planar import ray_segments_hit
from panolayout.models import (
    LABEL_HORIZONTAL,
    LABEL_MASKED,
    ModelSpec,
    OrientationPanorama,
    SceneObject,
    SceneParameters,
)
from panolayout.rendering.primitives import (
    get_model,
    intersect_primitives,
    model_bounding_sphere,
    from_model_frame,
    to_model_frame,
)

logger = logging.getLogger(__name__)


def pixel_angles(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Azimuth per column and elevation per row at pixel centers, degrees."""

    az = (np.arange(width) + 0.5) / width * 360.0
    el = 90.0 - (np.arange(height) + 0.5) / height * 180.0
    return az, el


def cast_surfaces(scene: SceneParameters, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Cast every pixel against walls, floor and ceiling.

    Returns:
        tuple: (labels (H, W) uint8, horizontal distance to the first surface hit (H, W)).
    """

    az, el = pixel_angles(width, height)
    segments = scene.segments()
    t_wall, idx = ray_segments_hit(np.deg2rad(az), segments)
    wall_labels = np.array([w.label for w in scene.walls], dtype=np.uint8)
    wall_heights = np.array([w.height for w in scene.walls])
    h = scene.camera.height

    tan_el = np.tan(np.deg2rad(el))[:, None]
    hit = idx >= 0
    col_label = np.where(hit, wall_labels[np.maximum(idx, 0)], LABEL_MASKED)
    col_height = np.where(hit, wall_heights[np.maximum(idx, 0)], np.inf)

    with np.errstate(invalid="ignore", divide="ignore"):
        z = h + t_wall[None, :] * tan_el
        floor_dist = np.where(tan_el < 0, h / -tan_el, np.inf)
        ceil_dist = np.where(tan_el > 0, (col_height[None, :] - h) / tan_el, np.inf)

    labels = np.broadcast_to(col_label, (height, width)).astype(np.uint8)
    horizontal = (z < 0.0) | (z > col_height[None, :])
    labels = np.where(horizontal & hit[None, :], LABEL_HORIZONTAL, labels).astype(np.uint8)
    dist = np.minimum(np.broadcast_to(t_wall, (height, width)), np.minimum(floor_dist, ceil_dist))
    return labels, dist


def render_orientation_pano(scene: SceneParameters, width: int = 512, height: int = 256) -> OrientationPanorama:
    """
    Orientation labels of the walls, floor and ceiling; objects are not drawn.

    Label 1 marks walls whose normal is along x, 2 walls whose normal is along y, 3 floor
    and ceiling. A column whose ray leaves the polygon without a hit stays 0.
    """

    labels, _ = cast_surfaces(scene, width, height)
    return OrientationPanorama(labels=labels)


def _object_candidates(obj: SceneObject, spec: ModelSpec, camera_height: float,
                       az: np.ndarray, el: np.ndarray) -> np.ndarray:
    center_m, radius = model_bounding_sphere(spec)
    center = from_model_frame(center_m[None, :], obj.position, obj.orientation)[0]
    rel = center - np.array([0.0, 0.0, camera_height])
    dist = float(np.linalg.norm(rel))
    if dist <= radius:
        return np.ones((len(el), len(az)), dtype=bool)
    half_angle = np.arcsin(radius / dist)
    # one pixel of angular slack
    slack = np.deg2rad(max(360.0 / len(az), 180.0 / len(el)))
    a, e = np.deg2rad(az)[None, :], np.deg2rad(el)[:, None]
    dirs_dot = (np.cos(e) * np.cos(a) * rel[0] + np.cos(e) * np.sin(a) * rel[1] + np.sin(e) * rel[2]) / dist
    return dirs_dot >= np.cos(min(np.pi, half_angle + slack))


def object_silhouette(obj: SceneObject, scene: SceneParameters, library: dict[str, ModelSpec],
                      width: int, height: int, surface_dist: np.ndarray | None = None) -> np.ndarray:
    """
    Pixels where the camera ray meets the object before any wall, floor or ceiling.

    Raises:
        UnknownModelError: If the object's model is not in the library.
    """

    spec = get_model(library, obj.model_id)
    if surface_dist is None:
        _, surface_dist = cast_surfaces(scene, width, height)
    az, el = pixel_angles(width, height)
    cand = _object_candidates(obj, spec, scene.camera.height, az, el)
    mask = np.zeros((height, width), dtype=bool)
    rows, cols = np.nonzero(cand)
    if len(rows) == 0:
        return mask
    a, e = np.deg2rad(az[cols]), np.deg2rad(el[rows])
    dirs = np.stack([np.cos(e) * np.cos(a), np.cos(e) * np.sin(a), np.sin(e)], axis=1)
    origins = np.tile([0.0, 0.0, scene.camera.height], (len(rows), 1))
    o_m = to_model_frame(origins, obj.position, obj.orientation)
    d_m = to_model_frame(dirs, (0.0, 0.0), obj.orientation)
    t, _, _ = intersect_primitives(spec, o_m, d_m)
    t_horizontal = t * np.cos(e)
    mask[rows, cols] = np.isfinite(t) & (t_horizontal < surface_dist[rows, cols])
    return mask


def render_object_masks(scene: SceneParameters, library: dict[str, ModelSpec],
                        width: int = 512, height: int = 256) -> np.ndarray:
    """Union of all object silhouettes, (H, W) bool; all clear for a scene without objects."""

    mask = np.zeros((height, width), dtype=bool)
    if not scene.objects:
        return mask
    _, surface_dist = cast_surfaces(scene, width, height)
    for obj in scene.objects:
        mask |= object_silhouette(obj, scene, library, width, height, surface_dist)
    return mask


def add_label_noise(pano: OrientationPanorama, p: float, rng: np.random.Generator) -> OrientationPanorama:
    """
    Flip each labelled pixel independently with probability `p` to one of the two other
    classes in {1, 2, 3}, chosen uniformly. Masked pixels are left alone.
    """

    labels = pano.labels.astype(np.int16)
    flip = (rng.random(labels.shape) < p) & (labels != LABEL_MASKED)
    shift = rng.integers(1, 3, size=labels.shape)
    flipped = (labels - 1 + shift) % 3 + 1
    return OrientationPanorama(labels=np.where(flip, flipped, labels).astype(np.uint8))


def label_fractions(pano: OrientationPanorama) -> dict[int, float]:
    """Share of pixels per label code."""

    counts = np.bincount(pano.labels.ravel(), minlength=4)
    return {code: float(c) / pano.labels.size for code, c in enumerate(counts)}

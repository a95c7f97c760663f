"""
objects.py

Detections on the panorama: the oracle detector that stands in for a learned one, the
rasterized detection mask, and the initial object placement along each detection ray.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from shapely.geometry import Polygon

from panolayout.config import NoiseConfig
from panolayout.exceptions import ConfigurationError, DegenerateLayoutError
from panolayout.geometry.planar import ray_polygon_distance
from panolayout.models import Detection, ModelSpec, ObjectClass, SceneObject, SceneParameters, Wall
from panolayout.rendering.panorama import cast_surfaces, object_silhouette
from panolayout.rendering.primitives import models_of_class
from panolayout.utils import make_rng, wrap_degrees

logger = logging.getLogger(__name__)


def silhouette_box(mask: np.ndarray) -> Optional[tuple[float, float, float, float]]:
    """
    Tight box (x0, y0, x1, y1) in pixel edges around a silhouette, None if empty.

    A silhouette crossing the seam gets a box whose `x1` exceeds the width.
    """

    h, w = mask.shape
    cols = np.nonzero(mask.any(axis=0))[0]
    rows = np.nonzero(mask.any(axis=1))[0]
    if len(cols) == 0:
        return None
    # start right after the widest empty stretch of columns, cyclically
    gaps = np.diff(np.concatenate([cols, [cols[0] + w]]))
    k = int(np.argmax(gaps))
    start = int(cols[(k + 1) % len(cols)])
    span = w - (int(gaps[k]) - 1)
    return float(start), float(rows[0]), float(start + span), float(rows[-1] + 1)


def detect_objects(scene: SceneParameters, models: dict[str, ModelSpec], noise: NoiseConfig, seed: int,
                   width: int = 512, height: int = 256) -> list[tuple[int, Detection]]:
    """
    Oracle detections with their source object index.

    Every object with a non-empty silhouette is detected unless dropped with probability
    `noise.miss_rate`; each box edge is jittered by Normal(0, jitter_px^2). Random draws
    happen in object order (miss draw, then four edge offsets) so results are a function of `seed`.
    """

    rng = make_rng(seed)
    _, surface_dist = cast_surfaces(scene, width, height)
    out = []
    for j, obj in enumerate(scene.objects):
        miss = rng.random() < noise.miss_rate
        jitter = rng.normal(0.0, noise.jitter_px, size=4) if noise.jitter_px > 0 else np.zeros(4)
        box = silhouette_box(object_silhouette(obj, scene, models, width, height, surface_dist))
        if box is None or miss:
            continue
        x0, y0, x1, y1 = np.asarray(box) + jitter
        if x1 - x0 < 1.0:
            x1 = x0 + 1.0
        y0, y1 = float(np.clip(y0, 0.0, height - 1.0)), float(np.clip(y1, 1.0, height))
        if y1 - y0 < 1.0:
            y1 = min(y0 + 1.0, float(height))
        shift = np.floor(x0 / width) * width
        x0, x1 = x0 - shift, x1 - shift
        x1 = min(x1, x0 + width)
        out.append((j, Detection.from_box(obj.category, float(x0), y0, float(x1), y1, width)))
    logger.debug("detected %d of %d objects", len(out), len(scene.objects))
    return out


def simulate_detections(scene: SceneParameters, models: dict[str, ModelSpec], noise: NoiseConfig, seed: int,
                        width: int = 512, height: int = 256) -> list[Detection]:
    """Oracle detections in object order."""
    return [d for _, d in detect_objects(scene, models, noise, seed, width, height)]


def rasterize_detection_mask(detections: Sequence[Detection], width: int, height: int) -> np.ndarray:
    """Union of detection boxes as an (H, W) bool mask; columns wrap modulo the width."""

    mask = np.zeros((height, width), dtype=bool)
    for d in detections:
        x0, y0, x1, y1 = d.box
        cols = np.mod(np.arange(int(np.floor(x0)), int(np.ceil(x1))), width)
        r0, r1 = max(0, int(np.floor(y0))), min(height, int(np.ceil(y1)))
        mask[r0:r1, cols] = True
    return mask


def initialise_objects(detections: Sequence[Detection], walls: Sequence[Wall], models: dict[str, ModelSpec],
                       fraction: float = 0.6, model_ids: Optional[Sequence[Optional[str]]] = None,
                       orientations: Optional[Sequence[Optional[float]]] = None) -> list[SceneObject]:
    """
    One object per detection, on the detection ray at `fraction` of the distance to the walls.

    Args:
        detections: Detections in order; object j explains detection j.
        walls: Initial wall polygon.
        models: Model library (footprints, default model per class).
        fraction (float): Share of the ray's hit distance.
        model_ids: Retrieved model per detection; None picks the first model of the class.
        orientations: Facing yaw per detection; None faces the camera.

    Raises:
        DegenerateLayoutError: If a detection ray leaves the polygon without a hit.
    """

    polygon = Polygon([w.start for w in walls])
    objects = []
    for j, det in enumerate(detections):
        hit = ray_polygon_distance(polygon, det.bearing)
        if not np.isfinite(hit):
            raise DegenerateLayoutError(f"detection {j} at bearing {det.bearing:.1f} misses the wall polygon")
        b = np.deg2rad(det.bearing)
        position = (fraction * hit * np.cos(b), fraction * hit * np.sin(b))

        model_id = model_ids[j] if model_ids is not None and model_ids[j] is not None else None
        if model_id is None:
            model_id = _default_model(models, det.category)
        theta = orientations[j] if orientations is not None and orientations[j] is not None else None
        if theta is None:
            theta = wrap_degrees(det.bearing + 180.0)
        objects.append(SceneObject(category=det.category, position=(float(position[0]), float(position[1])),
                                   orientation=theta, footprint=models[model_id].footprint, model_id=model_id))
    return objects


def _default_model(models: dict[str, ModelSpec], category: ObjectClass) -> str:
    candidates = models_of_class(models, category)
    if not candidates:
        raise ConfigurationError(f"model library has no {category.value} model")
    return sorted(m.model_id for m in candidates)[0]

"""
primitives.py

Model library access and vectorized ray / primitive intersection.

Library models are assemblies of axis-aligned boxes, vertical cylinders and spheres in a
model frame that faces +x and stands on z=0. Both renderers (panorama object masks and
grayscale model views) transform their rays into that frame and call
`intersect_primitives`, so the two always agree on what an object looks like.
"""

import json
import logging
from functools import lru_cache
from pathlib import Path

import numpy as np

from panolayout.exceptions import DatasetIOError, UnknownModelError
from panolayout.models import BoxPrimitive, CylinderPrimitive, ModelSpec, ObjectClass, SpherePrimitive

logger = logging.getLogger(__name__)

_EPS = 1e-12
_RIM_SAMPLES = 32


@lru_cache(maxsize=8)
def load_model_library(path: Path) -> dict[str, ModelSpec]:
    """
    Load and validate the model library JSON.

    Raises:
        DatasetIOError: If the file cannot be read.
    """

    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise DatasetIOError(path, f"cannot read model library: {e}") from e
    models = {}
    for entry in raw["models"]:
        spec = ModelSpec.model_validate(entry)
        models[spec.model_id] = spec
    logger.debug("loaded %d library models from %s", len(models), path)
    return models


def get_model(library: dict[str, ModelSpec], model_id: str) -> ModelSpec:
    try:
        return library[model_id]
    except KeyError:
        raise UnknownModelError(f"unknown model_id {model_id!r}") from None


def models_of_class(library: dict[str, ModelSpec], category: ObjectClass) -> list[ModelSpec]:
    """Library models of one class, sorted by id."""
    return sorted((m for m in library.values() if m.category == category), key=lambda m: m.model_id)


def model_surface_points(spec: ModelSpec) -> np.ndarray:
    """Points whose hull bounds the model: box corners, cylinder rims, sphere extremal points."""

    pts = []
    for p in spec.primitives:
        if isinstance(p, BoxPrimitive):
            c, h = np.asarray(p.center), np.asarray(p.size) / 2.0
            signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)])
            pts.append(c + signs * h)
        elif isinstance(p, CylinderPrimitive):
            ang = np.arange(_RIM_SAMPLES) * (2 * np.pi / _RIM_SAMPLES)
            ring = np.stack([p.center[0] + p.radius * np.cos(ang), p.center[1] + p.radius * np.sin(ang)], axis=1)
            for z in (p.z0, p.z1):
                pts.append(np.column_stack([ring, np.full(len(ring), z)]))
        else:
            c = np.asarray(p.center)
            pts.append(c + p.radius * np.vstack([np.eye(3), -np.eye(3)]))
    return np.vstack(pts)


def model_bounding_sphere(spec: ModelSpec) -> tuple[np.ndarray, float]:
    """(center, radius) of a sphere enclosing every primitive, in the model frame."""

    lo, hi = [], []
    for p in spec.primitives:
        if isinstance(p, BoxPrimitive):
            c, h = np.asarray(p.center), np.asarray(p.size) / 2.0
            lo.append(c - h)
            hi.append(c + h)
        elif isinstance(p, CylinderPrimitive):
            lo.append([p.center[0] - p.radius, p.center[1] - p.radius, p.z0])
            hi.append([p.center[0] + p.radius, p.center[1] + p.radius, p.z1])
        else:
            c = np.asarray(p.center)
            lo.append(c - p.radius)
            hi.append(c + p.radius)
    lo, hi = np.min(lo, axis=0), np.max(hi, axis=0)
    return (lo + hi) / 2.0, float(np.linalg.norm(hi - lo) / 2.0)


def _intersect_box(p: BoxPrimitive, o: np.ndarray, d: np.ndarray):
    lo = np.asarray(p.center) - np.asarray(p.size) / 2.0
    hi = np.asarray(p.center) + np.asarray(p.size) / 2.0
    parallel = np.abs(d) < _EPS
    safe = np.where(parallel, 1.0, d)
    t1, t2 = (lo - o) / safe, (hi - o) / safe
    inside = (o >= lo) & (o <= hi)
    tmin = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
    tmax = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
    axis = np.argmax(tmin, axis=1)
    t_near = tmin.max(axis=1)
    t_far = tmax.min(axis=1)
    hit = (t_near <= t_far) & (t_near > 0.0)
    normal = np.zeros_like(d)
    rows = np.arange(len(d))
    normal[rows, axis] = -np.sign(d[rows, axis])
    return np.where(hit, t_near, np.inf), normal


def _intersect_cylinder(p: CylinderPrimitive, o: np.ndarray, d: np.ndarray):
    c = np.array([p.center[0], p.center[1]])
    oc = o[:, :2] - c
    a = np.einsum("ij,ij->i", d[:, :2], d[:, :2])
    b = 2.0 * np.einsum("ij,ij->i", oc, d[:, :2])
    cc = np.einsum("ij,ij->i", oc, oc) - p.radius ** 2
    disc = b * b - 4 * a * cc
    ok = (a > _EPS) & (disc >= 0.0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t_side = np.where(ok, (-b - sq) / (2 * np.where(a > _EPS, a, 1.0)), np.inf)
    z_side = o[:, 2] + t_side * d[:, 2]
    t_side = np.where((t_side > 0.0) & (z_side >= p.z0) & (z_side <= p.z1), t_side, np.inf)

    best = t_side
    normal = np.zeros_like(d)
    side_pts = o[:, :2] + np.where(np.isfinite(t_side), t_side, 0.0)[:, None] * d[:, :2]
    normal[:, :2] = (side_pts - c) / p.radius

    dz = np.where(np.abs(d[:, 2]) < _EPS, _EPS, d[:, 2])
    for z, nz in ((p.z1, 1.0), (p.z0, -1.0)):
        t_cap = (z - o[:, 2]) / dz
        xy = o[:, :2] + t_cap[:, None] * d[:, :2] - c
        on_cap = (t_cap > 0.0) & (np.einsum("ij,ij->i", xy, xy) <= p.radius ** 2) & (np.abs(d[:, 2]) >= _EPS)
        closer = on_cap & (t_cap < best)
        best = np.where(closer, t_cap, best)
        normal[closer] = (0.0, 0.0, nz)
    return best, normal


def _intersect_sphere(p: SpherePrimitive, o: np.ndarray, d: np.ndarray):
    c = np.asarray(p.center)
    oc = o - c
    b = np.einsum("ij,ij->i", oc, d)
    cc = np.einsum("ij,ij->i", oc, oc) - p.radius ** 2
    disc = b * b - cc
    ok = disc >= 0.0
    t = np.where(ok, -b - np.sqrt(np.where(ok, disc, 0.0)), np.inf)
    t = np.where(t > 0.0, t, np.inf)
    pts = o + np.where(np.isfinite(t), t, 0.0)[:, None] * d
    return t, (pts - c) / p.radius


def intersect_primitives(spec: ModelSpec, origins: np.ndarray, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    First hit of each ray with the model, in the model frame.

    Args:
        spec (ModelSpec): Model to intersect.
        origins (np.ndarray): (n, 3) ray origins.
        dirs (np.ndarray): (n, 3) unit ray directions.

    Returns:
        tuple: hit distance (n,) with `inf` on a miss, surface normal (n, 3), albedo (n,).
    """

    n = len(origins)
    t_best = np.full(n, np.inf)
    normal = np.zeros((n, 3))
    albedo = np.zeros(n)
    for p in spec.primitives:
        if isinstance(p, BoxPrimitive):
            t, nrm = _intersect_box(p, origins, dirs)
        elif isinstance(p, CylinderPrimitive):
            t, nrm = _intersect_cylinder(p, origins, dirs)
        else:
            t, nrm = _intersect_sphere(p, origins, dirs)
        closer = t < t_best
        t_best = np.where(closer, t, t_best)
        normal[closer] = nrm[closer]
        albedo[closer] = p.albedo
    return t_best, normal, albedo


def to_model_frame(points: np.ndarray, position, yaw_deg: float) -> np.ndarray:
    """Express world points (or directions, with position (0, 0)) in a model frame placed at `position` with `yaw_deg`."""

    t = np.deg2rad(yaw_deg)
    c, s = np.cos(t), np.sin(t)
    rel = np.asarray(points, dtype=float).copy()
    rel[..., 0] -= position[0]
    rel[..., 1] -= position[1]
    x = c * rel[..., 0] + s * rel[..., 1]
    y = -s * rel[..., 0] + c * rel[..., 1]
    return np.stack([x, y, rel[..., 2]], axis=-1)


def from_model_frame(points: np.ndarray, position, yaw_deg: float) -> np.ndarray:
    t = np.deg2rad(yaw_deg)
    c, s = np.cos(t), np.sin(t)
    p = np.asarray(points, dtype=float)
    x = c * p[..., 0] - s * p[..., 1] + position[0]
    y = s * p[..., 0] + c * p[..., 1] + position[1]
    return np.stack([x, y, p[..., 2]], axis=-1)

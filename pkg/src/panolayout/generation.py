"""
generation.py

Synthetic ground-truth rooms from templates.

A room is built in three stages, all drawing from one generator seeded by the room seed:

1. Wall height H ~ Normal(mean, std^2), clipped to the plausible interval; the scene's
   global scale is H / 2.5.
2. Every template wall longer than `min_offset_length` is pushed along its normal by an
   offset ~ Uniform[-wall_offset, wall_offset]. Moving a wall along its normal only
   stretches its two perpendicular neighbours, so the polygon stays closed and Manhattan.
   An offset that would leave a wall too short, break the polygon, or leave the camera
   without a view of every corner is reverted.
3. Objects are drawn per template slot, placed uniformly inside the room, then improved by
   hill-climbing on the context prior until no two footprints overlap.
"""

import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np
from shapely.geometry import LineString, Point, Polygon

from panolayout.config import DatasetConfig, PosteriorConfig
from panolayout.exceptions import ConfigurationError, DatasetIOError
from panolayout.geometry.planar import closest_wall
from panolayout.models import (
    REFERENCE_WALL_HEIGHT,
    CameraModel,
    ModelSpec,
    RoomTemplate,
    SceneObject,
    SceneParameters,
    Wall,
)
from panolayout.posterior.context import context_cost_oo, context_cost_ow
from panolayout.rendering.primitives import models_of_class
from panolayout.utils import make_rng, wrap_degrees

logger = logging.getLogger(__name__)

WALL_HEIGHT_RANGE = (2.0, 3.5)
MIN_WALL_LENGTH = 0.3
CAMERA_CLEARANCE = 0.5
PLACEMENT_ATTEMPTS = 500
OVERLAP_STEPS = 200
STEP_SIGMA = 0.2
TURN_SIGMA = 20.0
SNAP_PROBABILITY = 0.5


@lru_cache(maxsize=8)
def load_room_templates(path: Path) -> dict[str, RoomTemplate]:
    """
    Load and validate the room template JSON.

    Raises:
        DatasetIOError: If the file cannot be read.
    """

    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise DatasetIOError(path, f"cannot read room templates: {e}") from e
    templates = {}
    for entry in raw["templates"]:
        template = RoomTemplate.model_validate(entry)
        templates[template.name] = template
    logger.debug("loaded %d room templates from %s", len(templates), path)
    return templates


def get_template(templates: dict[str, RoomTemplate], name: str) -> RoomTemplate:
    try:
        return templates[name]
    except KeyError:
        raise ConfigurationError(f"unknown room template {name!r}; known: {sorted(templates)}") from None


def _edge_lengths(vertices: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.roll(vertices, -1, axis=0) - vertices, axis=1)


def _edge_normals(vertices: np.ndarray) -> np.ndarray:
    d = np.roll(vertices, -1, axis=0) - vertices
    d = d / np.linalg.norm(d, axis=1, keepdims=True)
    return np.stack([-d[:, 1], d[:, 0]], axis=1)


def _acceptable(vertices: np.ndarray) -> bool:
    if np.any(_edge_lengths(vertices) < MIN_WALL_LENGTH):
        return False
    poly = Polygon(vertices)
    if not poly.is_valid or not poly.exterior.is_ccw:
        return False
    origin = Point(0.0, 0.0)
    if not poly.contains(origin) or poly.exterior.distance(origin) < CAMERA_CLEARANCE:
        return False
    # every corner visible from the camera
    cover = poly.buffer(1e-9)
    return all(cover.covers(LineString([(0.0, 0.0), tuple(v)])) for v in vertices)


def perturb_walls(template: RoomTemplate, rng: np.random.Generator, config: DatasetConfig) -> np.ndarray:
    """
    Template corners after the per-wall offsets, shape (n, 2).

    One offset is drawn for every wall, applied or not, so the draws stay aligned with the
    template's wall order. A wall is offset only while it is longer than `min_offset_length`
    both in the template and in the geometry offset so far. Moving a wall changes the lengths
    of its two neighbours; the move is reverted when it would leave an offset neighbour at or
    below that length. Short walls keep their line but may still change length.
    """

    vertices = np.asarray(template.vertices, dtype=float)
    template_lengths = _edge_lengths(vertices)
    normals = _edge_normals(vertices)
    n = len(vertices)
    offset = np.zeros(n, dtype=bool)
    for i in range(n):
        delta = rng.uniform(-config.wall_offset, config.wall_offset)
        if min(template_lengths[i], _edge_lengths(vertices)[i]) <= config.min_offset_length:
            continue
        moved = vertices.copy()
        moved[i] += delta * normals[i]
        moved[(i + 1) % n] += delta * normals[i]
        lengths = _edge_lengths(moved)
        neighbours = [(i - 1) % n, (i + 1) % n]
        if _acceptable(moved) and all(lengths[j] > config.min_offset_length for j in neighbours if offset[j]):
            vertices = moved
            offset[i] = delta != 0.0
        else:
            logger.debug("template %s: offset %.3f of wall %d reverted", template.name, delta, i)
    return vertices


def _placement_ok(obj: SceneObject, room: Polygon) -> bool:
    footprint = obj.footprint_polygon()
    if not room.contains(footprint):
        return False
    if np.hypot(*obj.position) < CAMERA_CLEARANCE:
        return False
    return not footprint.intersects(Point(0.0, 0.0))


def _random_placement(rng: np.random.Generator, room: Polygon, spec: ModelSpec) -> SceneObject | None:
    x0, y0, x1, y1 = room.bounds
    for _ in range(PLACEMENT_ATTEMPTS):
        position = (rng.uniform(x0, x1), rng.uniform(y0, y1))
        yaw = rng.uniform(0.0, 360.0)
        obj = SceneObject(category=spec.category, position=position, orientation=yaw,
                          footprint=spec.footprint, model_id=spec.model_id)
        if _placement_ok(obj, room):
            return obj
    return None


def place_objects(template: RoomTemplate, walls: Sequence[Wall], rng: np.random.Generator,
                  models: dict[str, ModelSpec]) -> list[SceneObject]:
    """Uniform placement: per slot a count, a model of the class and a pose inside the room."""

    room = Polygon([w.start for w in walls])
    objects = []
    for slot in template.slots:
        count = int(rng.integers(slot.min_count, slot.max_count + 1))
        candidates = models_of_class(models, slot.category)
        if count and not candidates:
            raise ConfigurationError(f"model library has no {slot.category.value} model")
        for _ in range(count):
            spec = candidates[int(rng.integers(len(candidates)))]
            obj = _random_placement(rng, room, spec)
            if obj is None:
                logger.warning("template %s: no room left for a %s", template.name, spec.category.value)
                continue
            objects.append(obj)
    return objects


def _energy(scene: SceneParameters, posterior: PosteriorConfig) -> tuple[float, float]:
    e_oo = context_cost_oo(scene)
    e_ow = context_cost_ow(scene, posterior.nu_n, posterior.alignment, posterior.scale_free_distance)
    return e_ow + posterior.mu * e_oo, e_oo


def _step(obj: SceneObject, walls: Sequence[Wall], rng: np.random.Generator) -> SceneObject:
    position = np.asarray(obj.position) + rng.normal(0.0, STEP_SIGMA, size=2)
    moved = obj.moved(position=position)
    if rng.random() < SNAP_PROBABILITY:
        normal = walls[closest_wall(moved, list(walls))].normal
        yaw = float(np.rad2deg(np.arctan2(normal[1], normal[0])))
    else:
        yaw = obj.orientation + rng.normal(0.0, TURN_SIGMA)
    return moved.moved(orientation=wrap_degrees(yaw))


def refine_placement(scene: SceneParameters, rng: np.random.Generator, steps: int,
                     posterior: PosteriorConfig) -> SceneParameters:
    """
    Hill-climbing on E_ow + mu * E_oo over single-object moves.

    `steps` moves are always tried; up to `OVERLAP_STEPS` more follow while footprints
    still overlap. Objects that still overlap afterwards are dropped, later ones first.
    """

    if not scene.objects:
        return scene
    room = scene.polygon()
    objects = list(scene.objects)
    energy, overlap = _energy(scene, posterior)
    for step in range(steps + OVERLAP_STEPS):
        if step >= steps and overlap <= 0.0:
            break
        j = int(rng.integers(len(objects)))
        candidate = _step(objects[j], scene.walls, rng)
        if not _placement_ok(candidate, room):
            continue
        trial = objects.copy()
        trial[j] = candidate
        e, o = _energy(scene.with_objects(trial), posterior)
        if e < energy:
            objects, energy, overlap = trial, e, o

    kept: list[SceneObject] = []
    for obj in objects:
        fp = obj.footprint_polygon()
        if any(fp.intersection(k.footprint_polygon()).area > 0.0 for k in kept):
            logger.debug("dropping overlapping %s at %s", obj.category.value, obj.position)
            continue
        kept.append(obj)
    return scene.with_objects(kept)


def face_into_room(scene: SceneParameters) -> SceneParameters:
    """Turn objects that face their closest wall around so they face into the room."""

    objects = []
    for obj in scene.objects:
        normal = scene.walls[closest_wall(obj, list(scene.walls))].normal
        if obj.category.has_orientation and float(np.dot(obj.normal, normal)) < 0.0:
            obj = obj.moved(orientation=obj.orientation + 180.0)
        objects.append(obj)
    return scene.with_objects(objects)


def generate_room(template: RoomTemplate, seed: int, models: dict[str, ModelSpec],
                  config: DatasetConfig = DatasetConfig(), posterior: PosteriorConfig = PosteriorConfig(),
                  camera_height: float = 1.70) -> SceneParameters:
    """
    A ground-truth room, deterministic in `(template, seed, config)`.

    Args:
        template (RoomTemplate): Base polygon and object slots.
        seed (int): Room seed.
        models (dict[str, ModelSpec]): Model library.
        config (DatasetConfig): Height distribution, wall offsets and hill-climbing steps.
        posterior (PosteriorConfig): Context prior weights used for placement refinement.
        camera_height (float): Camera height in meters.

    Returns:
        SceneParameters: Metric walls of height H, scale H / 2.5, objects inside the room.

    Raises:
        SceneValidationError: If the finished room breaks a scene invariant.
    """

    rng = make_rng(seed)
    height = float(np.clip(rng.normal(config.wall_height_mean, config.wall_height_std), *WALL_HEIGHT_RANGE))
    vertices = perturb_walls(template, rng, config)
    n = len(vertices)
    walls = tuple(Wall.from_segment(vertices[i], vertices[(i + 1) % n], height) for i in range(n))
    scene = SceneParameters(camera=CameraModel(height=camera_height), scale=height / REFERENCE_WALL_HEIGHT,
                            walls=walls)
    scene = scene.with_objects(place_objects(template, walls, rng, models))
    scene = face_into_room(refine_placement(scene, rng, config.hill_climb_steps, posterior))
    logger.debug("room %s/%d: H=%.3f m, %d walls, %d objects", template.name, seed, height, n, len(scene.objects))
    return scene.check_invariants()

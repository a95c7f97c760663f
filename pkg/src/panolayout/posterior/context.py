"""
context.py

Context prior of a room hypothesis: objects like to stand close to, and aligned with,
their nearest wall (E_ow) and dislike overlapping each other (E_oo).

    pi = exp(-(E_ow + mu * E_oo))
"""

from itertools import combinations
from typing import Literal, Sequence

import numpy as np

from panolayout.exceptions import ConfigurationError
from panolayout.geometry.planar import footprint_intersection_area, point_segment_distances, wall_segments
from panolayout.models import SceneObject, SceneParameters, Wall

Alignment = Literal["rewarding", "as_written"]


def object_wall_cost(obj: SceneObject, walls: Sequence[Wall], nu_n: float = 10.0,
                     alignment: Alignment = "rewarding", unit: float = 1.0) -> float:
    """Distance to the closest wall segment, in multiples of `unit`, plus nu_n times the normal alignment term."""

    d = point_segment_distances(obj.position, wall_segments(walls))
    i = int(np.argmin(d))
    dot = abs(float(np.dot(obj.normal, walls[i].normal)))
    term = dot if alignment == "as_written" else 1.0 - dot
    return float(d[i]) / unit + nu_n * term


def context_cost_ow(scene: SceneParameters, nu_n: float = 10.0, alignment: Alignment = "rewarding",
                    scale_free: bool = False) -> float:
    """
    Object-to-wall cost summed over objects.

    With `scale_free` the distances are measured in the scale-1 frame (divided by the
    scene scale), so rescaling a whole hypothesis leaves the cost unchanged.

    `alignment="as_written"` uses |n_o . n_w| as the alignment term, the default
    `"rewarding"` uses 1 - |n_o . n_w| so parallel normals cost nothing.

    Raises:
        ConfigurationError: If the scene has no walls.
    """

    if not scene.walls:
        raise ConfigurationError("object-to-wall cost needs at least one wall")
    unit = scene.scale if scale_free else 1.0
    return float(sum(object_wall_cost(o, scene.walls, nu_n, alignment, unit) for o in scene.objects))


def context_cost_oo(scene: SceneParameters) -> float:
    """Total footprint overlap area over unordered object pairs."""

    polygons = [o.footprint_polygon() for o in scene.objects]
    return float(sum(footprint_intersection_area(a, b) for a, b in combinations(polygons, 2)))


def context_log_prior(e_ow: float, e_oo: float, mu: float = 0.25) -> float:
    return -(e_ow + mu * e_oo)


def context_prior(scene: SceneParameters, mu: float = 0.25, nu_n: float = 10.0,
                  alignment: Alignment = "rewarding", scale_free: bool = False) -> tuple[float, float]:
    """
    Returns:
        tuple[float, float]: (pi in (0, 1], log pi).
    """

    log_pi = context_log_prior(context_cost_ow(scene, nu_n, alignment, scale_free), context_cost_oo(scene), mu)
    return float(np.exp(log_pi)), log_pi

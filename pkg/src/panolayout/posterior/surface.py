"""
surface.py

Surface cost: disagreement between the observed orientation panorama and the panorama
rendered from a hypothesis, outside the joint object mask.
"""

import logging
from typing import Iterable, Literal

import numpy as np

from panolayout.exceptions import DegenerateMaskError
from panolayout.models import LABEL_MASKED, ModelSpec, OrientationPanorama, SceneParameters
from panolayout.rendering.panorama import render_object_masks, render_orientation_pano

logger = logging.getLogger(__name__)

MaskPolicy = Literal["exclude", "compare"]


def masked_disagreement(observed: np.ndarray, observed_mask: np.ndarray, rendered: np.ndarray,
                        rendered_mask: np.ndarray, policy: MaskPolicy = "exclude") -> float:
    """
    1 - matching / counted pixels.

    With `exclude`, pixels under either mask are left out of both counts. With `compare`,
    masked pixels become label 0 on their own side and every pixel is counted.

    Raises:
        DegenerateMaskError: If `exclude` leaves no pixel.
    """

    if observed.shape != rendered.shape:
        raise ValueError(f"observed {observed.shape} and rendered {rendered.shape} resolutions differ")
    if policy == "compare":
        obs = np.where(observed_mask, LABEL_MASKED, observed)
        ren = np.where(rendered_mask, LABEL_MASKED, rendered)
        return float(1.0 - np.mean(obs == ren))

    valid = ~(observed_mask | rendered_mask)
    n = int(valid.sum())
    if n == 0:
        raise DegenerateMaskError("joint object mask covers the whole panorama")
    matching = int(np.count_nonzero((observed == rendered) & valid))
    return 1.0 - matching / n


def surface_cost(observed: OrientationPanorama, observed_mask: np.ndarray, hypothesis: SceneParameters,
                 models: dict[str, ModelSpec], policy: MaskPolicy = "exclude") -> float:
    """
    E_s of a hypothesis, rendered at the observed resolution.

    Args:
        observed (OrientationPanorama): Observed labels.
        observed_mask (np.ndarray): Rasterized detection boxes, (H, W) bool.
        hypothesis (SceneParameters): Scene to render.
        models (dict[str, ModelSpec]): Model library for the object silhouettes.
        policy (str): "exclude" (default) or "compare".

    Returns:
        float: Cost in [0, 1].
    """

    w, h = observed.width, observed.height
    rendered = render_orientation_pano(hypothesis, w, h)
    silhouettes = render_object_masks(hypothesis, models, w, h)
    return masked_disagreement(observed.labels, np.asarray(observed_mask, dtype=bool), rendered.labels,
                               silhouettes, policy)


def sweep_scale(observed: OrientationPanorama, observed_mask: np.ndarray, scene: SceneParameters,
                models: dict[str, ModelSpec], grid: Iterable[float],
                policy: MaskPolicy = "exclude") -> list[tuple[float, float]]:
    """
    E_s for `scene` rescaled to each factor of `grid` (relative to the scene's own scale).

    Returns:
        list[tuple[float, float]]: (absolute scale, E_s) per grid factor.
    """

    out = []
    for factor in grid:
        scale = scene.scale * float(factor)
        cost = surface_cost(observed, observed_mask, scene.with_scale(scale), models, policy)
        out.append((scale, cost))
    logger.debug("scale sweep: %s", ", ".join(f"{s:.3f}:{c:.4f}" for s, c in out))
    return out

"""
score.py

Orientation cost and the combined log posterior of a hypothesis.

    log P = -(w_s * E_s + w_o * E_o + w_p * (E_ow + mu * E_oo))

With the default unit weights this is -(E_s + E_o + E_ow + mu * E_oo). Hypotheses are
only ever ranked by this log value.
"""

import logging
from typing import Mapping, Optional

import numpy as np

from panolayout.config import PosteriorConfig
from panolayout.models import ModelSpec, ObservedBundle, PoseLabel, PosteriorBreakdown, SceneParameters
from panolayout.pose.hog import hog
from panolayout.pose.library import PoseLibrary
from panolayout.posterior.context import context_cost_oo, context_cost_ow
from panolayout.posterior.surface import surface_cost
from panolayout.rendering.model_view import camera_relative_pose
from panolayout.rendering.primitives import get_model

logger = logging.getLogger(__name__)


def crop_descriptors(crops: Mapping[int, np.ndarray]) -> dict[int, np.ndarray]:
    return {i: hog(c) for i, c in crops.items()}


def orientation_cost(hypothesis: SceneParameters, descriptors: Mapping[int, np.ndarray], library: PoseLibrary,
                     models: dict[str, ModelSpec], average: bool = True) -> float:
    """
    E_o: HOG distance between each object's observed crop and the library render of its
    model at the hypothesis pose, quantized to the pose grid.

    Objects without a crop and objects without a canonical orientation (plants) add
    nothing. The per-object costs are averaged when `average` is set, summed otherwise.
    """

    costs = []
    for j, obj in enumerate(hypothesis.objects):
        if j not in descriptors or not obj.category.has_orientation:
            continue
        spec = get_model(models, obj.model_id)
        yaw, pitch = camera_relative_pose(obj, spec, hypothesis.camera.height)
        label = PoseLabel.quantize(yaw, pitch)
        rendered = library.descriptor(obj.model_id, label.index)
        costs.append(float(np.linalg.norm(descriptors[j] - rendered)))
    if not costs:
        return 0.0
    return float(np.mean(costs)) if average else float(np.sum(costs))


def log_posterior(bundle: ObservedBundle, hypothesis: SceneParameters, config: PosteriorConfig,
                  library: PoseLibrary, models: dict[str, ModelSpec],
                  descriptors: Optional[Mapping[int, np.ndarray]] = None) -> PosteriorBreakdown:
    """
    Score a hypothesis against an observed bundle.

    Args:
        bundle (ObservedBundle): Observed panorama, detection mask and crops.
        hypothesis (SceneParameters): Scene to score.
        config (PosteriorConfig): Weights and variants.
        library (PoseLibrary): Rendered pose library, for E_o.
        models (dict[str, ModelSpec]): Model library.
        descriptors (Mapping[int, np.ndarray], optional): Precomputed crop descriptors.

    Raises:
        DegenerateMaskError: Propagated from the surface cost.
    """

    if descriptors is None:
        descriptors = crop_descriptors(bundle.crops)
    e_s = surface_cost(bundle.observed, bundle.mask, hypothesis, models, config.mask_policy)
    e_o = orientation_cost(hypothesis, descriptors, library, models, config.average_orientation)
    e_ow = context_cost_ow(hypothesis, config.nu_n, config.alignment, config.scale_free_distance)
    e_oo = context_cost_oo(hypothesis)
    log_p = -(config.surface_weight * e_s + config.orientation_weight * e_o
              + config.prior_weight * (e_ow + config.mu * e_oo))
    return PosteriorBreakdown(e_s=e_s, e_o=e_o, e_ow=e_ow, e_oo=e_oo, log_posterior=log_p)

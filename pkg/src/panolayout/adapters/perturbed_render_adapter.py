"""
perturbed_render_adapter.py

Auxiliary image source for the pose CRF without network access.

A visual search for "images like this crop" is emulated on the rendered pose library: the
target's nearest library renders of its class give model and pose, and each is drawn
again with a random zoom, a random shift inside the frame and Gaussian pixel noise, the
way photos of similar objects differ in framing and quality.

Dependencies:
-------------
- numpy for the random perturbations.
- The pose library (HOG nearest neighbours) and the model-view renderer.
"""

import logging

import numpy as np

from panolayout.models import ModelSpec, ObjectClass
from panolayout.pose.library import PoseLibrary, knn
from panolayout.ports.auxiliary_port import AuxiliaryImagePort
from panolayout.rendering.model_view import render_model_pose
from panolayout.rendering.primitives import get_model
from panolayout.utils import make_rng

logger = logging.getLogger(__name__)


class PerturbedRenderAdapter(AuxiliaryImagePort):
    """
    Attributes:
        models (dict[str, ModelSpec]): Model library.
        library (PoseLibrary): Rendered pose library used for the similarity search.
        size (int): Side length of the generated images.
        fill (float): Frame fill of an unperturbed render.
        scale_jitter (float): Zoom drawn uniformly from 1 +- scale_jitter.
        crop_jitter (float): Shift drawn uniformly from +- crop_jitter of the frame, per axis.
        noise (float): Standard deviation of the additive pixel noise.
    """

    def __init__(self, models: dict[str, ModelSpec], library: PoseLibrary, size: int = 64, fill: float = 0.8,
                 scale_jitter: float = 0.15, crop_jitter: float = 0.08, noise: float = 5.0 / 255.0):
        self.models = models
        self.library = library
        self.size = size
        self.fill = fill
        self.scale_jitter = scale_jitter
        self.crop_jitter = crop_jitter
        self.noise = noise

    def fetch(self, category: ObjectClass, target: np.ndarray, count: int, seed: int) -> list[np.ndarray]:
        if count <= 0:
            return []
        restricted = self.library.restricted(category)
        neighbours = knn(target, restricted, min(count, len(restricted)))
        rng = make_rng(seed)
        images = []
        for n in neighbours:
            scale = 1.0 + rng.uniform(-self.scale_jitter, self.scale_jitter)
            offset = tuple(rng.uniform(-self.crop_jitter, self.crop_jitter, size=2))
            pose = n.pose
            intensity, _ = render_model_pose(get_model(self.models, n.model_id), pose.yaw, pose.pitch,
                                             size=self.size, fill=self.fill, scale=scale, offset=offset)
            noisy = intensity + rng.normal(0.0, self.noise, size=intensity.shape)
            images.append(np.clip(noisy, 0.0, 1.0))
        logger.debug("fetched %d auxiliary %s images", len(images), category.value)
        return images

"""
rendered_surface_adapter.py

Surface orientation adapter that renders the true wall layout and corrupts it with
independent label flips, standing in for a per-pixel orientation estimator.
"""

import logging

import numpy as np

from panolayout.models import OrientationPanorama, SceneParameters
from panolayout.ports.surface_port import SurfaceOrientationPort
from panolayout.rendering.panorama import add_label_noise, render_orientation_pano

logger = logging.getLogger(__name__)


class RenderedSurfaceAdapter(SurfaceOrientationPort):
    """
    Attributes:
        label_flip (float): Per-pixel flip probability.
    """

    def __init__(self, label_flip: float = 0.05):
        self.label_flip = label_flip

    def observe(self, scene: SceneParameters, rng: np.random.Generator,
                width: int, height: int) -> OrientationPanorama:
        clean = render_orientation_pano(scene, width, height)
        if self.label_flip <= 0.0:
            return clean
        noisy = add_label_noise(clean, self.label_flip, rng)
        logger.debug("flipped %d labels", int(np.count_nonzero(noisy.labels != clean.labels)))
        return noisy

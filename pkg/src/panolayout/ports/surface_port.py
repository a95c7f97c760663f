"""
surface_port.py

Port for the surface orientation estimator: whatever produces the observed orientation
panorama (labels 1 / 2 for the two wall normals, 3 for floor and ceiling) of a room.
"""

from abc import ABC, abstractmethod

import numpy as np

from panolayout.models import OrientationPanorama, SceneParameters


class SurfaceOrientationPort(ABC):
    """Interface for observed orientation panoramas."""

    @abstractmethod
    def observe(self, scene: SceneParameters, rng: np.random.Generator,
                width: int, height: int) -> OrientationPanorama:
        """
        Produce the observed orientation labels of `scene`.

        Args:
            scene (SceneParameters): Room seen by the camera.
            rng (np.random.Generator): Generator for the estimator's noise.
            width (int): Panorama width in pixels.
            height (int): Panorama height in pixels.

        Returns:
            OrientationPanorama: Observed labels.
        """
        ...

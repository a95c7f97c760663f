"""
auxiliary_port.py

Port for the auxiliary images W of the pose CRF: images of objects of the same class as
a target crop and similar in appearance, whose poses are unknown but correlated with the
target's.
"""

from abc import ABC, abstractmethod

import numpy as np

from panolayout.models import ObjectClass


class AuxiliaryImagePort(ABC):
    """Interface for auxiliary image sources."""

    @abstractmethod
    def fetch(self, category: ObjectClass, target: np.ndarray, count: int, seed: int) -> list[np.ndarray]:
        """
        Images resembling a target crop.

        Args:
            category (ObjectClass): Class of the target.
            target (np.ndarray): HOG descriptor of the target crop.
            count (int): Number of images wanted.
            seed (int): Seed of the source's random stream.

        Returns:
            list[np.ndarray]: Grayscale images in [0, 1].
        """
        ...

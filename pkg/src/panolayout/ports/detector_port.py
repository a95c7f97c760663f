"""
detector_port.py

Port for the object detection stage. An adapter turns a scene (the ground truth, for the
oracle adapter) into detections on the equirectangular panorama, each paired with the
index of the scene object it came from so the generator can write matching crops.
"""

from abc import ABC, abstractmethod

from panolayout.config import NoiseConfig
from panolayout.models import Detection, SceneParameters


class DetectorPort(ABC):
    """
    Interface for object detectors.

    Methods:
        detect(scene, noise, seed, width, height) -> list[tuple[int, Detection]]:
            Detections with the index of their source object.
    """

    @abstractmethod
    def detect(self, scene: SceneParameters, noise: NoiseConfig, seed: int,
               width: int, height: int) -> list[tuple[int, Detection]]:
        """
        Detect the objects of `scene`.

        Args:
            scene (SceneParameters): Scene seen by the panorama camera.
            noise (NoiseConfig): Box jitter and miss rate.
            seed (int): Seed of the detector's random stream.
            width (int): Panorama width in pixels.
            height (int): Panorama height in pixels.

        Returns:
            list[tuple[int, Detection]]: Detections in object order.
        """
        ...

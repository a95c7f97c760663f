"""
oracle_detector_adapter.py

Detector adapter that reads detections off the ground-truth scene: each visible object's
rendered silhouette gives its box, which is then jittered and randomly dropped according
to the noise configuration.
"""

from panolayout.config import NoiseConfig
from panolayout.layout.objects import detect_objects
from panolayout.models import Detection, ModelSpec, SceneParameters
from panolayout.ports.detector_port import DetectorPort


class OracleDetectorAdapter(DetectorPort):
    def __init__(self, models: dict[str, ModelSpec]):
        self.models = models

    def detect(self, scene: SceneParameters, noise: NoiseConfig, seed: int,
               width: int, height: int) -> list[tuple[int, Detection]]:
        return detect_objects(scene, self.models, noise, seed, width, height)

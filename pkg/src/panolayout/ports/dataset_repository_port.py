"""
dataset_repository_port.py

Port for run-directory persistence: generated rooms (scene, observed panorama,
detections, crops), the dataset manifest, estimation results and reports. Services only
talk to this interface, so the on-disk layout lives in one adapter.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from pydantic import BaseModel

from panolayout.models import Detection, ModelSpec, OrientationPanorama, SceneParameters
from panolayout.schemas import DatasetManifest


class DatasetRepositoryPort(ABC):
    """
    Interface for reading and writing run artifacts.

    Methods:
        write_room / read_observation: one generated room and its observational artifacts.
        read_scene / write_scene: scene JSON files (ground truth and hypotheses share one schema).
        write_manifest / read_manifest: the dataset manifest.
        write_rows / write_json / write_text / write_labels / write_gray: result artifacts.
    """

    @abstractmethod
    def write_room(self, room_dir: Path, scene: SceneParameters, observed: OrientationPanorama,
                   detections: Sequence[Detection], crops: Sequence[np.ndarray]) -> None:
        """Write scene.json, observed.png, detections.json and one crop PNG per detection."""
        ...

    @abstractmethod
    def read_observation(self, room_dir: Path) -> tuple[OrientationPanorama, list[Detection], list[np.ndarray]]:
        """Observed panorama, detections and crops of a room, in detection order."""
        ...

    @abstractmethod
    def read_scene(self, path: Path, models: Mapping[str, ModelSpec]) -> SceneParameters:
        ...

    @abstractmethod
    def write_scene(self, path: Path, scene: SceneParameters) -> None:
        ...

    @abstractmethod
    def write_manifest(self, root: Path, manifest: DatasetManifest) -> None:
        ...

    @abstractmethod
    def read_manifest(self, root: Path) -> DatasetManifest:
        ...

    @abstractmethod
    def write_rows(self, path: Path, rows: Sequence[BaseModel]) -> None:
        """CSV with one row per model, columns in field order, serialization aliases as headers."""
        ...

    @abstractmethod
    def write_json(self, path: Path, payload) -> None:
        ...

    @abstractmethod
    def write_text(self, path: Path, text: str) -> None:
        ...

    @abstractmethod
    def write_labels(self, path: Path, labels: np.ndarray) -> None:
        """Label map (codes 0..3) as a palette PNG."""
        ...

    @abstractmethod
    def write_gray(self, path: Path, image: np.ndarray) -> None:
        """Grayscale image in [0, 1] (or a bool mask) as an 8-bit PNG."""
        ...

"""
filesystem_dataset_repository.py

Concrete `DatasetRepositoryPort` over a plain run directory.

Overview:
---------
A generated room lives in its own directory:

    room_000/
        scene.json          ground truth (SceneFile)
        observed.png        observed orientation labels, palette PNG with codes 0..3
        detections.json     list of DetectionRecord, each naming its crop
        crops/det_000.png   grayscale crop of detection 0, ...

JSON goes through the pydantic schemas in both directions, images through Pillow, CSV
tables through the csv module with the schemas' serialization aliases as headers. Every
OSError and every schema failure on read is reported as a DatasetIOError naming the file.

Dependencies:
-------------
- Pillow for PNG encoding.
- pydantic (schemas) for validation of everything read back.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from PIL import Image
from pydantic import BaseModel, TypeAdapter, ValidationError

from panolayout.exceptions import DatasetIOError
from panolayout.models import Detection, ModelSpec, OrientationPanorama, SceneParameters
from panolayout.ports.dataset_repository_port import DatasetRepositoryPort
from panolayout.schemas import DatasetManifest, DetectionRecord, SceneFile

logger = logging.getLogger(__name__)

SCENE_FILE = "scene.json"
OBSERVED_FILE = "observed.png"
DETECTIONS_FILE = "detections.json"
MANIFEST_FILE = "manifest.json"
CROP_DIR = "crops"

# masked, wall along x, wall along y, floor/ceiling
LABEL_PALETTE = [0, 0, 0, 214, 39, 40, 31, 119, 180, 150, 150, 150]

_detection_list = TypeAdapter(list[DetectionRecord])


def crop_name(index: int) -> str:
    return f"{CROP_DIR}/det_{index:03d}.png"


class FilesystemDatasetRepository(DatasetRepositoryPort):
    def write_room(self, room_dir: Path, scene: SceneParameters, observed: OrientationPanorama,
                   detections: Sequence[Detection], crops: Sequence[np.ndarray]) -> None:
        if len(crops) != len(detections):
            raise ValueError(f"{len(detections)} detections but {len(crops)} crops")
        room_dir = Path(room_dir)
        self.write_scene(room_dir / SCENE_FILE, scene)
        self.write_labels(room_dir / OBSERVED_FILE, observed.labels)
        records = []
        for j, (det, crop) in enumerate(zip(detections, crops)):
            name = crop_name(j)
            self.write_gray(room_dir / name, crop)
            records.append(DetectionRecord.from_detection(det, crop=name))
        self.write_json(room_dir / DETECTIONS_FILE, [r.model_dump(mode="json", by_alias=True) for r in records])
        logger.debug("wrote room %s with %d detections", room_dir, len(records))

    def read_observation(self, room_dir: Path) -> tuple[OrientationPanorama, list[Detection], list[np.ndarray]]:
        room_dir = Path(room_dir)
        observed = OrientationPanorama(labels=self._read_image(room_dir / OBSERVED_FILE, mode="P"))
        path = room_dir / DETECTIONS_FILE
        try:
            records = _detection_list.validate_json(self._read_bytes(path))
        except ValidationError as e:
            raise DatasetIOError(path, f"invalid detections: {e}") from e
        detections, crops = [], []
        for j, r in enumerate(records):
            detections.append(r.to_detection(observed.width))
            if r.crop is None:
                raise DatasetIOError(path, f"detection {j} names no crop")
            crops.append(self._read_image(room_dir / r.crop, mode="L").astype(float) / 255.0)
        return observed, detections, crops

    def read_scene(self, path: Path, models: Mapping[str, ModelSpec]) -> SceneParameters:
        try:
            scene_file = SceneFile.model_validate_json(self._read_bytes(path))
        except ValidationError as e:
            raise DatasetIOError(path, f"invalid scene: {e}") from e
        return scene_file.to_scene(models)

    def write_scene(self, path: Path, scene: SceneParameters) -> None:
        self.write_text(path, SceneFile.from_scene(scene).dump())

    def write_manifest(self, root: Path, manifest: DatasetManifest) -> None:
        self.write_text(Path(root) / MANIFEST_FILE, manifest.model_dump_json(indent=2) + "\n")

    def read_manifest(self, root: Path) -> DatasetManifest:
        path = Path(root) / MANIFEST_FILE
        try:
            return DatasetManifest.model_validate_json(self._read_bytes(path))
        except ValidationError as e:
            raise DatasetIOError(path, f"invalid manifest: {e}") from e

    def write_rows(self, path: Path, rows: Sequence[BaseModel]) -> None:
        path = Path(path)
        dumped = [r.model_dump(mode="json", by_alias=True) for r in rows]
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", newline="") as fh:
                if not dumped:
                    return
                writer = csv.DictWriter(fh, fieldnames=list(dumped[0]))
                writer.writeheader()
                writer.writerows(dumped)
        except OSError as e:
            raise DatasetIOError(path, str(e)) from e

    def write_json(self, path: Path, payload) -> None:
        self.write_text(path, json.dumps(payload, indent=2) + "\n")

    def write_text(self, path: Path, text: str) -> None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as e:
            raise DatasetIOError(path, str(e)) from e

    def write_labels(self, path: Path, labels: np.ndarray) -> None:
        image = Image.fromarray(np.asarray(labels, dtype=np.uint8))
        image.putpalette(LABEL_PALETTE)
        self._save(path, image)

    def write_gray(self, path: Path, image: np.ndarray) -> None:
        data = np.asarray(image)
        if data.dtype == bool:
            data = data.astype(float)
        pixels = np.clip(np.round(data * 255.0), 0, 255).astype(np.uint8)
        self._save(path, Image.fromarray(pixels))

    @staticmethod
    def _save(path: Path, image: Image.Image) -> None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            image.save(path, format="PNG")
        except OSError as e:
            raise DatasetIOError(path, str(e)) from e

    @staticmethod
    def _read_bytes(path: Path) -> bytes:
        try:
            return Path(path).read_bytes()
        except OSError as e:
            raise DatasetIOError(path, str(e)) from e

    @staticmethod
    def _read_image(path: Path, mode: str) -> np.ndarray:
        try:
            with Image.open(path) as image:
                if image.mode != mode:
                    raise DatasetIOError(path, f"expected a {mode} image, got {image.mode}")
                return np.array(image)
        except OSError as e:
            raise DatasetIOError(path, str(e)) from e

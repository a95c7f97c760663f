"""
generation_service.py

This module defines GenerationService, which turns room templates into a synthetic dataset:
ground-truth scenes plus everything a perception front end would have delivered for them.

Overview:
---------
- Room `i` of a dataset uses template `templates[i % len(templates)]` and the room seed
  `derive_seed(master_seed, i)`, so rooms can be generated in any order or in parallel
  and the dataset stays a function of the master seed.
- The observed orientation panorama comes from the configured SurfaceOrientationPort,
  detections from the DetectorPort, and the observed crop of each detection is the
  detected object's model rendered at its camera-relative pose (plus optional pixel noise).
- Artifacts are written through the DatasetRepositoryPort; the service returns the
  manifest entry of the room.

Dependencies:
-------------
- Ports for surface estimation, detection and persistence (injected).
- numpy for crop noise.
"""

import logging
from pathlib import Path

import numpy as np

from panolayout.config import RunConfig
from panolayout.generation import generate_room, get_template
from panolayout.models import ModelSpec, RoomTemplate, SceneParameters
from panolayout.ports.dataset_repository_port import DatasetRepositoryPort
from panolayout.ports.detector_port import DetectorPort
from panolayout.ports.surface_port import SurfaceOrientationPort
from panolayout.rendering.model_view import render_object_crop
from panolayout.schemas import DatasetManifest, ManifestEntry
from panolayout.utils import derive_seed, make_rng

logger = logging.getLogger(__name__)

STREAM_SURFACE = 1
STREAM_DETECTION = 2
STREAM_CROPS = 3


def room_id(index: int) -> str:
    return f"room_{index:03d}"


class GenerationService:
    """
    Attributes:
        surface (SurfaceOrientationPort): Produces the observed orientation panorama.
        detector (DetectorPort): Produces object detections.
        repository (DatasetRepositoryPort): Writes room artifacts and the manifest.
        models (dict[str, ModelSpec]): Model library.
        templates (dict[str, RoomTemplate]): Room templates by name.
        config (RunConfig): Run configuration.
    """

    def __init__(self, surface: SurfaceOrientationPort, detector: DetectorPort, repository: DatasetRepositoryPort,
                 models: dict[str, ModelSpec], templates: dict[str, RoomTemplate], config: RunConfig):
        self.surface = surface
        self.detector = detector
        self.repository = repository
        self.models = models
        self.templates = templates
        self.config = config
        # fail on unknown template names before any room is written
        for name in config.dataset.templates:
            get_template(templates, name)

    def room_plan(self, index: int, master_seed: int) -> tuple[str, RoomTemplate, int]:
        names = self.config.dataset.templates
        template = get_template(self.templates, names[index % len(names)])
        return room_id(index), template, derive_seed(master_seed, index)

    def crops_for(self, scene: SceneParameters, object_indices: list[int], seed: int) -> list[np.ndarray]:
        """Observed crop of every detected object, in detection order."""

        cfg = self.config
        rng = make_rng(seed, STREAM_CROPS)
        crops = []
        for j in object_indices:
            crop = render_object_crop(scene.objects[j], self.models, scene.camera.height,
                                      size=cfg.dataset.crop_size, fill=cfg.render.fill_fraction)
            if cfg.noise.crop_noise > 0.0:
                crop = np.clip(crop + rng.normal(0.0, cfg.noise.crop_noise, size=crop.shape), 0.0, 1.0)
            crops.append(crop)
        return crops

    def generate(self, index: int, out_dir: Path, master_seed: int) -> ManifestEntry:
        """
        Generate room `index` and write it under `out_dir/<room_id>`.

        Raises:
            SceneValidationError: If the generated room breaks a scene invariant.
            DatasetIOError: If an artifact cannot be written.
        """

        cfg = self.config
        name, template, seed = self.room_plan(index, master_seed)
        scene = generate_room(template, seed, self.models, cfg.dataset, cfg.posterior, cfg.render.camera_height)
        w, h = cfg.render.pano_width, cfg.render.pano_height
        observed = self.surface.observe(scene, make_rng(seed, STREAM_SURFACE), w, h)
        found = self.detector.detect(scene, cfg.noise, derive_seed(seed, STREAM_DETECTION), w, h)
        detections = [d for _, d in found]
        crops = self.crops_for(scene, [j for j, _ in found], seed)

        room_dir = Path(out_dir) / name
        self.repository.write_room(room_dir, scene, observed, detections, crops)
        logger.info("generated %s from %s: H=%.2f m, %d objects, %d detections", name, template.name,
                    scene.wall_height, len(scene.objects), len(detections))
        return ManifestEntry(room_id=name, template=template.name, seed=seed, wall_height=scene.wall_height,
                             scene=f"{name}/scene.json", observed=f"{name}/observed.png",
                             detections=f"{name}/detections.json")

    def write_manifest(self, out_dir: Path, master_seed: int, entries: list[ManifestEntry]) -> DatasetManifest:
        manifest = DatasetManifest(master_seed=master_seed, pano_width=self.config.render.pano_width,
                                   pano_height=self.config.render.pano_height,
                                   config=self.config.model_dump(mode="json"),
                                   rooms=sorted(entries, key=lambda e: e.room_id))
        self.repository.write_manifest(Path(out_dir), manifest)
        return manifest

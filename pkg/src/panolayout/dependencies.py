"""
dependencies.py

Construction of adapters and services from settings and the run configuration.

Overview:
---------
- Adapters are looked up by the provider names in `Settings` (see `registry.py`), so a
  different detector, surface estimator, auxiliary image source or storage backend is a
  registry entry plus an environment variable away. Unknown names raise a
  ConfigurationError listing the known ones.
- The model library, room templates and the rendered pose library are cached per
  process; worker processes build them once and reuse them for every room they handle.
- `get_template_env()` provides the Jinja2 environment for the SVG floor map and the text
  report.
"""

import logging
from functools import lru_cache
from pathlib import Path

from jinja2 import Environment, FileSystemLoader

from panolayout.config import RunConfig, Settings, settings
from panolayout.exceptions import ConfigurationError
from panolayout.generation import load_room_templates
from panolayout.models import ModelSpec, RoomTemplate
from panolayout.pose.library import PoseLibrary, build_pose_library
from panolayout.ports.auxiliary_port import AuxiliaryImagePort
from panolayout.ports.dataset_repository_port import DatasetRepositoryPort
from panolayout.ports.detector_port import DetectorPort
from panolayout.ports.surface_port import SurfaceOrientationPort
from panolayout.registry import (
    AUXILIARY_PROVIDERS,
    DATASET_REPOSITORY_PROVIDERS,
    DETECTOR_PROVIDERS,
    SURFACE_PROVIDERS,
)
from panolayout.rendering.primitives import load_model_library
from panolayout.services.evaluation_service import EvaluationService
from panolayout.services.floormap_service import FloormapService
from panolayout.services.generation_service import GenerationService
from panolayout.services.layout_service import LayoutService
from panolayout.services.pipeline_service import PipelineService
from panolayout.services.pose_service import PoseService
from panolayout.services.sampler_service import SamplerService

logger = logging.getLogger(__name__)

MODEL_LIBRARY_FILE = "model_library.json"
ROOM_TEMPLATES_FILE = "room_templates.json"


def _provider(registry: dict, key: str, kind: str):
    factory = registry.get(key)
    if factory is None:
        raise ConfigurationError(f"unknown {kind} provider {key!r}; known: {sorted(registry)}")
    return factory


def get_model_library(s: Settings = settings) -> dict[str, ModelSpec]:
    return load_model_library(Path(s.data_path) / MODEL_LIBRARY_FILE)


def get_room_templates(s: Settings = settings) -> dict[str, RoomTemplate]:
    return load_room_templates(Path(s.data_path) / ROOM_TEMPLATES_FILE)


@lru_cache(maxsize=4)
def _cached_pose_library(data_path: Path, size: int, fill: float) -> PoseLibrary:
    models = load_model_library(data_path / MODEL_LIBRARY_FILE)
    return build_pose_library(models, size=size, fill=fill)


def get_pose_library(config: RunConfig, s: Settings = settings) -> PoseLibrary:
    """Rendered pose library for the run's model-view size, built once per process."""
    return _cached_pose_library(Path(s.data_path), config.render.model_view_size, config.render.fill_fraction)


def get_detector(config: RunConfig, s: Settings = settings) -> DetectorPort:
    return _provider(DETECTOR_PROVIDERS, s.detector_provider, "detector")(get_model_library(s), config)


def get_surface_estimator(config: RunConfig, s: Settings = settings) -> SurfaceOrientationPort:
    return _provider(SURFACE_PROVIDERS, s.surface_provider, "surface")(config)


def get_auxiliary_source(config: RunConfig, s: Settings = settings) -> AuxiliaryImagePort:
    factory = _provider(AUXILIARY_PROVIDERS, s.auxiliary_provider, "auxiliary image")
    return factory(get_model_library(s), get_pose_library(config, s), config)


def get_dataset_repository(s: Settings = settings) -> DatasetRepositoryPort:
    return _provider(DATASET_REPOSITORY_PROVIDERS, s.dataset_repository, "dataset repository")()


def get_template_env(s: Settings = settings) -> Environment:
    """
    Create and return the Jinja2 Environment for report and figure templates.

    Returns:
        Environment: Loads from `Settings.template_path`, without autoescaping.
    """

    return Environment(
        loader=FileSystemLoader(str(s.template_path)),
        autoescape=False,
        keep_trailing_newline=True,
    )


def get_generation_service(config: RunConfig, s: Settings = settings) -> GenerationService:
    return GenerationService(get_surface_estimator(config, s), get_detector(config, s), get_dataset_repository(s),
                             get_model_library(s), get_room_templates(s), config)


def get_pipeline_service(config: RunConfig, s: Settings = settings) -> PipelineService:
    models = get_model_library(s)
    library = get_pose_library(config, s)
    return PipelineService(
        repository=get_dataset_repository(s),
        layout=LayoutService(models, config),
        poses=PoseService(library, get_auxiliary_source(config, s), config.crf),
        sampler=SamplerService(config.sampler, config.posterior),
        library=library,
        models=models,
        config=config,
    )


def get_evaluation_service(s: Settings = settings) -> EvaluationService:
    return EvaluationService(get_dataset_repository(s), get_model_library(s), get_template_env(s))


def get_floormap_service(s: Settings = settings) -> FloormapService:
    return FloormapService(get_template_env(s))

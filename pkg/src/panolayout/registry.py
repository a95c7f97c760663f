# src/panolayout/registry.py

from panolayout.adapters.filesystem_dataset_repository import FilesystemDatasetRepository
from panolayout.adapters.oracle_detector_adapter import OracleDetectorAdapter
from panolayout.adapters.perturbed_render_adapter import PerturbedRenderAdapter
from panolayout.adapters.rendered_surface_adapter import RenderedSurfaceAdapter

DETECTOR_PROVIDERS = {
    "oracle": lambda models, config: OracleDetectorAdapter(models),
}

SURFACE_PROVIDERS = {
    "rendered": lambda config: RenderedSurfaceAdapter(label_flip=config.noise.label_flip),
    "clean": lambda config: RenderedSurfaceAdapter(label_flip=0.0),
}

AUXILIARY_PROVIDERS = {
    "perturbed": lambda models, library, config: PerturbedRenderAdapter(
        models,
        library,
        size=config.render.model_view_size,
        fill=config.render.fill_fraction,
        scale_jitter=config.crf.auxiliary_scale_jitter,
        crop_jitter=config.crf.auxiliary_crop_jitter,
        noise=config.crf.auxiliary_noise,
    ),
}

DATASET_REPOSITORY_PROVIDERS = {
    "filesystem": FilesystemDatasetRepository,
}

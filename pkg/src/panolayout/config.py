"""
config.py

Configuration for panolayout. Process-level settings come from the environment
(optionally a `.env` file) through pydantic-settings; everything that shapes an
experiment lives in a per-run JSON file validated by `RunConfig`.

Overview:
---------
- `Settings` carries provider selection (which detector, surface estimator, auxiliary
  image source and dataset repository adapters the registry should build), the log
  level, the default worker count and the template/data directories.
- `RunConfig` groups the run parameters into the sections `dataset`, `noise`, `render`,
  `layout`, `crf`, `sampler` and `posterior`. The constants of the method (gamma=20 deg,
  K=6, mu=0.25, nu_n=10, camera height 1.70 m, 100 TRW-S iterations, 8 epochs of 25
  samples, ...) appear here as named defaults so a config file only lists deviations.

Dependencies:
-------------
- pydantic / pydantic-settings for typed, validated configuration.
"""

import json
import math
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from panolayout.exceptions import ConfigurationError, DatasetIOError

PACKAGE_DIR = Path(__file__).resolve().parent


class Settings(BaseSettings):
    """
    Process-level settings.

    Attributes:
        log_level (str): Root log level configured by the CLI. Defaults to "INFO".
        jobs (int): Default number of rooms processed in parallel. Defaults to 1.
        detector_provider (str): Registry key of the detector adapter. Defaults to "oracle".
        surface_provider (str): Registry key of the observed-orientation adapter. Defaults to "rendered".
        auxiliary_provider (str): Registry key of the auxiliary CRF image source. Defaults to "perturbed".
        dataset_repository (str): Registry key of the run-directory repository. Defaults to "filesystem".
        template_path (Path): Directory holding the Jinja2 templates.
        data_path (Path): Directory holding the model library and room templates.
    """

    log_level: str = "INFO"
    jobs: int = 1

    detector_provider: str = "oracle"
    surface_provider: str = "rendered"
    auxiliary_provider: str = "perturbed"
    dataset_repository: str = "filesystem"

    template_path: Path = PACKAGE_DIR / "templates"
    data_path: Path = PACKAGE_DIR / "data"

    model_config = SettingsConfigDict(env_prefix="PANOLAYOUT_", env_file=".env", extra="ignore")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DatasetConfig(_Section):
    """Synthetic room generation."""

    rooms: int = Field(88, ge=1)
    master_seed: int = 0
    templates: list[str] = ["rect_small", "rect_large", "l_shape", "t_shape"]
    wall_height_mean: float = 2.7
    wall_height_std: float = Field(0.2, ge=0.0)
    wall_offset: float = Field(0.3, ge=0.0)
    min_offset_length: float = 0.7
    hill_climb_steps: int = Field(50, ge=0)
    crop_size: int = Field(64, ge=16)


class NoiseConfig(_Section):
    """Corruption applied by the oracle perception adapters."""

    label_flip: float = Field(0.05, ge=0.0, le=1.0)
    jitter_px: float = Field(4.0, ge=0.0)
    miss_rate: float = Field(0.0, ge=0.0, le=1.0)
    crop_noise: float = Field(0.0, ge=0.0)


class RenderConfig(_Section):
    """Panorama and model-view rendering."""

    pano_width: int = Field(512, ge=8)
    pano_height: int = Field(256, ge=4)
    camera_height: float = Field(1.70, gt=0.0)
    model_view_size: int = Field(64, ge=16)
    fill_fraction: float = Field(0.8, gt=0.0, le=1.0)


class LayoutConfig(_Section):
    """Geometric initialisation from the observed panorama."""

    views: int = Field(6, ge=1)
    fov: float = Field(90.0, gt=0.0, lt=180.0)
    overlap: float = Field(30.0, ge=0.0)
    view_width: int = Field(128, ge=4)
    view_height: int = Field(256, ge=4)
    boundary_window: int = Field(5, ge=1)
    boundary_support: float = Field(0.6, gt=0.0, le=1.0)
    label_filter_size: int = Field(3, ge=0)
    outlier_window: int = Field(7, ge=0)
    outlier_tolerance: float = Field(0.15, gt=0.0)
    min_correspondences: int = Field(10, ge=1)
    inlier_threshold: float = Field(0.03, gt=0.0)
    min_line_points: int = Field(8, ge=2)
    max_icp_iterations: int = Field(50, ge=1)
    object_distance_fraction: float = Field(0.6, gt=0.0, le=1.0)


class CrfConfig(_Section):
    """Pose CRF (kNN unaries, truncated-angle binaries, TRW-S)."""

    neighbors: int = Field(6, ge=1)
    gamma: float = Field(20.0, gt=0.0)
    iterations: int = Field(100, ge=1)
    unary_weight: float = Field(1.0, ge=0.0)
    pairwise_weight: float = Field(0.1, ge=0.0)
    graph_degree: int = Field(4, ge=1)
    auxiliary_count: int = Field(60, ge=0)
    auxiliary_scale_jitter: float = Field(0.15, ge=0.0, lt=1.0)
    auxiliary_crop_jitter: float = Field(0.08, ge=0.0, lt=0.5)
    auxiliary_noise: float = Field(5.0 / 255.0, ge=0.0)
    auxiliary_seed: int = 7


class SamplerConfig(_Section):
    """
    Hypothesis sampling.

    `loc_var_along` / `loc_var_perp` are variances expressed as fractions of the
    camera-object distance; `scale_range` is the wall-height interval in meters from
    which the global scale is drawn. `rescale_seed` hands each epoch seed the scale of
    the epoch's best surface fit.
    """

    enabled: bool = True
    epochs: int = Field(8, ge=1)
    samples_per_epoch: int = Field(25, ge=1)
    total_override: Optional[int] = Field(None, ge=1)
    loc_var_along: float = Field(0.1, ge=0.0)
    loc_var_perp: float = Field(0.005, ge=0.0)
    orient_sigma: float = Field(0.1, ge=0.0)
    scale_range: tuple[float, float] = (2.0, 3.5)
    rescale_seed: bool = True
    master_seed: int = 0

    @model_validator(mode="after")
    def _check_range(self) -> "SamplerConfig":
        low, high = self.scale_range
        if not (0.0 < low < high):
            raise ValueError(f"scale_range must satisfy 0 < low < high, got {self.scale_range}")
        return self


class PosteriorConfig(_Section):
    """Weights and variants of the posterior terms."""

    mu: float = Field(0.25, ge=0.0)
    nu_n: float = Field(10.0, ge=0.0)
    alignment: Literal["rewarding", "as_written"] = "rewarding"
    scale_free_distance: bool = True
    mask_policy: Literal["exclude", "compare"] = "exclude"
    average_orientation: bool = True
    surface_weight: float = Field(1.0, ge=0.0)
    orientation_weight: float = Field(1.0, ge=0.0)
    prior_weight: float = Field(1.0, ge=0.0)


class RunConfig(_Section):
    """One experiment: every section defaults to the published constants."""

    dataset: DatasetConfig = DatasetConfig()
    noise: NoiseConfig = NoiseConfig()
    render: RenderConfig = RenderConfig()
    layout: LayoutConfig = LayoutConfig()
    crf: CrfConfig = CrfConfig()
    sampler: SamplerConfig = SamplerConfig()
    posterior: PosteriorConfig = PosteriorConfig()

    @model_validator(mode="after")
    def _check_view_ring(self) -> "RunConfig":
        covered = self.layout.views * (self.layout.fov - self.layout.overlap)
        if not math.isclose(covered, 360.0, abs_tol=1e-9):
            raise ValueError(
                f"views*(fov-overlap) must equal 360, got {self.layout.views}*"
                f"({self.layout.fov}-{self.layout.overlap})={covered}"
            )
        return self

    @classmethod
    def load(cls, path: Optional[Path]) -> "RunConfig":
        """
        Load a run configuration from a JSON file; `None` yields the defaults.

        Raises:
            DatasetIOError: If the file cannot be read or is not JSON.
            ConfigurationError: If a section fails validation.
        """

        if path is None:
            return cls()
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise DatasetIOError(path, f"cannot read config: {e}") from e
        try:
            return cls.model_validate(raw)
        except ValidationError as e:
            raise ConfigurationError(f"{path}: {e}") from e


settings = Settings()

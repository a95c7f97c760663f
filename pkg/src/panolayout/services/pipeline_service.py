"""
pipeline_service.py

End-to-end estimation for one generated room.

Overview:
---------
1. Read the room's observation (orientation panorama, detections, crops); the ground
   truth is never touched.
2. Retrieve a model and a camera-relative pose for every detection (PoseService).
3. Build the initial hypothesis from the panorama and the detections (LayoutService).
4. Score hypotheses against the observation and search for the MAP one (SamplerService).
5. Write `init.json` and `final.json` (scene schema), `poses.json`, `posterior.csv` and
   `trace.csv` into the room's results directory.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

from panolayout.config import RunConfig
from panolayout.layout.objects import rasterize_detection_mask
from panolayout.models import ModelSpec, ObservedBundle, SceneParameters
from panolayout.pose.library import PoseLibrary
from panolayout.ports.dataset_repository_port import DatasetRepositoryPort
from panolayout.sampler import MapResult
from panolayout.services.layout_service import LayoutService
from panolayout.services.pose_service import PoseEstimate, PoseService
from panolayout.services.posterior_service import PosteriorService
from panolayout.services.sampler_service import SamplerService

logger = logging.getLogger(__name__)

INIT_FILE = "init.json"
FINAL_FILE = "final.json"
POSES_FILE = "poses.json"
POSTERIOR_FILE = "posterior.csv"
TRACE_FILE = "trace.csv"

# posterior.csv seed of the initial hypothesis
INITIAL_SEED = -1


@dataclass(frozen=True)
class RoomEstimate:
    room_id: str
    init: SceneParameters
    final: SceneParameters
    poses: list[PoseEstimate]
    search: MapResult


def best_sample_seed(result: MapResult) -> int:
    """Seed of the trace row that became the MAP hypothesis, INITIAL_SEED if none beat the start."""

    seed, best = INITIAL_SEED, result.initial.log_posterior
    for row in result.trace:
        if row.log_posterior > best:
            seed, best = row.seed, row.log_posterior
    return seed


class PipelineService:
    """
    Attributes:
        repository (DatasetRepositoryPort): Reads observations, writes results.
        layout (LayoutService): Initial room geometry and object placement.
        poses (PoseService): Model retrieval and pose CRF.
        sampler (SamplerService): MAP search.
        library (PoseLibrary): Rendered pose library, shared with the posterior.
        models (dict[str, ModelSpec]): Model library.
        config (RunConfig): Run configuration.
    """

    def __init__(self, repository: DatasetRepositoryPort, layout: LayoutService, poses: PoseService,
                 sampler: SamplerService, library: PoseLibrary, models: dict[str, ModelSpec], config: RunConfig):
        self.repository = repository
        self.layout = layout
        self.poses = poses
        self.sampler = sampler
        self.library = library
        self.models = models
        self.config = config

    def estimate_room(self, room_dir: Path, results_dir: Path) -> RoomEstimate:
        """
        Raises:
            PanoLayoutError: Any domain failure of the room; the caller records it and moves on.
        """

        room_dir, results_dir = Path(room_dir), Path(results_dir)
        observed, detections, crops = self.repository.read_observation(room_dir)
        mask = rasterize_detection_mask(detections, observed.width, observed.height)

        poses = self.poses.estimate_object_poses(detections, crops)
        init = self.layout.initialise(observed, detections, [p.model_id for p in poses],
                                      [p.orientation for p in poses])

        bundle = ObservedBundle(observed=observed, mask=mask, detections=tuple(detections),
                                crops=dict(enumerate(crops)))
        scorer = PosteriorService(bundle, self.library, self.models, self.config.posterior)
        result = self.sampler.run_map(scorer, init)

        self.repository.write_scene(results_dir / INIT_FILE, init)
        self.repository.write_scene(results_dir / FINAL_FILE, result.best)
        self.repository.write_json(results_dir / POSES_FILE, [
            {"model_id": p.model_id,
             "yaw": None if p.pose is None else p.pose.yaw,
             "pitch": None if p.pose is None else p.pose.pitch,
             "orientation": p.orientation,
             "energy": p.energy,
             "lower_bound": p.lower_bound}
            for p in poses
        ])
        rows = [scorer.row(INITIAL_SEED, init, result.initial),
                scorer.row(best_sample_seed(result), result.best, result.breakdown)]
        self.repository.write_rows(results_dir / POSTERIOR_FILE, rows)
        self.repository.write_rows(results_dir / TRACE_FILE, result.trace)
        logger.info("%s: log posterior %.4f -> %.4f", room_dir.name, result.initial.log_posterior,
                    result.breakdown.log_posterior)
        return RoomEstimate(room_id=room_dir.name, init=init, final=result.best, poses=poses, search=result)

"""
pose_service.py

Model retrieval and pose estimation for detected objects.

For every detection the pose library is narrowed to the detection's class and the
nearest render of the observed crop picks the model. Objects with a canonical
orientation then get a pose CRF: the crop is node 0, the auxiliary images fetched for it
are the remaining nodes, and the TRW-S label of node 0 is the camera-relative pose,
turned into a facing yaw with the detection bearing. Plants keep the default
facing-the-camera yaw.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from panolayout.config import CrfConfig
from panolayout.models import Detection, PoseLabel
from panolayout.pose.crf import build_pose_graph
from panolayout.pose.hog import hog
from panolayout.pose.library import PoseLibrary, retrieve_model
from panolayout.pose.trws import trws_infer
from panolayout.ports.auxiliary_port import AuxiliaryImagePort
from panolayout.rendering.model_view import absolute_yaw
from panolayout.utils import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PoseEstimate:
    """
    Attributes:
        model_id (str): Retrieved library model.
        pose (Optional[PoseLabel]): Camera-relative pose, None for plants.
        orientation (Optional[float]): Facing yaw in scene coordinates, None for plants.
        energy (float): CRF energy of the returned labeling, 0 without a CRF.
        lower_bound (float): Final TRW-S bound, 0 without a CRF.
    """

    model_id: str
    pose: Optional[PoseLabel] = None
    orientation: Optional[float] = None
    energy: float = 0.0
    lower_bound: float = 0.0


class PoseService:
    """
    Attributes:
        library (PoseLibrary): Rendered pose library of all classes.
        auxiliary (AuxiliaryImagePort): Source of the auxiliary CRF images.
        config (CrfConfig): CRF constants.
    """

    def __init__(self, library: PoseLibrary, auxiliary: AuxiliaryImagePort, config: CrfConfig):
        self.library = library
        self.auxiliary = auxiliary
        self.config = config

    def estimate(self, index: int, detection: Detection, crop: np.ndarray) -> PoseEstimate:
        cfg = self.config
        restricted = self.library.restricted(detection.category)
        descriptor = hog(crop)
        model_id = retrieve_model(descriptor, restricted)
        if not detection.category.has_orientation:
            return PoseEstimate(model_id=model_id)

        images = self.auxiliary.fetch(detection.category, descriptor, cfg.auxiliary_count,
                                      derive_seed(cfg.auxiliary_seed, index))
        graph = build_pose_graph([descriptor], [hog(im) for im in images], restricted, cfg.neighbors, cfg.gamma,
                                 cfg.graph_degree, cfg.unary_weight, cfg.pairwise_weight)
        result = trws_infer(graph, cfg.iterations)
        pose = PoseLabel.from_index(int(result.labels[0]))
        orientation = absolute_yaw(pose.yaw, detection.bearing)
        logger.debug("detection %d (%s): model %s, pose yaw %.0f pitch %.0f, energy %.4f, bound %.4f", index,
                     detection.category.value, model_id, pose.yaw, pose.pitch, result.energy, result.lower_bound)
        return PoseEstimate(model_id=model_id, pose=pose, orientation=orientation, energy=result.energy,
                            lower_bound=result.lower_bound)

    def estimate_object_poses(self, detections: Sequence[Detection], crops: Sequence[np.ndarray]) -> list[PoseEstimate]:
        if len(detections) != len(crops):
            raise ValueError(f"{len(detections)} detections but {len(crops)} crops")
        return [self.estimate(j, d, c) for j, (d, c) in enumerate(zip(detections, crops))]

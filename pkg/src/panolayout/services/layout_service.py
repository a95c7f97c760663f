"""
layout_service.py

Initial room hypothesis from one observed orientation panorama.

The panorama is cut into a ring of perspective views; each view's floor boundary is
back-projected at unit camera height, the per-view clouds are brought to a common scale
through their shared pano columns, and the merged cloud is normalised so its walls are
2.5 m high (scale 1). Manhattan wall lines fitted to that cloud form the wall polygon,
and every detection places one object on its bearing ray.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from panolayout.config import RunConfig
from panolayout.geometry.projection import pano_to_views, resample_pano_to_view
from panolayout.layout.alignment import align_view_clouds, match_by_provenance
from panolayout.layout.floor import clean_labels, extract_floor_boundary
from panolayout.layout.objects import initialise_objects
from panolayout.layout.walls import fit_walls, reject_range_outliers
from panolayout.models import (
    REFERENCE_WALL_HEIGHT,
    CameraModel,
    Detection,
    ModelSpec,
    OrientationPanorama,
    SceneParameters,
    ViewCloud,
)

logger = logging.getLogger(__name__)


class LayoutService:
    def __init__(self, models: dict[str, ModelSpec], config: RunConfig):
        self.models = models
        self.config = config

    def view_clouds(self, observed: OrientationPanorama) -> list[ViewCloud]:
        """Unit-height floor clouds of the view ring, in ring order."""

        lc = self.config.layout
        views = pano_to_views(observed.width, observed.height, lc.views, lc.fov, lc.overlap,
                              lc.view_width, lc.view_height)
        cleaned = clean_labels(observed.labels, lc.label_filter_size)
        clouds = []
        for view in views:
            labels = resample_pano_to_view(cleaned, view)
            clouds.append(extract_floor_boundary(labels, view, observed.width, observed.height,
                                                 lc.boundary_window, lc.boundary_support, camera_height=1.0))
        return clouds

    def ceiling_ratio(self, clouds: Sequence[ViewCloud]) -> float:
        """Median wall-height / camera-height ratio over the views that saw a wall top."""

        ratios = [c.wall_top_ratio for c in clouds if c.wall_top_ratio is not None]
        if not ratios:
            fallback = REFERENCE_WALL_HEIGHT / self.config.render.camera_height
            logger.warning("no wall tops visible; assuming ratio %.3f", fallback)
            return fallback
        return float(np.median(ratios))

    def floor_points(self, observed: OrientationPanorama) -> tuple[np.ndarray, float]:
        """
        Merged floor cloud at scale 1, i.e. in a frame where the walls are 2.5 m high, and
        the camera height in that frame.

        Raises:
            EmptyCloudError, NoFloorIntersectionError: From the boundary extraction.
            UnderConstrainedError: If neighbouring views share too few boundary columns.
        """

        lc = self.config.layout
        clouds = self.view_clouds(observed)
        correspondences = match_by_provenance(clouds, lc.min_correspondences)
        scales = align_view_clouds(clouds, correspondences, lc.min_correspondences)
        merged = np.concatenate([c.points * s for c, s in zip(clouds, scales)])
        # wall-top ratios are scale free, so the per-view scales do not enter here
        ratio = self.ceiling_ratio(clouds)
        logger.debug("%d floor points, wall/camera ratio %.3f", len(merged), ratio)
        camera = REFERENCE_WALL_HEIGHT / ratio
        return merged * camera, camera

    def initialise(self, observed: OrientationPanorama, detections: Sequence[Detection],
                   model_ids: Optional[Sequence[Optional[str]]] = None,
                   orientations: Optional[Sequence[Optional[float]]] = None) -> SceneParameters:
        """
        Initial hypothesis at scale 1.

        Raises:
            DegenerateLayoutError: If no closed wall polygon fits the floor cloud.
        """

        lc = self.config.layout
        points, camera = self.floor_points(observed)
        keep = reject_range_outliers(points, lc.outlier_window, lc.outlier_tolerance)
        if not np.all(keep):
            logger.debug("dropped %d of %d floor points as range outliers", int((~keep).sum()), len(keep))
        points = points[keep]
        walls = fit_walls(points, REFERENCE_WALL_HEIGHT, lc.inlier_threshold, lc.min_line_points,
                          lc.max_icp_iterations, range_scale=camera)
        objects = initialise_objects(detections, walls, self.models, lc.object_distance_fraction,
                                     model_ids, orientations)
        logger.info("initial layout: %d walls, %d objects", len(walls), len(objects))
        return SceneParameters(camera=CameraModel(height=self.config.render.camera_height), scale=1.0,
                               walls=tuple(walls), objects=tuple(objects))

import numpy as np
import pytest
from shapely.geometry import Polygon

from panolayout.adapters.rendered_surface_adapter import RenderedSurfaceAdapter
from panolayout.config import DatasetConfig, LayoutConfig, NoiseConfig, RunConfig
from panolayout.exceptions import (
    DegenerateLayoutError, EmptyCloudError, NoFloorIntersectionError,
    UnderConstrainedError,
)
from panolayout.generation import generate_room, get_template
from panolayout.geometry.planar import ray_polygon_distance, ray_segments_distance
from panolayout.geometry.projection import pano_to_views, resample_pano_to_view
from panolayout.layout.alignment import align_view_clouds, match_by_provenance
from panolayout.layout.floor import clean_labels, extract_floor_boundary, floor_boundary_rows
from panolayout.layout.objects import (
    detect_objects, initialise_objects, rasterize_detection_mask,
    silhouette_box,
)
from panolayout.layout.walls import ALONG_X, ALONG_Y, WallLine, fit_walls, reject_range_outliers, walls_from_lines
from panolayout.models import LABEL_HORIZONTAL, Detection, ObjectClass, PerspectiveView, ViewCloud
from panolayout.rendering.panorama import render_orientation_pano
from panolayout.services.layout_service import LayoutService
from panolayout.utils import make_rng
from tests.conftest import L_ROOM, SQUARE, make_object, make_scene

RECT = [(-1.8, -1.5), (2.2, -1.5), (2.2, 1.7), (-1.8, 1.7)]


class TestExtractFloorBoundary:
    def test_points_lie_on_the_walls(self, square_room):
        pano = render_orientation_pano(square_room, 1024, 512)
        polygon = square_room.polygon()
        errors = []
        for view in pano_to_views(1024, 512):
            cloud = extract_floor_boundary(resample_pano_to_view(pano.labels, view), view, 1024, 512,
                                           camera_height=square_room.camera.height)
            assert np.allclose(cloud.points[:, 2], 0.0)
            for x, y, _ in cloud.points:
                truth = ray_polygon_distance(polygon, np.rad2deg(np.arctan2(y, x)))
                errors.append(abs(np.hypot(x, y) - truth) / truth)
        assert np.median(errors) < 0.03
        assert np.max(errors) < 0.10

    def test_all_floor_view(self):
        view = PerspectiveView(yaw_center=0.0, fov=90.0, width=64, height=128)
        with pytest.raises(NoFloorIntersectionError):
            extract_floor_boundary(np.full((128, 64), 3, dtype=np.uint8), view, 256, 128)

    def test_no_floor(self):
        view = PerspectiveView(yaw_center=0.0, fov=90.0, width=64, height=128)
        with pytest.raises(EmptyCloudError):
            extract_floor_boundary(np.full((128, 64), 1, dtype=np.uint8), view, 256, 128)

    def test_floor_speck_on_the_wall(self):
        labels = np.full((128, 8), 1, dtype=np.uint8)
        labels[90:] = LABEL_HORIZONTAL
        labels[70:76, 2:5] = LABEL_HORIZONTAL
        rows = floor_boundary_rows(labels)
        assert np.all(rows == 90)

    def test_wall_speck_in_the_floor(self):
        labels = np.full((128, 8), 1, dtype=np.uint8)
        labels[90:] = LABEL_HORIZONTAL
        labels[100, 3] = 1
        assert np.all(floor_boundary_rows(labels) == 90)


class TestCleanLabels:
    def test_isolated_flips_are_restored(self):
        labels = np.full((16, 32), 2, dtype=np.uint8)
        labels[8:] = LABEL_HORIZONTAL
        noisy = labels.copy()
        noisy[3, 5] = 1
        noisy[12, 20] = 2
        assert np.array_equal(clean_labels(noisy), labels)

    def test_wraps_the_seam(self):
        labels = np.full((8, 16), 1, dtype=np.uint8)
        labels[:, 15] = 2
        labels[:, 1] = 2
        # column 0 sits between two columns of 2 across the seam
        assert clean_labels(labels)[4, 0] == 2

    def test_size_one_is_identity(self, rng):
        labels = rng.integers(1, 4, size=(8, 16)).astype(np.uint8)
        assert np.array_equal(clean_labels(labels, size=1), labels)


class TestAlignViewClouds:
    @staticmethod
    def _cloud(points, yaw):
        view = PerspectiveView(yaw_center=yaw, fov=90.0, width=64, height=128)
        provenance = np.stack([np.arange(len(points)), np.full(len(points), 100)], axis=1)
        return ViewCloud(view=view, points=points, provenance=provenance)

    def test_recovers_relative_scale(self, rng):
        xy = rng.uniform(0.5, 2.0, size=(20, 2))
        points = np.column_stack([xy, np.zeros(20)])
        clouds = [self._cloud(points, 0.0), self._cloud(points * 0.5, 60.0)]
        scales = align_view_clouds(clouds, match_by_provenance(clouds, 10), 10)
        assert scales == pytest.approx([1.0, 2.0])

    def test_too_few_shared_columns(self):
        points = np.column_stack([np.linspace(1.0, 2.0, 5), np.ones(5), np.zeros(5)])
        clouds = [self._cloud(points, 0.0), self._cloud(points, 60.0)]
        with pytest.raises(UnderConstrainedError):
            match_by_provenance(clouds, 10)


class TestFitWalls:
    def test_l_shaped_room(self):
        segments = make_scene(L_ROOM).segments()
        angles = np.deg2rad(np.arange(720) * 0.5)
        d = ray_segments_distance(angles, segments)
        points = np.column_stack([d * np.cos(angles), d * np.sin(angles)])
        walls = fit_walls(points, height=2.5)
        assert len(walls) == 6
        fitted = Polygon([w.start for w in walls])
        assert fitted.symmetric_difference(Polygon(L_ROOM)).area < 0.1

    def test_collinear_points(self):
        points = np.column_stack([np.linspace(-3.0, 3.0, 60), np.full(60, 2.0)])
        with pytest.raises(DegenerateLayoutError):
            fit_walls(points)

    def test_range_spikes_are_rejected(self):
        angles = np.deg2rad(np.arange(360.0))
        rho = np.full(360, 2.0)
        rho[[40, 200]] = [3.5, 0.8]
        points = np.column_stack([rho * np.cos(angles), rho * np.sin(angles)])
        keep = reject_range_outliers(points)
        assert not keep[40] and not keep[200]
        assert keep.sum() == 358

    def test_square_room_keeps_its_corners(self):
        segments = make_scene(SQUARE).segments()
        angles = np.deg2rad(np.arange(720) * 0.5)
        d = ray_segments_distance(angles, segments)
        points = np.column_stack([d * np.cos(angles), d * np.sin(angles)])
        assert np.all(reject_range_outliers(points))

    def test_crossing_line_is_dropped(self):
        def line(orientation, offset, start, end, first, last, count):
            return WallLine(orientation=orientation, offset=offset, az_start=start, az_end=end,
                            first_point=np.array(first), last_point=np.array(last), count=count)

        lines = [
            line(ALONG_Y, 2.0, 320.0, 40.0, (2.0, -1.68), (2.0, 1.68), 50),
            line(ALONG_X, -3.0, 44.0, 46.0, (1.0, -3.0), (1.0, -3.0), 3),
            line(ALONG_X, 2.0, 50.0, 130.0, (1.68, 2.0), (-1.68, 2.0), 50),
            line(ALONG_Y, -2.0, 140.0, 220.0, (-2.0, 1.68), (-2.0, -1.68), 50),
            line(ALONG_X, -2.0, 230.0, 310.0, (-1.68, -2.0), (1.68, -2.0), 50),
        ]
        walls = walls_from_lines(lines, height=2.5)
        assert len(walls) == 4
        assert Polygon([w.start for w in walls]).symmetric_difference(Polygon(SQUARE)).area < 1e-9

    def test_two_lines_cannot_close(self):
        lines = [
            WallLine(orientation=ALONG_Y, offset=2.0, az_start=300.0, az_end=60.0, first_point=np.array([2.0, -2.0]),
                     last_point=np.array([2.0, 2.0]), count=40),
            WallLine(orientation=ALONG_X, offset=2.0, az_start=70.0, az_end=120.0, first_point=np.array([1.0, 2.0]),
                     last_point=np.array([-1.0, 2.0]), count=30),
        ]
        with pytest.raises(DegenerateLayoutError):
            walls_from_lines(lines)


class TestLayoutService:
    def test_initial_room_matches_ground_truth(self):
        truth = make_scene(RECT, height=2.7, scale=2.7 / 2.5)
        pano = render_orientation_pano(truth, 1024, 512)
        config = RunConfig(layout=LayoutConfig(view_width=256, view_height=512))
        service = LayoutService({}, config)
        init = service.initialise(pano, [])
        assert len(init.walls) == 4
        assert init.scale == 1.0
        estimate = Polygon(init.vertices() * truth.scale)
        gt = truth.polygon()
        assert estimate.intersection(gt).area / estimate.union(gt).area >= 0.95

    def test_ceiling_ratio(self):
        truth = make_scene(SQUARE, height=2.7)
        pano = render_orientation_pano(truth, 1024, 512)
        service = LayoutService({}, RunConfig(layout=LayoutConfig(view_width=256, view_height=512)))
        ratio = service.ceiling_ratio(service.view_clouds(pano))
        assert ratio == pytest.approx(2.7 / 1.70, rel=0.03)

    @pytest.mark.slow
    def test_noisy_generated_rooms(self, models, templates):
        """Every room of a small default-noise dataset yields a closed initial layout."""

        config = RunConfig()
        surface = RenderedSurfaceAdapter(config.noise.label_flip)
        service = LayoutService(models, config)
        dataset = DatasetConfig(hill_climb_steps=0)
        ious = []
        for index in range(12):
            template = get_template(templates, dataset.templates[index % len(dataset.templates)])
            truth = generate_room(template, 100 + index, models, dataset)
            observed = surface.observe(truth, make_rng(100 + index, 1), 512, 256)
            init = service.initialise(observed, [])
            estimate = Polygon(init.vertices() * truth.scale)
            gt = truth.polygon()
            ious.append(estimate.intersection(gt).area / estimate.union(gt).area)
        assert len(ious) == 12
        assert np.median(ious) >= 0.8


class TestSilhouetteBox:
    def test_plain(self):
        mask = np.zeros((8, 32), dtype=bool)
        mask[2:5, 10:14] = True
        assert silhouette_box(mask) == (10.0, 2.0, 14.0, 5.0)

    def test_wraps_the_seam(self):
        mask = np.zeros((8, 32), dtype=bool)
        mask[1:3, [0, 1, 2, 30, 31]] = True
        assert silhouette_box(mask) == (30.0, 1.0, 35.0, 3.0)

    def test_empty(self):
        assert silhouette_box(np.zeros((4, 4), dtype=bool)) is None


class TestDetections:
    @pytest.fixture
    def chair_room(self, models):
        return make_scene(SQUARE, objects=[make_object(models, "chair_dining", (0.0, 1.2), 270.0)])

    def test_box_jitter_is_gaussian(self, chair_room, models):
        clean = detect_objects(chair_room, models, NoiseConfig(jitter_px=0.0), 0, 256, 128)
        x0, y0, x1, y1 = clean[0][1].box
        deltas = []
        for seed in range(250):
            (_, det), = detect_objects(chair_room, models, NoiseConfig(jitter_px=4.0), seed, 256, 128)
            deltas.extend(np.subtract(det.box, (x0, y0, x1, y1)))
        expected = 4.0 * np.sqrt(2.0 / np.pi)
        assert np.mean(np.abs(deltas)) == pytest.approx(expected, rel=0.10)

    def test_bearing_follows_the_object(self, chair_room, models):
        (j, det), = detect_objects(chair_room, models, NoiseConfig(jitter_px=0.0), 0, 256, 128)
        assert j == 0
        assert det.category == ObjectClass.CHAIR
        assert det.bearing == pytest.approx(90.0, abs=3.0)

    def test_every_object_missed(self, chair_room, models):
        assert detect_objects(chair_room, models, NoiseConfig(miss_rate=1.0), 0, 256, 128) == []

    def test_same_seed_same_boxes(self, chair_room, models):
        a = detect_objects(chair_room, models, NoiseConfig(), 7, 256, 128)
        b = detect_objects(chair_room, models, NoiseConfig(), 7, 256, 128)
        assert a == b

    def test_mask_wraps_columns(self):
        det = Detection.from_box(ObjectClass.PLANT, 30.0, 0.0, 35.0, 4.0, 32)
        mask = rasterize_detection_mask([det], 32, 8)
        assert set(np.nonzero(mask.any(axis=0))[0]) == {30, 31, 0, 1, 2}
        assert not mask[4:].any()


class TestInitialiseObjects:
    def test_on_the_detection_ray(self, square_room, models):
        det = Detection.from_box(ObjectClass.CHAIR, 355.0, 100.0, 365.0, 120.0, 360)
        (obj,) = initialise_objects([det], square_room.walls, models, fraction=0.6)
        assert obj.position == pytest.approx((1.2, 0.0), abs=1e-9)
        assert obj.orientation == pytest.approx(180.0)
        assert obj.model_id == "chair_arm"

    def test_retrieved_model_and_orientation(self, square_room, models):
        det = Detection.from_box(ObjectClass.BED, 80.0, 100.0, 100.0, 120.0, 360)
        (obj,) = initialise_objects([det], square_room.walls, models, 0.5, ["bed_double"], [45.0])
        assert obj.model_id == "bed_double"
        assert obj.orientation == 45.0
        assert obj.footprint == models["bed_double"].footprint

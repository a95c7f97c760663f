import numpy as np
import pytest

from panolayout.exceptions import ConfigurationError, NoFloorIntersectionError, OutOfFrustumError
from panolayout.geometry.planar import (
    closest_wall, footprint_intersection_area, point_segment_distances,
    ray_polygon_distance, rectangle_polygon, wall_segments,
)
from panolayout.geometry.projection import (
    backproject_floor_pixel,
    direction_to_view_pixel,
    directions_to_pano_pixels,
    directions_to_vectors,
    pano_pixel_to_direction,
    pano_pixels_to_directions,
    pano_to_views,
    view_pixel_to_direction,
    view_pixels_to_directions,
)
from panolayout.models import CameraModel, PerspectiveView, SphericalDirection
from tests.conftest import make_scene, unit_square


class TestPanoToViews:
    def test_six_views_with_overlap(self):
        views = pano_to_views(2048, 1024, k=6, fov=90.0, overlap=30.0)
        assert [v.yaw_center for v in views] == [0.0, 60.0, 120.0, 180.0, 240.0, 300.0]
        assert all(v.fov == 90.0 for v in views)

    def test_exact_tiling(self):
        views = pano_to_views(512, 256, k=4, fov=90.0, overlap=0.0)
        assert [v.yaw_center for v in views] == [0.0, 90.0, 180.0, 270.0]

    def test_coverage_violation(self):
        with pytest.raises(ConfigurationError):
            pano_to_views(2048, 1024, k=6, fov=90.0, overlap=20.0)


class TestViewPixelToDirection:
    def test_center_pixel_is_optical_axis(self):
        view = PerspectiveView(yaw_center=60.0, fov=90.0, width=128, height=256)
        d = view_pixel_to_direction(view, 64.0, 128.0)
        assert d.azimuth == pytest.approx(60.0, abs=1e-9)
        assert d.elevation == pytest.approx(0.0, abs=1e-9)

    def test_left_edge_of_pano_is_azimuth_zero(self):
        assert pano_pixel_to_direction(0.0, 512.0, 2048, 1024).azimuth == 0.0

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        view = PerspectiveView(yaw_center=120.0, fov=90.0, width=256, height=512)
        xs = rng.uniform(0.0, view.width, 100_000)
        ys = rng.uniform(0.0, view.height, 100_000)
        az, el = view_pixels_to_directions(view, xs, ys)
        px, py = directions_to_pano_pixels(az, el, 2048, 1024)
        az2, el2 = pano_pixels_to_directions(px, py, 2048, 1024)
        a, b = directions_to_vectors(az, el), directions_to_vectors(az2, el2)
        # atan2 of |a x b| and a.b stays accurate for tiny angles, arccos does not
        err = np.degrees(np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), np.sum(a * b, axis=1)))
        assert err.max() < 1e-6

    def test_view_inverse(self):
        view = PerspectiveView(yaw_center=300.0, fov=90.0, width=128, height=256)
        d = view_pixel_to_direction(view, 20.5, 200.5)
        x, y = direction_to_view_pixel(view, d)
        assert (x, y) == pytest.approx((20.5, 200.5), abs=1e-6)

    def test_behind_view_plane(self):
        view = PerspectiveView(yaw_center=0.0, fov=90.0, width=128, height=256)
        with pytest.raises(OutOfFrustumError):
            direction_to_view_pixel(view, SphericalDirection.of(180.0, 0.0))

    def test_azimuth_periodicity(self):
        a = directions_to_pano_pixels(30.0, -10.0, 1024, 512)
        b = directions_to_pano_pixels(390.0, -10.0, 1024, 512)
        assert np.allclose(a, b)


class TestBackprojectFloorPixel:
    def test_forty_five_degrees(self):
        p = backproject_floor_pixel(SphericalDirection.of(0.0, -45.0), CameraModel(height=1.70))
        assert p == pytest.approx([1.70, 0.0, 0.0])

    def test_nadir(self):
        p = backproject_floor_pixel(SphericalDirection.of(0.0, -90.0), CameraModel(height=1.70))
        assert p == pytest.approx([0.0, 0.0, 0.0])

    def test_horizon(self):
        with pytest.raises(NoFloorIntersectionError):
            backproject_floor_pixel(SphericalDirection.of(0.0, 0.0), CameraModel(height=1.70))

    def test_distance_decreases_with_depression(self):
        camera = CameraModel(height=1.70)
        dists = [np.hypot(*backproject_floor_pixel(SphericalDirection.of(45.0, -e), camera)[:2])
                 for e in (10.0, 30.0, 50.0, 70.0)]
        assert all(a > b for a, b in zip(dists, dists[1:]))


class TestClosestWall:
    @pytest.fixture
    def walls(self):
        return list(make_scene([(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]).walls)

    def test_nearest_wall(self, walls):
        # walls: 0 bottom, 1 right, 2 top, 3 left
        assert closest_wall(unit_square((0.5, 2.0)), walls) == 3

    def test_center_tie_goes_to_lowest_index(self, walls):
        assert closest_wall(unit_square((2.0, 2.0)), walls) == 0

    def test_corner_tie(self, walls):
        assert closest_wall(unit_square((3.9, 3.9)), walls) == 1

    def test_never_farther_than_any_other_wall(self, walls):
        rng = np.random.default_rng(5)
        segments = wall_segments(walls)
        for p in rng.uniform(0.0, 4.0, size=(200, 2)):
            d = point_segment_distances(p, segments)
            assert d[closest_wall(unit_square(p), walls)] <= d.min() + 1e-12

    def test_no_walls(self):
        with pytest.raises(ValueError):
            closest_wall(unit_square((0.0, 0.0)), [])


class TestFootprintIntersectionArea:
    def test_identical(self):
        a = rectangle_polygon((0.0, 0.0), 1.0, 1.0, 0.0)
        assert footprint_intersection_area(a, a) == pytest.approx(1.0)

    def test_disjoint(self):
        a = rectangle_polygon((0.0, 0.0), 1.0, 1.0, 0.0)
        b = rectangle_polygon((2.0, 0.0), 1.0, 1.0, 0.0)
        assert footprint_intersection_area(a, b) == 0.0

    def test_rotated_45(self):
        a = rectangle_polygon((0.0, 0.0), 1.0, 1.0, 0.0)
        b = rectangle_polygon((0.0, 0.0), 1.0, 1.0, 45.0)
        assert footprint_intersection_area(a, b) == pytest.approx(2.0 * (np.sqrt(2.0) - 1.0), abs=1e-9)

    def test_symmetric_and_bounded(self):
        a = rectangle_polygon((0.1, 0.2), 1.2, 0.6, 30.0)
        b = rectangle_polygon((0.5, -0.1), 0.8, 0.8, 75.0)
        ab = footprint_intersection_area(a, b)
        assert ab == pytest.approx(footprint_intersection_area(b, a))
        assert ab <= min(a.area, b.area)


class TestRayPolygonDistance:
    def test_square(self):
        poly = make_scene([(-2.0, -2.0), (2.0, -2.0), (2.0, 2.0), (-2.0, 2.0)]).polygon()
        assert ray_polygon_distance(poly, 0.0) == pytest.approx(2.0)
        assert ray_polygon_distance(poly, 45.0) == pytest.approx(2.0 * np.sqrt(2.0))

import numpy as np
import pytest

from panolayout.adapters.perturbed_render_adapter import PerturbedRenderAdapter
from panolayout.config import CrfConfig
from panolayout.exceptions import ConfigurationError, DescriptorSizeError, InstanceTooLargeError, LibrarySizeError
from panolayout.models import N_LABELS, Detection, ObjectClass, PoseLabel
from panolayout.pose.crf import (
    DensePairwiseCost,
    PoseGraph,
    PoseGridCost,
    angle_distance,
    binary_energy,
    brute_force_map,
    build_pose_graph,
    crf_energy,
    hog_neighbor_edges,
    pose_distance_matrix,
    unary_energy,
)
from panolayout.pose.hog import DESCRIPTOR_SIZE, hog
from panolayout.pose.library import build_pose_library, knn, retrieve_model
from panolayout.pose.trws import trws_infer
from panolayout.rendering.model_view import render_model_pose
from panolayout.services.pose_service import PoseService
from panolayout.utils import circular_difference


class TestHog:
    def test_descriptor_size(self, rng):
        assert hog(rng.random((32, 40))).shape == (DESCRIPTOR_SIZE,)

    def test_cells_are_unit_or_zero(self, rng):
        cells = hog(rng.random((64, 64))).reshape(16, 9)
        assert np.allclose(np.linalg.norm(cells, axis=1), 1.0)

    def test_flat_image(self):
        assert not hog(np.full((32, 32), 0.4)).any()

    def test_vertical_edge_lands_in_first_bin(self):
        image = np.zeros((32, 32))
        image[:, 16:] = 1.0
        cells = hog(image).reshape(16, 9)
        assert np.all(cells[cells.sum(axis=1) > 0].argmax(axis=1) == 0)

    def test_too_small(self):
        with pytest.raises(DescriptorSizeError):
            hog(np.zeros((15, 32)))


class TestPoseLabel:
    def test_index_round_trip(self):
        label = PoseLabel(yaw=27.0, pitch=20.0)
        assert label.index == 3 * 9 + 4
        assert PoseLabel.from_index(label.index) == label

    def test_quantize(self):
        assert PoseLabel.quantize(-4.0, 52.0) == PoseLabel(yaw=0.0, pitch=40.0)

    def test_off_grid(self):
        with pytest.raises(ValueError):
            PoseLabel(yaw=10.0, pitch=0.0)


class TestAngleDistance:
    def test_truncation(self):
        assert angle_distance(PoseLabel(yaw=0.0, pitch=0.0), PoseLabel(yaw=180.0, pitch=40.0)) == (220.0, 20.0)

    def test_circular_yaw(self):
        d, _ = angle_distance(PoseLabel(yaw=351.0, pitch=0.0), PoseLabel(yaw=9.0, pitch=0.0))
        assert d == 18.0

    def test_binary_energy(self):
        a = np.zeros(DESCRIPTOR_SIZE)
        b = np.zeros(DESCRIPTOR_SIZE)
        b[0] = 0.5
        e = binary_energy(a, b, PoseLabel(yaw=0.0, pitch=0.0), PoseLabel(yaw=0.0, pitch=20.0))
        assert e == pytest.approx(10.0)

    def test_grid_cost_matches_dense(self, rng):
        h = rng.random((3, N_LABELS)) * 50.0
        w = np.array([0.0, 0.3, 2.0])
        grid = PoseGridCost(20.0)
        dense = DensePairwiseCost(pose_distance_matrix(20.0))
        assert np.allclose(grid.min_convolve(h, w), dense.min_convolve(h, w))


class TestKnn:
    def test_exact_render_is_nearest(self, models, chair_plant_library):
        intensity, _ = render_model_pose(models["chair_dining"], 99.0, 15.0, size=32)
        (nearest,) = knn(hog(intensity), chair_plant_library, 1)
        assert nearest.model_id == "chair_dining"
        assert nearest.pose == PoseLabel(yaw=99.0, pitch=15.0)
        assert nearest.distance == pytest.approx(0.0, abs=1e-9)

    def test_sorted_by_distance(self, chair_plant_library, rng):
        neighbours = knn(rng.random(DESCRIPTOR_SIZE), chair_plant_library, 6)
        d = [n.distance for n in neighbours]
        assert d == sorted(d)

    def test_library_too_small(self, chair_plant_library):
        plants = chair_plant_library.restricted(ObjectClass.PLANT)
        with pytest.raises(LibrarySizeError):
            knn(np.zeros(DESCRIPTOR_SIZE), plants, len(plants) + 1)

    def test_restrict_to_missing_class(self, chair_plant_library):
        with pytest.raises(ConfigurationError):
            chair_plant_library.restricted(ObjectClass.BED)

    def test_retrieve_model(self, models, chair_plant_library):
        intensity, _ = render_model_pose(models["plant_pot"], 0.0, 30.0, size=32)
        assert retrieve_model(hog(intensity), chair_plant_library.restricted(ObjectClass.PLANT)) == "plant_pot"

    def test_unary_energy_range(self, chair_plant_library, rng):
        u = unary_energy(rng.random(DESCRIPTOR_SIZE), chair_plant_library, k=6)
        assert u.shape == (N_LABELS,)
        assert u.min() >= np.exp(-6) - 1e-12 and u.max() <= 1.0
        assert 1 <= np.sum(u < 1.0) <= 6


def _truncated_l1(n_labels: int, cap: float) -> DensePairwiseCost:
    s = np.arange(n_labels)
    return DensePairwiseCost(np.minimum(np.abs(s[:, None] - s[None, :]), cap).astype(float))


class TestTrws:
    def test_matches_enumeration_on_small_cycles(self):
        exact = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            graph = PoseGraph(unary=rng.random((3, 6)) * 4.0, edges=[(0, 1), (0, 2), (1, 2)],
                              weights=rng.random(3), pairwise=_truncated_l1(6, 2.0))
            _, optimum = brute_force_map(graph)
            result = trws_infer(graph, iterations=50)
            assert result.lower_bound <= optimum + 1e-9
            assert optimum <= result.energy + 1e-9
            assert result.energy == pytest.approx(crf_energy(graph, result.labels))
            exact += abs(result.energy - optimum) < 1e-9
        assert exact >= 95

    def test_chain_is_exact(self, rng):
        graph = PoseGraph(unary=rng.random((2, 8)), edges=[(0, 1)], weights=[0.7], pairwise=_truncated_l1(8, 3.0))
        labels, optimum = brute_force_map(graph)
        result = trws_infer(graph, iterations=10)
        assert result.energy == pytest.approx(optimum)
        assert result.lower_bound == pytest.approx(optimum)

    def test_bounds_never_decrease(self, rng):
        graph = PoseGraph(unary=rng.random((4, 5)), edges=[(0, 1), (1, 2), (2, 3), (0, 3)],
                          weights=[0.5, 1.0, 0.2, 0.8], pairwise=_truncated_l1(5, 2.0))
        bounds = trws_infer(graph, iterations=20).lower_bounds
        assert all(a <= b + 1e-12 for a, b in zip(bounds, bounds[1:]))

    def test_single_node(self):
        graph = PoseGraph(unary=[[0.3, 0.1, 0.2]], edges=np.zeros((0, 2)), weights=[], pairwise=_truncated_l1(3, 1.0))
        result = trws_infer(graph)
        assert list(result.labels) == [1]
        assert result.energy == pytest.approx(0.1)

    def test_enumeration_limit(self):
        graph = PoseGraph(unary=np.zeros((4, N_LABELS)), edges=[(0, 1)], weights=[1.0], pairwise=PoseGridCost())
        with pytest.raises(InstanceTooLargeError):
            brute_force_map(graph)

    def test_graph_validation(self):
        with pytest.raises(ValueError):
            PoseGraph(unary=np.zeros((2, 3)), edges=[(1, 0)], weights=[1.0], pairwise=_truncated_l1(3, 1.0))
        with pytest.raises(ValueError):
            PoseGraph(unary=np.zeros((2, 3)), edges=[(0, 1)], weights=[-1.0], pairwise=_truncated_l1(3, 1.0))


class TestPoseGraph:
    def test_hog_edges_connect_clusters(self, rng):
        a = rng.normal(0.0, 0.01, size=(4, 8))
        b = rng.normal(5.0, 0.01, size=(4, 8))
        edges, weights = hog_neighbor_edges(np.vstack([a, b]), degree=1)
        assert np.all(edges[:, 0] < edges[:, 1])
        assert np.all(weights >= 0.0)
        graph = PoseGraph(unary=np.zeros((8, 2)), edges=edges, weights=weights, pairwise=_truncated_l1(2, 1.0))
        assert graph.is_connected()

    def test_build_with_auxiliary_images(self, models, chair_plant_library):
        chairs = chair_plant_library.restricted(ObjectClass.CHAIR)
        target = hog(render_model_pose(models["chair_dining"], 45.0, 10.0, size=32)[0])
        adapter = PerturbedRenderAdapter(models, chair_plant_library, size=32)
        auxiliary = [hog(im) for im in adapter.fetch(ObjectClass.CHAIR, target, 5, seed=1)]
        graph = build_pose_graph([target], auxiliary, chairs, k=6)
        assert graph.n_nodes == 6 and graph.n_targets == 1
        assert graph.is_connected()
        result = trws_infer(graph, iterations=10)
        assert result.lower_bound <= result.energy + 1e-9

    def test_edge_weights_are_scaled_hog_distances(self, models, chair_plant_library):
        chairs = chair_plant_library.restricted(ObjectClass.CHAIR)
        target = hog(render_model_pose(models["chair_arm"], 90.0, 15.0, size=32)[0])
        adapter = PerturbedRenderAdapter(models, chair_plant_library, size=32)
        auxiliary = [hog(im) for im in adapter.fetch(ObjectClass.CHAIR, target, 6, seed=2)]
        graph = build_pose_graph([target], auxiliary, chairs, k=6, gamma=20.0, pairwise_weight=0.1)
        edges, distances = hog_neighbor_edges(np.array([target] + auxiliary), degree=4)
        assert np.array_equal(graph.edges, edges)
        assert np.allclose(graph.weights, distances * 0.1 / 20.0)
        # a fully truncated disagreement costs pairwise_weight per unit of HOG distance
        assert np.allclose(graph.weights * graph.pairwise.matrix.max(), 0.1 * distances)

    def test_auxiliary_nodes_keep_their_own_votes(self, models, chair_plant_library):
        chairs = chair_plant_library.restricted(ObjectClass.CHAIR)
        adapter = PerturbedRenderAdapter(models, chair_plant_library, size=32)
        agree = total = 0
        labels = set()
        for seed, (yaw, pitch) in enumerate([(0.0, 10.0), (117.0, 20.0), (252.0, 5.0)]):
            target = hog(render_model_pose(models["chair_dining"], yaw, pitch, size=32)[0])
            auxiliary = [hog(im) for im in adapter.fetch(ObjectClass.CHAIR, target, 8, seed=seed)]
            graph = build_pose_graph([target], auxiliary, chairs)
            result = trws_infer(graph, iterations=30)
            own = np.argmin(graph.unary, axis=1)
            agree += int(np.sum(result.labels == own))
            total += graph.n_nodes
            labels.update(int(v) for v in result.labels)
        assert agree >= 0.6 * total
        assert len(labels) > 3


class TestPerturbedRenderAdapter:
    def test_deterministic(self, models, chair_plant_library, rng):
        adapter = PerturbedRenderAdapter(models, chair_plant_library, size=32)
        target = rng.random(DESCRIPTOR_SIZE)
        a = adapter.fetch(ObjectClass.CHAIR, target, 3, seed=4)
        b = adapter.fetch(ObjectClass.CHAIR, target, 3, seed=4)
        assert len(a) == 3
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        assert all(x.min() >= 0.0 and x.max() <= 1.0 for x in a)

    def test_nothing_requested(self, models, chair_plant_library):
        adapter = PerturbedRenderAdapter(models, chair_plant_library, size=32)
        assert adapter.fetch(ObjectClass.CHAIR, np.zeros(DESCRIPTOR_SIZE), 0, seed=0) == []


class TestPoseService:
    @pytest.fixture
    def detection(self):
        return Detection.from_box(ObjectClass.CHAIR, 80.0, 120.0, 100.0, 150.0, 360)

    def test_exact_crop_returns_its_pose(self, models, chair_plant_library, detection):
        crop, _ = render_model_pose(models["chair_arm"], 27.0, 20.0, size=32)
        service = PoseService(chair_plant_library, PerturbedRenderAdapter(models, chair_plant_library, size=32),
                              CrfConfig(neighbors=1, auxiliary_count=0))
        estimate = service.estimate(0, detection, crop)
        assert estimate.model_id == "chair_arm"
        assert estimate.pose == PoseLabel(yaw=27.0, pitch=20.0)
        assert estimate.orientation == pytest.approx((27.0 + detection.bearing + 180.0) % 360.0)

    def test_with_auxiliary_images(self, models, chair_plant_library, detection):
        crop, _ = render_model_pose(models["chair_dining"], 180.0, 10.0, size=32)
        service = PoseService(chair_plant_library, PerturbedRenderAdapter(models, chair_plant_library, size=32),
                              CrfConfig(auxiliary_count=4, iterations=5))
        estimate = service.estimate(0, detection, crop)
        assert estimate.pose is not None
        assert estimate.lower_bound <= estimate.energy + 1e-9

    def test_plant_gets_no_pose(self, models, chair_plant_library):
        crop, _ = render_model_pose(models["plant_pot"], 0.0, 20.0, size=32)
        det = Detection.from_box(ObjectClass.PLANT, 10.0, 120.0, 20.0, 140.0, 360)
        service = PoseService(chair_plant_library, PerturbedRenderAdapter(models, chair_plant_library, size=32),
                              CrfConfig())
        estimate = service.estimate(0, det, crop)
        assert estimate.model_id == "plant_pot"
        assert estimate.pose is None and estimate.orientation is None

    def test_mismatched_crops(self, models, chair_plant_library, detection):
        service = PoseService(chair_plant_library, PerturbedRenderAdapter(models, chair_plant_library), CrfConfig())
        with pytest.raises(ValueError):
            service.estimate_object_poses([detection], [])


@pytest.fixture(scope="module")
def bed_tv_library(models):
    return build_pose_library(models, size=32, categories=[ObjectClass.BED, ObjectClass.TV])


@pytest.mark.slow
class TestPoseAccuracy:
    @pytest.mark.parametrize("model_id", ["bed_double", "tv_stand"])
    def test_library_retrieves_its_own_renders(self, models, bed_tv_library, model_id):
        spec = models[model_id]
        restricted = bed_tv_library.restricted(spec.category)
        hits = 0
        for index in range(N_LABELS):
            pose = PoseLabel.from_index(index)
            intensity, _ = render_model_pose(spec, pose.yaw, pose.pitch, size=32)
            (nearest,) = knn(hog(intensity), restricted, 1)
            hits += nearest.pose == pose
        assert hits >= 0.95 * N_LABELS

    def test_clean_crops_recover_their_yaw(self, models, bed_tv_library):
        service = PoseService(bed_tv_library, PerturbedRenderAdapter(models, bed_tv_library, size=32),
                              CrfConfig(auxiliary_count=10, iterations=30))
        errors = {ObjectClass.BED: [], ObjectClass.TV: []}
        cases = [(m, yaw, pitch) for m in ("bed_double", "bed_single", "tv_cabinet", "tv_stand")
                 for yaw, pitch in ((0.0, 10.0), (72.0, 25.0), (153.0, 15.0), (261.0, 5.0))]
        for index, (model_id, yaw, pitch) in enumerate(cases):
            spec = models[model_id]
            crop, _ = render_model_pose(spec, yaw, pitch, size=32)
            detection = Detection.from_box(spec.category, 80.0, 120.0, 100.0, 150.0, 360)
            estimate = service.estimate(index, detection, crop)
            errors[spec.category].append(circular_difference(estimate.pose.yaw, yaw))
        for category, values in errors.items():
            assert np.mean(values) <= 5.0, category

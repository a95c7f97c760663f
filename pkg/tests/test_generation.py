from itertools import combinations

import numpy as np
import pytest

from panolayout.config import DatasetConfig, RenderConfig, RunConfig
from panolayout.dependencies import get_dataset_repository, get_generation_service
from panolayout.exceptions import ConfigurationError, SceneValidationError
from panolayout.generation import generate_room, get_template, perturb_walls
from panolayout.models import ObjectSlot, ObjectClass, RoomTemplate
from panolayout.services.generation_service import room_id
from panolayout.utils import derive_seed, make_rng

NOTCHED = [(-2.0, -2.0), (3.0, -2.0), (3.0, 1.5), (2.5, 1.5), (2.5, 2.0), (-2.0, 2.0)]


class TestRoomTemplate:
    def test_bundled_templates(self, templates):
        assert set(templates) == {"rect_small", "rect_large", "l_shape", "t_shape"}

    @pytest.mark.parametrize("vertices", [
        [(0.0, 0.0), (2.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)],
        [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 3.0)],
        [(0.0, 0.0), (0.0, 2.0), (2.0, 2.0), (2.0, 0.0)],
        [(0.0, 0.0), (2.0, 0.0), (0.0, 0.0)],
    ], ids=["open", "slanted", "clockwise", "too-few"])
    def test_invalid(self, vertices):
        with pytest.raises(SceneValidationError):
            RoomTemplate(name="bad", vertices=vertices)

    def test_unknown_name(self, templates):
        with pytest.raises(ConfigurationError):
            get_template(templates, "hexagon")

    def test_slot_range(self):
        with pytest.raises(ValueError):
            ObjectSlot(category=ObjectClass.CHAIR, min_count=2, max_count=1)


class TestPerturbWalls:
    def test_stays_manhattan(self, templates):
        for name, template in templates.items():
            for seed in range(20):
                v = perturb_walls(template, make_rng(seed), DatasetConfig())
                d = np.roll(v, -1, axis=0) - v
                assert np.all(np.min(np.abs(d), axis=1) < 1e-9), name
                assert np.all(np.abs(v - np.asarray(template.vertices)) <= 0.3 + 1e-9)

    def test_short_walls_keep_their_offset(self):
        template = RoomTemplate(name="notched", vertices=NOTCHED)
        for seed in range(50):
            v = perturb_walls(template, make_rng(seed), DatasetConfig())
            assert v[2][1] == 1.5 and v[3][1] == 1.5
            assert v[3][0] == 2.5 and v[4][0] == 2.5

    def test_offset_walls_stay_long(self, templates):
        config = DatasetConfig(wall_offset=0.6)
        for name, template in [("notched", RoomTemplate(name="notched", vertices=NOTCHED)), *templates.items()]:
            t = np.asarray(template.vertices, dtype=float)
            d = np.roll(t, -1, axis=0) - t
            normals = np.stack([-d[:, 1], d[:, 0]], axis=1) / np.linalg.norm(d, axis=1, keepdims=True)
            for seed in range(50):
                v = perturb_walls(template, make_rng(seed), config)
                shift = np.abs(np.sum((v - t) * normals, axis=1))
                lengths = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
                moved = shift > 1e-12
                assert np.all(lengths[moved] > config.min_offset_length), (name, seed)

    def test_zero_offset(self, templates):
        v = perturb_walls(templates["l_shape"], make_rng(0), DatasetConfig(wall_offset=0.0))
        assert np.allclose(v, templates["l_shape"].vertices)


class TestGenerateRoom:
    def test_wall_height_statistics(self, models):
        template = RoomTemplate(name="empty", vertices=[(-2.0, -1.5), (2.5, -1.5), (2.5, 2.0), (-2.0, 2.0)])
        heights = np.array([generate_room(template, derive_seed(0, i), models).wall_height for i in range(1000)])
        assert heights.min() >= 2.0 and heights.max() <= 3.5
        assert heights.mean() == pytest.approx(2.7, abs=0.03)
        assert heights.std() == pytest.approx(0.2, abs=0.03)

    def test_scale_follows_height(self, templates, models):
        scene = generate_room(templates["rect_small"], 4, models)
        assert scene.scale == pytest.approx(scene.wall_height / 2.5)
        assert all(w.height == scene.wall_height for w in scene.walls)
        assert scene.camera.height == 1.70

    def test_deterministic(self, templates, models):
        a = generate_room(templates["t_shape"], 12, models)
        b = generate_room(templates["t_shape"], 12, models)
        assert a == b

    @pytest.mark.parametrize("name", ["rect_small", "rect_large", "l_shape", "t_shape"])
    def test_invariants(self, templates, models, name):
        for seed in range(5):
            scene = generate_room(templates[name], seed, models, DatasetConfig(hill_climb_steps=20))
            scene.check_invariants()
            room = scene.polygon()
            for obj in scene.objects:
                assert room.contains(obj.footprint_polygon())
            for a, b in combinations(scene.objects, 2):
                assert a.footprint_polygon().intersection(b.footprint_polygon()).area == 0.0

    def test_slots_respected(self, templates, models):
        template = templates["rect_small"]
        for seed in range(5):
            scene = generate_room(template, seed, models)
            beds = [o for o in scene.objects if o.category == ObjectClass.BED]
            assert len(beds) <= 1
            assert all(o.category in {s.category for s in template.slots} for o in scene.objects)


class TestGenerationService:
    @pytest.fixture
    def config(self):
        return RunConfig(dataset=DatasetConfig(rooms=2, hill_climb_steps=5, crop_size=32),
                         render=RenderConfig(pano_width=128, pano_height=64))

    def test_room_plan(self, config):
        service = get_generation_service(config)
        assert service.room_plan(5, 9) == ("room_005", service.templates["rect_large"], derive_seed(9, 5))
        assert room_id(12) == "room_012"

    def test_unknown_template_rejected(self):
        config = RunConfig(dataset=DatasetConfig(templates=["rect_small", "dome"]))
        with pytest.raises(ConfigurationError):
            get_generation_service(config)

    def test_writes_room(self, config, tmp_path, models):
        service = get_generation_service(config)
        entry = service.generate(0, tmp_path, master_seed=1)
        room_dir = tmp_path / entry.room_id
        assert (room_dir / "scene.json").is_file()
        assert (room_dir / "observed.png").is_file()
        observed, detections, crops = get_dataset_repository().read_observation(room_dir)
        assert observed.labels.shape == (64, 128)
        assert len(detections) == len(crops)
        assert all(c.shape == (32, 32) for c in crops)
        scene = get_dataset_repository().read_scene(room_dir / "scene.json", models)
        assert scene.wall_height == pytest.approx(entry.wall_height)

    def test_same_seed_same_bytes(self, config, tmp_path):
        service = get_generation_service(config)
        service.generate(1, tmp_path / "a", master_seed=3)
        service.generate(1, tmp_path / "b", master_seed=3)
        for name in ("scene.json", "observed.png", "detections.json"):
            assert (tmp_path / "a" / "room_001" / name).read_bytes() == (tmp_path / "b" / "room_001" / name).read_bytes()

    def test_manifest(self, config, tmp_path):
        service = get_generation_service(config)
        entries = [service.generate(i, tmp_path, master_seed=0) for i in (1, 0)]
        service.write_manifest(tmp_path, 0, entries)
        manifest = get_dataset_repository().read_manifest(tmp_path)
        assert [r.room_id for r in manifest.rooms] == ["room_000", "room_001"]
        assert manifest.pano_width == 128

import json

import numpy as np
import pytest

from panolayout.dependencies import get_dataset_repository
from panolayout.exceptions import DatasetIOError, SceneValidationError, UnknownModelError
from panolayout.models import Detection, ObjectClass, OrientationPanorama
from panolayout.schemas import PosteriorRow
from panolayout.rendering.panorama import render_orientation_pano


@pytest.fixture
def repo():
    return get_dataset_repository()


def test_scene_round_trip(repo, bed_room, models, tmp_path):
    repo.write_scene(tmp_path / "scene.json", bed_room)
    back = repo.read_scene(tmp_path / "scene.json", models)
    assert back.scale == pytest.approx(bed_room.scale)
    assert back.wall_height == pytest.approx(bed_room.wall_height)
    assert np.allclose(back.vertices(), bed_room.vertices())
    (a,), (b,) = bed_room.objects, back.objects
    assert (b.category, b.model_id) == (a.category, a.model_id)
    assert b.position == pytest.approx(a.position)
    assert b.orientation == pytest.approx(a.orientation)


def test_scene_file_uses_lambda(repo, bed_room, tmp_path):
    repo.write_scene(tmp_path / "scene.json", bed_room)
    payload = json.loads((tmp_path / "scene.json").read_text())
    assert payload["lambda"] == pytest.approx(2.7 / 2.5)
    assert payload["objects"][0]["class"] == "bed"


def test_observation_round_trip(repo, bed_room, tmp_path, rng):
    observed = render_orientation_pano(bed_room, 128, 64)
    detections = [Detection.from_box(ObjectClass.BED, 10.0, 30.0, 40.0, 60.0, 128),
                  Detection.from_box(ObjectClass.CHAIR, 120.0, 35.0, 136.0, 50.0, 128, score=0.5)]
    crops = [rng.random((16, 16)), rng.random((16, 16))]
    repo.write_room(tmp_path / "room", bed_room, observed, detections, crops)
    labels, dets, back = repo.read_observation(tmp_path / "room")
    assert np.array_equal(labels.labels, observed.labels)
    assert dets == detections
    for crop, read in zip(crops, back):
        assert np.max(np.abs(crop - read)) <= 0.5 / 255.0 + 1e-12


def test_crop_count_mismatch(repo, bed_room, tmp_path):
    observed = OrientationPanorama(labels=np.ones((4, 8), dtype=np.uint8))
    detection = Detection.from_box(ObjectClass.BED, 0.0, 0.0, 2.0, 2.0, 8)
    with pytest.raises(ValueError):
        repo.write_room(tmp_path, bed_room, observed, [detection], [])


def test_missing_file(repo, models, tmp_path):
    with pytest.raises(DatasetIOError) as info:
        repo.read_scene(tmp_path / "nope.json", models)
    assert info.value.exit_code == 4
    with pytest.raises(DatasetIOError):
        repo.read_observation(tmp_path)


def test_wrong_image_mode(repo, tmp_path):
    repo.write_gray(tmp_path / "observed.png", np.zeros((4, 8)))
    with pytest.raises(DatasetIOError):
        repo.read_observation(tmp_path)


def test_invalid_scene(repo, models, tmp_path):
    (tmp_path / "scene.json").write_text('{"camera": {"height": 1.7}, "lambda": -1, "walls": []}')
    with pytest.raises(DatasetIOError):
        repo.read_scene(tmp_path / "scene.json", models)


def test_unknown_model(repo, bed_room, models, tmp_path):
    repo.write_scene(tmp_path / "scene.json", bed_room)
    payload = json.loads((tmp_path / "scene.json").read_text())
    payload["objects"][0]["model_id"] = "bed_bunk"
    (tmp_path / "scene.json").write_text(json.dumps(payload))
    with pytest.raises(UnknownModelError):
        repo.read_scene(tmp_path / "scene.json", models)


def test_class_mismatch(repo, bed_room, models, tmp_path):
    repo.write_scene(tmp_path / "scene.json", bed_room)
    payload = json.loads((tmp_path / "scene.json").read_text())
    payload["objects"][0]["class"] = "chair"
    (tmp_path / "scene.json").write_text(json.dumps(payload))
    with pytest.raises(SceneValidationError):
        repo.read_scene(tmp_path / "scene.json", models)


def test_rows_header(repo, tmp_path):
    rows = [PosteriorRow(seed=0, scale=1.1, e_s=0.1, e_o=0.2, e_ow=0.3, e_oo=0.0, log_posterior=-0.6)]
    repo.write_rows(tmp_path / "posterior.csv", rows)
    header, first = (tmp_path / "posterior.csv").read_text().splitlines()
    assert header == "seed,lambda,e_s,e_o,e_ow,e_oo,log_posterior"
    assert first.startswith("0,1.1,")

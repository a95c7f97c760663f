import csv
import json
import re

import pytest

from panolayout.dependencies import get_dataset_repository
from panolayout.main import main

SMALL = {
    "dataset": {"crop_size": 32, "hill_climb_steps": 5},
    "render": {"pano_width": 256, "pano_height": 128, "model_view_size": 32},
    "layout": {"view_width": 64, "view_height": 128},
    "crf": {"auxiliary_count": 2, "iterations": 3},
    "sampler": {"epochs": 1, "samples_per_epoch": 2},
}


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(SMALL))
    return path


def test_bad_config_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"layout": {"overlap": 20}}))
    assert main(["generate", "--out", str(tmp_path / "d"), "--config", str(path)]) == 2


def test_missing_config_exits_4(tmp_path):
    assert main(["generate", "--out", str(tmp_path / "d"), "--config", str(tmp_path / "none.json")]) == 4


def test_generate_is_reproducible(tmp_path, config_file):
    for name in ("a", "b"):
        assert main(["generate", "--out", str(tmp_path / name), "--rooms", "1", "--seed", "4",
                     "--config", str(config_file)]) == 0
    scene = "room_000/scene.json"
    assert (tmp_path / "a" / scene).read_bytes() == (tmp_path / "b" / scene).read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["master_seed"] == 4 and len(manifest["rooms"]) == 1


def _run_suite(root, config_file, seed="0"):
    data, results = root / "data", root / "results"
    assert main(["generate", "--out", str(data), "--rooms", "1", "--seed", seed, "--config", str(config_file)]) == 0
    assert main(["estimate", str(data), "--out", str(results), "--seed", seed, "--config", str(config_file)]) == 0
    assert main(["eval", str(data), str(results)]) == 0
    return results


@pytest.mark.slow
def test_generate_estimate_eval(tmp_path, config_file, capsys):
    results = _run_suite(tmp_path, config_file)
    assert json.loads((results / "errors.json").read_text()) == []
    for name in ("init.json", "final.json", "poses.json", "posterior.csv", "trace.csv"):
        assert (results / "room_000" / name).is_file()
    rows = list(csv.DictReader((results / "errors.csv").open()))
    assert {r["stage"] for r in rows} == {"init", "final"}
    assert all(r["room_id"] == "room_000" for r in rows)
    report = (results / "report.txt").read_text()
    assert report in capsys.readouterr().out
    heights = re.findall(r"^(init|final)\s+(\d+\.\d) \+- ", report, re.MULTILINE)
    assert [stage for stage, _ in heights] == ["init", "final"]
    assert all(float(value) >= 0.0 for _, value in heights)
    assert "Rooms without estimates" not in report


@pytest.mark.slow
def test_runs_are_byte_identical(tmp_path, config_file):
    a = _run_suite(tmp_path / "a", config_file, seed="6")
    b = _run_suite(tmp_path / "b", config_file, seed="6")
    for name in ("report.txt", "errors.csv", "room_000/final.json", "room_000/trace.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_missing_dataset_exits_4(tmp_path):
    assert main(["estimate", str(tmp_path / "nothing"), "--out", str(tmp_path / "r")]) == 4


def test_floormap_and_render(tmp_path, bed_room, config_file):
    scene = tmp_path / "scene.json"
    get_dataset_repository().write_scene(scene, bed_room)
    assert main(["floormap", str(scene), "--out", str(tmp_path / "room.svg")]) == 0
    assert (tmp_path / "room.svg").read_text().lstrip().startswith("<svg")
    assert main(["render", str(scene), "--out", str(tmp_path / "render"), "--config", str(config_file)]) == 0
    assert (tmp_path / "render" / "orientation.png").is_file()
    assert (tmp_path / "render" / "mask.png").is_file()


def test_render_needs_a_scene(tmp_path):
    assert main(["render", "--out", str(tmp_path)]) == 2

import numpy as np
import pytest

from panolayout.config import (
    CrfConfig,
    DatasetConfig,
    LayoutConfig,
    NoiseConfig,
    RenderConfig,
    RunConfig,
    SamplerConfig,
)
from panolayout.dependencies import get_model_library, get_room_templates, get_template_env
from panolayout.models import (
    CameraModel,
    Footprint,
    ObjectClass,
    SceneObject,
    SceneParameters,
    Wall,
)
from panolayout.pose.library import build_pose_library

SQUARE = [(-2.0, -2.0), (2.0, -2.0), (2.0, 2.0), (-2.0, 2.0)]
L_ROOM = [(-2.0, -2.0), (3.0, -2.0), (3.0, 1.0), (1.0, 1.0), (1.0, 3.0), (-2.0, 3.0)]


def make_scene(vertices, height: float = 2.5, scale: float = 1.0, objects=(), camera_height: float = 1.70):
    n = len(vertices)
    walls = tuple(Wall.from_segment(vertices[i], vertices[(i + 1) % n], height) for i in range(n))
    return SceneParameters(camera=CameraModel(height=camera_height), scale=scale, walls=walls,
                           objects=tuple(objects))


def make_object(models, model_id: str, position, orientation: float) -> SceneObject:
    spec = models[model_id]
    return SceneObject(category=spec.category, position=tuple(position), orientation=orientation,
                       footprint=spec.footprint, model_id=model_id)


def unit_square(position, orientation: float = 0.0, category: ObjectClass = ObjectClass.CHAIR) -> SceneObject:
    return SceneObject(category=category, position=tuple(position), orientation=orientation,
                       footprint=Footprint(width=1.0, depth=1.0), model_id="unit")


@pytest.fixture(scope="session")
def models():
    return get_model_library()


@pytest.fixture(scope="session")
def templates():
    return get_room_templates()


@pytest.fixture
def template_env():
    return get_template_env()


@pytest.fixture
def square_room():
    return make_scene(SQUARE)


@pytest.fixture
def l_room():
    return make_scene(L_ROOM)


@pytest.fixture
def bed_room(models):
    """Square room, metric walls of 2.7 m, one bed against the bottom wall facing into the room."""

    bed = make_object(models, "bed_single", (0.3, -0.9), 90.0)
    return make_scene(SQUARE, height=2.7, scale=2.7 / 2.5, objects=[bed])


@pytest.fixture(scope="session")
def chair_plant_library(models):
    return build_pose_library(models, size=32, categories=[ObjectClass.CHAIR, ObjectClass.PLANT])


@pytest.fixture
def small_config():
    return RunConfig(
        dataset=DatasetConfig(rooms=1, master_seed=3, hill_climb_steps=10, crop_size=32),
        noise=NoiseConfig(label_flip=0.0, jitter_px=0.0),
        render=RenderConfig(pano_width=256, pano_height=128, model_view_size=32),
        layout=LayoutConfig(view_width=64, view_height=128),
        crf=CrfConfig(auxiliary_count=4, iterations=5),
        sampler=SamplerConfig(epochs=1, samples_per_epoch=2),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0)

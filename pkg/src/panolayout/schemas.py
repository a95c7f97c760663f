"""
schemas.py

Wire formats for everything panolayout writes into a run directory. The domain types in
`models.py` are convenient to compute with; the schemas here are what the files look
like, so the two can evolve separately and every artifact is validated on the way in.

Overview:
---------
- `SceneFile`: scene / hypothesis JSON shared by every CLI stage
  `{camera:{height}, lambda, walls:[{x1,y1,x2,y2,height}], objects:[{class,x,y,yaw_deg,model_id}]}`.
- `DetectionRecord`: one row of a detection JSON list, plus the observed crop it refers to.
- `DatasetManifest` / `ManifestEntry`: the room list written by `generate`.
- `PoseLibraryRow`: one row of the pose library manifest written by `render --library`.
- `PosteriorRow` / `TraceRow`: CSV rows for scored hypotheses and sampler traces.
- `ErrorRow`, `RoomFailure`: evaluation rows and recorded per-room failures.

Dependencies:
-------------
- Pydantic (for schema modeling and data validation)
"""

from typing import Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field

from panolayout.exceptions import SceneValidationError, UnknownModelError
from panolayout.models import (
    CameraModel,
    Detection,
    ModelSpec,
    ObjectClass,
    SceneObject,
    SceneParameters,
    Wall,
)


class CameraRecord(BaseModel):
    height: float = Field(gt=0.0)


class WallRecord(BaseModel):
    x1: float
    y1: float
    x2: float
    y2: float
    height: float = Field(gt=0.0)


class ObjectRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    category: ObjectClass = Field(alias="class")
    x: float
    y: float
    yaw_deg: float
    model_id: str


class SceneFile(BaseModel):
    """
    Scene interchange format (meters, degrees).

    Attributes:
        camera (CameraRecord): Camera height above the floor.
        scale (float): Global scale, serialized as `lambda`.
        walls (list[WallRecord]): Counter-clockwise wall segments.
        objects (list[ObjectRecord]): Objects with class, position, yaw and model id.
    """

    model_config = ConfigDict(populate_by_name=True)

    camera: CameraRecord
    scale: float = Field(alias="lambda", gt=0.0)
    walls: list[WallRecord]
    objects: list[ObjectRecord] = []

    @classmethod
    def from_scene(cls, scene: SceneParameters) -> "SceneFile":
        walls = []
        for w in scene.walls:
            s, e = w.start, w.end
            walls.append(WallRecord(x1=float(s[0]), y1=float(s[1]), x2=float(e[0]), y2=float(e[1]), height=w.height))
        objects = [
            ObjectRecord(category=o.category, x=o.position[0], y=o.position[1], yaw_deg=o.orientation, model_id=o.model_id)
            for o in scene.objects
        ]
        return cls(camera=CameraRecord(height=scene.camera.height), scale=scene.scale, walls=walls, objects=objects)

    def to_scene(self, models: Mapping[str, ModelSpec]) -> SceneParameters:
        """
        Rebuild domain parameters; object footprints come from the model library.

        Raises:
            UnknownModelError: If an object references a model the library lacks.
            SceneValidationError: If a wall segment is not axis-aligned.
        """

        walls = tuple(Wall.from_segment((w.x1, w.y1), (w.x2, w.y2), w.height) for w in self.walls)
        objects = []
        for o in self.objects:
            spec = models.get(o.model_id)
            if spec is None:
                raise UnknownModelError(f"unknown model_id {o.model_id!r}")
            if spec.category != o.category:
                raise SceneValidationError(f"model {o.model_id!r} is a {spec.category.value}, not a {o.category.value}")
            objects.append(SceneObject(category=o.category, position=(o.x, o.y), orientation=o.yaw_deg,
                                       footprint=spec.footprint, model_id=o.model_id))
        return SceneParameters(camera=CameraModel(height=self.camera.height), scale=self.scale,
                               walls=walls, objects=tuple(objects))

    def dump(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2) + "\n"


class DetectionRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    category: ObjectClass = Field(alias="class")
    x0: float
    y0: float
    x1: float
    y1: float
    score: float = Field(1.0, ge=0.0, le=1.0)
    crop: Optional[str] = None

    @classmethod
    def from_detection(cls, d: Detection, crop: Optional[str] = None) -> "DetectionRecord":
        x0, y0, x1, y1 = d.box
        return cls(category=d.category, x0=x0, y0=y0, x1=x1, y1=y1, score=d.score, crop=crop)

    def to_detection(self, pano_width: int) -> Detection:
        return Detection.from_box(self.category, self.x0, self.y0, self.x1, self.y1, pano_width, self.score)


class ManifestEntry(BaseModel):
    room_id: str
    template: str
    seed: int
    wall_height: float
    scene: str
    observed: str
    detections: str


class DatasetManifest(BaseModel):
    master_seed: int
    pano_width: int
    pano_height: int
    config: dict
    rooms: list[ManifestEntry]


class PoseRecord(BaseModel):
    yaw: float
    pitch: float


class PoseLibraryRow(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    category: ObjectClass = Field(alias="class")
    model_id: str
    pose: PoseRecord
    image_path: str


class PosteriorRow(BaseModel):
    seed: int
    scale: float = Field(serialization_alias="lambda")
    e_s: float
    e_o: float
    e_ow: float
    e_oo: float
    log_posterior: float


class TraceRow(BaseModel):
    epoch: int
    index: int
    seed: int
    scale: float = Field(serialization_alias="lambda")
    e_s: float
    e_o: float
    e_ow: float
    e_oo: float
    log_posterior: float


class ErrorRow(BaseModel):
    """One matched (or missed) ground-truth object in the evaluation table."""

    room_id: str
    stage: str
    category: ObjectClass
    matched: bool
    position_error_cm: Optional[float] = None
    orientation_error_deg: Optional[float] = None


class RoomFailure(BaseModel):
    room_id: str
    error: str
    message: str

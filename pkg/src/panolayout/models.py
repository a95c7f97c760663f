"""
models.py

Domain value types for panolayout. Everything here is a frozen pydantic model; models
that hold numpy arrays mark them read-only.

Overview:
---------
- Scene geometry: `CameraModel`, `Wall`, `SceneObject`, `SceneParameters`, `RoomTemplate`.
- Panorama geometry: `SphericalDirection`, `PerspectiveView`.
- Images: `OrientationPanorama` (label codes), `RenderedModelView` (grayscale render).
- Perception: `ViewCloud`, `Detection`, `ObservedBundle`.
- Pose space: `PoseLabel` over a 40 x 9 yaw/pitch grid.
- Scoring: `PosteriorBreakdown`.
- Model library: `Primitive`, `ModelSpec`.

Coordinates: floor plane z=0, camera at the origin, azimuth measured from +x toward +y.
Walls of a polygon are listed counter-clockwise and their normals point into the room.
"""

from enum import Enum
from typing import Annotated, Literal, Mapping, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from shapely.geometry import Polygon

from panolayout.exceptions import SceneValidationError
from panolayout.utils import unit_vector, wrap_degrees

REFERENCE_WALL_HEIGHT = 2.5

# Label codes of an orientation panorama
LABEL_MASKED = 0
LABEL_WALL_X = 1
LABEL_WALL_Y = 2
LABEL_HORIZONTAL = 3

YAW_STEP = 9.0
PITCH_STEP = 5.0
N_YAW = 40
N_PITCH = 9
N_LABELS = N_YAW * N_PITCH


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


class _FrozenArrays(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class ObjectClass(str, Enum):
    BED = "bed"
    CHAIR = "chair"
    TV = "tv"
    PLANT = "plant"

    @property
    def has_orientation(self) -> bool:
        return self is not ObjectClass.PLANT


class CameraModel(_Frozen):
    """Panorama center. `position` is always the origin of scene coordinates."""

    position: tuple[float, float] = (0.0, 0.0)
    height: float = Field(1.70, gt=0.0)

    @field_validator("position")
    @classmethod
    def _at_origin(cls, v: tuple[float, float]) -> tuple[float, float]:
        if v != (0.0, 0.0):
            raise ValueError("camera position is the scene origin")
        return v


class Wall(_Frozen):
    """
    One straight wall segment.

    Attributes:
        center (tuple[float, float]): Midpoint on the floor plane.
        orientation (float): Angle of the wall line, 0 (along x) or 90 (along y).
        normal (tuple[float, float]): Unit normal pointing into the room.
        length (float): Segment length in meters.
        height (float): Wall height in meters.
    """

    center: tuple[float, float]
    orientation: float
    normal: tuple[float, float]
    length: float = Field(gt=0.0)
    height: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _check_normal(self) -> "Wall":
        if self.orientation not in (0.0, 90.0):
            raise ValueError(f"wall orientation {self.orientation} is not a Manhattan direction")
        n = np.asarray(self.normal)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError(f"wall normal {self.normal} is not unit length")
        if abs(float(np.dot(n, unit_vector(self.orientation)))) > 1e-9:
            raise ValueError(f"wall normal {self.normal} not perpendicular to orientation {self.orientation}")
        return self

    @classmethod
    def from_segment(cls, start, end, height: float) -> "Wall":
        """Build the wall running from `start` to `end` of a counter-clockwise polygon."""

        p, q = np.asarray(start, dtype=float), np.asarray(end, dtype=float)
        d = q - p
        length = float(np.hypot(*d))
        if length <= 0.0:
            raise SceneValidationError(f"zero-length wall at {tuple(p)}")
        d = d / length
        if abs(d[0]) > 1e-9 and abs(d[1]) > 1e-9:
            raise SceneValidationError(f"wall {tuple(p)} -> {tuple(q)} is not axis-aligned")
        # snap to the axis so the normal is exact
        d = np.round(d)
        normal = (float(-d[1]) + 0.0, float(d[0]) + 0.0)
        orientation = 0.0 if abs(d[0]) > 0.5 else 90.0
        mid = (p + q) / 2.0
        return cls(center=(float(mid[0]), float(mid[1])), orientation=orientation,
                   normal=normal, length=length, height=height)

    @property
    def direction(self) -> np.ndarray:
        """Traversal direction (normal rotated by -90 degrees)."""
        return np.array([self.normal[1], -self.normal[0]])

    @property
    def start(self) -> np.ndarray:
        return np.asarray(self.center) - self.direction * self.length / 2.0

    @property
    def end(self) -> np.ndarray:
        return np.asarray(self.center) + self.direction * self.length / 2.0

    @property
    def label(self) -> int:
        """Orientation-panorama code of this wall's surface."""
        return LABEL_WALL_X if abs(self.normal[0]) > 0.5 else LABEL_WALL_Y

    def scaled(self, factor: float, height: Optional[float] = None) -> "Wall":
        return Wall(
            center=(self.center[0] * factor, self.center[1] * factor),
            orientation=self.orientation,
            normal=self.normal,
            length=self.length * factor,
            height=self.height if height is None else height,
        )


class Footprint(_Frozen):
    """Oriented floor rectangle: `depth` along the facing direction, `width` across it."""

    width: float = Field(gt=0.0)
    depth: float = Field(gt=0.0)


class SceneObject(_Frozen):
    """
    A piece of furniture on the floor.

    Attributes:
        category (ObjectClass): bed, chair, tv or plant.
        position (tuple[float, float]): Footprint center (m).
        orientation (float): Facing yaw in degrees, wrapped to [0, 360).
        footprint (Footprint): Oriented rectangle from the model library.
        model_id (str): Key into the model library.
    """

    category: ObjectClass
    position: tuple[float, float]
    orientation: float
    footprint: Footprint
    model_id: str

    @field_validator("orientation")
    @classmethod
    def _wrap(cls, v: float) -> float:
        return wrap_degrees(float(v))

    @property
    def normal(self) -> np.ndarray:
        return unit_vector(self.orientation)

    def footprint_polygon(self) -> Polygon:
        """Footprint corners as a shapely polygon in scene coordinates."""

        n = self.normal
        s = np.array([-n[1], n[0]])
        c = np.asarray(self.position)
        hd, hw = self.footprint.depth / 2.0, self.footprint.width / 2.0
        corners = [c + n * hd + s * hw, c - n * hd + s * hw, c - n * hd - s * hw, c + n * hd - s * hw]
        return Polygon(corners)

    def moved(self, position=None, orientation: Optional[float] = None, model_id: Optional[str] = None,
              footprint: Optional[Footprint] = None) -> "SceneObject":
        return SceneObject(
            category=self.category,
            position=self.position if position is None else (float(position[0]), float(position[1])),
            orientation=self.orientation if orientation is None else orientation,
            footprint=self.footprint if footprint is None else footprint,
            model_id=self.model_id if model_id is None else model_id,
        )


class SceneParameters(_Frozen):
    """
    A full room hypothesis: camera, global scale, wall polygon and objects.

    Construction checks walls and heights only. Sampler proposals may move objects out of
    the room and are scored, not rejected; call `check_invariants()` for the polygon and
    containment checks.
    """

    camera: CameraModel = CameraModel()
    scale: float = Field(1.0, gt=0.0)
    walls: tuple[Wall, ...]
    objects: tuple[SceneObject, ...] = ()

    @field_validator("walls")
    @classmethod
    def _non_empty(cls, v: tuple[Wall, ...]) -> tuple[Wall, ...]:
        if len(v) < 2:
            raise ValueError("a scene needs at least two walls")
        return v

    @property
    def wall_height(self) -> float:
        return self.walls[0].height

    def vertices(self) -> np.ndarray:
        """(n, 2) polygon corners: corner i is where wall i starts."""
        return np.array([w.start for w in self.walls])

    def polygon(self) -> Polygon:
        return Polygon(self.vertices())

    def segments(self) -> np.ndarray:
        """(n, 2, 2) wall segments as start/end pairs."""
        return np.array([[w.start, w.end] for w in self.walls])

    def with_scale(self, scale: float) -> "SceneParameters":
        """
        Rescale the scene about the camera to a new global scale.

        Walls and object positions move by scale / self.scale, wall height becomes 2.5 m x scale.
        Object footprints keep their metric size.
        """

        factor = scale / self.scale
        walls = tuple(w.scaled(factor, height=REFERENCE_WALL_HEIGHT * scale) for w in self.walls)
        objects = tuple(o.moved(position=(o.position[0] * factor, o.position[1] * factor)) for o in self.objects)
        return self.model_copy(update={"scale": scale, "walls": walls, "objects": objects})

    def with_objects(self, objects) -> "SceneParameters":
        return self.model_copy(update={"objects": tuple(objects)})

    def check_invariants(self) -> "SceneParameters":
        """
        Check the closed, simple, Manhattan polygon and object containment.

        Raises:
            SceneValidationError: Naming the first violated invariant.
        """

        n = len(self.walls)
        if n < 4:
            raise SceneValidationError(f"wall polygon has {n} walls, need at least 4")
        for i, w in enumerate(self.walls):
            nxt = self.walls[(i + 1) % n]
            if np.linalg.norm(w.end - nxt.start) > 1e-6:
                raise SceneValidationError(f"wall {i} does not meet wall {(i + 1) % n}: polygon not closed")
            if w.orientation == nxt.orientation:
                raise SceneValidationError(f"walls {i} and {(i + 1) % n} are parallel neighbours")
        poly = self.polygon()
        if not poly.is_valid:
            raise SceneValidationError("wall polygon is self-intersecting")
        if not poly.exterior.is_ccw:
            raise SceneValidationError("wall polygon must be counter-clockwise")
        for j, obj in enumerate(self.objects):
            if not poly.contains(obj.footprint_polygon().centroid):
                raise SceneValidationError(f"object {j} ({obj.category.value}) lies outside the walls")
        return self


class ObjectSlot(_Frozen):
    category: ObjectClass
    min_count: int = Field(0, ge=0)
    max_count: int = Field(1, ge=0)

    @model_validator(mode="after")
    def _range(self) -> "ObjectSlot":
        if self.max_count < self.min_count:
            raise ValueError(f"slot {self.category.value}: max_count < min_count")
        return self


class RoomTemplate(_Frozen):
    """A base room shape: counter-clockwise corners around the camera, plus object slots."""

    name: str
    vertices: tuple[tuple[float, float], ...]
    slots: tuple[ObjectSlot, ...] = ()

    @model_validator(mode="after")
    def _check_polygon(self) -> "RoomTemplate":
        n = len(self.vertices)
        if n < 4:
            raise SceneValidationError(f"template {self.name!r}: {n} corners, need at least 4")
        for i in range(n):
            p, q = np.asarray(self.vertices[i]), np.asarray(self.vertices[(i + 1) % n])
            d = q - p
            if np.allclose(d, 0.0):
                raise SceneValidationError(f"template {self.name!r}: repeated corner {tuple(p)} (polygon open)")
            if abs(d[0]) > 1e-9 and abs(d[1]) > 1e-9:
                raise SceneValidationError(f"template {self.name!r}: edge {i} is not axis-aligned")
        poly = Polygon(self.vertices)
        if not poly.is_valid:
            raise SceneValidationError(f"template {self.name!r}: polygon is self-intersecting")
        if not poly.exterior.is_ccw:
            raise SceneValidationError(f"template {self.name!r}: corners must be counter-clockwise")
        return self


class SphericalDirection(_Frozen):
    azimuth: float = Field(ge=0.0, lt=360.0)
    elevation: float = Field(ge=-90.0, le=90.0)

    @classmethod
    def of(cls, azimuth: float, elevation: float) -> "SphericalDirection":
        return cls(azimuth=wrap_degrees(float(azimuth)), elevation=float(np.clip(elevation, -90.0, 90.0)))

    def vector(self) -> np.ndarray:
        az, el = np.deg2rad(self.azimuth), np.deg2rad(self.elevation)
        return np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])


class PerspectiveView(_Frozen):
    """Pinhole view with zero roll and pitch, principal point at the image center."""

    yaw_center: float
    fov: float = Field(gt=0.0, lt=180.0)
    width: int = Field(gt=0)
    height: int = Field(gt=0)

    @property
    def focal(self) -> float:
        return (self.width / 2.0) / np.tan(np.deg2rad(self.fov) / 2.0)


class OrientationPanorama(_FrozenArrays):
    """Equirectangular label map with codes 0 (masked), 1, 2 (wall normals along x / y), 3 (floor or ceiling)."""

    labels: np.ndarray

    @field_validator("labels")
    @classmethod
    def _check_labels(cls, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.ndim != 2:
            raise ValueError(f"label map must be 2-D, got shape {v.shape}")
        if v.size and (v.min() < 0 or v.max() > 3):
            raise ValueError("label codes must lie in {0, 1, 2, 3}")
        v = v.astype(np.uint8)
        v.setflags(write=False)
        return v

    @property
    def width(self) -> int:
        return int(self.labels.shape[1])

    @property
    def height(self) -> int:
        return int(self.labels.shape[0])


class PoseLabel(_Frozen):
    """A point of the 40 x 9 pose grid: yaw step 9 deg, pitch step 5 deg (0..40)."""

    yaw: float
    pitch: float

    @model_validator(mode="after")
    def _on_grid(self) -> "PoseLabel":
        y, p = self.yaw / YAW_STEP, self.pitch / PITCH_STEP
        if not (0.0 <= self.yaw < 360.0) or abs(y - round(y)) > 1e-9:
            raise ValueError(f"yaw {self.yaw} is not on the {YAW_STEP} deg grid")
        if not (0 <= round(p) < N_PITCH) or abs(p - round(p)) > 1e-9:
            raise ValueError(f"pitch {self.pitch} is not on the {PITCH_STEP} deg grid")
        return self

    @property
    def index(self) -> int:
        return int(round(self.yaw / YAW_STEP)) * N_PITCH + int(round(self.pitch / PITCH_STEP))

    @classmethod
    def from_index(cls, index: int) -> "PoseLabel":
        if not 0 <= index < N_LABELS:
            raise ValueError(f"pose index {index} outside [0, {N_LABELS})")
        return cls(yaw=(index // N_PITCH) * YAW_STEP, pitch=(index % N_PITCH) * PITCH_STEP)

    @classmethod
    def quantize(cls, yaw: float, pitch: float) -> "PoseLabel":
        """Nearest grid label; pitch is clipped to the grid range."""

        iy = int(np.round(wrap_degrees(yaw) / YAW_STEP)) % N_YAW
        ip = int(np.clip(np.round(pitch / PITCH_STEP), 0, N_PITCH - 1))
        return cls(yaw=iy * YAW_STEP, pitch=ip * PITCH_STEP)


class RenderedModelView(_FrozenArrays):
    model_id: str
    pose: PoseLabel
    intensity: np.ndarray
    silhouette: np.ndarray

    @model_validator(mode="after")
    def _silhouette_covers(self) -> "RenderedModelView":
        if self.intensity.shape != self.silhouette.shape:
            raise ValueError("intensity and silhouette shapes differ")
        if np.any((self.intensity > 0) & ~self.silhouette):
            raise ValueError("non-background pixels outside the silhouette")
        return self

    @property
    def width(self) -> int:
        return int(self.intensity.shape[1])

    @property
    def height(self) -> int:
        return int(self.intensity.shape[0])


class ViewCloud(_FrozenArrays):
    """
    Floor-contact points of one perspective view.

    Attributes:
        view (PerspectiveView): The view the points were extracted from.
        points (np.ndarray): (n, 3) points on z=0, in the view's own scale.
        provenance (np.ndarray): (n, 2) integer pano pixel (column, row) per point.
        wall_top_ratio (Optional[float]): Median wall-height / camera-height ratio seen by the view.
    """

    view: PerspectiveView
    points: np.ndarray
    provenance: np.ndarray
    wall_top_ratio: Optional[float] = None

    @model_validator(mode="after")
    def _check(self) -> "ViewCloud":
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise ValueError(f"points must be (n, 3), got {self.points.shape}")
        if len(self.points) != len(self.provenance):
            raise ValueError("one provenance pixel per point")
        if len(self.points) and np.any(np.abs(self.points[:, 2]) > 1e-9):
            raise ValueError("floor points must lie on z=0")
        return self

    def scaled(self, factor: float) -> "ViewCloud":
        return self.model_copy(update={"points": self.points * factor})


class Detection(_Frozen):
    """
    One detected object in panorama pixels.

    The box may wrap around the seam: `x1` can exceed the pano width, in which case the
    covered columns are taken modulo the width.
    """

    category: ObjectClass
    box: tuple[float, float, float, float]
    bearing: float
    score: float = Field(1.0, ge=0.0, le=1.0)

    @classmethod
    def from_box(cls, category: ObjectClass, x0: float, y0: float, x1: float, y1: float,
                 pano_width: int, score: float = 1.0) -> "Detection":
        bearing = wrap_degrees(((x0 + x1) / 2.0) / pano_width * 360.0)
        return cls(category=category, box=(x0, y0, x1, y1), bearing=bearing, score=score)


class ObservedBundle(_FrozenArrays):
    """
    Everything inferred from one observed panorama.

    `crops` maps a hypothesis object index to the observed grayscale crop that object
    explains; objects without a crop contribute no orientation cost.
    """

    observed: OrientationPanorama
    mask: np.ndarray
    detections: tuple[Detection, ...] = ()
    crops: Mapping[int, np.ndarray] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> "ObservedBundle":
        if self.mask.shape != self.observed.labels.shape:
            raise ValueError("observation mask and panorama differ in shape")
        return self


class PosteriorBreakdown(_Frozen):
    e_s: float = Field(ge=0.0)
    e_o: float = Field(ge=0.0)
    e_ow: float = Field(ge=0.0)
    e_oo: float = Field(ge=0.0)
    log_posterior: float

    @model_validator(mode="after")
    def _finite(self) -> "PosteriorBreakdown":
        values = (self.e_s, self.e_o, self.e_ow, self.e_oo, self.log_posterior)
        if not all(np.isfinite(values)):
            raise ValueError(f"non-finite posterior component in {values}")
        return self


class BoxPrimitive(_Frozen):
    kind: Literal["box"] = "box"
    center: tuple[float, float, float]
    size: tuple[float, float, float]
    albedo: float = Field(0.7, gt=0.0, le=1.0)


class CylinderPrimitive(_Frozen):
    kind: Literal["cylinder"] = "cylinder"
    center: tuple[float, float]
    z0: float
    z1: float
    radius: float = Field(gt=0.0)
    albedo: float = Field(0.7, gt=0.0, le=1.0)


class SpherePrimitive(_Frozen):
    kind: Literal["sphere"] = "sphere"
    center: tuple[float, float, float]
    radius: float = Field(gt=0.0)
    albedo: float = Field(0.7, gt=0.0, le=1.0)


Primitive = Annotated[Union[BoxPrimitive, CylinderPrimitive, SpherePrimitive], Field(discriminator="kind")]


class ModelSpec(_Frozen):
    """A library model: primitives in a frame facing +x, standing on z=0, centered on its footprint."""

    model_id: str
    category: ObjectClass
    footprint: Footprint
    primitives: tuple[Primitive, ...]

    @property
    def height(self) -> float:
        tops = []
        for p in self.primitives:
            if isinstance(p, BoxPrimitive):
                tops.append(p.center[2] + p.size[2] / 2.0)
            elif isinstance(p, CylinderPrimitive):
                tops.append(p.z1)
            else:
                tops.append(p.center[2] + p.radius)
        return max(tops)

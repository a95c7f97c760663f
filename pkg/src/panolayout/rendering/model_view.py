"""
model_view.py

Grayscale views of library models, used for the pose library, the auxiliary CRF images
and the observed object crops.

The camera is orthographic and sits on the +x side of the model, raised by the pitch
angle; the model turns by the yaw angle about its vertical axis, so yaw 0 shows the
model's front. The projected model is centered and scaled to fill a fixed share of the
frame, and shaded with a Lambert term under a light that lies in the camera's vertical
plane (left-right symmetric models therefore render mirror-symmetric at +yaw / -yaw).
"""

import numpy as np

from panolayout.models import ModelSpec, PoseLabel, RenderedModelView, SceneObject
from panolayout.rendering.primitives import get_model, intersect_primitives, model_surface_points, to_model_frame
from panolayout.utils import wrap_degrees

AMBIENT = 0.3
DIFFUSE = 0.7
MAX_PITCH = 40.0


def _camera_axes(pitch_deg: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xi = np.deg2rad(pitch_deg)
    view = -np.array([np.cos(xi), 0.0, np.sin(xi)])
    right = np.array([0.0, 1.0, 0.0])
    up = np.array([-np.sin(xi), 0.0, np.cos(xi)])
    return view, right, up


def render_model_pose(spec: ModelSpec, yaw: float, pitch: float, size: int = 64, fill: float = 0.8,
                      scale: float = 1.0, offset: tuple[float, float] = (0.0, 0.0)) -> tuple[np.ndarray, np.ndarray]:
    """
    Render `spec` at a continuous (yaw, pitch).

    Args:
        spec (ModelSpec): Model to draw.
        yaw (float): Rotation of the model about z, degrees; 0 faces the camera.
        pitch (float): Camera elevation above the model's horizontal plane, degrees.
        size (int): Output side length in pixels.
        fill (float): Share of the frame the larger projected extent occupies.
        scale (float): Extra zoom factor applied on top of `fill`.
        offset (tuple[float, float]): Shift of the model in frame units (x right, y down).

    Returns:
        tuple: (intensity (size, size) float in [0, 1], silhouette (size, size) bool).
    """

    view, right, up = _camera_axes(pitch)
    pts = model_surface_points(spec)
    # rotate model by yaw into the camera frame
    t = np.deg2rad(yaw)
    c, s = np.cos(t), np.sin(t)
    world = np.stack([c * pts[:, 0] - s * pts[:, 1], s * pts[:, 0] + c * pts[:, 1], pts[:, 2]], axis=1)
    u, w = world @ right, world @ up
    extent = max(u.max() - u.min(), w.max() - w.min())
    frame = extent / (fill * scale)
    uc = (u.max() + u.min()) / 2.0 - offset[0] * frame
    wc = (w.max() + w.min()) / 2.0 + offset[1] * frame

    grid = (np.arange(size) + 0.5) / size - 0.5
    uu = uc + grid[None, :] * frame
    ww = wc - grid[:, None] * frame
    uu, ww = np.broadcast_arrays(uu, ww)
    depth = 4.0 * extent + 10.0
    origins = uu.reshape(-1, 1) * right + ww.reshape(-1, 1) * up - depth * view
    dirs = np.broadcast_to(view, origins.shape)

    o_m = to_model_frame(origins, (0.0, 0.0), yaw)
    d_m = to_model_frame(dirs, (0.0, 0.0), yaw)
    light = -0.8 * view + 0.6 * up
    light_m = to_model_frame((light / np.linalg.norm(light))[None, :], (0.0, 0.0), yaw)[0]

    t_hit, normal, albedo = intersect_primitives(spec, o_m, d_m)
    hit = np.isfinite(t_hit)
    shade = albedo * (AMBIENT + DIFFUSE * np.clip(normal @ light_m, 0.0, None))
    intensity = np.where(hit, shade, 0.0).reshape(size, size)
    return intensity, hit.reshape(size, size)


def render_model_view(library: dict[str, ModelSpec], model_id: str, pose: PoseLabel, size: int = 64,
                      fill: float = 0.8) -> RenderedModelView:
    """
    Render a library model at a grid pose.

    Raises:
        UnknownModelError: If `model_id` is not in the library.
    """

    spec = get_model(library, model_id)
    intensity, silhouette = render_model_pose(spec, pose.yaw, pose.pitch, size=size, fill=fill)
    return RenderedModelView(model_id=model_id, pose=pose, intensity=intensity, silhouette=silhouette)


def camera_relative_pose(obj: SceneObject, spec: ModelSpec, camera_height: float) -> tuple[float, float]:
    """
    Pose of an object as the panorama camera sees it.

    Relative yaw is the object's facing minus the bearing from the camera minus 180, so 0
    means the object faces the camera; pitch is the camera's elevation seen from the
    object's center, clipped to the pose grid.
    """

    x, y = obj.position
    bearing = np.rad2deg(np.arctan2(y, x))
    rel_yaw = wrap_degrees(obj.orientation - bearing - 180.0)
    dist = max(float(np.hypot(x, y)), 1e-6)
    pitch = np.rad2deg(np.arctan2(camera_height - spec.height / 2.0, dist))
    return float(rel_yaw), float(np.clip(pitch, 0.0, MAX_PITCH))


def absolute_yaw(relative_yaw: float, bearing: float) -> float:
    """Inverse of the relative-yaw convention of `camera_relative_pose`."""
    return wrap_degrees(relative_yaw + bearing + 180.0)


def render_object_crop(obj: SceneObject, library: dict[str, ModelSpec], camera_height: float,
                       size: int = 64, fill: float = 0.8) -> np.ndarray:
    """The observed crop of a scene object: its model rendered at its camera-relative pose."""

    spec = get_model(library, obj.model_id)
    yaw, pitch = camera_relative_pose(obj, spec, camera_height)
    intensity, _ = render_model_pose(spec, yaw, pitch, size=size, fill=fill)
    return intensity

"""
floor.py

Per-view floor boundary extraction.

The observed labels are first cleaned with a small majority filter. A perspective view of
the cleaned labels is then scanned column by column: the top of the lowest floor run below
the horizon marks the wall-floor boundary, so floor-labelled specks higher up the wall do
not cut the column short. The top edge of that pixel is back-projected onto z=0 for a
camera of unit height, so each view yields a floor point cloud in its own (unit) scale.
The ceiling boundary of the same column gives the wall-height / camera-height ratio.
"""

import logging
from typing import Optional

import numpy as np
from scipy import ndimage

from panolayout.exceptions import EmptyCloudError, NoFloorIntersectionError
from panolayout.geometry.projection import backproject_floor, view_pixels_to_directions, view_pixels_to_pano_pixels
from panolayout.models import LABEL_HORIZONTAL, PerspectiveView, ViewCloud

logger = logging.getLogger(__name__)


def clean_labels(labels: np.ndarray, size: int = 3) -> np.ndarray:
    """
    Majority filter over `size` x `size` neighbourhoods of a label panorama.

    Columns wrap around the seam, rows repeat at the poles. A pixel keeps its own label
    whenever that label ties for the majority. `size` below 2 returns the labels unchanged.
    """

    labels = np.asarray(labels)
    if size < 2:
        return labels.copy()
    codes = np.arange(int(labels.max()) + 1)
    votes = np.stack([ndimage.uniform_filter((labels == c).astype(float), size=size, mode=("nearest", "wrap"))
                      for c in codes])
    winner = codes[np.argmax(votes, axis=0)].astype(labels.dtype)
    own = np.take_along_axis(votes, labels[None].astype(np.intp), axis=0)[0]
    # float sums of the same few ones: allow for rounding in the tie test
    return np.where(own >= votes.max(axis=0) - 1e-9, labels, winner)


def _supported(is_floor: np.ndarray, window: int, support: float) -> np.ndarray:
    """Whether the `window` rows from each row down are mostly floor; rows past the bottom count as empty."""

    h = is_floor.shape[0]
    csum = np.vstack([np.zeros((1, is_floor.shape[1])), np.cumsum(is_floor, axis=0)])
    ends = np.minimum(np.arange(h) + window, h)
    counts = csum[ends] - csum[np.arange(h)]
    return counts / float(window) >= support


def floor_boundary_rows(view_labels: np.ndarray, window: int = 5, support: float = 0.6) -> np.ndarray:
    """
    Boundary row per column, -1 if none.

    Rows below the horizon whose next `window` rows are mostly floor form floor runs; the
    boundary is the first floor pixel of the lowest run. A column that is floor right up
    to the horizon puts its boundary on the horizon row.
    """

    h = view_labels.shape[0]
    first = int(np.ceil(h / 2.0 - 0.5))
    is_floor = view_labels == LABEL_HORIZONTAL
    is_floor[:first] = False
    mostly = _supported(is_floor, window, support)
    mostly[:first] = False
    starts = mostly & ~np.vstack([np.zeros((1, mostly.shape[1]), dtype=bool), mostly[:-1]])
    run_top = h - 1 - np.argmax(starts[::-1], axis=0)
    candidates = is_floor & (np.arange(h)[:, None] >= run_top[None, :]) & starts.any(axis=0)[None, :]
    rows = np.argmax(candidates, axis=0)
    return np.where(candidates.any(axis=0), rows, -1)


def ceiling_boundary_rows(view_labels: np.ndarray, window: int = 5, support: float = 0.6) -> np.ndarray:
    """Last supported ceiling row above the horizon per column, -1 if none."""

    flipped = view_labels[::-1]
    rows = floor_boundary_rows(flipped, window, support)
    return np.where(rows >= 0, view_labels.shape[0] - 1 - rows, -1)


def extract_ceiling_ratio(view_labels: np.ndarray, view: PerspectiveView, floor_rows: np.ndarray,
                          window: int = 5, support: float = 0.6) -> Optional[float]:
    """
    Median wall-height / camera-height ratio over columns that show both boundaries.

    For a wall at horizontal distance t the floor boundary lies at tan(-el_bottom) = h / t
    and the ceiling boundary at tan(el_top) = (H - h) / t, so H / h = 1 + tan(el_top) / tan(-el_bottom).
    """

    top_rows = ceiling_boundary_rows(view_labels, window, support)
    cols = np.nonzero((top_rows >= 0) & (floor_rows >= 0))[0]
    if len(cols) == 0:
        return None
    xs = cols + 0.5
    _, el_top = view_pixels_to_directions(view, xs, top_rows[cols] + 1.0)
    _, el_bot = view_pixels_to_directions(view, xs, floor_rows[cols].astype(float))
    keep = (el_top > 0.0) & (el_bot < 0.0)
    if not np.any(keep):
        return None
    ratios = 1.0 + np.tan(np.deg2rad(el_top[keep])) / np.tan(np.deg2rad(-el_bot[keep]))
    return float(np.median(ratios))


def extract_floor_boundary(view_labels: np.ndarray, view: PerspectiveView, pano_width: int, pano_height: int,
                           window: int = 5, support: float = 0.6, camera_height: float = 1.0) -> ViewCloud:
    """
    Floor-contact points of one view.

    Args:
        view_labels (np.ndarray): (view.height, view.width) orientation labels of the view.
        view (PerspectiveView): The view geometry.
        pano_width (int): Width of the source panorama, for provenance.
        pano_height (int): Height of the source panorama, for provenance.
        window (int): Rows below a candidate that must support it.
        support (float): Required floor share inside the window.
        camera_height (float): Height used for back-projection; 1 gives the unit scale.

    Returns:
        ViewCloud: Points on z=0 with the pano (column, row) of each boundary pixel.

    Raises:
        EmptyCloudError: If no column shows floor below the horizon.
        NoFloorIntersectionError: If every boundary sits on the horizon.
    """

    rows = floor_boundary_rows(view_labels, window, support)
    cols = np.nonzero(rows >= 0)[0]
    if len(cols) == 0:
        raise EmptyCloudError(f"view at yaw {view.yaw_center} shows no floor below the horizon")

    xs = cols + 0.5
    ys = rows[cols].astype(float)
    az, el = view_pixels_to_directions(view, xs, ys)
    below = el < -1e-9
    if not np.any(below):
        raise NoFloorIntersectionError(f"view at yaw {view.yaw_center}: floor boundary lies on the horizon")
    if not np.all(below):
        logger.debug("view %.1f: dropped %d horizon columns", view.yaw_center, int((~below).sum()))

    points = backproject_floor(az[below], el[below], camera_height)
    pc, pr = view_pixels_to_pano_pixels(view, xs[below], ys[below] + 0.5, pano_width, pano_height)
    ratio = extract_ceiling_ratio(view_labels, view, rows, window, support)
    return ViewCloud(view=view, points=points, provenance=np.stack([pc, pr], axis=1), wall_top_ratio=ratio)

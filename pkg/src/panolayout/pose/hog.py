"""
Global HOG descriptor: a 4 x 4 grid of 9-bin unsigned-gradient histograms, each cell
L2-normalized, concatenated into 144 values.
"""

import numpy as np

from panolayout.exceptions import DescriptorSizeError

GRID = 4
BINS = 9
MIN_SIDE = 16
DESCRIPTOR_SIZE = GRID * GRID * BINS
_ZERO_NORM = 1e-12


def gradients(image: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Central differences with replicated borders."""

    padded = np.pad(np.asarray(image, dtype=float), 1, mode="edge")
    gx = (padded[1:-1, 2:] - padded[1:-1, :-2]) / 2.0
    gy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) / 2.0
    return gx, gy


def hog(image: np.ndarray) -> np.ndarray:
    """
    Descriptor of a grayscale image.

    Raises:
        DescriptorSizeError: If either side is shorter than 16 pixels.
    """

    image = np.asarray(image, dtype=float)
    if image.ndim != 2 or min(image.shape) < MIN_SIDE:
        raise DescriptorSizeError(f"hog needs a 2-D image of at least {MIN_SIDE}x{MIN_SIDE}, got {image.shape}")

    gx, gy = gradients(image)
    magnitude = np.hypot(gx, gy)
    angle = np.mod(np.rad2deg(np.arctan2(gy, gx)), 180.0)
    bins = np.floor(angle / (180.0 / BINS)).astype(int) % BINS

    h, w = image.shape
    row_edges = np.linspace(0, h, GRID + 1).astype(int)
    col_edges = np.linspace(0, w, GRID + 1).astype(int)
    cell_row = np.searchsorted(row_edges, np.arange(h), side="right") - 1
    cell_col = np.searchsorted(col_edges, np.arange(w), side="right") - 1
    cell = cell_row[:, None] * GRID + cell_col[None, :]

    flat = (cell * BINS + bins).ravel()
    hist = np.bincount(flat, weights=magnitude.ravel(), minlength=DESCRIPTOR_SIZE).reshape(GRID * GRID, BINS)
    norms = np.linalg.norm(hist, axis=1, keepdims=True)
    hist = np.where(norms >= _ZERO_NORM, hist / np.where(norms >= _ZERO_NORM, norms, 1.0), 0.0)
    return hist.ravel()


def hog_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))

"""
library.py

The rendered pose library R: every library model drawn at all 360 grid poses, stored as
HOG descriptors. Provides exact k-nearest-neighbour queries and model retrieval.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from panolayout.exceptions import ConfigurationError, LibrarySizeError
from panolayout.models import N_LABELS, ModelSpec, ObjectClass, PoseLabel, RenderedModelView
from panolayout.pose.hog import hog
from panolayout.rendering.model_view import render_model_view

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Neighbor:
    index: int
    model_id: str
    label: int
    distance: float

    @property
    def pose(self) -> PoseLabel:
        return PoseLabel.from_index(self.label)


@dataclass(frozen=True)
class PoseLibrary:
    """
    Descriptor table of rendered model views.

    Attributes:
        model_ids (np.ndarray): (n,) model id per entry.
        categories (np.ndarray): (n,) class value per entry.
        labels (np.ndarray): (n,) pose label index per entry.
        descriptors (np.ndarray): (n, 144) HOG descriptors.
    """

    model_ids: np.ndarray
    categories: np.ndarray
    labels: np.ndarray
    descriptors: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    def restricted(self, category: ObjectClass) -> "PoseLibrary":
        """Entries of one class, in library order."""

        keep = self.categories == category.value
        if not np.any(keep):
            raise ConfigurationError(f"pose library has no renders of class {category.value!r}")
        return PoseLibrary(self.model_ids[keep], self.categories[keep], self.labels[keep], self.descriptors[keep])

    def descriptor(self, model_id: str, label: int) -> np.ndarray:
        hits = np.nonzero((self.model_ids == model_id) & (self.labels == label))[0]
        if len(hits) == 0:
            raise LibrarySizeError(f"no render of {model_id!r} at pose {label}")
        return self.descriptors[hits[0]]

    def model_table(self, model_id: str) -> np.ndarray:
        """(360, 144) descriptors of one model indexed by pose label."""

        rows = np.nonzero(self.model_ids == model_id)[0]
        table = np.zeros((N_LABELS, self.descriptors.shape[1]))
        table[self.labels[rows]] = self.descriptors[rows]
        return table


def iter_library_views(models: dict[str, ModelSpec], size: int = 64, fill: float = 0.8,
                       categories: Optional[list[ObjectClass]] = None) -> Iterator[RenderedModelView]:
    """Render every model of the selected classes at every grid pose, models sorted by id."""

    for model_id in sorted(models):
        spec = models[model_id]
        if categories is not None and spec.category not in categories:
            continue
        for label in range(N_LABELS):
            yield render_model_view(models, model_id, PoseLabel.from_index(label), size=size, fill=fill)


def build_pose_library(models: dict[str, ModelSpec], size: int = 64, fill: float = 0.8,
                       categories: Optional[list[ObjectClass]] = None) -> PoseLibrary:
    """Render and describe the full library (plants included; callers decide what to pose)."""

    ids, cats, labels, descs = [], [], [], []
    for view in iter_library_views(models, size, fill, categories):
        ids.append(view.model_id)
        cats.append(models[view.model_id].category.value)
        labels.append(view.pose.index)
        descs.append(hog(view.intensity))
    logger.info("pose library: %d renders of %d models", len(ids), len(set(ids)))
    return PoseLibrary(np.array(ids), np.array(cats), np.array(labels, dtype=int), np.array(descs))


def knn(query: np.ndarray, library: PoseLibrary, k: int) -> list[Neighbor]:
    """
    Exact k nearest library entries under Euclidean descriptor distance, ties by library index.

    Raises:
        LibrarySizeError: If the library holds fewer than `k` entries.
    """

    if len(library) < k:
        raise LibrarySizeError(f"library has {len(library)} renders, fewer than k={k}")
    dist = np.linalg.norm(library.descriptors - np.asarray(query)[None, :], axis=1)
    order = np.argsort(dist, kind="stable")[:k]
    return [Neighbor(int(i), str(library.model_ids[i]), int(library.labels[i]), float(dist[i])) for i in order]


def retrieve_model(query: np.ndarray, library: PoseLibrary) -> str:
    """Model id of the nearest library render."""
    return knn(query, library, 1)[0].model_id

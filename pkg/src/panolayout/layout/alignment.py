"""
alignment.py

Relative scale of the per-view floor clouds.

Neighbouring views of the ring decompose the same panorama, so a boundary pixel that
falls into the overlap of two views is seen by both: matching points by their pano column
gives exact correspondences. The per-view scales s_k (s_0 = 1) minimise

    sum over correspondences || s_a * p_a - s_b * p_b ||^2

first pairwise in closed form and chained around the ring, then jointly by linear least
squares over all ring pairs.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq

from panolayout.exceptions import UnderConstrainedError
from panolayout.models import ViewCloud

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Correspondence:
    """Point indices of two views that see the same pano columns."""

    view_a: int
    view_b: int
    index_a: np.ndarray
    index_b: np.ndarray

    def __len__(self) -> int:
        return len(self.index_a)


def _first_index_per_column(cloud: ViewCloud) -> dict[int, int]:
    out: dict[int, int] = {}
    for i, col in enumerate(cloud.provenance[:, 0]):
        out.setdefault(int(col), i)
    return out


def ring_pairs(n: int) -> list[tuple[int, int]]:
    if n < 2:
        return []
    if n == 2:
        return [(0, 1)]
    return [(k, (k + 1) % n) for k in range(n)]


def match_by_provenance(clouds: list[ViewCloud], min_correspondences: int = 10) -> list[Correspondence]:
    """
    Correspondences between ring neighbours from shared pano columns.

    Raises:
        UnderConstrainedError: If a neighbouring pair shares fewer than `min_correspondences` columns.
    """

    maps = [_first_index_per_column(c) for c in clouds]
    out = []
    for a, b in ring_pairs(len(clouds)):
        shared = sorted(set(maps[a]) & set(maps[b]))
        if len(shared) < min_correspondences:
            raise UnderConstrainedError(
                f"views {a} and {b} share {len(shared)} boundary columns, need {min_correspondences}"
            )
        out.append(Correspondence(a, b, np.array([maps[a][c] for c in shared]), np.array([maps[b][c] for c in shared])))
    return out


def pair_ratio(pa: np.ndarray, pb: np.ndarray) -> float:
    """s_b / s_a minimising sum ||p_a - r p_b||^2."""

    denom = float(np.sum(pb * pb))
    if denom <= 0.0:
        raise UnderConstrainedError("correspondences sit at the camera position")
    return float(np.sum(pa * pb)) / denom


def align_view_clouds(clouds: list[ViewCloud], correspondences: list[Correspondence],
                      min_correspondences: int = 10) -> np.ndarray:
    """
    Per-view scale factors with s_0 = 1.

    Returns:
        np.ndarray: (len(clouds),) scales; multiply view k's points by s_k.

    Raises:
        UnderConstrainedError: If a pair has too few correspondences or a view is not linked.
    """

    n = len(clouds)
    if n == 0:
        return np.zeros(0)
    scales = np.ones(n)
    if n == 1:
        return scales

    pts = [c.points[:, :2] for c in clouds]
    for corr in correspondences:
        if len(corr) < min_correspondences:
            raise UnderConstrainedError(
                f"views {corr.view_a} and {corr.view_b} have {len(corr)} correspondences, need {min_correspondences}"
            )

    # chain the closed-form ratios from view 0
    by_pair = {(c.view_a, c.view_b): c for c in correspondences}
    for k in range(n - 1):
        corr = by_pair.get((k, k + 1))
        if corr is None:
            raise UnderConstrainedError(f"no correspondences between views {k} and {k + 1}")
        scales[k + 1] = scales[k] * pair_ratio(pts[k][corr.index_a], pts[k + 1][corr.index_b])
    logger.debug("chained view scales: %s", np.array2string(scales, precision=4))

    # joint refinement over every pair, s_0 held at 1
    rows = []
    for corr in correspondences:
        pa, pb = pts[corr.view_a][corr.index_a], pts[corr.view_b][corr.index_b]
        for dim in range(2):
            block = np.zeros((len(pa), n))
            block[:, corr.view_a] += pa[:, dim]
            block[:, corr.view_b] -= pb[:, dim]
            rows.append(block)
    system = np.vstack(rows)
    rhs = -system[:, 0]
    solution, _, rank, _ = lstsq(system[:, 1:], rhs)
    if rank < n - 1:
        logger.warning("scale system has rank %d < %d; keeping chained scales", rank, n - 1)
        return scales
    scales[1:] = solution
    logger.debug("refined view scales: %s", np.array2string(scales, precision=4))
    return scales

"""
crf.py

Pose CRF over target crops and auxiliary images.

Each node is an image; its label is a pose of the 40 x 9 grid. The unary table of a node
is exp(-n) where n counts how many of its K nearest library renders carry that pose. An
edge between two images costs min(d, gamma) * ||hog_i - hog_j|| where d adds the circular
yaw difference and the pitch difference in degrees. Inside a built graph the truncated
distance is divided by gamma and the edge carries a `pairwise_weight` factor, so one edge
costs at most pairwise_weight * ||hog_i - hog_j||, well below the unary gap of up to one
between a voted and an unvoted pose.

The pairwise term is shared by every edge up to the HOG weight, so a `PairwiseCost`
object carries it once: `DensePairwiseCost` for arbitrary small label spaces (tests,
toy instances) and `PoseGridCost` for the pose grid, whose truncated L1 structure allows
a separable min-convolution instead of a full 360 x 360 minimization.
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree

from panolayout.exceptions import InstanceTooLargeError
from panolayout.models import N_LABELS, N_PITCH, N_YAW, PITCH_STEP, YAW_STEP, PoseLabel
from panolayout.pose.library import Neighbor, PoseLibrary, knn

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 10 ** 6
# small enough never to override a difference of one neighbour count
TIE_BREAK = 1e-6


def angle_distance(a: PoseLabel, b: PoseLabel, gamma: float = 20.0) -> tuple[float, float]:
    """
    Raw and truncated pose distance in degrees.

    The yaw difference is the minimal circular difference; the pitch difference is absolute.
    """

    dyaw = abs(a.yaw - b.yaw) % 360.0
    dyaw = min(dyaw, 360.0 - dyaw)
    d = dyaw + abs(a.pitch - b.pitch)
    return d, min(d, gamma)


def _grid_axis_distances() -> tuple[np.ndarray, np.ndarray]:
    iy = np.arange(N_YAW)
    dy = np.abs(iy[:, None] - iy[None, :])
    dyaw = np.minimum(dy, N_YAW - dy) * YAW_STEP
    ip = np.arange(N_PITCH)
    dpitch = np.abs(ip[:, None] - ip[None, :]) * PITCH_STEP
    return dyaw, dpitch


def pose_distance_matrix(gamma: float) -> np.ndarray:
    """(360, 360) truncated pose distance between grid labels."""

    dyaw, dpitch = _grid_axis_distances()
    d = dyaw[:, None, :, None] + dpitch[None, :, None, :]
    return np.minimum(d.reshape(N_LABELS, N_LABELS), gamma)


class DensePairwiseCost:
    """Pairwise label cost given as an explicit (L, L) matrix."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = np.asarray(matrix, dtype=float)

    @property
    def n_labels(self) -> int:
        return self.matrix.shape[0]

    def row(self, label: int) -> np.ndarray:
        return self.matrix[label]

    def min_convolve(self, h: np.ndarray, w: np.ndarray) -> np.ndarray:
        """out[e, t] = min_s h[e, s] + w[e] * C[s, t] for a batch of edges."""

        return (h[:, :, None] + w[:, None, None] * self.matrix[None, :, :]).min(axis=1)


class PoseGridCost:
    """Truncated L1 pose distance on the 40 x 9 grid, min(|dyaw|_circ + |dpitch|, gamma)."""

    def __init__(self, gamma: float = 20.0):
        self.gamma = float(gamma)
        self._dyaw, self._dpitch = _grid_axis_distances()
        self._matrix = None

    @property
    def n_labels(self) -> int:
        return N_LABELS

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = pose_distance_matrix(self.gamma)
        return self._matrix

    def row(self, label: int) -> np.ndarray:
        return self.matrix[label]

    def min_convolve(self, h: np.ndarray, w: np.ndarray) -> np.ndarray:
        # untruncated L1 transform is separable: pitch first, then circular yaw
        g = h.reshape(-1, N_YAW, N_PITCH)
        wv = w[:, None, None, None]
        g = (g[:, :, :, None] + wv * self._dpitch[None, None, :, :]).min(axis=2)
        g = (g[:, :, None, :] + wv * self._dyaw[None, :, :, None]).min(axis=1)
        g = g.reshape(-1, N_LABELS)
        return np.minimum(g, h.min(axis=1, keepdims=True) + w[:, None] * self.gamma)


@dataclass
class PoseGraph:
    """
    Pairwise CRF instance.

    Attributes:
        unary (np.ndarray): (n, L) finite unary energies.
        edges (np.ndarray): (m, 2) node pairs with i < j.
        weights (np.ndarray): (m,) non-negative edge weights (scaled HOG distances in built graphs).
        pairwise: Label cost shared by all edges.
        n_targets (int): Leading nodes that are target crops; the rest are auxiliary.
    """

    unary: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    pairwise: object
    n_targets: int = 0
    descriptors: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.unary = np.asarray(self.unary, dtype=float)
        self.edges = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.unary.ndim != 2 or self.unary.shape[1] != self.pairwise.n_labels:
            raise ValueError(f"unary table shape {self.unary.shape} does not match {self.pairwise.n_labels} labels")
        if not np.all(np.isfinite(self.unary)):
            raise ValueError("unary tables must be finite")
        if len(self.edges) != len(self.weights):
            raise ValueError("one weight per edge")
        if np.any(self.weights < 0):
            raise ValueError("edge weights must be non-negative")
        if len(self.edges) and np.any(self.edges[:, 0] >= self.edges[:, 1]):
            raise ValueError("edges must be stored as (i, j) with i < j")

    @property
    def n_nodes(self) -> int:
        return self.unary.shape[0]

    @property
    def n_labels(self) -> int:
        return self.unary.shape[1]

    def is_connected(self) -> bool:
        if self.n_nodes <= 1:
            return True
        adj = coo_matrix((np.ones(len(self.edges)), (self.edges[:, 0], self.edges[:, 1])),
                         shape=(self.n_nodes, self.n_nodes))
        n_comp, _ = connected_components(adj, directed=False)
        return n_comp == 1


def crf_energy(graph: PoseGraph, labels) -> float:
    """Sum of unaries plus weighted pairwise costs of a labeling."""

    labels = np.asarray(labels, dtype=int)
    e = float(graph.unary[np.arange(graph.n_nodes), labels].sum())
    if len(graph.edges):
        m = graph.pairwise.matrix
        e += float((graph.weights * m[labels[graph.edges[:, 0]], labels[graph.edges[:, 1]]]).sum())
    return e


def unary_from_neighbors(neighbors: list[Neighbor], n_labels: int = N_LABELS) -> np.ndarray:
    counts = np.bincount([n.label for n in neighbors], minlength=n_labels).astype(float)
    return np.exp(-counts)


def unary_energy(descriptor: np.ndarray, library: PoseLibrary, k: int = 6) -> np.ndarray:
    """
    exp(-count) per pose label, counting the node's `k` nearest library renders at that pose.

    Values lie in [exp(-k), 1].
    """

    return unary_from_neighbors(knn(descriptor, library, k))


def graph_unary(descriptor: np.ndarray, library: PoseLibrary, k: int = 6, n_labels: int = N_LABELS) -> np.ndarray:
    """
    `unary_energy` plus a TIE_BREAK-sized term that ranks labels of equal count by the
    distance of their closest neighbour, so the nearest render wins among single votes.
    """

    neighbors = knn(descriptor, library, k)
    base = unary_from_neighbors(neighbors, n_labels)
    scale = max(max(n.distance for n in neighbors), 1e-12)
    closest = np.ones(n_labels)
    for n in neighbors:
        closest[n.label] = min(closest[n.label], n.distance / scale)
    return base + TIE_BREAK * closest


def binary_energy(descriptor_i: np.ndarray, descriptor_j: np.ndarray, label_i: PoseLabel, label_j: PoseLabel,
                  gamma: float = 20.0) -> float:
    """Truncated pose distance times the Euclidean HOG distance of the two images."""

    _, d_trunc = angle_distance(label_i, label_j, gamma)
    return d_trunc * float(np.linalg.norm(np.asarray(descriptor_i) - np.asarray(descriptor_j)))


def hog_neighbor_edges(descriptors: np.ndarray, degree: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """
    Each node joined to its `degree` nearest nodes in HOG space, then minimum-spanning-tree
    edges added between the resulting components so the graph is connected.

    Returns:
        tuple: (edges (m, 2) with i < j sorted lexicographically, weights (m,)).
    """

    n = len(descriptors)
    if n <= 1:
        return np.zeros((0, 2), dtype=int), np.zeros(0)
    dist = np.linalg.norm(descriptors[:, None, :] - descriptors[None, :, :], axis=2)
    pairs = set()
    k = min(degree, n - 1)
    for i in range(n):
        d = dist[i].copy()
        d[i] = np.inf
        for j in np.argsort(d, kind="stable")[:k]:
            pairs.add((min(i, int(j)), max(i, int(j))))

    adj = coo_matrix((np.ones(len(pairs)), tuple(np.array(sorted(pairs)).T)), shape=(n, n))
    n_comp, comp = connected_components(adj, directed=False)
    if n_comp > 1:
        # scipy treats zero entries as missing edges
        mst = minimum_spanning_tree(dist + 1e-12 * (1 - np.eye(n))).tocoo()
        for i, j in zip(mst.row, mst.col):
            if comp[i] != comp[j]:
                pairs.add((min(int(i), int(j)), max(int(i), int(j))))
        logger.debug("joined %d HOG components with spanning-tree edges", n_comp)

    edges = np.array(sorted(pairs), dtype=int)
    return edges, dist[edges[:, 0], edges[:, 1]]


def build_pose_graph(targets: list[np.ndarray], auxiliary: list[np.ndarray], library: PoseLibrary,
                     k: int = 6, gamma: float = 20.0, degree: int = 4, unary_weight: float = 1.0,
                     pairwise_weight: float = 0.1) -> PoseGraph:
    """
    CRF over target descriptors T followed by auxiliary descriptors W.

    Args:
        targets (list[np.ndarray]): HOG descriptors of the target crops.
        auxiliary (list[np.ndarray]): HOG descriptors of the auxiliary images.
        library (PoseLibrary): Class-restricted rendered library R.
        k (int): Nearest library neighbours per node.
        gamma (float): Pose distance truncation, degrees.
        degree (int): HOG nearest neighbours joined per node.
        unary_weight (float): Multiplier of the unary tables.
        pairwise_weight (float): Cost of a fully truncated pose disagreement per unit of HOG distance.
    """

    descriptors = np.array(list(targets) + list(auxiliary), dtype=float)
    unary = np.array([unary_weight * graph_unary(d, library, k) for d in descriptors])
    edges, hog_distances = hog_neighbor_edges(descriptors, degree)
    weights = hog_distances * (pairwise_weight / gamma)
    return PoseGraph(unary=unary, edges=edges, weights=weights, pairwise=PoseGridCost(gamma),
                     n_targets=len(targets), descriptors=descriptors)


def brute_force_map(graph: PoseGraph) -> tuple[np.ndarray, float]:
    """
    Exact minimizer by enumeration; ties go to the lexicographically smallest labeling.

    Raises:
        InstanceTooLargeError: If labels ** nodes exceeds 10**6.
    """

    n, L = graph.n_nodes, graph.n_labels
    if L ** n > BRUTE_FORCE_LIMIT:
        raise InstanceTooLargeError(f"{L}^{n} labelings exceed the enumeration limit of {BRUTE_FORCE_LIMIT}")
    grid = np.array(list(itertools.product(range(L), repeat=n)), dtype=int).reshape(-1, n)
    energy = graph.unary[np.arange(n)[None, :], grid].sum(axis=1)
    if len(graph.edges):
        m = graph.pairwise.matrix
        for (i, j), w in zip(graph.edges, graph.weights):
            energy += w * m[grid[:, i], grid[:, j]]
    best = int(np.argmin(energy))
    return grid[best], float(energy[best])

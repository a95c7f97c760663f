"""
trws.py

Sequential tree-reweighted message passing (TRW-S) for the pose CRF.

Nodes are processed in index order: a forward pass sends messages to later neighbours, a
backward pass to earlier ones, each node scaling its reparameterized potential by
1 / max(#earlier neighbours, #later neighbours). After every iteration a labeling is read
off greedily in node order and a dual bound is evaluated on the current
reparameterization by splitting each node potential evenly over its edges. The reported
bound is the running maximum, and the returned labeling is the lowest-energy one seen.
"""

import logging
from dataclasses import dataclass

import numpy as np

from panolayout.pose.crf import PoseGraph, crf_energy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrwsResult:
    labels: np.ndarray
    energy: float
    lower_bounds: list[float]

    @property
    def lower_bound(self) -> float:
        return self.lower_bounds[-1] if self.lower_bounds else -np.inf


class _Topology:
    def __init__(self, graph: PoseGraph):
        n = graph.n_nodes
        self.edges = graph.edges
        # edges to later nodes (node is the first endpoint) and from earlier nodes
        self.out_edges = [np.nonzero(graph.edges[:, 0] == s)[0] for s in range(n)]
        self.in_edges = [np.nonzero(graph.edges[:, 1] == s)[0] for s in range(n)]
        n_out = np.array([len(e) for e in self.out_edges])
        n_in = np.array([len(e) for e in self.in_edges])
        self.degree = n_out + n_in
        self.gamma = 1.0 / np.maximum(np.maximum(n_in, n_out), 1)


def _belief(graph: PoseGraph, topo: _Topology, fwd: np.ndarray, bwd: np.ndarray, s: int) -> np.ndarray:
    b = graph.unary[s].copy()
    if len(topo.in_edges[s]):
        b += fwd[topo.in_edges[s]].sum(axis=0)
    if len(topo.out_edges[s]):
        b += bwd[topo.out_edges[s]].sum(axis=0)
    return b


def _decode(graph: PoseGraph, topo: _Topology, bwd: np.ndarray) -> np.ndarray:
    labels = np.zeros(graph.n_nodes, dtype=int)
    for s in range(graph.n_nodes):
        cost = graph.unary[s].copy()
        for e in topo.in_edges[s]:
            u = graph.edges[e, 0]
            cost += graph.weights[e] * graph.pairwise.row(labels[u])
        if len(topo.out_edges[s]):
            cost += bwd[topo.out_edges[s]].sum(axis=0)
        labels[s] = int(np.argmin(cost))
    return labels


def _dual_bound(graph: PoseGraph, topo: _Topology, fwd: np.ndarray, bwd: np.ndarray) -> float:
    beliefs = np.array([_belief(graph, topo, fwd, bwd, s) for s in range(graph.n_nodes)])
    bound = float(sum(beliefs[s].min() for s in range(graph.n_nodes) if topo.degree[s] == 0))
    if len(graph.edges):
        share = beliefs / np.maximum(topo.degree, 1)[:, None]
        i, j = graph.edges[:, 0], graph.edges[:, 1]
        # min over (x_i, x_j) of w C - bwd(x_i) - fwd(x_j) + share_i(x_i) + share_j(x_j)
        inner = graph.pairwise.min_convolve(share[i] - bwd, graph.weights)
        bound += float((inner + share[j] - fwd).min(axis=1).sum())
    return bound


def trws_infer(graph: PoseGraph, iterations: int = 100, tol: float = 1e-9) -> TrwsResult:
    """
    Approximate MAP labeling of a pose graph.

    Args:
        graph (PoseGraph): CRF instance.
        iterations (int): Forward/backward sweeps.
        tol (float): Stop early once the bound has reached the best energy within `tol`.

    Returns:
        TrwsResult: Best labeling, its energy and the non-decreasing bound trace.
    """

    topo = _Topology(graph)
    m, L = len(graph.edges), graph.n_labels
    fwd = np.zeros((m, L))
    bwd = np.zeros((m, L))

    if m == 0:
        labels = graph.unary.argmin(axis=1)
        bound = float(graph.unary.min(axis=1).sum())
        return TrwsResult(labels=labels, energy=crf_energy(graph, labels), lower_bounds=[bound] * max(iterations, 1))

    best_labels, best_energy = None, np.inf
    bounds: list[float] = []
    running = -np.inf
    for it in range(iterations):
        for s in range(graph.n_nodes):
            out = topo.out_edges[s]
            if len(out):
                b = topo.gamma[s] * _belief(graph, topo, fwd, bwd, s)
                msg = graph.pairwise.min_convolve(b[None, :] - bwd[out], graph.weights[out])
                fwd[out] = msg - msg.min(axis=1, keepdims=True)
        for s in range(graph.n_nodes - 1, -1, -1):
            inc = topo.in_edges[s]
            if len(inc):
                b = topo.gamma[s] * _belief(graph, topo, fwd, bwd, s)
                msg = graph.pairwise.min_convolve(b[None, :] - fwd[inc], graph.weights[inc])
                bwd[inc] = msg - msg.min(axis=1, keepdims=True)

        labels = _decode(graph, topo, bwd)
        energy = crf_energy(graph, labels)
        if energy < best_energy - 1e-12:
            best_labels, best_energy = labels, energy
        running = max(running, _dual_bound(graph, topo, fwd, bwd))
        # a bound can only exceed the optimum through round-off
        running = min(running, best_energy)
        bounds.append(running)
        logger.debug("trws iteration %d: energy %.6f bound %.6f", it, best_energy, running)
        if best_energy - running <= tol:
            bounds.extend([running] * (iterations - it - 1))
            break

    logger.debug("trws finished: energy %.6f, gap %.3g", best_energy, best_energy - bounds[-1])
    return TrwsResult(labels=best_labels, energy=best_energy, lower_bounds=bounds)

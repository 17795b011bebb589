"""Instances, flows, shortest paths and spanning-tree routing.

Vertices are ``0..n-1``. Each edge ``e`` has a fixed orientation
``tail[e] -> head[e]``; a flow is a signed value per edge with respect to that
orientation, and its net out-flow at ``v`` is ``(I_G f)(v)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import (
    Disconnected,
    ImproperDemands,
    NonpositiveCost,
    ParallelEdgeOrLoop,
    TooSmall,
)

#: relative tolerance for properness and routing checks
TOL = 1e-9
#: absolute tolerance used when the demand vector is zero
ABS_TOL = 1e-12


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph with positive edge costs."""

    n: int
    tail: np.ndarray
    head: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tail", _frozen(self.tail, np.int64))
        object.__setattr__(self, "head", _frozen(self.head, np.int64))
        object.__setattr__(self, "cost", _frozen(self.cost, np.float64))

    @property
    def m(self) -> int:
        return int(self.tail.shape[0])

    @cached_property
    def csr(self):
        """``(indptr, indices, weights, edge_of_slot)`` adjacency arrays.

        Slots are sorted by (vertex, neighbour id) so searches are
        reproducible regardless of the input edge order.
        """
        src = np.concatenate([self.tail, self.head])
        dst = np.concatenate([self.head, self.tail])
        eid = np.concatenate([np.arange(self.m), np.arange(self.m)])
        perm = np.lexsort((dst, src))
        indptr = np.zeros(self.n + 1, np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return indptr, dst[perm].copy(), self.cost[eid[perm]].copy(), eid[perm].copy()

    def incidence(self, f: np.ndarray) -> np.ndarray:
        """Net out-flow ``I_G f`` at every vertex."""
        f = np.asarray(f, dtype=np.float64)
        return np.bincount(self.tail, f, self.n) - np.bincount(self.head, f, self.n)

    def incidence_transpose(self, phi: np.ndarray) -> np.ndarray:
        """``I_G^T phi``: potential difference tail minus head on every edge."""
        return phi[self.tail] - phi[self.head]

    def n_components(self) -> int:
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        adj = coo_matrix((np.ones(self.m), (self.tail, self.head)), shape=(self.n, self.n))
        return connected_components(adj, directed=False)[0]


@dataclass(frozen=True, eq=False)
class Instance(Graph):
    """A transshipment instance: graph, costs and vertex demands."""

    demands: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        b = np.zeros(self.n) if self.demands is None else self.demands
        object.__setattr__(self, "demands", _frozen(b, np.float64))

    @property
    def graph(self) -> Graph:
        return self

    def with_demands(self, b) -> "Instance":
        return Instance(self.n, self.tail, self.head, self.cost, b)


@dataclass(frozen=True, eq=False)
class Flow:
    """Signed per-edge values w.r.t. a fixed tail -> head orientation."""

    tail: np.ndarray
    head: np.ndarray
    value: np.ndarray

    @classmethod
    def on(cls, graph: Graph, value=None) -> "Flow":
        v = np.zeros(graph.m) if value is None else np.asarray(value, np.float64)
        return cls(graph.tail, graph.head, v)

    def __add__(self, other: "Flow") -> "Flow":
        return Flow(self.tail, self.head, self.value + other.value)

    def scaled(self, a: float) -> "Flow":
        return Flow(self.tail, self.head, self.value * a)


@dataclass(frozen=True, eq=False)
class DistanceResult:
    source: int
    dist: np.ndarray
    parent: np.ndarray
    parent_edge: np.ndarray
    order: np.ndarray

    def path_edges(self, target: int) -> list[int]:
        """Edge ids on the tree path from ``target`` back to the source."""
        out = []
        v = target
        while v != self.source:
            if self.parent[v] < 0:
                raise ValueError(f"vertex {target} unreachable from {self.source}")
            out.append(int(self.parent_edge[v]))
            v = self.parent[v]
        return out


def validate(inst: Instance) -> Instance:
    """Return ``inst`` unchanged if it satisfies every standing assumption."""
    if inst.n < 4:
        raise TooSmall(f"n = {inst.n} < 4")
    if np.any((inst.tail < 0) | (inst.tail >= inst.n) | (inst.head < 0) | (inst.head >= inst.n)):
        raise ValueError("edge endpoint out of range")
    if np.any(inst.tail == inst.head):
        e = int(np.flatnonzero(inst.tail == inst.head)[0])
        raise ParallelEdgeOrLoop(f"edge {e} is a self-loop")
    lo = np.minimum(inst.tail, inst.head)
    hi = np.maximum(inst.tail, inst.head)
    key = lo * inst.n + hi
    if np.unique(key).shape[0] != inst.m:
        raise ParallelEdgeOrLoop("parallel edges present")
    if not np.all(np.isfinite(inst.cost)) or np.any(inst.cost <= 0):
        raise NonpositiveCost("edge costs must be finite and strictly positive")
    if inst.n_components() != 1:
        raise Disconnected(f"graph has {inst.n_components()} components")
    b = inst.demands
    if b.shape != (inst.n,) or not np.all(np.isfinite(b)):
        raise ImproperDemands("demand vector must be finite with one entry per vertex")
    scale = np.abs(b).sum()
    if abs(b.sum()) > (TOL * scale if scale > 0 else ABS_TOL):
        raise ImproperDemands(f"demands sum to {b.sum():.17g}")
    return inst


def dijkstra(graph: Graph, source: int) -> DistanceResult:
    """Single-source shortest paths with a binary heap.

    Heap entries are ordered by (distance, vertex id), so the parent tree and
    settle order are fully determined by the graph.
    """
    indptr, indices, weights, eslot = graph.csr
    dist, parent, slot, order = _kernels.dijkstra(indptr, indices, weights, source)
    pedge = np.where(slot >= 0, eslot[np.maximum(slot, 0)], -1)
    return DistanceResult(int(source), dist, parent, pedge, order)


def compute_delta0(graph: Graph) -> float:
    """Sum of the distances from vertex 0 to its two farthest vertices."""
    d = dijkstra(graph, 0).dist
    top = np.sort(d)[-2:]
    return float(top[0] + top[1])


def residual(graph: Graph, b: np.ndarray, f: Flow) -> np.ndarray:
    """Demands left unrouted by ``f``: ``b - I_G f``."""
    return np.asarray(b, np.float64) - graph.incidence(f.value)


def flow_cost(f: Flow, costs: np.ndarray) -> float:
    return float(np.dot(np.abs(f.value), costs))


def routing_tolerance(b: np.ndarray, tol: float = TOL) -> float:
    scale = float(np.abs(b).sum())
    return tol * scale if scale > 0 else ABS_TOL


def is_routing(graph: Graph, f: Flow, b: np.ndarray, tol: float = TOL) -> bool:
    """Whether ``I_G f = b`` up to ``tol`` relative to ``||b||_1``."""
    r = residual(graph, b, f)
    return bool(np.max(np.abs(r), initial=0.0) <= routing_tolerance(b, tol))


class DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def minimum_spanning_tree(graph: Graph) -> np.ndarray:
    """Edge ids of the Kruskal tree, ties broken by edge id."""
    order = np.lexsort((np.arange(graph.m), graph.cost))
    ds = DisjointSet(graph.n)
    tail, head = graph.tail.tolist(), graph.head.tolist()
    picked = [e for e in order.tolist() if ds.union(tail[e], head[e])]
    return np.array(picked, dtype=np.int64)


def mst_route(graph: Graph, b: np.ndarray) -> Flow:
    """Route ``b`` exactly along a minimum spanning tree.

    The flow on a tree edge is the net demand of the subtree below it, so the
    result costs at most ``(n - 1) * OPT(b)``.
    """
    b = np.asarray(b, np.float64)
    tree = minimum_spanning_tree(graph)
    sub = Graph(graph.n, graph.tail[tree], graph.head[tree], np.ones(tree.shape[0]))
    res = dijkstra(sub, 0)
    value = np.zeros(graph.m)
    if np.any(b):
        # ship -b[y] from the root to y, i.e. collect b[y] from y at the root
        tree_flow = np.zeros(sub.m)
        sign = np.where(sub.tail[np.maximum(res.parent_edge, 0)] == res.parent, 1.0, -1.0)
        _kernels.push_tree_flow(res.order, res.parent, np.maximum(res.parent_edge, 0), sign, -b, tree_flow)
        value[tree] = tree_flow
    return Flow.on(graph, value)

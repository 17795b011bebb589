"""Deterministic Thorup-Zwick samples and bundles for a single layer.

Only the construction is provided; distance queries are never needed.
Samples ``V = S^0 >= S^1 >= ... >= S^k = {}`` are encoded by a per-vertex
``level`` (the largest ``j`` with ``v`` in ``S^j``). The bundle piece
``B^j(v)`` holds the members ``w`` of ``S^j`` for which ``(d(v, w), w)``
precedes ``(d(v, S^{j+1}), nearest id)``.

Each ``S^{j+1}`` is a greedy hitting set of the balls holding the ``s``
nearest ``S^j`` members of every vertex, with ``s = ceil(n^(1/k) ln n)``;
this caps every piece below ``s`` members except the last one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateLayer
from .graph import Graph


def default_k(n: int) -> int:
    return max(1, math.ceil(math.log2(n)))


def ball_size(n: int, k: int) -> int:
    return max(2, math.ceil(n ** (1.0 / k) * math.log(n)))


@dataclass(frozen=True, eq=False)
class OracleData:
    k: int
    level: np.ndarray
    bundle_ptr: np.ndarray  # per-vertex slices of the arrays below
    bundle_w: np.ndarray
    bundle_d: np.ndarray
    bundle_j: np.ndarray
    next_dist: np.ndarray  # (k, n): d(v, S^{j+1}); inf when j = k-1
    next_id: np.ndarray  # (k, n): nearest S^{j+1} member, -1 if none

    @property
    def n(self) -> int:
        return int(self.level.shape[0])

    def sample(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.level >= j)

    def bundle(self, v: int):
        a, b = self.bundle_ptr[v], self.bundle_ptr[v + 1]
        return self.bundle_w[a:b], self.bundle_d[a:b], self.bundle_j[a:b]

    def piece(self, v: int, j: int) -> list[tuple[int, float]]:
        """``B^j(v)`` as ``(w, distance)`` pairs in (distance, id) order."""
        w, d, lev = self.bundle(v)
        sel = lev == j
        return list(zip(w[sel].tolist(), d[sel].tolist()))

    def bundle_sizes(self) -> np.ndarray:
        return np.diff(self.bundle_ptr)


def sample_hierarchy(graph: Graph, k: int, s: int) -> np.ndarray:
    """Nested samples as a level array (see module docstring)."""
    n = graph.n
    if n == 0:
        raise DegenerateLayer("layer has no vertices")
    indptr, indices, weights, _ = graph.csr
    level = np.zeros(n, np.int64)
    for j in range(k - 1):
        sources = np.flatnonzero(level >= j)
        ids, cnt = _kernels.s_nearest(indptr, indices, weights, sources, s)
        chosen = _kernels.greedy_hitting_set(ids, cnt, n)
        level[chosen] = j + 1
    return level


def build_oracle(graph: Graph, k: int, s: int | None = None, level=None) -> OracleData:
    """Samples and bundles of ``graph`` with ``k`` levels.

    ``level`` may be given to fix the sample hierarchy instead of computing
    it; it must encode nested samples with ``S^{k-1}`` nonempty.
    """
    n = graph.n
    if s is None:
        s = ball_size(max(n, 2), k)
    if level is None:
        level = sample_hierarchy(graph, k, s)
    else:
        level = np.asarray(level, np.int64)
        if n == 0:
            raise DegenerateLayer("layer has no vertices")
    indptr, indices, weights, _ = graph.csr
    next_dist = np.full((k, n), np.inf)
    next_id = np.full((k, n), -1, np.int64)
    xs, ws, ds, js = [], [], [], []
    for j in range(k):
        if j < k - 1:
            dn, nn = _kernels.nearest_source(indptr, indices, weights, np.flatnonzero(level >= j + 1))
            next_dist[j], next_id[j] = dn, nn
        centers = np.flatnonzero(level == j)
        x, w, d = _kernels.clusters(indptr, indices, weights, centers, next_dist[j], next_id[j])
        xs.append(x)
        ws.append(w)
        ds.append(d)
        js.append(np.full(x.shape[0], j, np.int64))
    x, w, d, lev = (np.concatenate(a) for a in (xs, ws, ds, js))
    order = np.lexsort((w, d, lev, x))
    ptr = np.zeros(n + 1, np.int64)
    np.add.at(ptr, x + 1, 1)
    np.cumsum(ptr, out=ptr)
    return OracleData(k, level, ptr, w[order], d[order], lev[order], next_dist, next_id)

"""Linear cost approximator ``P = C R A`` and the flow it certifies.

* ``A`` aggregates demands: ``(A b)(w)`` sums ``b`` over the vertices
  contracted into supervertex ``w``. It is never materialised; products with
  ``A`` and ``A^T`` walk the parent pointers layer by layer.
* ``D`` spreads each supervertex's aggregate demand over nearby members of its
  bundle, following a radius that sweeps ``[0, delta_i]`` and splits mass
  evenly among the members of the highest sample level reached so far.
* ``R`` routes the share sent to ``w`` on to ``w'`` in proportion to how the
  parent's demand is spread, ``R((w, w'), v) = D(w', p(v)) D(w, v)``; layer 0
  routes straight to the root ``s``.
* ``C`` is diagonal: ``3 delta_{i'}`` for a parent one scale up, else
  ``2 delta_i``.

For every proper ``b``: ``OPT(b) <= ||P b||_1 <= alpha * OPT(b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .graph import Flow, Graph, dijkstra
from .layers import LayerSequence, build_layers
from .tzoracle import ball_size, build_oracle, default_k


def harmonic(n: int) -> float:
    return float(np.sum(1.0 / np.arange(1, n + 1)))


def alpha_bound(n: int) -> float:
    """Approximation ratio ``180 H_n lg^2 n``."""
    return 180.0 * harmonic(n) * math.log2(n) ** 2


@dataclass(frozen=True, eq=False)
class Approximator:
    graph: Graph
    layers: LayerSequence
    oracles: list  # OracleData per layer, None for empty layers
    D: sp.csc_matrix  # supervertex x supervertex
    R: sp.csr_matrix  # row pairs x supervertex
    C: np.ndarray  # diagonal of C, one entry per row pair
    row_pairs: np.ndarray  # (rows, 2) supervertex ids (w, w')
    alpha: float

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def n_rows(self) -> int:
        return int(self.C.shape[0])

    @property
    def n_supervertices(self) -> int:
        return self.layers.family.size

    # -- aggregation ------------------------------------------------------

    def apply_A(self, b: np.ndarray) -> np.ndarray:
        fam = self.layers.family
        agg = np.zeros(fam.size)
        agg[fam.leaf_of] = b
        for lay in reversed(self.layers.layers[1:]):
            if lay.n:
                g = lay.vertices
                np.add.at(agg, fam.parent[g], agg[g])
        return agg

    def apply_A_transpose(self, y: np.ndarray) -> np.ndarray:
        fam = self.layers.family
        acc = np.array(y, np.float64, copy=True)
        for lay in self.layers.layers[1:]:
            if lay.n:
                g = lay.vertices
                acc[g] += acc[fam.parent[g]]
        return acc[fam.leaf_of]

    # -- cost approximation ---------------------------------------------

    def apply_P(self, b: np.ndarray) -> np.ndarray:
        return self.C * (self.R @ self.apply_A(b))

    def apply_P_transpose(self, y: np.ndarray) -> np.ndarray:
        return self.apply_A_transpose(self._RT @ (self.C * y))

    def norm(self, b: np.ndarray) -> float:
        """``||P b||_1``."""
        return float(np.abs(self.apply_P(b)).sum())

    def flow_from_P(self, b: np.ndarray) -> Flow:
        """A flow routing ``b`` whose cost is at most ``||P b||_1``.

        Every row ``(w, w')`` sends ``(R A b)(w, w')`` units along the
        canonical shortest path between the representatives of ``w`` and
        ``w'``; canonical paths come from the Dijkstra tree of the endpoint
        with the smaller id.
        """
        g = self.graph
        value = np.zeros(g.m)
        amount = self.R @ self.apply_A(b)
        rep = self.layers.family.rep
        x = rep[self.row_pairs[:, 0]]
        y = rep[self.row_pairs[:, 1]]
        live = (amount != 0) & (x != y)
        x, y, amount = x[live], y[live], amount[live]
        src = np.minimum(x, y)
        dst = np.maximum(x, y)
        # shipping a from x to y == shipping -a from y to x
        amt = np.where(x < y, amount, -amount)
        order = np.lexsort((dst, src))
        src, dst, amt = src[order], dst[order], amt[order]
        bounds = np.flatnonzero(np.diff(src)) + 1
        for lo, hi in zip(np.r_[0, bounds], np.r_[bounds, src.size]):
            if lo == hi:
                continue
            res = dijkstra(g, int(src[lo]))
            deliver = np.bincount(dst[lo:hi], amt[lo:hi], g.n)
            pe = np.maximum(res.parent_edge, 0)
            sign = np.where(g.tail[pe] == res.parent, 1.0, -1.0)
            _kernels.push_tree_flow(res.order, res.parent, pe, sign, deliver, value)
        return Flow.on(g, value)

    @cached_property
    def _RT(self):
        return self.R.T.tocsr()

    # -- explicit forms ---------------------------------------------------

    @cached_property
    def aggregation_matrix(self) -> sp.csr_matrix:
        """``A`` as a sparse 0/1 matrix (supervertex x vertex)."""
        fam = self.layers.family
        depth = np.zeros(fam.size, np.int64)
        for lay in self.layers.layers[1:]:
            if lay.n:
                g = lay.vertices
                depth[g] = depth[fam.parent[g]] + 1
        leaves = fam.leaf_of
        count = depth[leaves] + 1
        cols = np.repeat(np.arange(self.n), count)
        rows = np.empty(cols.shape[0], np.int64)
        cur = leaves.copy()
        start = np.r_[0, np.cumsum(count)[:-1]]
        for step in range(int(count.max())):
            live = step < count
            rows[start[live] + step] = cur[live]
            cur[live] = fam.parent[cur[live]]
        return sp.csr_matrix((np.ones(cols.shape[0]), (rows, cols)), shape=(fam.size, self.n))

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """``P`` as an explicit sparse matrix (rows x vertices)."""
        P = (sp.diags(self.C) @ self.R @ self.aggregation_matrix).tocsr()
        P.eliminate_zeros()
        return P

    # -- diagnostics ------------------------------------------------------

    def column_sum_deviation(self) -> tuple[float, float]:
        """Max deviation from 1 of the column sums of ``D`` and of ``R``."""
        dcol = np.asarray(self.D.sum(axis=0)).ravel()
        rcol = np.asarray(self.R.sum(axis=0)).ravel()
        return float(np.max(np.abs(dcol - 1.0))), float(np.max(np.abs(rcol - 1.0)))

    def stats(self) -> dict:
        dev_d, dev_r = self.column_sum_deviation()
        return {
            "n": self.n,
            "m": self.graph.m,
            "layers": len(self.layers.layers),
            "supervertices": self.n_supervertices,
            "nnz_D": int(self.D.nnz),
            "nnz_R": int(self.R.nnz),
            "nnz_C": int(np.count_nonzero(self.C)),
            "alpha": self.alpha,
            "max_colsum_dev_D": dev_d,
            "max_colsum_dev_R": dev_r,
        }


def layer_distribution(orc, delta: float) -> sp.csc_matrix:
    """``D`` restricted to one layer, over its local vertex ids."""
    lam = np.minimum(orc.next_dist, delta)
    val = _kernels.distribution_values(orc.bundle_ptr, orc.bundle_j, orc.bundle_d, lam, delta)
    owner = np.repeat(np.arange(orc.n), np.diff(orc.bundle_ptr))
    keep = val > 0
    D = sp.csc_matrix((val[keep], (orc.bundle_w[keep], owner[keep])), shape=(orc.n, orc.n))
    D.sort_indices()
    return D


def build_D(layers: LayerSequence, oracles: list) -> sp.csc_matrix:
    """Block-diagonal distribution matrix over all supervertices.

    Column ``v`` spreads unit mass as a radius ``lam`` sweeps ``[0, delta_i]``:
    the mass ``dlam / delta_i`` goes in equal parts to the members within
    ``lam`` of the highest bundle level that has any. Level ``j`` is thus
    active from its nearest member until ``min(d(v, S^{j+1}), delta_i)``.
    """
    blocks = []
    for lay, orc in zip(layers.layers, oracles):
        if orc is not None:
            blocks.append(layer_distribution(orc, lay.delta))
    D = sp.block_diag(blocks, format="csc")
    D.sort_indices()
    return D


def build_R(layers: LayerSequence, D: sp.csc_matrix):
    """Routing matrix plus the ``(w, w')`` pair behind each of its rows.

    Rows are the distinct pairs sorted by ``(w, w')``. Both members of a pair
    sit in fixed layers, so the matrix is assembled one layer at a time.
    """
    fam = layers.family
    nsv = fam.size
    dptr, drow = D.indptr.astype(np.int64), D.indices.astype(np.int64)
    is_top = fam.layer == 0
    data, cols, counts, keys = [], [], [], []
    for lay in layers.layers:
        if not lay.n:
            continue
        w, w2, v, val = _kernels.routing_pairs(
            dptr, drow, D.data, fam.parent, layers.root, is_top, lay.offset, lay.offset + lay.n
        )
        keep = val != 0
        w, w2, v, val = w[keep], w2[keep], v[keep], val[keep]
        key = w * nsv + w2
        del w, w2
        order = np.argsort(key, kind="stable")
        key = key[order]
        first = np.ones(key.shape[0], bool)
        first[1:] = key[1:] != key[:-1]
        starts = np.flatnonzero(first)
        counts.append(np.diff(np.r_[starts, key.shape[0]]))
        keys.append(key[starts])
        cols.append(v[order].astype(np.int32))
        data.append(val[order])
    keys = np.concatenate(keys)
    indptr = np.concatenate([[0], np.cumsum(np.concatenate(counts))])
    R = sp.csr_matrix((np.concatenate(data), np.concatenate(cols), indptr), shape=(keys.shape[0], nsv))
    pairs = np.stack([keys // nsv, keys % nsv], axis=1)
    return R, pairs


def build_C(layers: LayerSequence, pairs: np.ndarray) -> np.ndarray:
    lay = layers.family.layer
    deltas = layers.deltas
    d_child = deltas[lay[pairs[:, 0]]]
    d_parent = deltas[lay[pairs[:, 1]]]
    return np.where(d_parent == 2 * d_child, 3 * d_parent, 2 * d_child)


def build_approximator(graph: Graph, k: int | None = None) -> Approximator:
    """Build layers, per-layer oracles and the sparse ``D``, ``R``, ``C``."""
    n = graph.n
    layers = build_layers(graph)
    k = default_k(n) if k is None else k
    s = ball_size(n, k)
    oracles = [build_oracle(lay.graph, k, s) if lay.n else None for lay in layers.layers]
    D = build_D(layers, oracles)
    R, pairs = build_R(layers, D)
    C = build_C(layers, pairs)
    return Approximator(graph, layers, oracles, D, R, C, pairs, alpha_bound(n))

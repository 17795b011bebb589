"""Layer graphs: a sequence of minors of the input at halving distance scales.

Layer ``i`` with reach ``delta[i]`` is the input graph after contracting
every edge of cost at most ``delta[i] / n``, deleting every edge of cost
above ``2 * delta[i]`` and dropping isolated vertices. Contraction classes at
a threshold ``t`` are read off a Kruskal merge tree: the class of ``x`` is
the highest ancestor of leaf ``x`` whose merge cost is at most ``t``. An
edge survives as a non-loop edge exactly when its bottleneck (minimax) cost
exceeds ``t``.

Layer vertices ("supervertices") get global ids, assigned layer by layer and
within a layer by smallest member vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import DisjointSet, Graph, Instance, compute_delta0, minimum_spanning_tree


@dataclass(frozen=True, eq=False)
class Layer:
    index: int
    delta: float
    offset: int  # global id of local vertex 0
    graph: Graph  # over local ids 0..n_i-1
    orig_edge: np.ndarray  # input edge behind each local edge
    node: np.ndarray  # Kruskal node of each local vertex

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    @property
    def vertices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.n)


@dataclass(frozen=True, eq=False)
class LaminarFamily:
    """Parent/child structure of the contraction sets of all layers."""

    layer: np.ndarray  # supervertex -> layer index
    parent: np.ndarray  # supervertex -> supervertex, -1 on layer 0
    child_ptr: np.ndarray
    child_idx: np.ndarray
    rep: np.ndarray  # smallest original vertex in the set
    leaf_of: np.ndarray  # original vertex -> its singleton leaf
    node: np.ndarray  # supervertex -> Kruskal node
    _lo: np.ndarray = field(repr=False)
    _hi: np.ndarray = field(repr=False)
    _leaf_order: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.layer.shape[0])

    def children(self, g: int) -> np.ndarray:
        return self.child_idx[self.child_ptr[g] : self.child_ptr[g + 1]]

    def is_leaf(self, g: int) -> bool:
        return self.child_ptr[g + 1] == self.child_ptr[g]

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(np.diff(self.child_ptr) == 0)

    def members(self, g: int) -> np.ndarray:
        """The original vertices contracted into supervertex ``g``, sorted."""
        k = self.node[g]
        return np.sort(self._leaf_order[self._lo[k] : self._hi[k]])

    def representative(self, g: int) -> int:
        return int(self.rep[g])

    def ancestors(self, g: int) -> list[int]:
        out = [g]
        while self.parent[out[-1]] >= 0:
            out.append(int(self.parent[out[-1]]))
        return out


@dataclass(frozen=True, eq=False)
class LayerSequence:
    n: int
    layers: list
    family: LaminarFamily
    root: int  # supervertex of layer 0 containing vertex 0
    edge_layer_count: np.ndarray  # per input edge, layers keeping it

    @property
    def L(self) -> int:
        return len(self.layers) - 1

    @property
    def deltas(self) -> np.ndarray:
        return np.array([lay.delta for lay in self.layers])

    def layer_of(self, g: int) -> Layer:
        return self.layers[self.family.layer[g]]

    def representative(self, g: int) -> int:
        return self.family.representative(g)

    def table(self) -> list[tuple[int, float, int, int]]:
        return [(lay.index, lay.delta, lay.n, lay.m) for lay in self.layers]


class _MergeTree:
    """Kruskal merge tree of a minimum spanning tree, with binary lifting."""

    def __init__(self, graph: Graph):
        n = graph.n
        tree = minimum_spanning_tree(graph)
        size = 2 * n - 1
        par = np.arange(size, dtype=np.int64)
        cost = np.zeros(size)
        left = np.full(size, -1, np.int64)
        right = np.full(size, -1, np.int64)
        ds = DisjointSet(n)
        top = list(range(n))  # union-find root -> merge-tree node
        nxt = n
        for e in tree.tolist():
            a, b = ds.find(int(graph.tail[e])), ds.find(int(graph.head[e]))
            ds.union(a, b)
            r = ds.find(a)
            par[top[a]] = par[top[b]] = nxt
            left[nxt], right[nxt] = top[a], top[b]
            cost[nxt] = graph.cost[e]
            top[r] = nxt
            nxt += 1
        assert nxt == size, "input graph must be connected"
        self.n, self.size, self.cost = n, size, cost
        self.root = size - 1
        depth = np.zeros(size, np.int64)
        for v in range(size - 2, -1, -1):
            depth[v] = depth[par[v]] + 1
        self.depth = depth
        levels = max(1, math.ceil(math.log2(size + 1)))
        up = [par]
        for _ in range(levels):
            up.append(up[-1][up[-1]])
        self.up = up
        # smallest leaf and contiguous leaf range of every node
        rep = np.arange(size, dtype=np.int64)
        for v in range(n, size):
            rep[v] = min(rep[left[v]], rep[right[v]])
        self.rep = rep
        lo = np.zeros(size, np.int64)
        hi = np.zeros(size, np.int64)
        order = []
        stack = [(self.root, False)]
        while stack:
            v, post = stack.pop()
            if post:
                hi[v] = len(order)
                continue
            lo[v] = len(order)
            if v < n:
                order.append(v)
                hi[v] = len(order)
                continue
            stack.append((v, True))
            stack.append((right[v], False))
            stack.append((left[v], False))
        self.lo, self.hi = lo, hi
        self.leaf_order = np.array(order, np.int64)
        self.parent = par

    def class_at(self, x: np.ndarray, t: float) -> np.ndarray:
        """Contraction class (a tree node) of each vertex at threshold ``t``."""
        node = np.asarray(x, np.int64).copy()
        for anc in reversed(self.up):
            cand = anc[node]
            move = self.cost[cand] <= t
            node[move] = cand[move]
        return node

    def bottleneck(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Minimax path cost between ``u`` and ``v`` (merge cost of their LCA)."""
        u = np.asarray(u, np.int64).copy()
        v = np.asarray(v, np.int64).copy()
        swap = self.depth[u] < self.depth[v]
        u[swap], v[swap] = v[swap], u[swap].copy()
        diff = self.depth[u] - self.depth[v]
        for k, anc in enumerate(self.up):
            bit = ((diff >> k) & 1).astype(bool)
            u[bit] = anc[u[bit]]
        for anc in reversed(self.up):
            a, b = anc[u], anc[v]
            move = a != b
            u[move], v[move] = a[move], b[move]
        lca = np.where(u == v, u, self.parent[u])
        return self.cost[lca]


def _next_reach(delta, nonempty, n, sorted_cost):
    if nonempty:
        return delta / 2
    idx = np.searchsorted(sorted_cost, delta / n, side="right") - 1
    if idx < 0:
        return None
    return float(sorted_cost[idx]) * n / 2


def build_layers(inst: Graph | Instance) -> LayerSequence:
    """Construct every layer, its reach, and the laminar parent structure."""
    n, m = inst.n, inst.m
    tail, head, cost = inst.tail, inst.head, inst.cost
    mt = _MergeTree(inst)
    mu = mt.bottleneck(tail, head)
    by_mu = np.lexsort((np.arange(m), -mu))
    sorted_cost = np.sort(cost)
    layer_count = np.zeros(m, np.int64)

    layers = []
    delta = compute_delta0(inst)
    ptr = 0
    active = np.zeros(0, np.int64)
    offset = 0
    while delta is not None:
        i = len(layers)
        t = delta / n
        start = ptr
        while ptr < m and mu[by_mu[ptr]] > t:
            ptr += 1
        active = np.concatenate([active, by_mu[start:ptr]])
        active = np.sort(active[cost[active] <= 2 * delta])
        layer_count[active] += 1
        cu = mt.class_at(tail[active], t)
        cv = mt.class_at(head[active], t)
        if active.size:
            nodes = np.unique(np.concatenate([cu, cv]))
        elif i == 0:
            # everything contracted: keep the single supervertex as the root
            nodes = mt.class_at(np.array([0]), t)
        else:
            nodes = np.zeros(0, np.int64)
        nodes = nodes[np.argsort(mt.rep[nodes], kind="stable")]
        local = {int(k): j for j, k in enumerate(nodes.tolist())}
        lu = np.array([local[int(k)] for k in cu.tolist()], np.int64)
        lv = np.array([local[int(k)] for k in cv.tolist()], np.int64)
        lo_, hi_ = np.minimum(lu, lv), np.maximum(lu, lv)
        order = np.lexsort((active, cost[active], hi_, lo_))
        lo_, hi_, eids = lo_[order], hi_[order], active[order]
        keep = np.ones(lo_.shape[0], bool)
        keep[1:] = (lo_[1:] != lo_[:-1]) | (hi_[1:] != hi_[:-1])
        g = Graph(nodes.shape[0], lo_[keep], hi_[keep], cost[eids[keep]])
        layers.append(Layer(i, float(delta), offset, g, eids[keep], nodes))
        offset += nodes.shape[0]
        delta = _next_reach(delta, active.size > 0, n, sorted_cost)

    family = _laminar_family(layers, mt, n, offset)
    root = int(family.leaf_of[0])
    while family.parent[root] >= 0:
        root = int(family.parent[root])
    return LayerSequence(n, layers, family, root, layer_count)


def _laminar_family(layers, mt: _MergeTree, n: int, total: int) -> LaminarFamily:
    sv_layer = np.empty(total, np.int64)
    sv_node = np.empty(total, np.int64)
    parent = np.full(total, -1, np.int64)
    present = np.full(mt.size, -1, np.int64)  # Kruskal node -> latest supervertex
    jump = mt.parent.copy()  # compressed pointers over never-present nodes
    for lay in layers:
        gids = lay.vertices
        sv_layer[gids] = lay.index
        sv_node[gids] = lay.node
        if lay.index > 0:
            for g, k in zip(gids.tolist(), lay.node.tolist()):
                parent[g] = _nearest_present(k, present, jump)
        present[lay.node] = gids
    child_order = np.lexsort((np.arange(total), parent))
    child_order = child_order[parent[child_order] >= 0]
    child_ptr = np.zeros(total + 1, np.int64)
    np.add.at(child_ptr, parent[child_order] + 1, 1)
    np.cumsum(child_ptr, out=child_ptr)
    rep = mt.rep[sv_node]
    leaf_of = np.full(n, -1, np.int64)
    leaves = np.flatnonzero(np.diff(child_ptr) == 0)
    leaf_of[rep[leaves]] = leaves
    return LaminarFamily(
        sv_layer, parent, child_ptr, child_order, rep, leaf_of, sv_node,
        mt.lo, mt.hi, mt.leaf_order,
    )


def _nearest_present(k, present, jump):
    """Supervertex of the lowest already-present ancestor-or-self of node ``k``.

    Nodes strictly above a present node never become present later, so the
    pointers compressed here stay valid.
    """
    if present[k] >= 0:
        return int(present[k])
    path = []
    v = int(jump[k])
    while present[v] < 0:
        path.append(v)
        v = int(jump[v])
    for u in path:
        jump[u] = v
    jump[k] = v
    return int(present[v])

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import apsp, corpus, cycle4, path4, small_random
from tship.graph import DisjointSet, Graph, compute_delta0
from tship.layers import build_layers


def reference_layers(g: Graph):
    """Straightforward layer construction: union-find per scale, no merge tree.

    Returns ``[(delta, classes, edges)]`` with classes as frozensets of
    original vertices and edges as ``{frozenset pair: min cost}``.
    """
    n = g.n
    out = []
    delta = compute_delta0(g)
    while True:
        ds = DisjointSet(n)
        for u, v, c in zip(g.tail.tolist(), g.head.tolist(), g.cost.tolist()):
            if c <= delta / n:
                ds.union(u, v)
        root = [ds.find(v) for v in range(n)]
        members = {}
        for v in range(n):
            members.setdefault(root[v], set()).add(v)
        edges = {}
        for u, v, c in zip(g.tail.tolist(), g.head.tolist(), g.cost.tolist()):
            if root[u] == root[v] or c > 2 * delta:
                continue
            key = frozenset((frozenset(members[root[u]]), frozenset(members[root[v]])))
            edges[key] = min(edges.get(key, math.inf), c)
        touched = set()
        for key in edges:
            touched |= set(key)
        if not out and not edges:
            touched = {frozenset(members[root[0]])}
        out.append((delta, touched, edges))
        if edges:
            delta = delta / 2
        else:
            small = g.cost[g.cost <= delta / n]
            if small.size == 0:
                break
            delta = float(small.max()) * n / 2
    return out


def layer_sets(seq, lay):
    fam = seq.family
    return {frozenset(fam.members(g).tolist()) for g in lay.vertices.tolist()}


def layer_edges(seq, lay):
    fam = seq.family
    out = {}
    for u, v, c in zip(lay.graph.tail.tolist(), lay.graph.head.tolist(), lay.graph.cost.tolist()):
        a = frozenset(fam.members(lay.offset + u).tolist())
        b = frozenset(fam.members(lay.offset + v).tolist())
        out[frozenset((a, b))] = c
    return out


class TestPathExample:
    def test_table(self):
        seq = build_layers(path4())
        assert seq.table() == [(0, 5.0, 1, 0), (1, 2.0, 4, 3), (2, 1.0, 4, 3), (3, 0.5, 4, 3), (4, 0.25, 0, 0)]
        assert seq.L == 4

    def test_leaves_are_last_nonempty_singletons(self):
        seq = build_layers(path4())
        fam = seq.family
        leaves = fam.leaves
        assert sorted(fam.layer[leaves].tolist()) == [3, 3, 3, 3]
        assert sorted(fam.members(g).tolist() for g in leaves) == [[0], [1], [2], [3]]

    def test_root_and_representatives(self):
        seq = build_layers(path4())
        assert seq.family.layer[seq.root] == 0
        assert seq.representative(seq.root) == 0
        assert seq.family.members(seq.root).tolist() == [0, 1, 2, 3]


def test_heavy_edge_cycle_respects_edge_bounds():
    g = cycle4(costs=(1.0, 1.0, 1.0, 1000.0))
    seq = build_layers(g)
    for lay in seq.layers:
        c = lay.graph.cost
        assert np.all(c > lay.delta / g.n) and np.all(c <= 2 * lay.delta)


@given(st.integers(4, 40), st.integers(0, 10_000))
def test_matches_reference_construction(n, seed):
    g = small_random(n, seed)
    seq = build_layers(g)
    ref = reference_layers(g)
    assert [lay.delta for lay in seq.layers] == [r[0] for r in ref]
    for lay, (_, classes, edges) in zip(seq.layers, ref):
        assert layer_sets(seq, lay) == classes
        assert layer_edges(seq, lay) == edges


def check_structure(g, seq):
    n = g.n
    fam = seq.family
    deltas = seq.deltas
    assert np.all(deltas[1:] <= deltas[:-1] / 2)
    assert seq.edge_layer_count.max() <= 1 + math.ceil(math.log2(n))
    for lay in seq.layers:
        c = lay.graph.cost
        assert np.all(c > lay.delta / n) and np.all(c <= 2 * lay.delta)
        if lay.index > 0 and lay.n:
            # no isolated vertices outside layer 0
            deg = np.bincount(np.r_[lay.graph.tail, lay.graph.head], minlength=lay.n)
            assert np.all(deg > 0)
    # leaves: singletons partitioning V
    leaves = fam.leaves
    assert sorted(fam.rep[leaves].tolist()) == list(range(n))
    assert all(fam.members(x).size == 1 for x in leaves.tolist())
    # parents contain children, representatives are members
    for v in range(fam.size):
        mem = set(fam.members(v).tolist())
        assert fam.rep[v] in mem
        p = fam.parent[v]
        if p >= 0:
            assert mem <= set(fam.members(p).tolist())
            assert fam.layer[p] < fam.layer[v]


@pytest.mark.parametrize("name, inst", corpus(), ids=[c[0] for c in corpus()])
def test_structure_on_corpus(name, inst):
    check_structure(inst, build_layers(inst))


def test_laminar_all_pairs():
    for name, inst in corpus():
        if inst.n > 50:
            continue
        seq = build_layers(inst)
        sets = [set(seq.family.members(v).tolist()) for v in range(seq.family.size)]
        for a in range(len(sets)):
            for b in range(a + 1, len(sets)):
                s, t = sets[a], sets[b]
                assert s <= t or t <= s or not (s & t), name


def parent_structure_violations(g: Graph, seq):
    """Checks on parents reached across a scale gap (``delta' > 2 delta``)."""
    fam = seq.family
    d = apsp(g)
    bad = []
    for lay in seq.layers[1:]:
        for v in lay.vertices.tolist():
            p = int(fam.parent[v])
            pl = seq.layers[fam.layer[p]]
            if not pl.delta > 2 * lay.delta:
                continue
            # (a) children of p(v) form the component of v in this layer
            comp = _component(lay, v - lay.offset)
            kids = {int(c) - lay.offset for c in fam.children(p).tolist()}
            if kids != comp:
                bad.append(("children", v))
            # (b) every edge of the parent's layer at p(v) costs more than its reach
            loc = p - pl.offset
            inc = (pl.graph.tail == loc) | (pl.graph.head == loc)
            if np.any(pl.graph.cost[inc] <= pl.delta):
                bad.append(("edges", v))
            # (c) the parent's set has diameter below 2 delta_i
            mem = fam.members(p)
            if d[np.ix_(mem, mem)].max() >= 2 * lay.delta:
                bad.append(("diameter", v))
    return bad


def _component(lay, x):
    adj = [[] for _ in range(lay.n)]
    for u, v in zip(lay.graph.tail.tolist(), lay.graph.head.tolist()):
        adj[u].append(v)
        adj[v].append(u)
    seen, stack = {x}, [x]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def test_parent_structure_on_small_corpus():
    for name, inst in corpus():
        if inst.n <= 50:
            assert parent_structure_violations(inst, build_layers(inst)) == [], name


@given(st.integers(4, 40), st.integers(0, 10_000))
def test_parent_structure_random(n, seed):
    g = small_random(n, seed)
    assert parent_structure_violations(g, build_layers(g)) == []


def test_total_size_near_m_log_n():
    for name, inst in corpus():
        seq = build_layers(inst)
        total = sum(lay.n + lay.m for lay in seq.layers)
        assert total <= 4 * inst.m * math.log2(inst.n), name


def test_deterministic():
    g = small_random(60, 3)
    a, b = build_layers(g), build_layers(g)
    assert a.table() == b.table()
    assert np.array_equal(a.family.parent, b.family.parent)
    for la, lb in zip(a.layers, b.layers):
        assert np.array_equal(la.orig_edge, lb.orig_edge)

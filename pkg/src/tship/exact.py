"""Exact transshipment optimum for small instances.

Uncapacitated transshipment decomposes into a transportation problem between
supply and demand vertices with shortest-path distances as unit costs. The
transportation problem is solved by successive shortest augmenting paths with
node potentials on the dense bipartite residual network.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as sp_dijkstra
from numba import njit

from .errors import TooLarge
from .graph import Flow, Graph, validate

MAX_N = 300


@dataclass(frozen=True)
class OracleSolution:
    opt: float
    flow: Flow
    supplies: np.ndarray
    sinks: np.ndarray
    plan: np.ndarray  # (len(supplies), len(sinks)) shipped amounts
    dist: np.ndarray  # matching shortest-path distances


@njit(cache=True)
def _transport(cost, supply, demand):
    """Min-cost transportation plan with uncapacitated supply -> sink arcs.

    Successive shortest paths on the residual network: super source ``S``
    feeds the supplies, the sinks drain into super sink ``T``, and Dijkstra
    runs on reduced costs ``w(a, b) + pot(a) - pot(b) >= 0``.
    """
    p, q = cost.shape
    V = p + q + 2
    S, T = p + q, p + q + 1
    inf = np.inf
    flow = np.zeros((p, q))
    rem_s = supply.copy()
    rem_d = demand.copy()
    pot = np.zeros(V)
    # ship the smaller side; rounding can leave the two totals a few ulps apart
    total = min(supply.sum(), demand.sum())
    eps = 1e-13 * max(total, 1e-300)
    left = total
    dist = np.empty(V)
    prev = np.empty(V, np.int64)
    done = np.empty(V, np.bool_)
    while left > eps:
        dist[:] = inf
        prev[:] = -1
        done[:] = False
        dist[S] = 0.0
        while True:
            u = -1
            best = inf
            for x in range(V):
                if not done[x] and dist[x] < best:
                    best = dist[x]
                    u = x
            if u < 0:
                break
            done[u] = True
            if u == T:
                break
            du = dist[u]
            if u == S:
                for a in range(p):
                    if rem_s[a] > eps:
                        nd = du + max(pot[S] - pot[a], 0.0)
                        if nd < dist[a]:
                            dist[a] = nd
                            prev[a] = S
            elif u < p:
                for c in range(q):
                    x = p + c
                    nd = du + max(cost[u, c] + pot[u] - pot[x], 0.0)
                    if nd < dist[x]:
                        dist[x] = nd
                        prev[x] = u
            else:
                c = u - p
                for a in range(p):
                    if flow[a, c] > eps:
                        nd = du + max(-cost[a, c] + pot[u] - pot[a], 0.0)
                        if nd < dist[a]:
                            dist[a] = nd
                            prev[a] = u
                if rem_d[c] > eps:
                    nd = du + max(pot[u] - pot[T], 0.0)
                    if nd < dist[T]:
                        dist[T] = nd
                        prev[T] = u
        if not done[T]:
            raise RuntimeError("transportation problem infeasible")
        for x in range(V):
            pot[x] += dist[x] if done[x] else dist[T]
        # bottleneck along the path
        amt = left
        x = T
        while x != S:
            a = prev[x]
            if a == S:
                amt = min(amt, rem_s[x])
            elif x == T:
                amt = min(amt, rem_d[a - p])
            elif a >= p:  # backward arc sink -> supply
                amt = min(amt, flow[x, a - p])
            x = a
        x = T
        while x != S:
            a = prev[x]
            if a == S:
                rem_s[x] -= amt
            elif x == T:
                rem_d[a - p] -= amt
            elif a < p:
                flow[a, x - p] += amt
            else:
                flow[x, a - p] -= amt
            x = a
        left -= amt
    return flow


def exact_opt(graph: Graph, b: np.ndarray, max_n: int = MAX_N) -> OracleSolution:
    """``OPT(b)`` together with an optimal witness flow."""
    if graph.n > max_n:
        raise TooLarge(f"exact oracle limited to n <= {max_n}, got n = {graph.n}")
    b = np.asarray(b, np.float64)
    supplies = np.flatnonzero(b > 0)
    sinks = np.flatnonzero(b < 0)
    value = np.zeros(graph.m)
    if supplies.size == 0:
        empty = np.zeros((0, sinks.size))
        return OracleSolution(0.0, Flow.on(graph, value), supplies, sinks, empty, empty)
    adj = coo_matrix((graph.cost, (graph.tail, graph.head)), shape=(graph.n, graph.n)).tocsr()
    dist, pred = sp_dijkstra(adj, directed=False, indices=supplies, return_predecessors=True)
    cost = dist[:, sinks]
    plan = _transport(cost, b[supplies], -b[sinks])
    opt = float(np.sum(plan * cost))

    edge_id = {}
    for e, (u, v) in enumerate(zip(graph.tail.tolist(), graph.head.tolist())):
        edge_id[(u, v)] = (e, 1.0)
        edge_id[(v, u)] = (e, -1.0)
    for a, s in enumerate(supplies.tolist()):
        for c, t in enumerate(sinks.tolist()):
            amt = plan[a, c]
            if amt <= 0:
                continue
            v = t
            while v != s:
                u = int(pred[a, v])
                e, sign = edge_id[(u, v)]
                value[e] += sign * amt
                v = u
    return OracleSolution(opt, Flow.on(graph, value), supplies, sinks, plan, cost)


def exact_instance(inst) -> OracleSolution:
    validate(inst)
    return exact_opt(inst, inst.demands)


@dataclass(frozen=True)
class SandwichReport:
    min_ratio: float
    max_ratio: float
    alpha: float
    checked: int
    skipped: int  # demand vectors with OPT = 0

    @property
    def ok(self) -> bool:
        return self.checked == 0 or (self.min_ratio >= 1 - 1e-9 and self.max_ratio <= self.alpha * (1 + 1e-9))


def verify_sandwich(graph: Graph, apx, demands) -> SandwichReport:
    """``||P b||_1 / OPT(b)`` over a batch of demand vectors, against ``[1, alpha]``."""
    ratios, skipped = [], 0
    for b in demands:
        opt = exact_opt(graph, b).opt
        if opt <= 0:
            skipped += 1
            continue
        ratios.append(apx.norm(b) / opt)
    if not ratios:
        return SandwichReport(float("nan"), float("nan"), apx.alpha, 0, skipped)
    return SandwichReport(min(ratios), max(ratios), apx.alpha, len(ratios), skipped)

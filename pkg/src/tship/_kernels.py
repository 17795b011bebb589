"""Compiled inner loops.

All graphs are passed as CSR adjacency triples ``(indptr, indices, weights)``
over vertices ``0..n-1``; undirected edges appear once in each direction.
Whenever distances are compared across different vertices the order is the
lexicographic pair ``(distance, vertex id)``.
"""

from heapq import heappop, heappush

import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True)
def dijkstra(indptr, indices, weights, source):
    n = indptr.shape[0] - 1
    dist = np.full(n, INF)
    parent = np.full(n, -1, np.int64)
    slot = np.full(n, -1, np.int64)
    order = np.empty(n, np.int64)
    done = np.zeros(n, np.bool_)
    dist[source] = 0.0
    heap = [(0.0, np.int64(source))]
    cnt = 0
    while len(heap) > 0:
        d, u = heappop(heap)
        if done[u]:
            continue
        done[u] = True
        order[cnt] = u
        cnt += 1
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            nd = d + weights[p]
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                slot[v] = p
                heappush(heap, (nd, np.int64(v)))
    return dist, parent, slot, order[:cnt]


@njit(cache=True)
def nearest_source(indptr, indices, weights, sources):
    """Distance to, and identity of, the (distance, id)-smallest source."""
    n = indptr.shape[0] - 1
    dist = np.full(n, INF)
    near = np.full(n, -1, np.int64)
    done = np.zeros(n, np.bool_)
    heap = [(0.0, np.int64(0), np.int64(0))]
    heap.pop()
    for s in sources:
        dist[s] = 0.0
        near[s] = s
        heappush(heap, (0.0, np.int64(s), np.int64(s)))
    while len(heap) > 0:
        d, src, u = heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            nd = d + weights[p]
            if nd < dist[v] or (nd == dist[v] and src < near[v]):
                dist[v] = nd
                near[v] = src
                heappush(heap, (nd, src, np.int64(v)))
    return dist, near


@njit(cache=True)
def s_nearest(indptr, indices, weights, sources, s):
    """The ``s`` nearest sources of every vertex, in (distance, id) order.

    Returns an ``(n, s)`` id array padded with -1 and the per-row counts.
    """
    n = indptr.shape[0] - 1
    ids = np.full((n, s), -1, np.int64)
    cnt = np.zeros(n, np.int64)
    heap = [(0.0, np.int64(0), np.int64(0))]
    heap.pop()
    for x in sources:
        heappush(heap, (0.0, np.int64(x), np.int64(x)))
    while len(heap) > 0:
        d, src, u = heappop(heap)
        c = cnt[u]
        if c == s:
            continue
        seen = False
        for t in range(c):
            if ids[u, t] == src:
                seen = True
                break
        if seen:
            continue
        ids[u, c] = src
        cnt[u] = c + 1
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if cnt[v] < s:
                heappush(heap, (d + weights[p], src, np.int64(v)))
    return ids, cnt


@njit(cache=True)
def greedy_hitting_set(ids, cnt, universe):
    """Greedy hitting set of the rows of ``ids`` (max coverage, then min id)."""
    n, s = ids.shape
    cover = np.zeros(universe, np.int64)
    for v in range(n):
        for t in range(cnt[v]):
            cover[ids[v, t]] += 1
    # inverse index: element -> rows containing it
    ptr = np.zeros(universe + 1, np.int64)
    for w in range(universe):
        ptr[w + 1] = ptr[w] + cover[w]
    fill = ptr[:-1].copy()
    rows = np.empty(ptr[universe], np.int64)
    for v in range(n):
        for t in range(cnt[v]):
            w = ids[v, t]
            rows[fill[w]] = v
            fill[w] += 1
    hit = np.zeros(n, np.bool_)
    for v in range(n):
        if cnt[v] == 0:
            hit[v] = True
    chosen = np.zeros(universe, np.bool_)
    heap = [(np.int64(0), np.int64(0))]
    heap.pop()
    for w in range(universe):
        if cover[w] > 0:
            heappush(heap, (-cover[w], np.int64(w)))
    while len(heap) > 0:
        negc, w = heappop(heap)
        if cover[w] == 0:
            continue
        if -negc != cover[w]:
            heappush(heap, (-cover[w], w))
            continue
        chosen[w] = True
        for q in range(ptr[w], ptr[w + 1]):
            v = rows[q]
            if hit[v]:
                continue
            hit[v] = True
            for t in range(cnt[v]):
                cover[ids[v, t]] -= 1
    return chosen


@njit(cache=True)
def clusters(indptr, indices, weights, centers, dnext, nnext):
    """Clusters of ``centers`` bounded by the next sample.

    Vertex ``x`` joins the cluster of ``w`` iff ``(d(w, x), w)`` precedes
    ``(dnext[x], nnext[x])``. Returns flat arrays ``(x, w, d)``.
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, INF)
    stamp = np.full(n, -1, np.int64)
    out_x = [np.int64(0)]
    out_w = [np.int64(0)]
    out_d = [0.0]
    out_x.pop()
    out_w.pop()
    out_d.pop()
    for w in centers:
        heap = [(0.0, np.int64(w))]
        stamp[w] = w
        dist[w] = 0.0
        while len(heap) > 0:
            d, u = heappop(heap)
            if d > dist[u]:
                continue
            out_x.append(u)
            out_w.append(w)
            out_d.append(d)
            dist[u] = -1.0  # settled
            for p in range(indptr[u], indptr[u + 1]):
                v = indices[p]
                nd = d + weights[p]
                if not (nd < dnext[v] or (nd == dnext[v] and w < nnext[v])):
                    continue
                if stamp[v] != w:
                    stamp[v] = w
                    dist[v] = nd
                    heappush(heap, (nd, np.int64(v)))
                elif nd < dist[v]:
                    dist[v] = nd
                    heappush(heap, (nd, np.int64(v)))
    xs = np.empty(len(out_x), np.int64)
    ws = np.empty(len(out_x), np.int64)
    ds = np.empty(len(out_x))
    for i in range(len(out_x)):
        xs[i] = out_x[i]
        ws[i] = out_w[i]
        ds[i] = out_d[i]
    return xs, ws, ds


@njit(cache=True)
def distribution_values(ptr, level, dist, lam, delta):
    """Mass each bundle member receives from its owner.

    ``ptr`` delimits per-vertex bundles, stored sorted by (level, distance,
    id); ``lam[j, v]`` is where level ``j`` stops receiving mass for ``v``.
    Within a level the members ``w_1..w_r`` with distance at most ``lam``
    get ``(lam - d_r)/(r delta) + sum_{l=q}^{r-1} (d_{l+1} - d_l)/(l delta)``.
    """
    out = np.zeros(dist.shape[0])
    n = ptr.shape[0] - 1
    for v in range(n):
        a = ptr[v]
        end = ptr[v + 1]
        while a < end:
            j = level[a]
            b = a
            while b < end and level[b] == j:
                b += 1
            lj = lam[j, v]
            r = 0
            while a + r < b and dist[a + r] <= lj:
                r += 1
            if r > 0:
                acc = (lj - dist[a + r - 1]) / (r * delta)
                out[a + r - 1] = acc
                for q in range(r - 2, -1, -1):
                    # q is 0-based, so the divisor l = q + 1
                    acc += (dist[a + q + 1] - dist[a + q]) / ((q + 1) * delta)
                    out[a + q] = acc
            a = b
    return out


@njit(cache=True)
def routing_pairs(dptr, drow, dval, parent, root, is_top, lo, hi):
    """Nonzeros of the routing matrix in columns ``lo..hi-1``.

    Returned as flat ``(w, w2, v, value)`` arrays. ``dptr/drow/dval`` is the
    distribution matrix in compressed-column form. Columns with ``is_top``
    set pair with ``root`` instead of their parent.
    """
    total = 0
    for v in range(lo, hi):
        a = dptr[v + 1] - dptr[v]
        if is_top[v]:
            total += a
        else:
            p = parent[v]
            total += a * (dptr[p + 1] - dptr[p])
    ow = np.empty(total, np.int64)
    ow2 = np.empty(total, np.int64)
    ov = np.empty(total, np.int64)
    oval = np.empty(total)
    t = 0
    for v in range(lo, hi):
        if is_top[v]:
            for q in range(dptr[v], dptr[v + 1]):
                ow[t] = drow[q]
                ow2[t] = root
                ov[t] = v
                oval[t] = dval[q]
                t += 1
        else:
            p = parent[v]
            for q in range(dptr[v], dptr[v + 1]):
                for q2 in range(dptr[p], dptr[p + 1]):
                    ow[t] = drow[q]
                    ow2[t] = drow[q2]
                    ov[t] = v
                    oval[t] = dval[q] * dval[q2]
                    t += 1
    return ow, ow2, ov, oval


@njit(cache=True)
def push_tree_flow(order, parent, slot_edge, slot_sign, deliver, flow):
    """Add the tree flow that ships ``deliver[y]`` from the root to each ``y``.

    ``slot_sign[u]`` is +1 when the edge into ``u`` is oriented parent -> u.
    """
    acc = deliver.copy()
    for t in range(order.shape[0] - 1, 0, -1):
        u = order[t]
        a = acc[u]
        if a != 0.0:
            flow[slot_edge[u]] += slot_sign[u] * a
            acc[parent[u]] += a


@njit(cache=True)
def lower_envelope(indptr, indices, weights, init):
    """``min_u init[u] + d(u, v)`` for every ``v``; ``init`` must be >= 0."""
    n = init.shape[0]
    dist = init.copy()
    done = np.zeros(n, np.bool_)
    heap = [(0.0, np.int64(0))]
    heap.pop()
    for v in range(n):
        heappush(heap, (dist[v], np.int64(v)))
    while len(heap) > 0:
        d, u = heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            nd = d + weights[p]
            if nd < dist[v]:
                dist[v] = nd
                heappush(heap, (nd, np.int64(v)))
    return dist

"""Synthetic instance families: path, grid, cycle and sparse random graphs."""

from __future__ import annotations

import math

import numpy as np

from .graph import Graph, Instance

MAX_COST = 1e6


def log_uniform_costs(rng: np.random.Generator, m: int, hi: float = MAX_COST) -> np.ndarray:
    return np.exp(rng.uniform(0.0, math.log(hi), m))


def path_graph(n: int, costs=None) -> Graph:
    t = np.arange(n - 1)
    c = np.ones(n - 1) if costs is None else costs
    return Graph(n, t, t + 1, c)


def cycle_graph(n: int, costs=None) -> Graph:
    t = np.arange(n)
    c = np.ones(n) if costs is None else costs
    return Graph(n, t, (t + 1) % n, c)


def grid_graph(rows: int, cols: int, costs=None) -> Graph:
    idx = np.arange(rows * cols).reshape(rows, cols)
    t = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    h = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    c = np.ones(t.size) if costs is None else costs
    return Graph(rows * cols, t, h, c)


def random_graph(n: int, rng: np.random.Generator, p: float | None = None) -> Graph:
    """Sparse ``G(n, p)`` with ``p = 3/n`` by default, made connected.

    Components are chained by one extra edge between the smallest vertices of
    consecutive components. Costs are log-uniform on ``[1, 1e6]``.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    p = min(1.0, 3.0 / n) if p is None else p
    # sample the upper triangle edge count, then distinct pairs
    total = n * (n - 1) // 2
    m = rng.binomial(total, p)
    keys = np.unique(rng.choice(total, size=m, replace=False)) if m else np.zeros(0, np.int64)
    # decode pair index -> (i, j) with i < j
    i = (n - 2 - np.floor(np.sqrt(-8 * keys + 4 * n * (n - 1) - 7) / 2 - 0.5)).astype(np.int64)
    j = (keys + i + 1 - total + (n - i) * ((n - i) - 1) // 2).astype(np.int64)
    adj = coo_matrix((np.ones(i.size), (i, j)), shape=(n, n))
    k, lab = connected_components(adj, directed=False)
    if k > 1:
        first = np.full(k, n, np.int64)
        np.minimum.at(first, lab, np.arange(n))
        first = np.sort(first)
        i = np.concatenate([i, first[:-1]])
        j = np.concatenate([j, first[1:]])
    return Graph(n, i, j, log_uniform_costs(rng, i.size))


def random_demands(n: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian demands shifted to sum to zero and scaled to unit ``l1`` norm."""
    b = rng.normal(size=n)
    b -= b.mean()
    return b / np.abs(b).sum()


def two_point_demands(n: int, s: int, t: int, amount: float = 1.0) -> np.ndarray:
    b = np.zeros(n)
    b[s] += amount
    b[t] -= amount
    return b


def make_instance(family: str, n: int, seed: int = 0) -> Instance:
    """An instance of a named family with about ``n`` vertices.

    Path, cycle and grid (``round(sqrt(n))`` per side) have unit costs;
    random graphs have log-uniform costs. Demands are random with unit
    ``l1`` norm.
    """
    rng = np.random.default_rng(seed)
    if family == "path":
        g = path_graph(n)
    elif family == "cycle":
        g = cycle_graph(n)
    elif family == "grid":
        side = max(2, round(math.sqrt(n)))
        g = grid_graph(side, side)
    elif family == "random":
        g = random_graph(n, rng)
    else:
        raise ValueError(f"unknown family {family!r}")
    return Instance(g.n, g.tail, g.head, g.cost, random_demands(g.n, rng))


def standard_corpus(seed: int = 0) -> list[tuple[str, Instance]]:
    """Named desk-scale instances: unit path, cycle and 5x5 grid, plus ten
    random graphs with ``n`` spread over ``[20, 200]`` and log-uniform costs.
    """
    out = [
        ("path32", make_instance("path", 32, seed)),
        ("cycle32", make_instance("cycle", 32, seed)),
        ("grid5x5", make_instance("grid", 25, seed)),
    ]
    for q, n in enumerate(np.linspace(20, 200, 10).astype(int).tolist()):
        out.append((f"random{n}", make_instance("random", n, seed + 1000 + q)))
    return out

import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tship.generators import random_graph, standard_corpus
from tship.graph import Graph, Instance

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def corpus():
    return standard_corpus(0)


@functools.lru_cache(maxsize=None)
def corpus_approximators():
    from tship.approximator import build_approximator

    return [(name, inst, build_approximator(inst)) for name, inst in corpus()]


def path4(b=(1.0, 0.0, 0.0, -1.0)):
    return Instance(4, [0, 1, 2], [1, 2, 3], [1.0, 1.0, 1.0], b)


def cycle4(costs=(1.0, 1.0, 1.0, 1.0), b=(1.0, 0.0, -1.0, 0.0)):
    return Instance(4, [0, 1, 2, 3], [1, 2, 3, 0], costs, b)


def apsp(graph: Graph) -> np.ndarray:
    """All-pairs distances by Floyd-Warshall, independent of the library's Dijkstra."""
    n = graph.n
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for u, v, c in zip(graph.tail, graph.head, graph.cost):
        d[u, v] = min(d[u, v], c)
        d[v, u] = min(d[v, u], c)
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


def small_random(n, seed):
    return random_graph(n, np.random.default_rng(seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

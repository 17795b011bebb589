import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import apsp, cycle4, path4, small_random
from tship.errors import (
    Disconnected,
    ImproperDemands,
    NonpositiveCost,
    ParallelEdgeOrLoop,
    TooSmall,
)
from tship.exact import exact_opt
from tship.generators import random_demands
from tship.graph import (
    Flow,
    Graph,
    Instance,
    compute_delta0,
    dijkstra,
    flow_cost,
    is_routing,
    minimum_spanning_tree,
    mst_route,
    residual,
    validate,
)


class TestValidate:
    def test_accepts_path(self):
        assert validate(path4()) is not None

    @pytest.mark.parametrize(
        "inst, exc",
        [
            (Instance(3, [0, 1], [1, 2], [1.0, 1.0]), TooSmall),
            (Instance(4, [0, 2], [1, 3], [1.0, 1.0]), Disconnected),
            (Instance(4, [0, 1, 2], [1, 2, 3], [1.0, 0.0, 1.0]), NonpositiveCost),
            (Instance(4, [0, 1, 2], [1, 2, 3], [1.0, -2.0, 1.0]), NonpositiveCost),
            (Instance(4, [0, 1, 2, 1], [1, 2, 3, 0], [1.0] * 4), ParallelEdgeOrLoop),
            (Instance(4, [0, 1, 2, 2], [1, 2, 3, 2], [1.0] * 4), ParallelEdgeOrLoop),
            (path4((1.0, 0.0, 0.0, 0.0)), ImproperDemands),
        ],
    )
    def test_rejects(self, inst, exc):
        with pytest.raises(exc) as info:
            validate(inst)
        assert str(info.value).startswith(exc.token)

    def test_demand_tolerance_is_relative(self):
        b = np.array([1e6, 0.0, 0.0, -1e6 + 1e-6])
        validate(path4(b))
        with pytest.raises(ImproperDemands):
            validate(path4(np.array([1.0, 0.0, 0.0, -1.0 + 1e-6])))


class TestDijkstra:
    def test_path_distances(self):
        res = dijkstra(path4(), 0)
        assert res.dist.tolist() == [0, 1, 2, 3]
        assert res.path_edges(3) == [2, 1, 0]

    def test_tie_order_prefers_smaller_id(self):
        # 0-1-3 and 0-2-3 both cost 2; vertex 3 must hang off vertex 1
        g = Graph(4, [0, 0, 1, 2], [1, 2, 3, 3], [1.0, 1.0, 1.0, 1.0])
        assert dijkstra(g, 0).parent[3] == 1

    @given(st.integers(5, 40), st.integers(0, 10_000))
    def test_matches_floyd_warshall(self, n, seed):
        g = small_random(n, seed)
        d = apsp(g)
        for s in (0, n - 1):
            res = dijkstra(g, s)
            assert np.allclose(res.dist, d[s], rtol=1e-12)
            # no relaxed edge can still improve a label
            du, dv = res.dist[g.tail], res.dist[g.head]
            assert np.all(dv <= du + g.cost * (1 + 1e-12))
            assert np.all(du <= dv + g.cost * (1 + 1e-12))


def test_delta0_path_example():
    assert compute_delta0(path4()) == 5.0


@given(st.integers(4, 50), st.integers(0, 10_000))
def test_delta0_between_diameter_and_twice(n, seed):
    g = small_random(n, seed)
    diam = apsp(g).max()
    d0 = compute_delta0(g)
    assert diam * (1 - 1e-12) <= d0 <= 2 * diam * (1 + 1e-12)


def test_mst_tie_break_by_edge_id():
    g = cycle4()
    assert minimum_spanning_tree(g).tolist() == [0, 1, 2]


class TestMstRoute:
    def test_path_flow_on_path(self):
        f = mst_route(path4(), path4().demands)
        assert f.value.tolist() == [1.0, 1.0, 1.0]

    def test_zero_demands(self):
        assert not np.any(mst_route(path4(), np.zeros(4)).value)

    @given(st.integers(4, 40), st.integers(0, 10_000))
    def test_routes_and_bounded_by_n_opt(self, n, seed):
        g = small_random(n, seed)
        b = random_demands(n, np.random.default_rng(seed))
        f = mst_route(g, b)
        assert is_routing(g, f, b)
        opt = exact_opt(g, b).opt
        cost = flow_cost(f, g.cost)
        assert opt * (1 - 1e-9) <= cost <= (n - 1) * opt * (1 + 1e-9)


def test_is_routing_rejects_zero_flow():
    g = path4()
    assert not is_routing(g, Flow.on(g), g.demands)


@given(st.integers(4, 30), st.integers(0, 10_000))
def test_residual_stays_proper(n, seed):
    g = small_random(n, seed)
    rng = np.random.default_rng(seed)
    b = random_demands(n, rng)
    f = Flow.on(g, rng.normal(size=g.m))
    assert abs(residual(g, b, f).sum()) <= 1e-9 * (1 + np.abs(f.value).sum())


def test_flow_arithmetic():
    g = path4()
    a = Flow.on(g, [1.0, 2.0, 3.0])
    assert (a + a.scaled(-1.0)).value.tolist() == [0.0, 0.0, 0.0]
    assert flow_cost(a.scaled(-1.0), g.cost) == 6.0

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import apsp, corpus, corpus_approximators, path4, small_random
from tship.approximator import alpha_bound, build_approximator, harmonic, layer_distribution
from tship.exact import exact_opt
from tship.generators import random_demands
from tship.graph import flow_cost, is_routing
from tship.tzoracle import build_oracle


def simulate_distribution(d_row, level, delta, steps=200_000):
    """Numerically sweep the radius over ``[0, delta]``.

    At radius ``lam`` the candidates are the bundle members within ``lam``;
    the mass ``dlam / delta`` is split evenly among the candidates of the
    highest level present. Bundle members are given as ``{w: (dist, level)}``.
    """
    out = {w: 0.0 for w in d_row}
    h = delta / steps
    for t in range(steps):
        lam = (t + 0.5) * h
        within = [w for w, (dist, _) in d_row.items() if dist <= lam]
        if not within:
            continue
        top = max(d_row[w][1] for w in within)
        act = [w for w in within if d_row[w][1] == top]
        for w in act:
            out[w] += h / delta / len(act)
    return out


def bundle_dict(orc, v):
    w, d, lev = orc.bundle(v)
    return {int(a): (float(b), int(c)) for a, b, c in zip(w, d, lev)}


class TestDistribution:
    def test_path_example_closed_form(self):
        orc = build_oracle(path4(), 2, level=[0, 0, 1, 0])
        D = layer_distribution(orc, 2.0).toarray()
        assert D[0, 0] == pytest.approx(0.75, abs=1e-15)
        assert D[1, 0] == pytest.approx(0.25, abs=1e-15)
        assert D[2, 0] == 0.0
        assert D[:, 0].sum() == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_radius_sweep(self, seed):
        g = small_random(24, seed)
        orc = build_oracle(g, 5)
        delta = float(apsp(g).max()) * 0.7
        D = layer_distribution(orc, delta).toarray()
        for v in range(0, g.n, 5):
            sim = simulate_distribution(bundle_dict(orc, v), orc.level, delta, steps=20_000)
            for w, val in sim.items():
                assert D[w, v] == pytest.approx(val, abs=1e-4)

    def test_path_example_radius_sweep(self):
        orc = build_oracle(path4(), 2, level=[0, 0, 1, 0])
        D = layer_distribution(orc, 2.0).toarray()
        sim = simulate_distribution(bundle_dict(orc, 0), orc.level, 2.0)
        for w, val in sim.items():
            assert D[w, 0] == pytest.approx(val, abs=1e-6)

    def test_single_supervertex_layer_keeps_all_mass(self):
        apx = build_approximator(path4())
        s = apx.layers.root
        assert apx.D[s, s] == 1.0


@pytest.mark.parametrize("name, inst, apx", corpus_approximators(), ids=[c[0] for c in corpus()])
def test_column_sums_and_support(name, inst, apx):
    dev_d, dev_r = apx.column_sum_deviation()
    assert dev_d <= 1e-12 and dev_r <= 1e-12
    assert apx.D.data.min() > 0
    # D(w, v) != 0 only for bundle members of v in v's layer
    fam = apx.layers.family
    Dc = apx.D.tocsc()
    for lay, orc in zip(apx.layers.layers, apx.oracles):
        if orc is None:
            continue
        for v in lay.vertices[:: max(1, lay.n // 10)].tolist():
            rows = Dc.indices[Dc.indptr[v] : Dc.indptr[v + 1]]
            members = set((orc.bundle(v - lay.offset)[0] + lay.offset).tolist())
            assert set(rows.tolist()) <= members
    # C lives exactly on the rows R uses, R column nnz bounded by D supports
    assert apx.C.shape[0] == apx.R.shape[0]
    assert np.all(np.diff(apx.R.indptr) > 0)
    dcount = np.diff(Dc.indptr)
    rcount = np.diff(apx.R.tocsc().indptr)
    par = np.where(fam.parent >= 0, fam.parent, apx.layers.root)
    assert np.all(rcount <= dcount * dcount[par])


def test_cost_matrix_cases():
    apx = build_approximator(path4())
    deltas = apx.layers.deltas
    lay = apx.layers.family.layer
    for (w, w2), c in zip(apx.row_pairs.tolist(), apx.C.tolist()):
        i, i2 = lay[w], lay[w2]
        if i == 0:
            assert c == 2 * deltas[0] == 10.0
        elif deltas[i2] == 2 * deltas[i]:
            assert c == 3 * deltas[i2] == 6 * deltas[i]
        else:
            assert c == 2 * deltas[i]


def test_root_rows_copy_distribution():
    apx = build_approximator(path4())
    fam = apx.layers.family
    root = apx.layers.root
    R = apx.R.tocsc()
    Dc = apx.D.tocsc()
    for v in np.flatnonzero(fam.parent == root).tolist():
        col = R[:, v].toarray().ravel()
        for row in np.flatnonzero(col).tolist():
            w, w2 = apx.row_pairs[row]
            assert w2 == root
            assert col[row] == pytest.approx(Dc[w, v] * Dc[root, root])


class TestAggregation:
    def test_against_member_sums(self, rng):
        for name, inst, apx in corpus_approximators()[:6]:
            b = rng.normal(size=inst.n)
            agg = apx.apply_A(b)
            fam = apx.layers.family
            for g in range(fam.size):
                assert agg[g] == pytest.approx(b[fam.members(g)].sum(), abs=1e-12)

    def test_leaf_and_root_values(self, rng):
        name, inst, apx = corpus_approximators()[4]
        b = random_demands(inst.n, rng)
        agg = apx.apply_A(b)
        fam = apx.layers.family
        assert np.allclose(agg[fam.leaf_of], b)
        top = apx.layers.layers[0].vertices
        assert abs(agg[top].sum()) <= 1e-12

    def test_transpose_counts_containing_sets(self):
        name, inst, apx = corpus_approximators()[5]
        fam = apx.layers.family
        counts = apx.apply_A_transpose(np.ones(fam.size))
        expect = np.zeros(inst.n)
        for g in range(fam.size):
            expect[fam.members(g)] += 1
        assert np.array_equal(counts, expect)

    def test_transpose_of_leaf_indicator(self):
        name, inst, apx = corpus_approximators()[3]
        fam = apx.layers.family
        y = np.zeros(fam.size)
        y[fam.leaf_of[7]] = 1.0
        e = np.zeros(inst.n)
        e[7] = 1.0
        assert np.array_equal(apx.apply_A_transpose(y), e)

    def test_explicit_matrix_agrees(self, rng):
        name, inst, apx = corpus_approximators()[6]
        b = rng.normal(size=inst.n)
        assert np.allclose(apx.aggregation_matrix @ b, apx.apply_A(b))
        scale = np.abs(apx.apply_P(b)).max()
        assert np.allclose(apx.matrix @ b, apx.apply_P(b), atol=1e-12 * scale)


def test_apply_P_linear_and_adjoint(rng):
    for name, inst, apx in corpus_approximators():
        assert not np.any(apx.apply_P(np.zeros(inst.n)))
        b = rng.normal(size=inst.n)
        y = rng.normal(size=apx.n_rows)
        lhs, rhs = y @ apx.apply_P(b), apx.apply_P_transpose(y) @ b
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_alpha_constant():
    assert alpha_bound(4) == pytest.approx(180 * (1 + 1 / 2 + 1 / 3 + 1 / 4) * 4)
    assert harmonic(3) == pytest.approx(11 / 6)


def test_path_example_sandwich_and_flow():
    inst = path4()
    apx = build_approximator(inst)
    b = inst.demands
    norm = apx.norm(b)
    assert 3.0 <= norm <= apx.alpha * 3.0
    f = apx.flow_from_P(b)
    assert is_routing(inst, f, b)
    assert flow_cost(f, inst.cost) <= norm * (1 + 1e-9)
    assert not np.any(apx.flow_from_P(np.zeros(4)).value)


@given(st.integers(4, 50), st.integers(0, 10_000))
def test_sandwich_and_flow_random(n, seed):
    g = small_random(n, seed)
    apx = build_approximator(g)
    b = random_demands(n, np.random.default_rng(seed))
    opt = exact_opt(g, b).opt
    norm = apx.norm(b)
    assert opt * (1 - 1e-9) <= norm <= apx.alpha * opt
    f = apx.flow_from_P(b)
    assert is_routing(g, f, b)
    assert flow_cost(f, g.cost) <= norm * (1 + 1e-9)


def distortion_failures(apx, rng, pairs=100):
    """Pairs violating ``sum_w |D(w,u) - D(w,v)| < 8 d(u,v) H_n lg n / delta``."""
    n = apx.n
    factor = 8 * harmonic(n) * math.log2(n)
    bad, checked = [], 0
    for lay, orc in zip(apx.layers.layers, apx.oracles):
        if orc is None or lay.n < 2:
            continue
        D = layer_distribution(orc, lay.delta).toarray()
        d = apsp(lay.graph)
        if lay.n <= 30:
            us, vs = np.triu_indices(lay.n, 1)
        else:
            us = rng.integers(0, lay.n, pairs)
            vs = rng.integers(0, lay.n, pairs)
            keep = us != vs
            us, vs = us[keep], vs[keep]
        lhs = np.abs(D[:, us] - D[:, vs]).sum(axis=0)
        rhs = factor * d[us, vs] / lay.delta
        checked += us.size
        for q in np.flatnonzero(~(lhs < rhs)).tolist():
            bad.append((lay.index, int(us[q]), int(vs[q]), float(lhs[q]), float(rhs[q])))
    return bad, checked


def test_distortion_small_corpus(rng):
    for name, inst, apx in corpus_approximators()[:5]:
        bad, checked = distortion_failures(apx, rng)
        assert checked > 0 and bad == [], name


def test_deterministic_build():
    g = small_random(70, 9)
    a, b = build_approximator(g), build_approximator(g)
    for x, y in ((a.D, b.D), (a.R, b.R)):
        assert np.array_equal(x.indptr, y.indptr)
        assert np.array_equal(x.indices, y.indices)
        assert np.array_equal(x.data, y.data)
    assert np.array_equal(a.C, b.C)
    assert np.array_equal(a.row_pairs, b.row_pairs)

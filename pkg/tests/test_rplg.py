import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netmemo.errors import UsageError
from netmemo.graph import Graph, read_edgelist, read_weights, write_edgelist
from netmemo.rplg import (
    DegenerateCoreWarning,
    build_weights,
    component_sizes,
    core_gamma,
    giant_component,
    giant_ratio,
    induced_weights,
    natural_delta,
    no_giant_check,
    periphery_ratio_analytic,
    periphery_sums,
    sample_graph,
    solve_core_threshold,
    theorem_core,
    topk_core,
)

params = st.tuples(
    st.integers(2, 3000),
    st.floats(2.05, 2.95),
    st.floats(1.1, 6.0),
    st.floats(1.0, 50.0),
)


def test_worked_example_constants():
    s = build_weights(1000, 2.5, 4, 100)
    assert math.isclose(s.c, 400 / 3, rel_tol=1e-12)
    assert math.isclose(s.i0, 1000 * (2 / 150) ** 1.5, rel_tol=1e-12)
    assert abs(s.i0 - 1.5396) < 1e-3
    # the first index is ceil(i0) = 2, so the heaviest node is c * 2**(-2/3)
    assert math.isclose(s.weights[0], 400 / 3 * 2 ** (-2 / 3), rel_tol=1e-12)
    assert s.weights[0] <= 100 * (1 + 1e-6)


@given(params)
def test_weight_sequence_invariants(p):
    N, beta, w_bar, mult = p
    delta = w_bar * mult
    s = build_weights(N, beta, w_bar, delta)
    assert len(s.weights) == N
    assert np.all(np.diff(s.weights) < 0)
    assert s.weights.max() <= delta * (1 + 1e-6)
    assert math.isclose(s.weights.sum() * s.rho, 1.0, rel_tol=1e-12)
    assert np.allclose(s.weights, s.c * s.indices ** (-1 / (beta - 1)), rtol=1e-12)


def test_c_vanishes_as_beta_approaches_two():
    # the prefactor (beta-2)/(beta-1) grows with beta while N**(1/(beta-1))
    # shrinks, so c rises from 0 near beta = 2 and later turns down
    near = np.linspace(2.001, 2.1, 50)
    cs = np.array([build_weights(1000, b, 3, 50).c for b in near])
    assert np.all(np.diff(cs) > 0)
    assert cs[0] < 0.05 * cs[-1]
    pref = [build_weights(1000, b, 3, 50).c / (3 * 1000 ** (1 / (b - 1))) for b in np.linspace(2.01, 2.99, 50)]
    assert np.all(np.diff(pref) > 0)


def test_natural_delta_puts_i0_at_one():
    s = build_weights(2000, 2.5, 1.5)
    assert math.isclose(s.i0, 1.0, rel_tol=1e-12)
    assert s.delta == natural_delta(2000, 2.5, 1.5)


@pytest.mark.parametrize(
    "args", [(1, 2.5, 2, 10), (100, 2.0, 2, 10), (100, 3.0, 2, 10), (100, 2.5, 1.0, 10), (100, 2.5, 4, 3)]
)
def test_parameter_ranges(args):
    with pytest.raises(UsageError):
        build_weights(*args)


def test_zero_weights_give_no_edges():
    g = sample_graph(np.zeros(50), seed=1)
    assert g.m == 0


def test_graph_is_simple_and_reproducible():
    s = build_weights(800, 2.3, 3, 80)
    a, b = sample_graph(s, seed=5), sample_graph(s, seed=5)
    assert np.array_equal(a.edges, b.edges)
    assert np.all(a.edges[:, 0] < a.edges[:, 1])
    assert len({tuple(e) for e in a.edges}) == a.m


def test_realized_degree_matches_expectation():
    s = build_weights(300, 2.5, 3, 40)
    w = s.weights
    p = np.minimum(1.0, np.outer(w, w) * s.rho)
    np.fill_diagonal(p, 0.0)
    expected = p.sum(axis=1)
    var = (p * (1 - p)).sum(axis=1)
    degs = np.array([sample_graph(s, seed=k).degrees() for k in range(200)])
    se = np.sqrt(var / 200)
    for i in (0, 1, 10, 150, 299):
        assert abs(degs[:, i].mean() - expected[i]) <= 3 * se[i]


def test_giant_component_is_linear():
    s = build_weights(5000, 2.5, 2, 100)
    for seed in range(5):
        sizes = component_sizes(sample_graph(s, seed=seed))
        assert sizes[0] >= 0.3 * 5000
        assert sizes[1] <= 5 * math.log(5000)


def test_giant_of_two_cliques():
    five = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    three = [(i, j) for i in range(5, 8) for j in range(i + 1, 8)]
    g = Graph.from_edges(8, five + three)
    assert giant_component(g).tolist() == [0, 1, 2, 3, 4]
    assert giant_component(Graph.from_edges(3, [(0, 1), (1, 2)])).tolist() == [0, 1, 2]
    assert giant_component(Graph(0, np.zeros((0, 2)))).size == 0


def test_degree_distribution_slope():
    beta = 2.5
    s = build_weights(5000, beta, 3, 200)
    hist = np.zeros(1000)
    for seed in range(5):
        d = sample_graph(s, seed=seed).degrees()
        hist[: d.max() + 1] += np.bincount(d)
    xs = np.arange(2, int(s.delta / 4) + 1)
    keep = hist[xs] > 0
    slope = np.polyfit(np.log(xs[keep]), np.log(hist[xs][keep]), 1)[0]
    assert abs(slope + beta) <= 0.3


def test_gamma_and_threshold():
    assert math.isclose(core_gamma(2.5), 1 / 3, rel_tol=1e-12)
    g, l = solve_core_threshold(2.5, 2)
    assert math.isclose(l, 2.25, rel_tol=1e-12)
    with pytest.warns(DegenerateCoreWarning):
        _, l = solve_core_threshold(2.5, 3)
    assert math.isclose(l, 1.0, rel_tol=1e-12)


@given(st.floats(2.01, 2.99), st.floats(0.1, 20))
def test_threshold_solves_its_equation(beta, w_bar):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateCoreWarning)
        gamma, l = solve_core_threshold(beta, w_bar)
    assert abs(l ** (3 - beta) - 1 / (w_bar * gamma)) < 1e-12 * max(1.0, 1 / (w_bar * gamma))


def test_theorem_core_edges():
    w = np.array([10.0, 5.0, 2.0, 1.0, 1.0])
    assert theorem_core(w, (0.0, 20.0)).nodes == ()
    with pytest.warns(DegenerateCoreWarning):
        assert len(theorem_core(w, (0.0, 1.0))) == 5
    assert theorem_core(w, (0.0, 1.0 + 1e-9)).nodes == (0, 1, 2)


def test_theorem_core_fraction_matches_power_law():
    beta, w_bar = 2.5, 2
    gamma, l = solve_core_threshold(beta, w_bar)
    s = build_weights(200_000, beta, w_bar)
    frac = len(theorem_core(s, (gamma, l))) / s.N
    assert abs(frac / l ** (1 - beta) - 1) <= 0.2


def test_topk_core():
    g = Graph.from_edges(6, [(0, 1), (0, 2), (0, 3), (4, 5), (1, 2)])
    assert topk_core(g, 1.0).nodes == tuple(range(6))
    assert topk_core(g, 0.2).nodes == (0, 1)  # ceil(1.2) = 2; 1 and 2 tie at degree 2
    s = build_weights(2000, 2.5, 2)
    assert len(topk_core(sample_graph(s, 0), 0.025)) == 50
    with pytest.raises(UsageError):
        topk_core(g, 0.0)


def test_topk_by_expected_degree():
    s = build_weights(500, 2.5, 2)
    assert topk_core(sample_graph(s, 3), 0.01, by="expected").nodes == (0, 1, 2, 3, 4)


def test_topk_with_external_total():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert len(topk_core(g, 0.25, n_total=8)) == 2
    assert len(topk_core(g, 1.0, n_total=100)) == 4


def test_no_giant_check_cases():
    w = np.array([3.0, 2.0, 1.0])
    assert np.allclose(induced_weights(w), w)
    assert giant_ratio(w) == (9 + 4 + 1) / 6
    assert no_giant_check(np.full(10, 0.5))
    assert no_giant_check(np.full(10, 0.5), total_weight=100.0)
    with pytest.raises(UsageError):
        no_giant_check([])


def test_periphery_ratio_is_one_at_threshold():
    for beta in (2.2, 2.5, 2.8):
        for w_bar in (1.5, 2, 2.5):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateCoreWarning)
                gamma, l = solve_core_threshold(beta, w_bar)
            assert abs(periphery_ratio_analytic(10_000, beta, w_bar, l) - 1) < 1e-9
            # the induced sums scale the raw ones by (1 - l^(2-beta)) and its square
            s = periphery_sums(10_000, beta, w_bar, l)
            shrink = s["vol"] / (10_000 * w_bar)
            assert math.isclose(s["induced_vol"], s["vol"] * shrink)
            assert math.isclose(s["induced_vol2"], s["vol2"] * shrink**2)


def test_edgelist_round_trip(tmp_path):
    s = build_weights(300, 2.5, 2)
    g = sample_graph(s, seed=2)
    path = tmp_path / "g.txt"
    write_edgelist(path, g, seed=2, beta=2.5, w_bar=2.0, delta=s.delta, weights=g.weights)
    h, meta = read_edgelist(path)
    assert np.array_equal(h.edges, g.edges) and h.n == g.n
    assert meta == {"seed": 2, "beta": 2.5, "w_bar": 2.0, "delta": s.delta}
    assert np.array_equal(read_weights(f"{path}.weights", g.n), g.weights)
    assert path.read_text().splitlines()[0] == f"300 {g.m} 2 2.5 2.0 {s.delta!r}"


def test_graph_rejects_self_loops():
    with pytest.raises(UsageError):
        Graph.from_edges(3, [(1, 1)])


def test_restrict_to_giant_relabels():
    g = sample_graph(build_weights(1000, 2.5, 2), seed=1)
    sub, nodes = g.restrict_to_giant()
    assert sub.n == len(giant_component(g))
    assert np.all(np.diff(nodes) > 0)
    assert np.array_equal(sub.weights, g.weights[nodes])
    assert component_sizes(sub).tolist() == [sub.n]

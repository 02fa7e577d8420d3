import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slqp.fractional import run_lft, run_qft
from slqp.hardness import (
    ComponentGraph,
    achieving_assignment,
    brute_force_binary_optimum,
    build_instance,
    canonical_graphs,
    coordinate_convexity_margin,
    expected_optimum,
    max_independent_set,
    mis_size,
    read_graph,
    write_graph,
)
from slqp.network import rates
from slqp.percentile import slqp


def mis_oracle(graph):
    """Independence number from exact maximum clique of the complement."""
    nx = pytest.importorskip("networkx")
    G = nx.Graph(list(graph.edges))
    G.add_nodes_from(graph.component)
    comp = nx.complement(G)
    clique, _ = nx.max_weight_clique(comp, weight=None)
    return len(clique)


@st.composite
def connected_graphs(draw):
    Kq = draw(st.integers(2, 7))
    K = Kq + draw(st.integers(0, 4))
    # Random spanning tree plus extra edges keeps the component connected.
    edges = {(draw(st.integers(0, v - 1)), v) for v in range(1, Kq)}
    extra = draw(st.lists(st.tuples(st.integers(0, Kq - 1), st.integers(0, Kq - 1)), max_size=8))
    edges |= {tuple(sorted(e)) for e in extra if e[0] != e[1]}
    L = Kq + draw(st.floats(0.1, 20))
    return ComponentGraph.from_component(K, Kq, edges, L)


class TestComponentGraph:
    def test_normalizes_edges(self):
        g = ComponentGraph(4, 3, frozenset({(3, 2), (3, 4)}), 5.0)
        assert g.edges == {(2, 3), (3, 4)}
        assert list(g.component) == [2, 3, 4]

    @pytest.mark.parametrize("K,Kq,edges,L", [
        (3, 1, [], 5.0),
        (3, 2, [(2, 3)], 2.0),
        (3, 2, [(1, 3)], 5.0),
        (4, 3, [(2, 3)], 5.0),
        (3, 2, [(3, 3)], 5.0),
    ])
    def test_rejects(self, K, Kq, edges, L):
        with pytest.raises(ValueError):
            ComponentGraph(K, Kq, frozenset(edges), L)

    def test_instance_gains(self):
        g = ComponentGraph.path(4, 3, 5.0)
        inst = build_instance(g)
        np.testing.assert_array_equal(np.diag(inst.G), 1.0)
        assert inst.G[1, 2] == inst.G[2, 1] == 5.0 * 9
        assert inst.G[1, 3] == 0.0 and inst.G[0, 1] == 0.0
        assert inst.sigma2 == 5.0 and inst.pmax == 1.0

    def test_file_roundtrip(self, tmp_path):
        g = ComponentGraph.cycle(7, 5, 6.5)
        path = tmp_path / "g.txt"
        write_graph(g, path)
        assert read_graph(path) == g
        assert read_graph("3 2 4.0\n2 3  # edge\n") == ComponentGraph.path(3, 2, 4.0)
        with pytest.raises(ValueError):
            read_graph("3 2\n2 3\n")
        with pytest.raises(ValueError):
            read_graph("3 2 4.0\n2 3 1\n")


class TestIndependentSets:
    @pytest.mark.parametrize("g,alpha", [
        (ComponentGraph.path(5, 5, 9.0), 3),
        (ComponentGraph.cycle(5, 5, 9.0), 2),
        (ComponentGraph.cycle(6, 6, 9.0), 3),
        (ComponentGraph.clique(6, 4, 9.0), 1),
        (ComponentGraph.star(6, 6, 9.0), 5),
    ])
    def test_known(self, g, alpha):
        assert mis_size(g) == alpha

    @settings(max_examples=40, deadline=None)
    @given(connected_graphs())
    def test_matches_networkx(self, g):
        I = max_independent_set(g)
        assert all((min(a, b), max(a, b)) not in g.edges for a, b in itertools.combinations(I, 2))
        assert len(I) == mis_oracle(g)


class TestReduction:
    @pytest.mark.parametrize("g", canonical_graphs(), ids=lambda g: f"K{g.K}Kq{g.Kq}E{len(g.edges)}")
    def test_brute_force_equals_mis_value(self, g):
        inst = build_instance(g)
        p, v = brute_force_binary_optimum(inst, g.Kq)
        assert abs(v - mis_size(g) * math.log1p(1 / g.L)) <= 1e-9
        assert abs(v - expected_optimum(g)) <= 1e-9
        # Argmax: isolated users on, and the active component vertices form a maximum independent set.
        n_iso = g.K - g.Kq
        np.testing.assert_array_equal(p[:n_iso], 1.0)
        on = [v + 1 for v in range(n_iso, g.K) if p[v] == 1.0]
        assert len(on) == mis_size(g)
        assert all((a, b) not in g.edges for a, b in itertools.combinations(on, 2))
        np.testing.assert_allclose(slqp(rates(inst, achieving_assignment(g)), g.Kq), expected_optimum(g),
                                   atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(connected_graphs())
    def test_random_graphs(self, g):
        _, v = brute_force_binary_optimum(build_instance(g), g.Kq)
        assert abs(v - expected_optimum(g)) <= 1e-9

    def test_brute_force_limits(self):
        inst = build_instance(ComponentGraph.path(3, 2, 4.0))
        with pytest.raises(ValueError):
            brute_force_binary_optimum(inst, 0)

    @pytest.mark.parametrize("g", canonical_graphs()[2:9:3])
    def test_coordinate_convexity(self, g):
        assert coordinate_convexity_margin(g, samples=10) >= 0

    @pytest.mark.parametrize("run", [run_qft, run_lft])
    def test_mm_never_exceeds_oracle(self, run):
        for g in canonical_graphs()[:8:2]:
            inst = build_instance(g)
            _, best = brute_force_binary_optimum(inst, g.Kq)
            for seed in range(3):
                res, _ = run(inst, g.Kq, seed=seed)
                assert res.value <= best + 1e-9

import random

import pytest

from qcycles.cube import Edge, Subcube, hamming, parse_vertex
from qcycles.errors import CapacityError, MembershipError
from qcycles.graphs import (
    ScopeGraph,
    components,
    expansion_ratio,
    giant_component,
    shortest_path,
)
from qcycles.sampling import ExplicitInstance, KeepModel, PercolationSample


def test_components_full_and_empty():
    summary, _ = components(PercolationSample(5, 8, 1.0))
    assert summary.sizes == [256]
    assert summary.giant_index == 0 and summary.giant_fraction == 1.0
    summary0, _ = components(PercolationSample(5, 8, 0.0))
    assert summary0.sizes == [1] * 256
    assert summary0.giant_index is None


def test_components_forced_edge_list():
    inst = ExplicitInstance(
        3,
        [
            Edge.between(parse_vertex("000"), parse_vertex("001")),
            Edge.between(parse_vertex("001"), parse_vertex("011")),
        ],
    )
    summary, g = components(inst)
    assert summary.sizes == [3, 1, 1, 1, 1, 1]
    labels = g.component_labels()
    trio = {g.local_of(parse_vertex(s)) for s in ("000", "001", "011")}
    assert len({int(labels[i]) for i in trio}) == 1


def test_component_sizes_sum_and_edges_within_labels():
    rng = random.Random(17)
    for _ in range(20):
        d = rng.randrange(3, 10)
        s = PercolationSample(rng.randrange(1 << 32), d, rng.random())
        summary, g = components(s)
        assert sum(summary.sizes) == summary.retained == 1 << d
        labels = g.component_labels()
        for i in range(g.n):
            for j in g.neighbors_local(i):
                assert labels[i] == labels[int(j)]


def test_giant_component_gap():
    summary, _ = components(PercolationSample(1, 8, 1.0))
    info = giant_component(summary)
    assert info is not None and info.size == 256
    assert info.gap_ratio == float("inf")
    summary0, _ = components(PercolationSample(1, 8, 0.0), giant_threshold=0.01)
    assert giant_component(summary0) is None


def test_shortest_path_cases():
    s1 = PercolationSample(2, 7, 1.0)
    full = Subcube.full(7)
    path = shortest_path(s1, full, None, 0, 0)
    assert path == [0]
    u, v = 0b0000000, 0b1010011
    path = shortest_path(s1, full, None, u, v)
    assert path is not None
    assert len(path) - 1 == hamming(u, v)
    for a, b in zip(path, path[1:]):
        assert hamming(a, b) == 1

    s0 = PercolationSample(2, 5, 0.0)
    assert shortest_path(s0, Subcube.full(5), None, 0, 3) is None

    removed = PercolationSample(3, 5, 1.0, vertex_model=KeepModel(1e-9))
    with pytest.raises(MembershipError):
        shortest_path(removed, Subcube.full(5), None, 0, 1)


def test_diameter_exact_and_double_sweep():
    for d in (3, 5, 7):
        _, g = components(PercolationSample(4, d, 1.0))
        exact = g.diameter(0, "exact")
        assert exact.value == d and exact.method == "exact"
        sweep = g.diameter(0, "double_sweep")
        assert sweep.method == "double_sweep"
        assert sweep.value <= exact.value
        # on the full cube the double sweep actually attains the diameter
        assert sweep.value == d


def test_diameter_of_path_component():
    # a 4-edge path: diameter 4
    verts = [0b0000, 0b0001, 0b0011, 0b0111, 0b1111]
    inst = ExplicitInstance(4, [Edge.between(a, b) for a, b in zip(verts, verts[1:])])
    _, g = components(inst)
    assert g.diameter(0, "exact").value == 4


def test_double_sweep_below_exact_randomized():
    rng = random.Random(23)
    for _ in range(15):
        d = rng.randrange(3, 9)
        s = PercolationSample(rng.randrange(1 << 32), d, 0.4 + 0.5 * rng.random())
        _, g = components(s)
        exact = g.diameter(0, "exact").value
        sweep = g.diameter(0, "double_sweep").value
        assert sweep <= exact


def test_exact_diameter_ceiling(monkeypatch):
    import qcycles.graphs as graphs

    monkeypatch.setattr(graphs, "EXACT_DIAMETER_CEILING", 4)
    _, g = components(PercolationSample(4, 4, 1.0))
    with pytest.raises(CapacityError):
        g.diameter(0, "exact")


def test_scope_dim_ceiling():
    with pytest.raises(CapacityError):
        ScopeGraph(PercolationSample(1, 23, 0.5), Subcube.full(23), None)


def test_expansion_examples():
    d = 9
    s1 = PercolationSample(6, d, 1.0)
    full = Subcube.full(d)
    assert expansion_ratio(s1, full, None, [0]) == d
    s0 = PercolationSample(6, d, 0.0)
    assert expansion_ratio(s0, full, None, [5]) == 0.0
    # a full (d-1)-subcube expands exactly through its matching
    half = [v for v in range(1 << d) if not v & 1]
    assert expansion_ratio(s1, full, None, half) == 1.0


def test_expansion_requires_connected_set():
    s = PercolationSample(6, 6, 1.0)
    with pytest.raises(MembershipError):
        expansion_ratio(s, Subcube.full(6), None, [0, 0b111])
    with pytest.raises(ValueError):
        expansion_ratio(s, Subcube.full(6), None, [])


def test_grow_connected_set():
    s = PercolationSample(8, 10, 0.6)
    g = ScopeGraph(s, Subcube.full(10), None)
    rng = random.Random(3)
    grown = g.grow_connected_set(rng, 40)
    assert grown is not None and len(grown) == 40
    assert g.is_connected_set(grown)
    ratio = len(g.external_neighborhood(grown)) / len(grown)
    assert ratio > 0


def test_scope_and_class_restriction():
    s = PercolationSample(9, 8, 0.7, vertex_model=KeepModel(0.5))
    g = ScopeGraph(s, Subcube.full(8), None)
    assert 0 < g.retained_count < 256
    labels = g.component_labels()
    for i in range(g.n):
        if not g.retained[i]:
            assert labels[i] == -1
    # edges only between retained endpoints, and matching the scalar queries
    for i in range(g.n):
        for j in g.neighbors_local(i):
            u, v = g.global_of(i), g.global_of(int(j))
            assert s.vertex_allowed(u) and s.vertex_allowed(v)
            assert s.edge_present(Edge.between(u, v))

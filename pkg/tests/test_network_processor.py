"""
Tests for network loading, path enumeration and the path cost model.
"""

import numpy as np
import pytest

from conftest import PROPERTY_CASES, random_network_dict
from network_processor import (
    DimensionMismatchError,
    NetworkParseError,
    NetworkValidationError,
    NoPathError,
    NoPathsLeftError,
    PathExplosionError,
    build_cost_model,
    edge_flow,
    enumerate_paths,
    network_from_dict,
    parse_network,
    save_network,
)


def two_route_dict(**overrides):
    data = {
        "vertices": ["s", "t"],
        "origin": "s",
        "destination": "t",
        "edges": [
            {"tail": "s", "head": "t", "alpha": 1, "beta": 0},
            {"tail": "s", "head": "t", "alpha": 0, "beta": 1},
        ],
    }
    data.update(overrides)
    return data


def test_wheatstone_cost_matrix(wheatstone):
    np.testing.assert_allclose(wheatstone.A, [[1, 0, 1], [0, 1, 1], [1, 1, 2]])
    np.testing.assert_allclose(wheatstone.beta, [1, 1, 0])
    assert wheatstone.path_labels() == ["e1-e2", "e3-e4", "e1-e5-e4"]
    assert wheatstone.is_psd()


def test_merged_cost_matrix(merged):
    np.testing.assert_allclose(merged.A, [[1, 0, 1, 0], [0, 1, 1, 0], [1, 1, 2, 0], [0, 0, 0, 0]])
    np.testing.assert_allclose(merged.beta, [1, 1, 0, 2])
    # Rerouting along (-1, -1, 1, 1) leaves every path cost unchanged
    np.testing.assert_allclose(merged.A @ np.array([-1, -1, 1, 1]), 0)


def test_seven_edge_cost_matrix(seven_edge):
    np.testing.assert_allclose(seven_edge.A, [[3, 0, 2, 0], [0, 4, 2, 1], [2, 2, 4, 0], [0, 1, 0, 2]])
    np.testing.assert_allclose(seven_edge.beta, [1, 1, 0, 6])
    assert len(seven_edge.network.vertices) == 5


def test_vertex_count_form(single_edge):
    assert single_edge.network.vertices == ("1", "2")
    assert single_edge.network.edges[0].label == "e1"
    assert single_edge.n == 1


def test_enumeration_sorted_without_declared_order():
    network = network_from_dict({
        "vertices": ["o", "a", "d"],
        "origin": "o",
        "destination": "d",
        "edges": [
            {"tail": "a", "head": "d", "alpha": 1},
            {"tail": "o", "head": "a", "alpha": 1},
            {"tail": "o", "head": "d", "beta": 3},
        ],
    })
    paths = enumerate_paths(network)
    assert [p.edges for p in paths] == [(1, 0), (2,)]
    assert all(p.is_simple(network) for p in paths)


def test_declared_order_must_match_enumeration(wheatstone):
    data = wheatstone.network.to_dict()
    data["paths"] = [["e1", "e2"], ["e3", "e4"]]
    with pytest.raises(NetworkValidationError):
        build_cost_model(network_from_dict(data))


def test_declared_path_must_be_simple(wheatstone):
    data = wheatstone.network.to_dict()
    data["paths"] = [["e1", "e4"], ["e3", "e4"], ["e1", "e5", "e4"]]
    with pytest.raises(NetworkValidationError):
        network_from_dict(data)


def test_path_explosion():
    # Layered graph with 3 parallel edges per layer: 3^4 = 81 paths
    edges = []
    for layer in range(4):
        for _ in range(3):
            edges.append({"tail": str(layer + 1), "head": str(layer + 2), "alpha": 1})
    network = network_from_dict({"vertices": 5, "origin": "1", "destination": "5", "edges": edges})
    assert len(enumerate_paths(network, cap=100)) == 81
    with pytest.raises(PathExplosionError) as info:
        enumerate_paths(network, cap=50)
    assert info.value.cap == 50


def test_no_path():
    network = network_from_dict({
        "vertices": ["o", "a", "d"],
        "origin": "o",
        "destination": "d",
        "edges": [{"tail": "o", "head": "a", "alpha": 1}],
    })
    with pytest.raises(NoPathError):
        enumerate_paths(network)


@pytest.mark.parametrize("data", [
    two_route_dict(origin="x"),
    two_route_dict(destination="s"),
    two_route_dict(edges=[{"tail": "s", "head": "t", "alpha": -1, "beta": 0}]),
    two_route_dict(edges=[{"tail": "s", "head": "s", "alpha": 1}]),
    two_route_dict(edges=[{"tail": "s", "head": "q", "alpha": 1}]),
    two_route_dict(edges=[{"tail": "s", "head": "t", "label": "a"}, {"tail": "s", "head": "t", "label": "a"}]),
])
def test_validation_errors(data):
    with pytest.raises(NetworkValidationError):
        network_from_dict(data)


@pytest.mark.parametrize("data, field", [
    ({"vertices": ["s", "t"], "origin": "s", "destination": "t"}, "edges"),
    (two_route_dict(vertices=True), "vertices"),
    (two_route_dict(edges=[{"tail": "s", "head": "t", "alpha": "fast"}]), "edges[0].alpha"),
    (two_route_dict(edges=[{"head": "t"}]), "tail"),
])
def test_parse_errors_name_the_field(data, field):
    with pytest.raises(NetworkParseError) as info:
        network_from_dict(data)
    assert info.value.field == field


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "vertices": 2,\n  "edges": [,]\n}\n')
    with pytest.raises(NetworkParseError) as info:
        parse_network(path)
    assert info.value.line == 3


def test_save_and_reload(tmp_path, seven_edge):
    path = tmp_path / "copy.json"
    save_network(seven_edge.network, path)
    reloaded = build_cost_model(parse_network(path))
    np.testing.assert_allclose(reloaded.A, seven_edge.A)
    np.testing.assert_allclose(reloaded.beta, seven_edge.beta)
    assert reloaded.path_labels() == seven_edge.path_labels()


def test_costs_and_beckmann(wheatstone):
    f = np.array([0.5, 0.5, 0.5])
    np.testing.assert_allclose(wheatstone.path_costs(f), [2, 2, 2])
    np.testing.assert_allclose(edge_flow(wheatstone, f), [1, 0.5, 0.5, 1, 0.5])
    np.testing.assert_allclose(wheatstone.edge_costs(f), [1, 1, 1, 1, 0])
    # 1/2 f^T A f + beta^T f = 1/2 * 2 + 1
    assert wheatstone.beckmann(f) == pytest.approx(2.0)
    with pytest.raises(DimensionMismatchError):
        wheatstone.path_costs([1.0, 2.0])


def test_with_excluded(wheatstone):
    modified = wheatstone.with_excluded([2])
    assert modified.allowed == (0, 1)
    assert wheatstone.allowed == (0, 1, 2)
    with pytest.raises(NoPathsLeftError):
        modified.with_excluded([0, 1])


def test_model_arrays_are_read_only(wheatstone):
    with pytest.raises(ValueError):
        wheatstone.A[0, 0] = 5.0


def test_processor_summary(processor):
    network = processor.load_network("merged")
    summary = processor.get_network_summary(network)
    assert summary["paths"] == 4
    assert summary["zero_slope_edges"] == ["e2", "e3"]
    with pytest.raises(NetworkParseError):
        processor.load_network("no_such_network")


def test_load_all_bundled(processor):
    networks = processor.load_all()
    assert {"wheatstone", "merged", "parallel_path", "parallel_path_smooth",
            "seven_edge", "single_edge"} <= set(networks)


# ----------------------------------------------------------------------
# Randomized properties
# ----------------------------------------------------------------------

def count_simple_paths(network):
    """Depth-first count of simple origin-destination edge paths."""
    def walk(vertex, seen):
        if vertex == network.destination:
            return 1
        return sum(
            walk(edge.head, seen | {edge.head})
            for edge in network.edges
            if edge.tail == vertex and edge.head not in seen
        )
    return walk(network.origin, {network.origin})


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(PROPERTY_CASES))
def test_random_paths_distinct_and_simple(seed):
    network = network_from_dict(random_network_dict(np.random.default_rng(seed)))
    paths = enumerate_paths(network, cap=200)
    assert len(set(paths)) == len(paths)
    assert all(path.is_simple(network) for path in paths)
    assert len(paths) == count_simple_paths(network)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(PROPERTY_CASES))
def test_random_cost_matrix_matches_shared_edges(seed):
    rng = np.random.default_rng(seed)
    network = network_from_dict(random_network_dict(rng))
    model = build_cost_model(network, cap=200)

    for i, p in enumerate(model.paths):
        assert model.beta[i] == pytest.approx(sum(network.edges[k].beta for k in p.edges))
        for j, r in enumerate(model.paths):
            shared = set(p.edges) & set(r.edges)
            assert model.A[i, j] == pytest.approx(sum(network.edges[k].alpha for k in shared))

    for _ in range(20):
        f = rng.normal(size=model.n)
        assert f @ model.A @ f >= -1e-9 * (1 + f @ f)
        g = rng.uniform(0, 5, size=model.n)
        assert g @ model.A @ g >= -1e-9 * (1 + g @ g)
        np.testing.assert_allclose(model.path_costs(g), model.B.T @ model.edge_costs(g))

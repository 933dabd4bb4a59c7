"""
Shared fixtures for the routing game test suite.
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.append(str(ROOT / "src"))
sys.path.append(str(ROOT))

from braess_analyzer import BraessAnalyzer  # noqa: E402
from convex_solvers import SolverTolerances  # noqa: E402
from demand_sweep_analyzer import DemandSweepAnalyzer  # noqa: E402
from equilibrium_analyzer import EquilibriumAnalyzer  # noqa: E402
from network_processor import (  # noqa: E402
    NetworkProcessor,
    build_cost_model,
    network_from_dict,
)
from run_config import RunConfig  # noqa: E402

NETWORK_DIR = ROOT / "data" / "networks"
CANDIDATE_DIR = ROOT / "data" / "candidates"

# Size of the randomized suites; the trace-heavy ones use a fifth of it
PROPERTY_CASES = int(os.environ.get("ROUTING_PROPERTY_CASES", "1000"))
TRACE_CASES = max(1, PROPERTY_CASES // 5)


def load_model(name):
    processor = NetworkProcessor(str(NETWORK_DIR))
    return processor.build_model(processor.load_network(name))


@pytest.fixture(scope="session")
def processor():
    return NetworkProcessor(str(NETWORK_DIR))


@pytest.fixture(scope="session")
def wheatstone():
    return load_model("wheatstone")


@pytest.fixture(scope="session")
def merged():
    return load_model("merged")


@pytest.fixture(scope="session")
def parallel_path():
    return load_model("parallel_path")


@pytest.fixture(scope="session")
def parallel_path_smooth():
    return load_model("parallel_path_smooth")


@pytest.fixture(scope="session")
def seven_edge():
    return load_model("seven_edge")


@pytest.fixture(scope="session")
def single_edge():
    return load_model("single_edge")


@pytest.fixture(scope="session")
def dominated():
    """Two parallel constant edges behind a shared congestible edge; the second is never used."""
    network = network_from_dict({
        "name": "dominated",
        "vertices": ["o", "m", "d"],
        "origin": "o",
        "destination": "d",
        "edges": [
            {"tail": "o", "head": "m", "alpha": 1, "beta": 0},
            {"tail": "m", "head": "d", "alpha": 0, "beta": 0},
            {"tail": "m", "head": "d", "alpha": 0, "beta": 1},
        ],
    })
    return build_cost_model(network)


@pytest.fixture(scope="session")
def wheatstone_sweep(wheatstone):
    return DemandSweepAnalyzer(wheatstone)


@pytest.fixture(scope="session")
def wheatstone_braess(wheatstone):
    return BraessAnalyzer(wheatstone)


@pytest.fixture(scope="session")
def merged_braess(merged):
    return BraessAnalyzer(merged)


@pytest.fixture(scope="session")
def seven_edge_braess(seven_edge):
    return BraessAnalyzer(seven_edge)


@pytest.fixture
def equilibrium_of():
    def make(model):
        return EquilibriumAnalyzer(model, SolverTolerances())
    return make


@pytest.fixture
def default_config():
    return RunConfig()


def random_network_dict(rng, max_vertices=5, max_edges=8):
    """
    Random single-OD network: a spine from origin to destination plus random
    extra edges, with integer-ish affine costs. Always has at least one path.
    """
    n_vertices = int(rng.integers(2, max_vertices + 1))
    vertices = [str(v) for v in range(n_vertices)]
    origin, destination = vertices[0], vertices[-1]

    edges = []
    for tail, head in zip(vertices[:-1], vertices[1:]):
        edges.append((tail, head))
    while len(edges) < max_edges and rng.random() < 0.8:
        tail, head = rng.choice(n_vertices, size=2, replace=False)
        if str(tail) == destination or str(head) == origin:
            continue
        edges.append((str(tail), str(head)))

    return {
        "name": "random",
        "vertices": vertices,
        "origin": origin,
        "destination": destination,
        "edges": [
            {
                "tail": tail,
                "head": head,
                "alpha": float(rng.integers(0, 4)) if rng.random() < 0.8 else float(rng.uniform(0, 3)),
                "beta": float(rng.integers(0, 4)),
            }
            for tail, head in edges
        ],
    }


@pytest.fixture
def random_model():
    """Factory: random_model(seed) -> PathCostModel for a small random network."""
    def make(seed, max_vertices=5, max_edges=8):
        rng = np.random.default_rng(seed)
        network = network_from_dict(random_network_dict(rng, max_vertices, max_edges))
        return build_cost_model(network, cap=200)
    return make

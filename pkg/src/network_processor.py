"""
Network Processing Module for Routing Game Analysis

This module handles loading and validating network files, enumerating the
simple origin-destination paths, and assembling the path-space cost model
C(f) = A f + beta used by every analyzer.
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path as FilePath
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_PATH_CAP = 10000


class RoutingGameError(Exception):
    """Base class for every error raised by the routing game toolkit."""


class NetworkParseError(RoutingGameError):
    """A network file could not be read or is structurally malformed."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = []
        if field is not None:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")


class NetworkValidationError(RoutingGameError):
    """A network violates a modelling assumption (negative cost, self-loop, ...)."""


class NoPathError(RoutingGameError):
    """No simple path connects the origin to the destination."""


class PathExplosionError(RoutingGameError):
    """Path enumeration exceeded the configured cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"More than {cap} origin-destination paths (stopped at {count})")


class DimensionMismatchError(RoutingGameError, ValueError):
    """A vector or matrix does not have the shape the model expects."""


class InvalidDemandError(RoutingGameError, ValueError):
    """Demand is negative, or zero where a decrease direction is requested."""


class NoPathsLeftError(RoutingGameError):
    """A modified game would remove every path of the base game."""


@dataclass(frozen=True)
class Edge:
    """One directed edge with affine cost alpha * f_e + beta."""

    tail: str
    head: str
    alpha: float
    beta: float
    label: str


@dataclass(frozen=True)
class Network:
    """
    A single origin-destination network with affine edge costs.

    Vertex ids are kept as strings so that both numbered and named vertices
    round-trip through the JSON format unchanged.
    """

    vertices: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    origin: str
    destination: str
    name: str = "network"
    path_order: Optional[Tuple[Tuple[int, ...], ...]] = None

    def validate(self) -> None:
        """
        Check the modelling assumptions.

        Raises:
            NetworkValidationError: on negative coefficients, unknown or
                repeated vertices, self-loops, duplicate edge labels or
                origin == destination
        """
        vertex_set = set(self.vertices)
        if len(vertex_set) != len(self.vertices):
            raise NetworkValidationError("Vertex ids must be unique")
        if self.origin not in vertex_set:
            raise NetworkValidationError(f"Origin '{self.origin}' is not a vertex")
        if self.destination not in vertex_set:
            raise NetworkValidationError(f"Destination '{self.destination}' is not a vertex")
        if self.origin == self.destination:
            raise NetworkValidationError("Origin and destination must differ")

        labels = set()
        for edge in self.edges:
            if edge.tail not in vertex_set or edge.head not in vertex_set:
                raise NetworkValidationError(
                    f"Edge {edge.label} ({edge.tail}->{edge.head}) references a dangling vertex"
                )
            if edge.tail == edge.head:
                raise NetworkValidationError(f"Edge {edge.label} is a self-loop on '{edge.tail}'")
            if not (np.isfinite(edge.alpha) and np.isfinite(edge.beta)):
                raise NetworkValidationError(f"Edge {edge.label} has a non-finite cost coefficient")
            if edge.alpha < 0 or edge.beta < 0:
                raise NetworkValidationError(
                    f"Edge {edge.label} has a negative cost coefficient "
                    f"(alpha={edge.alpha}, beta={edge.beta})"
                )
            if edge.label in labels:
                raise NetworkValidationError(f"Duplicate edge label '{edge.label}'")
            labels.add(edge.label)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_index(self, label: str) -> int:
        for k, edge in enumerate(self.edges):
            if edge.label == label:
                return k
        raise NetworkValidationError(f"Unknown edge label '{label}'")

    def to_graph(self) -> nx.MultiDiGraph:
        """Return the network as a networkx multigraph keyed by edge index."""
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(self.vertices)
        for k, edge in enumerate(self.edges):
            graph.add_edge(edge.tail, edge.head, key=k, alpha=edge.alpha, beta=edge.beta)
        return graph

    def to_dict(self) -> Dict:
        """Serialize to the JSON network format."""
        data = {
            "name": self.name,
            "vertices": list(self.vertices),
            "origin": self.origin,
            "destination": self.destination,
            "edges": [
                {
                    "label": edge.label,
                    "tail": edge.tail,
                    "head": edge.head,
                    "alpha": edge.alpha,
                    "beta": edge.beta,
                }
                for edge in self.edges
            ],
        }
        if self.path_order is not None:
            data["paths"] = [[self.edges[k].label for k in path] for path in self.path_order]
        return data


@dataclass(frozen=True)
class Path:
    """An ordered tuple of edge indices from origin to destination."""

    edges: Tuple[int, ...]

    def vertices(self, network: Network) -> List[str]:
        walk = [network.edges[self.edges[0]].tail]
        walk.extend(network.edges[k].head for k in self.edges)
        return walk

    def label(self, network: Network) -> str:
        return "-".join(network.edges[k].label for k in self.edges)

    def is_simple(self, network: Network) -> bool:
        """Re-walk the path and check it chains origin to destination without revisits."""
        if not self.edges:
            return False
        current = network.origin
        seen = {current}
        for k in self.edges:
            edge = network.edges[k]
            if edge.tail != current or edge.head in seen:
                return False
            current = edge.head
            seen.add(current)
        return current == network.destination


@dataclass(frozen=True, eq=False)
class PathCostModel:
    """
    Path-space cost model C(f) = A f + beta with A = B^T Q B.

    ``excluded`` lists paths whose flow is forced to zero. A modified game is
    simply the same model with a non-empty ``excluded`` set, so every analyzer
    works on both without special cases.
    """

    paths: Tuple[Path, ...]
    A: np.ndarray
    beta: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    edge_beta: np.ndarray
    network: Optional[Network] = None
    excluded: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        for array in (self.A, self.beta, self.B, self.Q, self.edge_beta):
            array.setflags(write=False)
        n = len(self.paths)
        if self.A.shape != (n, n) or self.beta.shape != (n,):
            raise DimensionMismatchError(
                f"Cost model shapes A{self.A.shape}, beta{self.beta.shape} do not match {n} paths"
            )
        if any(p < 0 or p >= n for p in self.excluded):
            raise DimensionMismatchError(f"Excluded paths {sorted(self.excluded)} out of range")

    @property
    def n(self) -> int:
        return len(self.paths)

    @property
    def num_edges(self) -> int:
        return self.B.shape[0]

    @property
    def allowed(self) -> Tuple[int, ...]:
        """Indices of paths that may carry flow."""
        return tuple(p for p in range(self.n) if p not in self.excluded)

    def with_excluded(self, removed: Iterable[int]) -> "PathCostModel":
        """Return a view of this model with additional paths forced to zero."""
        excluded = frozenset(self.excluded) | frozenset(int(p) for p in removed)
        if len(excluded) >= self.n:
            raise NoPathsLeftError(
                f"Removing paths {sorted(p + 1 for p in excluded)} leaves no path to carry demand"
            )
        return replace(self, excluded=excluded)

    def _check_flow(self, f: Sequence[float]) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n,):
            raise DimensionMismatchError(f"Expected a path flow of length {self.n}, got shape {f.shape}")
        return f

    def path_costs(self, f: Sequence[float]) -> np.ndarray:
        """C(f) = A f + beta."""
        f = self._check_flow(f)
        return self.A @ f + self.beta

    def edge_costs(self, f: Sequence[float]) -> np.ndarray:
        """
        Edge costs alpha_e * (B f)_e + beta_e of a path flow.

        Args:
            f: Path flow of length n

        Returns:
            np.ndarray: one cost per edge
        """
        return self.Q @ edge_flow(self, f) + self.edge_beta

    def beckmann(self, f: Sequence[float]) -> float:
        """Beckmann potential 1/2 f^T A f + beta^T f of a path flow."""
        f = self._check_flow(f)
        return float(0.5 * f @ self.A @ f + self.beta @ f)

    def path_labels(self) -> List[str]:
        """
        Display names for the paths.

        Returns:
            List[str]: edge-label chains such as ``e1-e5-e4``, or ``p1..pn``
            when the model was built without a network
        """
        if self.network is None:
            return [f"p{p + 1}" for p in range(self.n)]
        return [path.label(self.network) for path in self.paths]

    def is_psd(self, tol: float = 1e-9) -> bool:
        if self.n == 0:
            return True
        eigenvalues = np.linalg.eigvalsh(self.A)
        return bool(eigenvalues.min() >= -tol * max(1.0, float(np.abs(eigenvalues).max())))


def enumerate_paths(network: Network, cap: int = DEFAULT_PATH_CAP) -> List[Path]:
    """
    Enumerate every simple origin-destination path.

    Args:
        network (Network): Validated network
        cap (int): Maximum number of paths before giving up

    Returns:
        List[Path]: Paths sorted lexicographically by edge indices
    """
    graph = network.to_graph()
    paths = []
    for edge_path in nx.all_simple_edge_paths(graph, network.origin, network.destination):
        paths.append(Path(tuple(key for _, _, key in edge_path)))
        if len(paths) > cap:
            logger.error(f"Path enumeration for '{network.name}' exceeded cap {cap}")
            raise PathExplosionError(len(paths), cap)

    if not paths:
        raise NoPathError(
            f"No path from '{network.origin}' to '{network.destination}' in '{network.name}'"
        )

    # Lexicographic by edge index, independent of graph traversal order
    paths.sort(key=lambda path: path.edges)
    logger.debug(f"Enumerated {len(paths)} paths for '{network.name}'")
    return paths


def build_cost_model(network: Network, paths: Optional[Sequence[Path]] = None,
                     cap: int = DEFAULT_PATH_CAP) -> PathCostModel:
    """
    Assemble A = B^T Q B and beta = B^T beta_edge.

    When ``paths`` is omitted the network's declared path order is used if
    present, otherwise the lexicographic enumeration order.
    """
    enumerated = enumerate_paths(network, cap)
    if paths is None:
        if network.path_order is not None:
            paths = [Path(tuple(order)) for order in network.path_order]
            if set(paths) != set(enumerated) or len(paths) != len(enumerated):
                raise NetworkValidationError(
                    f"Declared paths of '{network.name}' are not exactly the simple "
                    f"origin-destination paths ({len(paths)} declared, {len(enumerated)} found)"
                )
        else:
            paths = enumerated
    paths = tuple(paths)

    # Edge-path incidence, then A = B^T Q B
    q, n = network.num_edges, len(paths)
    B = np.zeros((q, n))
    for i, path in enumerate(paths):
        for k in path.edges:
            B[k, i] = 1.0
    alpha = np.array([edge.alpha for edge in network.edges], dtype=float)
    edge_beta = np.array([edge.beta for edge in network.edges], dtype=float)
    Q = np.diag(alpha)
    A = B.T @ Q @ B
    beta = B.T @ edge_beta

    return PathCostModel(
        paths=paths,
        # Symmetrize away rounding
        A=0.5 * (A + A.T),
        beta=beta,
        B=B,
        Q=Q,
        edge_beta=edge_beta,
        network=network,
    )


def edge_flow(model: PathCostModel, f: Sequence[float]) -> np.ndarray:
    """Edge flows B f of a path flow."""
    f = model._check_flow(f)
    return model.B @ f


def _require(data: Dict, key: str, context: str):
    if key not in data:
        raise NetworkParseError(f"Missing required field in {context}", field=key)
    return data[key]


def _as_coefficient(value, field_name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NetworkParseError(f"Expected a number, got {value!r}", field=field_name)
    return float(value)


def network_from_dict(data: Dict, name: Optional[str] = None) -> Network:
    """Build and validate a Network from the parsed JSON structure."""
    if not isinstance(data, dict):
        raise NetworkParseError("Network file must contain a JSON object")

    # Vertices: a positive count or an explicit list of names
    raw_vertices = _require(data, "vertices", "network")
    if isinstance(raw_vertices, bool):
        raise NetworkParseError("Expected a vertex count or list", field="vertices")
    if isinstance(raw_vertices, int):
        if raw_vertices <= 0:
            raise NetworkParseError("Vertex count must be positive", field="vertices")
        vertices = tuple(str(v) for v in range(1, raw_vertices + 1))
    elif isinstance(raw_vertices, list):
        vertices = tuple(str(v) for v in raw_vertices)
    else:
        raise NetworkParseError("Expected a vertex count or list", field="vertices")

    raw_edges = _require(data, "edges", "network")
    if not isinstance(raw_edges, list) or not raw_edges:
        raise NetworkParseError("Expected a non-empty list of edges", field="edges")

    edges = []
    for k, raw in enumerate(raw_edges):
        prefix = f"edges[{k}]"
        if not isinstance(raw, dict):
            raise NetworkParseError("Edge entries must be objects", field=prefix)
        edges.append(Edge(
            tail=str(_require(raw, "tail", prefix)),
            head=str(_require(raw, "head", prefix)),
            alpha=_as_coefficient(raw.get("alpha", 0.0), f"{prefix}.alpha"),
            beta=_as_coefficient(raw.get("beta", 0.0), f"{prefix}.beta"),
            label=str(raw.get("label", f"e{k + 1}")),
        ))

    network = Network(
        vertices=vertices,
        edges=tuple(edges),
        origin=str(_require(data, "origin", "network")),
        destination=str(_require(data, "destination", "network")),
        name=str(data.get("name", name or "network")),
    )
    network.validate()

    # Optional declared path order, checked against the network
    raw_paths = data.get("paths")
    if raw_paths is not None:
        if not isinstance(raw_paths, list):
            raise NetworkParseError("Expected a list of paths", field="paths")
        order = []
        for i, raw_path in enumerate(raw_paths):
            if not isinstance(raw_path, list) or not raw_path:
                raise NetworkParseError("Each path must be a non-empty list of edge labels",
                                        field=f"paths[{i}]")
            try:
                order.append(tuple(network.edge_index(str(label)) for label in raw_path))
            except NetworkValidationError as e:
                raise NetworkParseError(str(e), field=f"paths[{i}]") from e
        network = replace(network, path_order=tuple(order))
        for path in order:
            if not Path(path).is_simple(network):
                raise NetworkValidationError(
                    f"Declared path {Path(path).label(network)} is not a simple "
                    f"origin-destination path"
                )

    return network


def parse_network(path: Union[str, FilePath]) -> Network:
    """
    Load a network file.

    Args:
        path: JSON network file

    Returns:
        Network: validated network

    Raises:
        NetworkParseError: unreadable file, invalid JSON, missing fields
        NetworkValidationError: modelling assumptions violated
    """
    path = FilePath(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Cannot read network file {path}: {e}")
        raise NetworkParseError(f"Cannot read {path}: {e}") from e

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in {path}: {e.msg}")
        raise NetworkParseError(f"Invalid JSON in {path}: {e.msg}", line=e.lineno) from e

    network = network_from_dict(data, name=path.stem)
    logger.info(f"Loaded network '{network.name}': {len(network.vertices)} vertices, "
                f"{network.num_edges} edges")
    return network


def save_network(network: Network, path: Union[str, FilePath]) -> None:
    path = FilePath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(network.to_dict(), f, indent=2)
    logger.info(f"Network saved to {path}")


class NetworkProcessor:
    """
    Class to handle loading bundled or user networks and building their cost models.
    """

    def __init__(self, data_dir: str = "data/networks", path_cap: int = DEFAULT_PATH_CAP):
        """
        Initialize the NetworkProcessor.

        Args:
            data_dir (str): Directory containing network JSON files
            path_cap (int): Maximum number of paths per network
        """
        self.data_dir = FilePath(data_dir)
        self.path_cap = path_cap
        self.networks: Dict[str, Network] = {}

    def resolve(self, name_or_path: str) -> FilePath:
        """Accept a file path or the stem of a bundled network."""
        candidate = FilePath(name_or_path)
        if candidate.exists():
            return candidate
        bundled = self.data_dir / f"{name_or_path}.json"
        if bundled.exists():
            return bundled
        raise NetworkParseError(f"Network file not found: {name_or_path}")

    def load_network(self, name_or_path: str) -> Network:
        network = parse_network(self.resolve(name_or_path))
        self.networks[network.name] = network
        return network

    def load_all(self) -> Dict[str, Network]:
        """Load every network file in the data directory."""
        for file in sorted(self.data_dir.glob("*.json")):
            try:
                self.load_network(str(file))
            except RoutingGameError as e:
                logger.warning(f"Skipping {file.name}: {e}")
        return self.networks

    def build_model(self, network: Network) -> PathCostModel:
        model = build_cost_model(network, cap=self.path_cap)
        if not model.is_psd():
            logger.warning(f"Cost matrix of '{network.name}' is not PSD within tolerance")
        logger.info(f"Built cost model for '{network.name}': {model.n} paths")
        return model

    def get_network_summary(self, network: Network) -> Dict:
        model = build_cost_model(network, cap=self.path_cap)
        return {
            "name": network.name,
            "vertices": len(network.vertices),
            "edges": network.num_edges,
            "paths": model.n,
            "path_labels": model.path_labels(),
            "zero_slope_edges": [e.label for e in network.edges if e.alpha == 0],
        }

#!/usr/bin/env python3
"""
Network Quality Checker for Routing Game Analysis

This script loads a network file, validates it and reports structural
properties that commonly explain surprising results: edges no path uses,
zero-slope edges, parallel edges and the number of origin-destination paths.
"""

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np

# Add src to path
sys.path.append(str(Path(__file__).resolve().parent / "src"))
from network_processor import NetworkProcessor, RoutingGameError, build_cost_model  # noqa: E402


def check_edges(network, model):
    """Check edge-level issues."""
    issues = []

    unused = [network.edges[k].label for k in range(network.num_edges) if not model.B[k].any()]
    if unused:
        issues.append(f"Edges on no origin-destination path: {', '.join(unused)}")

    constant = [e.label for e in network.edges if e.alpha == 0]
    if constant:
        issues.append(f"Zero-slope (constant cost) edges: {', '.join(constant)}")

    pairs = Counter((e.tail, e.head) for e in network.edges)
    parallel = [f"{tail}->{head} (x{count})" for (tail, head), count in pairs.items() if count > 1]
    if parallel:
        issues.append(f"Parallel edges: {', '.join(parallel)}")

    return issues


def check_paths(network, model):
    """Check path-level properties."""
    notes = [f"Origin-destination paths: {model.n}"]
    for p, label in enumerate(model.path_labels()):
        notes.append(f"  p{p + 1}: {label}  (cost {model.A[p, p]:g}*f + {model.beta[p]:g} alone)")

    if model.n > 1 and len({tuple(row) for row in model.A}) < model.n:
        notes.append("Some paths have identical cost rows; equilibria may not be unique")
    rank = int((np.abs(np.linalg.eigvalsh(model.A)) > 1e-10).sum())
    if rank < model.n:
        notes.append(f"Cost matrix rank {rank} < {model.n}: equilibrium flows may form a polytope")
    return notes


def main():
    parser = argparse.ArgumentParser(description="Check a routing network file")
    parser.add_argument("network", help="Network JSON file or bundled network name")
    parser.add_argument("--cap-paths", type=int, default=10000, dest="path_cap")
    args = parser.parse_args()

    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    print("🔍 NETWORK QUALITY CHECK")
    print("=" * 60)

    processor = NetworkProcessor(str(Path(__file__).resolve().parent / "data" / "networks"),
                                 path_cap=args.path_cap)
    try:
        network = processor.load_network(args.network)
        model = build_cost_model(network, cap=args.path_cap)
    except RoutingGameError as e:
        print(f"❌ {type(e).__name__}: {e}")
        return 2

    print(f"Network '{network.name}': {len(network.vertices)} vertices, {network.num_edges} edges, "
          f"origin {network.origin}, destination {network.destination}")
    print()

    issues = check_edges(network, model)
    if issues:
        print("⚠️  Edge findings:")
        for issue in issues:
            print(f"   - {issue}")
    else:
        print("✅ No edge findings")
    print()

    for note in check_paths(network, model):
        print(note)

    if not model.is_psd():
        print("❌ Cost matrix is not positive semidefinite")
        return 2

    print("=" * 60)
    print("✅ Network is valid")
    return 0


if __name__ == "__main__":
    sys.exit(main())

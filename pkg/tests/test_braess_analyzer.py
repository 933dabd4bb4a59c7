"""
Tests for Braess's paradox detection and the J and W measures.
"""

import numpy as np
import pytest

from braess_analyzer import (
    BPCondition,
    BPVerdict,
    BraessAnalyzer,
    ModifiedGame,
    SubsetCapExceededError,
    UnnecessarySetScan,
    difference_windows,
)
from conftest import PROPERTY_CASES, TRACE_CASES
from equilibrium_analyzer import compute_we
from network_processor import NoPathsLeftError

P3 = frozenset({2})
P4 = frozenset({3})


def test_modified_game_validation(wheatstone):
    with pytest.raises(ValueError):
        ModifiedGame(wheatstone, frozenset())
    with pytest.raises(ValueError):
        ModifiedGame(wheatstone, frozenset({5}))
    with pytest.raises(NoPathsLeftError):
        ModifiedGame(wheatstone, frozenset({0, 1, 2}))

    game = ModifiedGame(wheatstone, [2])
    assert game.removed == P3
    assert game.retained == {0, 1}
    assert game.model.allowed == (0, 1)
    assert game.label(wheatstone.path_labels()) == "{e1-e5-e4}"


def test_v_relations(wheatstone_braess):
    game = wheatstone_braess.game(P3)
    assert wheatstone_braess.check_v_relations(game, 2.0).equal
    assert wheatstone_braess.check_v_relations(game, 0.0).equal
    relation = wheatstone_braess.check_v_relations(game, 1.0)
    assert not relation.equal
    assert relation.base_value == pytest.approx(1.0)
    assert relation.modified_value == pytest.approx(1.25)


# ----------------------------------------------------------------------
# Slope increase
# ----------------------------------------------------------------------

def test_slope_increase_on_wheatstone(wheatstone_braess):
    reports = wheatstone_braess.detect_slope_increase()
    assert len(reports) == 1
    report = reports[0]
    assert report.verdict is BPVerdict.BP_DETECTED
    assert report.condition is BPCondition.SLOPE_INCREASE
    assert report.details["breakpoint"] == pytest.approx(2.0)
    assert report.details["slope_before"] == pytest.approx(0.0, abs=1e-9)
    assert report.details["slope_after"] == pytest.approx(0.5)
    assert (report.demand_low, report.demand_high) == pytest.approx((1.0, 2.0))
    assert report.witness == P3
    # Equilibrium cost 2 against 1.75 without p3 at the midpoint D = 1.5
    assert report.cost_gap == pytest.approx(0.25)


def test_slope_increase_silent_on_concave_curves(merged_braess, single_edge):
    assert merged_braess.detect_slope_increase() == []
    assert BraessAnalyzer(single_edge).detect_slope_increase() == []


# ----------------------------------------------------------------------
# Paths losing flow
# ----------------------------------------------------------------------

@pytest.mark.parametrize("demand, verdict", [
    (1.1, BPVerdict.BP_DETECTED),
    (1.5, BPVerdict.BP_DETECTED),
    (1.9, BPVerdict.BP_DETECTED),
    (0.5, BPVerdict.NO_EVIDENCE),
    (0.8, BPVerdict.NO_EVIDENCE),
    (2.5, BPVerdict.NO_EVIDENCE),
])
def test_flow_losing_on_wheatstone(wheatstone_braess, demand, verdict):
    report = wheatstone_braess.detect_flow_losing(demand)
    assert report.verdict is verdict
    assert report.condition is BPCondition.FLOW_LOSING
    assert report.demand_low == report.demand_high == demand


def test_flow_losing_accepts_snapshot(wheatstone_braess):
    snapshot = wheatstone_braess.base_solve(1.5)
    report = wheatstone_braess.detect_flow_losing(snapshot)
    assert report.detected
    np.testing.assert_allclose(report.details["representative_direction"], [1, 1, -1], atol=1e-8)


@pytest.mark.parametrize("demand", [0.3, 0.7, 1.0, 1.5, 1.9, 2.5, 4.0])
def test_flow_losing_silent_on_merged(merged_braess, demand):
    assert merged_braess.detect_flow_losing(demand).verdict is BPVerdict.NO_EVIDENCE


# ----------------------------------------------------------------------
# Affine extensions
# ----------------------------------------------------------------------

def test_affine_extensions(wheatstone_braess):
    extensions = wheatstone_braess.affine_extensions()
    assert [e.slope for e in extensions] == pytest.approx([2, 0, 0.5])
    assert [e.intercept for e in extensions] == pytest.approx([0, 2, 1])
    assert extensions[1].applies_at(1.5)
    assert not extensions[0].applies_at(1.5)
    assert extensions[2](3.0) == pytest.approx(2.5)


@pytest.mark.parametrize("demand", [0.7, 0.8, 0.9, 1.0, 1.2, 1.5, 1.9])
def test_self_extension_reveals_wheatstone_bp(wheatstone_braess, demand):
    reports = wheatstone_braess.extension_gap([], demand)
    assert len(reports) == 1
    report = reports[0]
    assert report.detected
    assert report.candidate == frozenset()
    expected_cost = min(2 * demand, 2.0)
    assert report.cost_gap == pytest.approx(expected_cost - (demand / 2 + 1), abs=1e-6)
    if demand >= 1:
        assert report.cost_gap == pytest.approx(abs(2 - (demand / 2 + 1)), abs=1e-6)
    assert report.witness == P3


@pytest.mark.parametrize("demand", [0.3, 0.6, 2.0, 2.5, 3.0])
def test_self_extension_silent_outside_bp(wheatstone_braess, demand):
    assert not wheatstone_braess.extension_gap([], demand)[0].detected


def test_no_candidate_flags_wheatstone_beyond_bp(wheatstone_braess):
    candidates = wheatstone_braess.default_candidates()
    assert candidates == [frozenset({0}), frozenset({1}), P3, frozenset({0, 1})]
    reports = wheatstone_braess.extension_gap(candidates, 3.0)
    assert len(reports) == len(candidates) + 1
    assert not any(report.detected for report in reports)


@pytest.mark.parametrize("demand", [0.7, 0.9, 1.0, 1.5, 1.9])
def test_merged_candidate_reveals_bp(merged_braess, demand):
    reports = merged_braess.extension_gap([P4], demand)
    self_check, candidate = reports
    assert candidate.candidate == P4
    assert candidate.detected
    assert candidate.witness == frozenset({2, 3})
    assert candidate.details["witness_cost"] == pytest.approx(demand / 2 + 1, abs=1e-6)


@pytest.mark.parametrize("demand", [0.5, 2.5, 4.0])
def test_merged_candidate_silent_outside_bp(merged_braess, demand):
    assert not any(report.detected for report in merged_braess.extension_gap([P4], demand))


def test_merged_removing_p3_reveals_bp(merged_braess):
    report = merged_braess.extension_gap([P3], 0.8)[1]
    assert report.detected
    assert report.cost_gap == pytest.approx(1.6 - 1.4)


def test_invalid_candidate_does_not_abort(wheatstone_braess):
    reports = wheatstone_braess.extension_gap([{0, 1, 2}, P3], 1.5)
    assert len(reports) == 3
    assert reports[1].verdict is BPVerdict.NO_EVIDENCE
    assert "error" in reports[1].details
    assert reports[2].detected


def test_upper_bound_game(merged_braess):
    witness = merged_braess.upper_bound_game(P4, 2, 0.8)
    assert witness.removed == {2, 3}
    assert witness.bound == pytest.approx(1.4)
    assert witness.we_cost <= witness.bound + 1e-9
    with pytest.raises(ValueError):
        merged_braess.upper_bound_game(P4, 0, 1.5)


def test_explicit_comparison(wheatstone_braess):
    game = wheatstone_braess.game(P3)
    report = wheatstone_braess.explicit_comparison(game, 1.5)
    assert report.detected
    assert report.cost_gap == pytest.approx(0.25)
    assert not wheatstone_braess.explicit_comparison(game, 0.5).detected


def test_report_to_dict(wheatstone, wheatstone_braess):
    report = wheatstone_braess.extension_gap([P3], 1.5)[1]
    row = report.to_dict(wheatstone.path_labels())
    assert row["verdict"] == "BP_detected"
    assert row["condition"] == "extension_gap"
    assert row["candidate"] == "e1-e5-e4"
    assert "detail_extension_value" in row
    assert report.to_dict()["candidate"] == "p3"


# ----------------------------------------------------------------------
# Windows and the demand bound
# ----------------------------------------------------------------------

def test_bp_and_benefit_windows(wheatstone_braess):
    game = wheatstone_braess.game(P3)
    (bp,) = wheatstone_braess.bp_windows(game, 3.0)
    assert bp == pytest.approx((2 / 3, 2.0), abs=1e-5)
    (benefit,) = wheatstone_braess.benefit_windows(game, 3.0)
    assert benefit == pytest.approx((0.0, 2 / 3), abs=1e-5)


def test_difference_windows_empty_for_identical_curves(wheatstone_braess):
    curve = wheatstone_braess.curve()
    assert difference_windows(curve, curve, 5.0) == []


@pytest.mark.parametrize("model_name, removed, bound", [
    ("wheatstone", P3, 2.0),
    ("merged", P4, 2.0),
    ("merged", P3, 2.0),
    ("dominated", frozenset({1}), 0.0),
])
def test_bp_demand_bound(request, model_name, removed, bound):
    analyzer = BraessAnalyzer(request.getfixturevalue(model_name))
    assert analyzer.bp_demand_bound(analyzer.game(removed)) == pytest.approx(bound, abs=1e-6)


@pytest.mark.parametrize("model_name", ["wheatstone", "merged"])
def test_detectors_silent_beyond_bound(request, model_name):
    analyzer = BraessAnalyzer(request.getfixturevalue(model_name))
    bound = max(analyzer.bp_demand_bound(analyzer.game(c)) for c in analyzer.default_candidates())
    for demand in (bound + 0.5, bound + 3.0):
        assert not analyzer.detect_flow_losing(demand).detected
        reports = analyzer.extension_gap(analyzer.default_candidates(), demand)
        assert not any(report.detected for report in reports)


# ----------------------------------------------------------------------
# Unnecessary sets
# ----------------------------------------------------------------------

def scan_by_set(results):
    return {scan.removed: scan for scan in results}


def test_scan_unnecessary_wheatstone(wheatstone_braess):
    scans = scan_by_set(wheatstone_braess.scan_unnecessary(3.0, 2))
    assert set(scans) == {P3}
    scan = scans[P3]
    assert scan.classification == UnnecessarySetScan.BP_WINDOW
    assert scan.bp_windows[0] == pytest.approx((2 / 3, 2.0), abs=1e-5)
    assert scan.unnecessary_interval[0] == pytest.approx(2.0, abs=1e-6)
    assert scan.necessary_again_above is None


def test_scan_unnecessary_merged(merged_braess):
    scans = scan_by_set(merged_braess.scan_unnecessary(3.0, 3))
    assert set(scans) == {frozenset({0}), frozenset({1}), P3, frozenset({0, 1})}
    assert scans[frozenset({0, 1})].classification == UnnecessarySetScan.UNNECESSARY_THROUGHOUT
    assert scans[frozenset({0})].classification == UnnecessarySetScan.UNNECESSARY_THROUGHOUT
    assert scans[P3].classification == UnnecessarySetScan.BP_WINDOW


def test_scan_unnecessary_seven_edge(seven_edge_braess):
    scans = scan_by_set(seven_edge_braess.scan_unnecessary(3.7, 2))
    assert set(scans) == {P3, P4, frozenset({2, 3})}
    scan = scans[P3]
    assert scan.classification == UnnecessarySetScan.BP_WINDOW
    # Removing p3 lowers the cost from D = 7/16 until p3 stops carrying flow at 7/2
    assert scan.bp_windows[0] == pytest.approx((7 / 16, 3.5), abs=1e-3)
    low, high = scan.unnecessary_interval
    assert low == pytest.approx(3.5, abs=1e-6)
    assert high == pytest.approx(6.0, abs=1e-6)
    assert scan.necessary_again_above > 6.0
    equilibrium = seven_edge_braess.sweep().equilibrium
    wep = equilibrium.we_polytope(equilibrium.compute_we(scan.necessary_again_above))
    assert equilibrium.is_necessary(wep, P3)
    assert scans[P4].classification == UnnecessarySetScan.UNNECESSARY_THROUGHOUT
    assert scans[P4].unnecessary_interval[0] == 0.0


@pytest.mark.parametrize("model_name, demand, max_size", [
    ("wheatstone", 3.0, 2),
    ("merged", 3.0, 3),
    ("seven_edge", 3.7, 2),
    ("seven_edge", 4.0, 1),
])
def test_scan_interval_agrees_with_necessity(request, model_name, demand, max_size):
    analyzer = BraessAnalyzer(request.getfixturevalue(model_name))
    equilibrium = analyzer.sweep().equilibrium
    for scan in analyzer.scan_unnecessary(demand, max_size):
        low, high = scan.unnecessary_interval
        assert low <= demand <= high
        for d in np.linspace(low, high, 25):
            wep = equilibrium.we_polytope(equilibrium.compute_we(float(d)))
            assert not equilibrium.is_necessary(wep, scan.removed)
        if scan.necessary_again_above is not None:
            wep = equilibrium.we_polytope(equilibrium.compute_we(scan.necessary_again_above))
            assert equilibrium.is_necessary(wep, scan.removed)


def test_seven_edge_p3_necessary_again(seven_edge_braess):
    equilibrium = seven_edge_braess.sweep().equilibrium
    for demand, necessary in [(3.6, False), (3.8, False), (5.0, False), (6.5, True), (8.0, True)]:
        wep = equilibrium.we_polytope(equilibrium.compute_we(demand))
        assert equilibrium.is_necessary(wep, P3) is necessary


def test_scan_cap(seven_edge):
    analyzer = BraessAnalyzer(seven_edge, subset_scan_cap=3)
    with pytest.raises(SubsetCapExceededError):
        analyzer.scan_unnecessary(3.7, 2)


# ----------------------------------------------------------------------
# Measures
# ----------------------------------------------------------------------

@pytest.mark.parametrize("demand, expected", [(0.0, 0.0), (1.0, 0.25), (2.0, 0.0), (3.0, 0.0)])
def test_measure_J(wheatstone_braess, demand, expected):
    game = wheatstone_braess.game(P3)
    assert wheatstone_braess.measure_J(game, demand) == pytest.approx(expected, abs=1e-8)


def test_measure_J_matches_potential_gap(wheatstone_braess):
    game = wheatstone_braess.game(P3)
    for demand in (0.4, 1.3, 1.8):
        relation = wheatstone_braess.check_v_relations(game, demand)
        assert wheatstone_braess.measure_J(game, demand) == pytest.approx(
            relation.modified_value - relation.base_value, abs=1e-8)


@pytest.mark.parametrize("demand, expected", [(2.0, -1 / 3), (3.0, -1 / 3)])
def test_measure_W(wheatstone_braess, demand, expected):
    game = wheatstone_braess.game(P3)
    assert wheatstone_braess.measure_W(game, demand) == pytest.approx(expected, abs=1e-8)


def test_measure_W_zero_for_never_used_paths(dominated):
    analyzer = BraessAnalyzer(dominated)
    game = analyzer.game({1})
    assert analyzer.measure_W(game, 4.0) == pytest.approx(0.0, abs=1e-10)
    assert analyzer.measure_J(game, 4.0) == pytest.approx(0.0, abs=1e-10)


def test_measure_curves(wheatstone_braess):
    frame = wheatstone_braess.measure_curves(wheatstone_braess.game(P3), 3.0, points=7)
    assert list(frame.columns) == ["D", "lambda_we", "lambda_we_modified", "J", "W"]
    assert {1.0, 2.0} <= set(frame["D"])
    assert frame["D"].is_monotonic_increasing
    assert (frame["J"] >= -1e-10).all()
    at_two = frame.loc[frame["D"] == 2.0].iloc[0]
    assert at_two["J"] == pytest.approx(0.0, abs=1e-8)
    assert at_two["W"] == pytest.approx(-1 / 3, abs=1e-8)
    assert at_two["lambda_we"] == pytest.approx(2.0)


# ----------------------------------------------------------------------
# Randomized properties
# ----------------------------------------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("seed", range(PROPERTY_CASES))
def test_random_removal_raises_potential(random_model, seed):
    model = random_model(seed)
    if model.n < 2:
        return
    rng = np.random.default_rng(seed)
    analyzer = BraessAnalyzer(model)
    equilibrium = analyzer.sweep().equilibrium
    demand = float(rng.uniform(0.0, 5.0))
    snapshot = analyzer.base_solve(demand)
    wep = equilibrium.we_polytope(snapshot)

    for _ in range(5):
        size = int(rng.integers(1, model.n))
        removed = frozenset(int(p) for p in rng.choice(model.n, size=size, replace=False))
        game = analyzer.game(removed)
        relation = analyzer.check_v_relations(game, demand)
        assert relation.base_value <= relation.modified_value + 1e-7 * (1 + abs(relation.base_value))
        necessary = equilibrium.is_necessary(wep, removed)
        if not necessary:
            assert relation.equal
            modified = analyzer.modified_solve(game, demand)
            np.testing.assert_allclose(modified.cost_vector, snapshot.cost_vector, atol=1e-5)
        if relation.modified_value > relation.base_value + 1e-6 * (1 + abs(relation.base_value)):
            assert necessary


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(TRACE_CASES))
def test_random_bp_paths_help_at_lower_demand(random_model, seed):
    analyzer = BraessAnalyzer(random_model(seed))
    for report in analyzer.detect_slope_increase():
        if not report.witness or report.cost_gap <= 1e-4:
            continue
        demand = report.details["witness_demand"]
        game = analyzer.game(report.witness)
        assert analyzer.explicit_comparison(game, demand).detected
        assert analyzer.benefit_windows(game, demand)


def confirming_witnesses(analyzer, demand):
    """Removal sets that strictly lower the equilibrium cost at ``demand``."""
    witnesses = set()
    for report in analyzer.extension_gap(analyzer.default_candidates(), demand):
        if report.detected and report.witness:
            if analyzer.explicit_comparison(analyzer.game(report.witness), demand).detected:
                witnesses.add(report.witness)
    return witnesses


@pytest.mark.parametrize("model_name", ["wheatstone", "parallel_path", "parallel_path_smooth",
                                        "seven_edge", "merged"])
def test_flow_losing_positives_are_confirmed(request, model_name):
    analyzer = BraessAnalyzer(request.getfixturevalue(model_name))
    positives = 0
    for demand in np.linspace(0.1, 7.0, 24):
        if not analyzer.detect_flow_losing(float(demand)).detected:
            continue
        positives += 1
        if confirming_witnesses(analyzer, float(demand)):
            continue
        scans = analyzer.scan_unnecessary(float(demand), 2)
        assert any(scan.classification == UnnecessarySetScan.BP_WINDOW for scan in scans)
    if model_name == "wheatstone":
        assert positives > 0


@pytest.mark.parametrize("model_name, demand", [
    ("wheatstone", 1.5),
    ("merged", 0.8),
    ("merged", 1.5),
    ("parallel_path", 1.5),
    ("seven_edge", 2.0),
])
def test_every_detected_witness_helps_at_lower_demand(request, model_name, demand):
    analyzer = BraessAnalyzer(request.getfixturevalue(model_name))
    checked = 0
    for witness in confirming_witnesses(analyzer, demand):
        assert analyzer.benefit_windows(analyzer.game(witness), demand)
        checked += 1
    for report in analyzer.detect_slope_increase():
        if report.witness:
            game = analyzer.game(report.witness)
            assert analyzer.benefit_windows(game, report.details["witness_demand"])
            checked += 1
    assert checked > 0


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(TRACE_CASES))
def test_random_slopes_dominated_after_removing_unused_paths(random_model, seed):
    model = random_model(seed)
    rng = np.random.default_rng(seed)
    analyzer = BraessAnalyzer(model)
    equilibrium = analyzer.sweep().equilibrium
    for demand in rng.uniform(0.1, 5.0, 3):
        demand = float(demand)
        wep = equilibrium.we_polytope(equilibrium.compute_we(demand))
        spare = sorted(frozenset(model.allowed) - equilibrium.used_set(wep))
        if not spare:
            continue
        size = int(rng.integers(1, len(spare) + 1))
        removed = frozenset(int(p) for p in rng.choice(spare, size=size, replace=False))
        assert not equilibrium.is_necessary(wep, removed)

        base, modified = analyzer.sweep(), analyzer.sweep(removed)
        for one_sided in ("slope_right", "slope_left"):
            slope = getattr(base, one_sided)(demand)
            modified_slope = getattr(modified, one_sided)(demand)
            assert modified_slope >= slope - 1e-7 * (1 + abs(slope))


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(TRACE_CASES))
def test_random_upper_bound_game_stays_below_extension(random_model, seed):
    model = random_model(seed)
    if model.n < 2:
        return
    rng = np.random.default_rng(seed)
    analyzer = BraessAnalyzer(model)
    for _ in range(3):
        size = int(rng.integers(0, model.n))
        removed = frozenset(int(p) for p in rng.choice(model.n, size=size, replace=False))
        curve = analyzer.curve(removed)
        index = int(rng.integers(len(curve.intervals)))
        end = curve.intervals[index].end
        demand = float(rng.uniform(0.0, end if np.isfinite(end) else end_of_range(curve)))

        witness = analyzer.upper_bound_game(removed, index, demand)
        assert witness.we_cost <= witness.bound + 1e-6 * (1 + abs(witness.bound))
        restricted = model.with_excluded(witness.removed) if witness.removed else model
        assert compute_we(restricted, demand).we_cost == pytest.approx(witness.we_cost, abs=1e-6)


def end_of_range(curve):
    return 1.5 * curve.last_breakpoint + 2.0


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(TRACE_CASES))
def test_random_flow_losing_positives_are_confirmed(random_model, seed):
    analyzer = BraessAnalyzer(random_model(seed))
    curve = analyzer.curve()
    for before, after in zip(curve.intervals[:-1], curve.intervals[1:]):
        demand = 0.5 * (before.start + before.end)
        # Gap between the cost and the next piece extended backwards
        gap = (after.slope - before.slope) * (before.end - demand)
        if gap <= 1e-4 * (1 + abs(curve.evaluate(demand))):
            continue
        if analyzer.detect_flow_losing(demand).detected:
            assert confirming_witnesses(analyzer, demand)

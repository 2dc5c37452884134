import numpy as np
import pytest

from trajdiag.diagnose import classify, project
from trajdiag.faultlib import FaultSpec, enumerate_faults, evaluate_at
from trajdiag.trajectory import (
    SignaturePoint,
    TestVector,
    Trajectory,
    build_trajectories,
    count_intersections,
    signature,
)

from conftest import ORACLE_VECTOR


def make_trajectory(component, pts, devs=None):
    devs = devs or [0.1 * (i + 1) for i in range(len(pts))]
    points = [SignaturePoint((0.0,) * len(pts[0]), component, 0.0)]
    points += [
        SignaturePoint(tuple(float(x) for x in p), component, d)
        for p, d in zip(pts, devs)
    ]
    return Trajectory(component, tuple(points))


@pytest.fixture(scope="module")
def biquad_setup(biquad, biquad_faults):
    tv = TestVector(ORACLE_VECTOR)
    trajectories = build_trajectories(biquad, biquad_faults, tv)
    count, _ = count_intersections(trajectories, 1e-6)
    assert count == 0  # intersection-free vector, precondition for diagnosis
    golden = evaluate_at(biquad, None, tv.frequencies)
    return tv, trajectories, golden


# ---------------------------------------------------------------- project


def test_project_symmetric_drop():
    result = project((1.0, 1.0), ((0.0, 0.0), (2.0, 0.0)))
    assert result.t == pytest.approx(0.5)
    assert result.distance == pytest.approx(1.0)
    assert result.has_perpendicular


def test_project_beyond_end():
    result = project((3.0, 0.0), ((0.0, 0.0), (2.0, 0.0)))
    assert result.t == 1.0  # clamped
    assert result.distance == pytest.approx(1.0)
    assert not result.has_perpendicular


def test_project_point_on_segment():
    result = project((1.0, 0.0), ((0.0, 0.0), (2.0, 0.0)))
    assert result.distance == 0.0
    assert result.has_perpendicular


def test_project_zero_length_segment():
    with pytest.raises(ValueError, match="zero-length"):
        project((1.0, 1.0), ((2.0, 2.0), (2.0, 2.0)))


# ---------------------------------------------------------------- classify


def test_perpendicular_rule_prefers_nearer_trajectory():
    # two trajectories admitting one perpendicular each; the query is
    # nearer the first one's supporting segment
    n_type = make_trajectory("N", [(1.0, 0.0), (2.0, 0.0)])
    m_type = make_trajectory("M", [(0.0, 1.0), (0.0, 2.0)])
    result = classify((1.5, 0.8), [n_type, m_type])
    assert [h.component for h in result.hypotheses] == ["N", "M"]
    top = result.hypotheses[0]
    assert top.distance == pytest.approx(0.8)
    assert top.via_perpendicular
    assert top.segment_index == 1
    assert result.hypotheses[1].distance == pytest.approx(1.5)


def test_dictionary_point_classifies_to_itself(biquad, biquad_setup):
    tv, trajectories, golden = biquad_setup
    spec = FaultSpec("R4", 0.3)
    query = signature(golden, evaluate_at(biquad, spec, tv.frequencies))
    result = classify(query, trajectories)
    top = result.hypotheses[0]
    assert top.component == "R4"
    assert top.distance <= 1e-9
    assert abs(top.estimated_deviation - 0.3) <= 1e-6


def test_off_grid_round_trip(biquad, biquad_setup):
    tv, trajectories, golden = biquad_setup
    for component in ("R1", "R3", "C2"):
        spec = FaultSpec(component, 0.15)
        query = signature(golden, evaluate_at(biquad, spec, tv.frequencies))
        result = classify(query, trajectories)
        top = result.hypotheses[0]
        assert top.component == component
        assert 0.10 < top.estimated_deviation < 0.20
        assert top.via_perpendicular


def test_nominal_query(biquad_setup):
    _, trajectories, _ = biquad_setup
    result = classify((0.0, 0.0), trajectories)
    assert result.nominal
    assert result.hypotheses == ()
    result = classify((1e-9, -1e-9), trajectories)
    assert result.nominal


def test_every_trajectory_contributes_one_hypothesis(biquad_setup):
    _, trajectories, _ = biquad_setup
    result = classify((0.5, -0.25), trajectories)
    assert len(result.hypotheses) == 7
    assert len({h.component for h in result.hypotheses}) == 7
    distances = [h.distance for h in result.hypotheses]
    assert distances == sorted(distances)
    assert all(h.distance >= 0.0 for h in result.hypotheses)


def test_estimated_deviation_within_segment(biquad_setup):
    _, trajectories, _ = biquad_setup
    by_component = {t.component: t for t in trajectories}
    rng = np.random.default_rng(11)
    for _ in range(25):
        query = rng.normal(size=2) * rng.uniform(0.05, 3.0)
        for hypothesis in classify(query, trajectories).hypotheses:
            segment = by_component[hypothesis.component].segments[
                hypothesis.segment_index
            ]
            low = min(segment[0].deviation, segment[1].deviation)
            high = max(segment[0].deviation, segment[1].deviation)
            assert low <= hypothesis.estimated_deviation <= high


def test_top_hypothesis_is_candidate_set_minimum(biquad_setup):
    _, trajectories, _ = biquad_setup
    rng = np.random.default_rng(5)
    for _ in range(30):
        query = rng.normal(size=2) * rng.uniform(0.1, 3.0)
        result = classify(query, trajectories)
        best = None
        for trajectory in trajectories:
            perpendicular, fallback = [], []
            for start, end in trajectory.segments:
                projection = project(query, (start, end))
                a = np.asarray(start.coords)
                foot = a + projection.t * (np.asarray(end.coords) - a)
                if float(np.sqrt(foot @ foot)) <= 1e-6:
                    continue
                bucket = perpendicular if projection.has_perpendicular else fallback
                bucket.append(projection.distance)
            candidates = perpendicular or fallback
            if candidates:
                value = min(candidates)
                best = value if best is None else min(best, value)
        assert abs(result.hypotheses[0].distance - best) <= 1e-12


def test_monotone_degradation(biquad, biquad_setup):
    tv, trajectories, golden = biquad_setup
    rng = np.random.default_rng(17)
    for component, deviation in [("R1", 0.17), ("C2", -0.23), ("R4", 0.31)]:
        spec = FaultSpec(component, deviation)
        query = np.asarray(
            signature(golden, evaluate_at(biquad, spec, tv.frequencies))
        )
        base = classify(query, trajectories).hypotheses[0].distance
        for epsilon in (1e-4, 1e-3, 1e-2):
            for _ in range(10):
                direction = rng.normal(size=2)
                direction /= np.sqrt(direction @ direction)
                noisy = query + epsilon * direction
                top = classify(noisy, trajectories).hypotheses[0].distance
                assert top <= base + epsilon + 1e-12


def test_coordinate_swap_leaves_ranking(biquad, biquad_faults):
    forward = TestVector((0.25, 4.0))
    backward = TestVector((4.0, 0.25))
    t_forward = build_trajectories(biquad, biquad_faults, forward)
    t_backward = build_trajectories(biquad, biquad_faults, backward)
    golden_f = evaluate_at(biquad, None, forward.frequencies)
    golden_b = evaluate_at(biquad, None, backward.frequencies)
    for component, deviation in [("R2", 0.25), ("C1", -0.33)]:
        spec = FaultSpec(component, deviation)
        q_f = signature(golden_f, evaluate_at(biquad, spec, forward.frequencies))
        q_b = signature(golden_b, evaluate_at(biquad, spec, backward.frequencies))
        ranked_f = [h.component for h in classify(q_f, t_forward).hypotheses]
        ranked_b = [h.component for h in classify(q_b, t_backward).hypotheses]
        assert ranked_f == ranked_b


def test_ambiguity_flag():
    a = make_trajectory("A", [(1.0, 0.0), (2.0, 0.0)])
    b = make_trajectory("B", [(1.0, 0.1), (2.0, 0.1)])
    near_tie = classify((1.5, 0.05), [a, b], ambiguity_margin=0.05)
    assert near_tie.ambiguous
    clear = classify((1.5, -0.5), [a, b], ambiguity_margin=0.05)
    assert not clear.ambiguous
    assert clear.hypotheses[0].component == "A"


def test_endpoint_fallback_flagged():
    # query beyond the far end: no segment of A admits a perpendicular
    a = make_trajectory("A", [(1.0, 0.0)])
    result = classify((2.0, 0.5), [a])
    top = result.hypotheses[0]
    assert not top.via_perpendicular
    assert top.distance == pytest.approx(np.hypot(1.0, 0.5))
    assert top.estimated_deviation == pytest.approx(0.1)


def test_classify_validation(biquad_setup):
    _, trajectories, _ = biquad_setup
    with pytest.raises(ValueError, match="dimension"):
        classify((1.0, 2.0, 3.0), trajectories)
    with pytest.raises(ValueError, match="no trajectories"):
        classify((1.0, 2.0), [])


def test_report_and_csv(tmp_path, biquad_setup):
    from trajdiag.diagnose import format_report, write_diagnosis_csv

    _, trajectories, _ = biquad_setup
    result = classify((0.5, -0.25), trajectories)
    report = format_report(result)
    assert "rank" in report and "est_deviation" in report
    assert "interpolates" in report  # estimate labelled as an extension
    path = tmp_path / "diagnosis.csv"
    write_diagnosis_csv(path, result)
    lines = path.read_text().splitlines()
    assert lines[0] == "rank,component,distance_db,est_deviation,via_perpendicular"
    assert len(lines) == 8
    nominal = classify((0.0, 0.0), trajectories)
    assert "nominal" in format_report(nominal)

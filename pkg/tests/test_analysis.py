import csv
import io

import numpy as np
import pytest
from scipy.optimize import bisect

from onoc_xbar import analysis as an
from onoc_xbar.errors import DegenerateFrontier, MismatchedRuns, MissingCoefficient
from onoc_xbar.geometry import GridArchitecture
from onoc_xbar.loss_model import FRONTIER_DROPS, ML_DEFAULTS, LossParams, compute_total_loss, get_preset

BIBERMAN = get_preset("Biberman").with_defaults(ML_DEFAULTS)


@pytest.fixture(scope="module")
def pair8():
    grid = GridArchitecture(8, 2.5)
    return an.build_topology("ornoc-ml", grid), an.build_topology("matrix-ml-b", grid)


@pytest.mark.parametrize("name", ["ornoc-ml", "matrix-ml-b", "snake-ml-a", "lambda-router-b"])
def test_evaluate_matches_per_pair_oracle(name):
    inst = an.build_topology(name, GridArchitecture(4, 2.0))
    losses = [compute_total_loss(inst.path(s, d), BIBERMAN) for s, d in inst.pairs()]
    r = an.evaluate(inst, BIBERMAN)
    assert r.worst_case_db == max(losses)
    assert r.average_db == pytest.approx(sum(losses) / len(losses), abs=1e-12)
    assert list(r.losses) == losses


def test_reaggregation_from_pair_csv():
    inst = an.build_topology("snake-ml-b", GridArchitecture(6, 2.5))
    r = an.evaluate(inst, BIBERMAN)
    rows = list(csv.DictReader(io.StringIO(r.pair_csv())))
    values = [float(row["loss_db"]) for row in rows]
    assert len(values) == 36 * 35
    assert abs(max(values) - r.worst_case_db) <= 1e-9
    assert abs(sum(values) / len(values) - r.average_db) <= 1e-9


def test_missing_coefficient_surfaces():
    inst = an.build_topology("ornoc-ml", GridArchitecture(3, 1.0))
    with pytest.raises(MissingCoefficient):
        an.evaluate(inst, get_preset("Zhang"))


def test_results_csv_format():
    inst = an.build_topology("ornoc-ml", GridArchitecture(2, 1.0))
    text = an.results_csv([an.evaluate(inst, BIBERMAN)])
    header, row = text.strip().splitlines()
    assert header.split(",") == list(an.RESULT_COLUMNS)
    assert row.startswith("ornoc-ml,-,multi,2,1,Biberman,")


def test_sweep_is_deterministic_across_worker_counts():
    insts = [an.build_topology(n, GridArchitecture(4, 1.0)) for n in an.SEVEN]
    pitches = [1.0, 2.0, 3.0]
    serial = an.results_csv(an.sweep_distance(insts, pitches, BIBERMAN, workers=1))
    threaded = an.results_csv(an.sweep_distance(insts, pitches, BIBERMAN, workers=4))
    assert serial == threaded


def test_sweep_losses_grow_with_pitch():
    insts = [an.build_topology(n, GridArchitecture(4, 1.0)) for n in an.SEVEN]
    results = an.sweep_distance(insts, [1.0, 2.0, 3.0], BIBERMAN, workers=1)
    for k in range(0, len(results), 3):
        worst = [r.worst_case_db for r in results[k:k + 3]]
        assert worst[0] < worst[1] < worst[2]
    with pytest.raises(ValueError):
        an.sweep_distance(insts, [], BIBERMAN)


def test_worker_count(monkeypatch):
    monkeypatch.setenv(an.THREADS_ENV, "3")
    assert an.worker_count() == 3
    monkeypatch.setenv(an.THREADS_ENV, "0")
    assert 1 <= an.worker_count() <= 8
    for bad in ("x", "-1"):
        monkeypatch.setenv(an.THREADS_ENV, bad)
        with pytest.raises(ValueError):
            an.worker_count()


def test_calibrated_pitch_hits_target():
    inst = an.build_topology("ornoc-ml", GridArchitecture(8, 1.0))
    pitch = an.calibrate_pitch(inst, BIBERMAN, 4.5)
    assert an.evaluate(inst.with_pitch(pitch), BIBERMAN).worst_case_db == pytest.approx(4.5, abs=1e-9)
    with pytest.raises(ValueError):
        an.calibrate_pitch(inst, BIBERMAN, 0.1)


def test_frontier_points_are_break_even(pair8):
    a, b = pair8
    points = an.breakeven_frontier(a, b)
    assert len(points) == 21
    found = [p for p in points if p.p_propagation is not None]
    assert found
    for p in found:
        c = an.classify_point(a, b, p.p_crossing, p.p_propagation)
        assert abs(c["delta"]) <= 1e-6


def test_frontier_agrees_with_bisection(pair8):
    a, b = pair8
    pc = 0.1
    point = an.breakeven_frontier(a, b, [pc])[0]
    assert point.status == "crossover"

    def gap(pp):
        return an.classify_point(a, b, pc, pp)["delta"]

    assert gap(0.0) < 0 < gap(2.0)
    assert point.p_propagation == pytest.approx(bisect(gap, 0.0, 2.0, xtol=1e-13), abs=1e-9)
    # ring wins below the frontier, crossbar above
    assert an.classify_point(a, b, pc, point.p_propagation - 0.01)["region"] == "a wins"
    assert an.classify_point(a, b, pc, point.p_propagation + 0.01)["region"] == "b wins"


def test_frontier_swapped_topologies_invert(pair8):
    a, b = pair8
    p = an.breakeven_frontier(a, b, [0.1])[0]
    q = an.breakeven_frontier(b, a, [0.1])[0]
    assert q.status == "crossover-inverted"
    assert q.p_propagation == pytest.approx(p.p_propagation, abs=1e-12)


def test_frontier_one_sided_status(pair8):
    a, b = pair8
    # with no crossing loss and a narrow propagation range the ring stays ahead
    p = an.breakeven_frontier(a, b, [0.2], p_propagation_range=(0.0, 0.1))[0]
    assert p.status == "a-wins" and p.p_propagation is None


def test_degenerate_frontier():
    inst = an.build_topology("snake-ml-b", GridArchitecture(3, 1.0))
    with pytest.raises(DegenerateFrontier):
        an.breakeven_frontier(inst, inst.with_pitch(1.0))


def test_worst_case_at_matches_evaluate(pair8):
    a, _ = pair8
    params = LossParams(p_propagation=0.7, p_crossing=0.09, name="probe", **FRONTIER_DROPS)
    parts = an._affine_parts(a, FRONTIER_DROPS)
    assert an.worst_case_at(parts, 0.09, 0.7) == pytest.approx(an.evaluate(a, params).worst_case_db, abs=1e-12)


def fake(topology, grid, worst, avg, pitch=2.5):
    return an.EvaluationResult(topology, "B", "multi", grid, pitch, "Biberman", worst, avg, (), np.zeros(0))


def test_improvement_definitions():
    ring = [fake("ornoc-ml", 4, 3.0, 1.0)]
    rivals = [fake("x", 4, 4.0, 2.0), fake("y", 4, 6.0, 4.0)]
    rows = {(r.grid, r.metric, r.definition): r.percent for r in an.improvement_report(rivals, ring)}
    assert rows[4, "worst", "best-competitor"] == pytest.approx(25.0)
    assert rows[4, "worst", "mean-of-competitors"] == pytest.approx((25.0 + 50.0) / 2)
    assert rows[4, "average", "best-competitor"] == pytest.approx(50.0)
    assert rows[0, "average", "mean-of-competitors"] == pytest.approx((50.0 + 75.0) / 2)


def test_improvement_rejects_mismatched_runs():
    with pytest.raises(MismatchedRuns):
        an.improvement_report([fake("x", 4, 4.0, 2.0)], [fake("ornoc-ml", 6, 3.0, 1.0)])
    with pytest.raises(MismatchedRuns):
        an.improvement_report([fake("x", 4, 4.0, 2.0, pitch=1.0)], [fake("ornoc-ml", 4, 3.0, 1.0)])

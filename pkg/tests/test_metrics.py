"""Angular error, accuracy aggregation, and report formatting."""

import numpy as np
import pytest

from srpmask.metrics import (EvalRow, TrialRecord, accuracy_within, aggregate,
                             angular_error, write_report_csv)


def test_angular_error_basic_cases():
    assert angular_error(0.0, 0.0) == 0.0
    assert angular_error(350.0, 10.0) == 20.0
    assert angular_error(90.0, 275.5) == pytest.approx(174.5)
    assert angular_error(0.0, 180.0) == 180.0
    assert angular_error(720.0 + 5.0, 355.0) == 10.0


def test_angular_error_range_and_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b = rng.uniform(-720, 720, 2)
        err = angular_error(a, b)
        assert 0.0 <= err <= 180.0
        assert err == pytest.approx(angular_error(b, a))


def test_accuracy_thresholds_monotone():
    errors = [0.3, 1.2, 4.0, 5.0, 6.5, 30.0]
    accs = [accuracy_within(errors, t) for t in (1.0, 5.0, 10.0)]
    assert accs[0] <= accs[1] <= accs[2]
    assert accuracy_within(errors, 5.0) == pytest.approx(100 * 4 / 6)


def test_accuracy_includes_boundary():
    assert accuracy_within([5.0], 5.0) == 100.0


def test_aggregate_single_trial():
    trial = TrialRecord("s0", "snr=5", "irm", 90.0, 92.5)
    report = aggregate([trial])
    assert report.rows == (EvalRow("snr=5", "irm", 2.5, 100.0, 1),)


def test_aggregate_groups_and_order():
    trials = [
        TrialRecord("a", "snr=1", "none", 0.0, 90.0),
        TrialRecord("a", "snr=1", "irm", 0.0, 1.0),
        TrialRecord("b", "snr=1", "none", 0.0, 10.0),
        TrialRecord("b", "snr=1", "irm", 0.0, 2.0),
    ]
    report = aggregate(trials)
    assert [(r.condition, r.mask) for r in report.rows] == \
        [("snr=1", "none"), ("snr=1", "irm")]
    none_row = report.rows[0]
    assert none_row.avg_error_deg == pytest.approx(50.0)
    assert none_row.acc5_pct == 0.0
    irm_row = report.rows[1]
    assert irm_row.acc5_pct == 100.0


def test_aggregate_drop_worst_per_angle():
    trials = [TrialRecord(f"s{i}", "snr=5", "irm", 45.0, est)
              for i, est in enumerate([45.0, 46.0, 170.0])]
    report = aggregate(trials, drop_worst=1)
    row = report.rows[0]
    assert row.n_trials == 2
    assert row.avg_error_deg == pytest.approx(0.5)


def test_report_csv_format(tmp_path):
    trials = [TrialRecord("s0", "snr=5", "irm-star", 10.0, 11.0)]
    path = tmp_path / "report.csv"
    write_report_csv(path, aggregate(trials))
    lines = path.read_text().splitlines()
    assert lines[0] == "condition,mask,avg_error_deg,acc5_pct,n"
    assert lines[1] == "snr=5,irm-star,1.0000,100.00,1"

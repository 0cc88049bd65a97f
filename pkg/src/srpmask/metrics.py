"""Evaluation metrics and report aggregation.

Errors are circular (wrap-around aware) absolute azimuth differences in
[0, 180]; accuracy is the percentage of trials within 5 degrees (boundary
included). Reports aggregate per (condition, mask) with an optional
per-angle worst-trial exclusion for flaky recordings.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass


def angular_error(truth_deg: float, est_deg: float) -> float:
    """Absolute circular difference in degrees, in [0, 180]."""
    delta = abs(truth_deg - est_deg) % 360.0
    return min(delta, 360.0 - delta)


def accuracy_within(errors, threshold_deg: float = 5.0) -> float:
    """Percentage of errors at or below the threshold."""
    errors = list(errors)
    if not errors:
        raise ValueError("no errors to aggregate")
    hits = sum(1 for e in errors if e <= threshold_deg)
    return 100.0 * hits / len(errors)


@dataclass(frozen=True)
class TrialRecord:
    """One localization attempt against a known truth."""

    scene_id: str
    condition: str
    mask: str
    truth_deg: float
    estimate_deg: float

    @property
    def error_deg(self) -> float:
        return angular_error(self.truth_deg, self.estimate_deg)


@dataclass(frozen=True)
class EvalRow:
    condition: str
    mask: str
    avg_error_deg: float
    acc5_pct: float
    n_trials: int


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]
    trials: tuple[TrialRecord, ...]


def aggregate(trials, drop_worst: int = 0,
              threshold_deg: float = 5.0) -> EvalReport:
    """Group trials into (condition, mask) rows, ordered as encountered.

    drop_worst removes the k largest-error trials within each
    (condition, mask, truth angle) group before aggregation.
    """
    trials = tuple(trials)
    if drop_worst:
        by_angle: dict = {}
        for t in trials:
            by_angle.setdefault((t.condition, t.mask, t.truth_deg),
                                []).append(t)
        kept = []
        for group in by_angle.values():
            group = sorted(group, key=lambda t: t.error_deg)
            kept.extend(group[:max(1, len(group) - drop_worst)])
        keep_set = set(id(t) for t in kept)
        trials = tuple(t for t in trials if id(t) in keep_set)

    groups: dict = {}
    order = []
    for t in trials:
        key = (t.condition, t.mask)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(t)
    rows = []
    for condition, mask in order:
        errs = [t.error_deg for t in groups[(condition, mask)]]
        rows.append(EvalRow(condition, mask, sum(errs) / len(errs),
                            accuracy_within(errs, threshold_deg), len(errs)))
    return EvalReport(tuple(rows), trials)


def write_report_csv(path, report: EvalReport) -> None:
    """Fixed column order so repeated runs diff cleanly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "mask", "avg_error_deg", "acc5_pct", "n"])
        for row in report.rows:
            writer.writerow([row.condition, row.mask,
                             f"{row.avg_error_deg:.4f}",
                             f"{row.acc5_pct:.2f}", row.n_trials])


def write_trials_csv(path, report: EvalReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scene_id", "condition", "mask", "truth_deg",
                         "estimate_deg", "error_deg"])
        for t in report.trials:
            writer.writerow([t.scene_id, t.condition, t.mask,
                             f"{t.truth_deg:.2f}", f"{t.estimate_deg:.2f}",
                             f"{t.error_deg:.4f}"])

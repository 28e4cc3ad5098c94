"""Evaluation of a run against scenario ground truth.

Quantifies whether hidden objects come back as the same anchor, how close
the tracked belief stayed to the truth, and whether any particle covered
the true mode at all.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .run import RunTrace
from .scenario import Scenario

MODE_RADIUS = 0.1
KDE_BANDWIDTH = 0.05


class EvaluationError(ValueError):
    pass


@dataclass
class ObjectMetrics:
    anchor_id: str | None = None
    reacquire_correct: bool = False
    track_rmse: float = float("nan")
    mode_coverage: float = 0.0
    occluded_steps: int = 0


@dataclass
class Metrics:
    per_object: dict[str, ObjectMetrics] = field(default_factory=dict)
    false_acquires: int = 0
    distinct_anchors: int = 0
    distinct_truths: int = 0

    @property
    def all_reacquired(self) -> bool:
        return all(m.reacquire_correct for m in self.per_object.values())

    def to_dict(self) -> dict:
        return {
            "objects": {
                uid: {
                    "anchor_id": m.anchor_id,
                    "reacquire_correct": m.reacquire_correct,
                    "track_rmse": None if np.isnan(m.track_rmse) else round(m.track_rmse, 6),
                    "mode_coverage": round(m.mode_coverage, 6),
                    "occluded_steps": m.occluded_steps,
                }
                for uid, m in sorted(self.per_object.items())
            },
            "false_acquires": self.false_acquires,
            "distinct_anchors": self.distinct_anchors,
            "distinct_truths": self.distinct_truths,
        }


def _map_particle(weights: np.ndarray, rows: np.ndarray) -> int:
    """Index of the maximum a posteriori particle.

    Weight ties (the common case between observations) break by a kernel
    density score over the tracked positions, picking the heaviest mode.
    """
    best = weights.max()
    tied = np.flatnonzero(weights >= best - 1e-12)
    if len(tied) == 1:
        return int(tied[0])
    valid = ~np.isnan(rows).any(axis=1)
    candidates = [i for i in tied if valid[i]]
    if not candidates:
        return int(tied[0])
    points = rows[valid]
    w = weights[valid]
    scores = []
    for i in candidates:
        d2 = np.sum((points - rows[i]) ** 2, axis=1)
        scores.append(float(np.sum(w * np.exp(-d2 / (2.0 * KDE_BANDWIDTH**2)))))
    return candidates[int(np.argmax(scores))]


def evaluate(trace: RunTrace, scenario: Scenario) -> Metrics:
    """Score a trace against the scenario's ground truth."""
    if len(trace.steps) != len(scenario.frames):
        raise EvaluationError(
            f"trace has {len(trace.steps)} steps, scenario {len(scenario.frames)} frames"
        )
    for step, frame in zip(trace.steps, scenario.frames):
        if step.step != frame.time:
            raise EvaluationError("trace and scenario steps are misaligned")

    metrics = Metrics()
    assoc: dict[str, str] = {}
    acquires: dict[str, int] = {}
    final_decision: dict[str, tuple[str, str]] = {}
    for step in trace.steps:
        for decision in step.decisions:
            if decision.truth not in assoc:
                assoc[decision.truth] = decision.anchor_id
            if decision.kind == "acquire":
                acquires[decision.truth] = acquires.get(decision.truth, 0) + 1
            final_decision[decision.truth] = (decision.kind, decision.anchor_id)
    metrics.false_acquires = sum(max(0, n - 1) for n in acquires.values())
    metrics.distinct_truths = len(assoc)
    metrics.distinct_anchors = len(
        {d.anchor_id for s in trace.steps for d in s.decisions}
    )

    hidden_objects = sorted(
        {uid for frame in scenario.frames for uid in frame.hidden}
    )
    by_time = {step.step: step for step in trace.steps}
    for uid in hidden_objects:
        om = ObjectMetrics(anchor_id=assoc.get(uid))
        sq_errors = []
        covered = 0
        occluded = 0
        for frame in scenario.frames:
            if uid not in frame.hidden:
                continue
            occluded += 1
            truth = np.array(frame.hidden[uid]["position"])
            step = by_time[frame.time]
            rows = step.positions.get(om.anchor_id) if om.anchor_id else None
            if rows is None:
                continue
            valid = ~np.isnan(rows).any(axis=1)
            if not valid.any():
                continue
            dists = np.linalg.norm(rows[valid] - truth, axis=1)
            if dists.min() <= MODE_RADIUS:
                covered += 1
            map_idx = _map_particle(step.weights, rows)
            if valid[map_idx]:
                sq_errors.append(float(np.sum((rows[map_idx] - truth) ** 2)))
        om.occluded_steps = occluded
        om.mode_coverage = covered / occluded if occluded else 1.0
        if sq_errors:
            om.track_rmse = float(np.sqrt(np.mean(sq_errors)))
        # the object's final reveal must come back as the original anchor
        kind, anchor_id = final_decision.get(uid, ("", ""))
        om.reacquire_correct = (
            kind == "re_acquire" and anchor_id == assoc.get(uid)
        )
        metrics.per_object[uid] = om
    return metrics

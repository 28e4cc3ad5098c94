"""The per-frame loop wiring matching, inference and feedback together."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from ..anchoring.store import AnchorStore, MatcherConfig, PerceptCandidate
from ..infer.particle import Belief, DegenerateBeliefError, Particle
from ..lang.ast import Constant
from ..occlusion import (
    TheoryOfOcclusion,
    asset_path,
    build_observation_frame,
    feedback,
    infer_step,
    load_transitive_extension,
    position_from_term,
)
from .scenario import Scenario


@dataclass(frozen=True)
class RunConfig:
    too_paths: tuple[str, ...] = ()
    n_particles: int = 1000
    seed: int = 0
    weight_pos: float = 0.5
    weight_color: float = 0.3
    weight_size: float = 0.2
    match_threshold: float = 0.75
    category_gate_mass: float = 0.5
    point_estimate: str = "max"
    position_obs_std: float = 0.01
    transitive_extension: bool = False
    retire_after: int = 50

    def matcher(self) -> MatcherConfig:
        return MatcherConfig(
            self.weight_pos, self.weight_color, self.weight_size,
            self.match_threshold, self.category_gate_mass, self.point_estimate,
        )

    @staticmethod
    def from_dict(data: dict) -> "RunConfig":
        fields = {k: v for k, v in data.items() if k in RunConfig.__dataclass_fields__}
        if "too_paths" in fields:
            fields["too_paths"] = tuple(fields["too_paths"])
        return RunConfig(**fields)

    def to_dict(self) -> dict:
        return {
            "too_paths": list(self.too_paths),
            "n_particles": self.n_particles,
            "seed": self.seed,
            "weight_pos": self.weight_pos,
            "weight_color": self.weight_color,
            "weight_size": self.weight_size,
            "match_threshold": self.match_threshold,
            "category_gate_mass": self.category_gate_mass,
            "point_estimate": self.point_estimate,
            "position_obs_std": self.position_obs_std,
            "transitive_extension": self.transitive_extension,
            "retire_after": self.retire_after,
        }


def default_theory(learned_path: str | None = None,
                   transitive: bool = False) -> tuple[str, ...]:
    """Paths composing a runnable theory: scaffold + rules + affordances."""
    rules = learned_path or asset_path("too_handcoded.ddc")
    paths = (asset_path("too_scaffold.ddc"), rules, asset_path("affordances.ddc"))
    return paths


@dataclass
class DecisionRecord:
    step: int
    percept_index: int
    truth: str
    kind: str
    anchor_id: str
    score: float

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "percept_index": self.percept_index,
            "truth": self.truth,
            "kind": self.kind,
            "anchor_id": self.anchor_id,
            "score": round(self.score, 6),
        }


@dataclass
class StepTrace:
    step: int
    decisions: list[DecisionRecord]
    snapshot: dict
    weights: np.ndarray
    positions: dict[str, np.ndarray | None]  # anchor id -> (N, 3) or None
    events: list[str] = field(default_factory=list)


@dataclass
class RunTrace:
    config: RunConfig
    scenario_kind: str
    scenario_seed: int
    steps: list[StepTrace] = field(default_factory=list)


def run_scenario(scenario: Scenario, config: RunConfig,
                 theory: TheoryOfOcclusion | None = None) -> RunTrace:
    """Process every frame: match percepts, infer, feed back, record."""
    rng = np.random.default_rng(config.seed)
    if theory is None:
        paths = config.too_paths or default_theory()
        theory = TheoryOfOcclusion.load(*paths)
    if config.transitive_extension:
        theory = load_transitive_extension(theory)
    store = AnchorStore(config.matcher())
    belief = Belief([Particle() for _ in range(config.n_particles)], 0)
    obs_var = config.position_obs_std**2
    trace = RunTrace(config, scenario.kind, scenario.seed)
    prev_frame = None
    for frame in scenario.frames:
        time = frame.time
        decisions = []
        for idx, percept in enumerate(frame.percepts):
            candidate = PerceptCandidate.make(
                time, percept.position, percept.histogram, percept.size,
                percept.category,
            )
            decision = store.match(candidate)
            if decision.is_acquire:
                anchor = store.acquire(candidate)
            else:
                anchor = store.re_acquire(decision.anchor_id, candidate)
            decisions.append(DecisionRecord(
                time, idx, percept.truth, decision.kind, str(anchor.id),
                decision.score,
            ))
        store.sweep(time, config.retire_after)
        obs_frame = build_observation_frame(store, time)
        events = []
        if prev_frame is not None:
            try:
                belief = infer_step(theory, belief, prev_frame, obs_frame, rng, obs_var)
            except DegenerateBeliefError:
                events.append("degenerate_belief_reset")
                belief = Belief(
                    [Particle(p.state_values, p.state_facts, p.static_values, 0.0)
                     for p in belief.particles],
                    time,
                )
        feedback(belief, store, time)
        weights = belief.normalized_weights()
        positions = {}
        for key in sorted(store.anchors):
            world_key = ("position", "t", (Constant(key),))
            rows = np.full((len(belief.particles), 3), np.nan)
            found = False
            for i, particle in enumerate(belief.particles):
                value = particle.state_values.get(world_key)
                if value is not None:
                    rows[i] = position_from_term(value)
                    found = True
            positions[key] = rows if found else None
        trace.steps.append(StepTrace(
            time, decisions, store.snapshot(time), weights, positions, events,
        ))
        prev_frame = obs_frame
    return trace


# ---------------------------------------------------------------------------
# serialization

def trace_to_lines(trace: RunTrace) -> list[str]:
    header = {
        "format": "panchor-trace",
        "version": 1,
        "config": trace.config.to_dict(),
        "scenario_kind": trace.scenario_kind,
        "scenario_seed": trace.scenario_seed,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for step in trace.steps:
        record = {
            "type": "step",
            "step": step.step,
            "decisions": [d.to_dict() for d in step.decisions],
            "anchors": step.snapshot["anchors"],
            "events": step.events,
        }
        lines.append(json.dumps(record, sort_keys=True))
        for pid in range(len(step.weights)):
            assignments = {}
            for anchor_id, rows in step.positions.items():
                if rows is not None and not np.isnan(rows[pid]).any():
                    assignments[f"position({anchor_id})"] = [
                        round(float(x), 6) for x in rows[pid]
                    ]
            lines.append(json.dumps({
                "type": "particle",
                "step": step.step,
                "particle_id": pid,
                "weight": round(float(step.weights[pid]), 9),
                "assignments": assignments,
            }, sort_keys=True))
    return lines


def save_trace(trace: RunTrace, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(trace_to_lines(trace)) + "\n")


def load_trace_records(path: str) -> tuple[dict, list[dict]]:
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line for line in handle.read().splitlines() if line.strip()]
    header = json.loads(lines[0])
    if header.get("format") != "panchor-trace":
        raise ValueError(f"{path} is not a trace file")
    return header, [json.loads(line) for line in lines[1:]]

"""Rebuilding a run trace from its file form for offline evaluation."""
from __future__ import annotations

import re

import numpy as np

from .metrics import Metrics, evaluate
from .run import DecisionRecord, RunConfig, RunTrace, StepTrace, load_trace_records
from .scenario import Scenario

_POSITION_KEY = re.compile(r"^position\((.+)\)$")


def trace_from_file(path: str) -> RunTrace:
    header, records = load_trace_records(path)
    config = RunConfig.from_dict(header.get("config", {}))
    trace = RunTrace(config, header.get("scenario_kind", ""),
                     header.get("scenario_seed", 0))
    steps: dict[int, dict] = {}
    for record in records:
        step = steps.setdefault(
            record["step"],
            {"decisions": [], "anchors": [], "events": [], "particles": {}},
        )
        if record.get("type") == "step":
            step["decisions"] = [
                DecisionRecord(
                    record["step"], d["percept_index"], d["truth"], d["kind"],
                    d["anchor_id"], d["score"],
                )
                for d in record["decisions"]
            ]
            step["anchors"] = record.get("anchors", [])
            step["events"] = record.get("events", [])
        else:
            step["particles"][record["particle_id"]] = record
    for time in sorted(steps):
        data = steps[time]
        particles = data["particles"]
        n = len(particles)
        weights = np.zeros(n)
        anchor_ids = set()
        for pid, record in particles.items():
            weights[pid] = record["weight"]
            for key in record["assignments"]:
                match = _POSITION_KEY.match(key)
                if match:
                    anchor_ids.add(match.group(1))
        positions: dict[str, np.ndarray | None] = {}
        for anchor_id in sorted(anchor_ids):
            rows = np.full((n, 3), np.nan)
            for pid, record in particles.items():
                value = record["assignments"].get(f"position({anchor_id})")
                if value is not None:
                    rows[pid] = value
            positions[anchor_id] = rows
        trace.steps.append(StepTrace(
            time, data["decisions"], {"step": time, "anchors": data["anchors"]},
            weights, positions, data["events"],
        ))
    return trace


def trace_metrics_from_file(path: str, scenario: Scenario) -> Metrics:
    return evaluate(trace_from_file(path), scenario)

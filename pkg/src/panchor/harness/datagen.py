"""Synthetic before/after training data for the occlusion learner.

Scenes come in two kinds: onset scenes, where an object disappears next to
candidate occluders at varying distances, and persistence scenes, where an
already-hidden object either stays hidden, loses its association, or is
revealed. Labels are drawn from a configurable ground-truth transition
model (persistence probability plus a logistic of distance for onsets), so
the learner's output can be checked against known parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GenDataParams:
    n_onset: int = 1000
    n_persistence: int = 1000
    persistence: float = 0.92
    reveal_rate: float = 0.08
    control_rate: float = 0.3
    logistic_weight: float = -40.0
    logistic_bias: float = 2.5
    distance_range: tuple[float, float] = (0.01, 0.35)
    persistence_distance: float = 0.02
    occluders_per_scene: int = 2

    def onset_prob(self, distance: float) -> float:
        z = self.logistic_weight * distance + self.logistic_bias
        return 1.0 / (1.0 + math.exp(-z))

    @staticmethod
    def from_dict(data: dict) -> "GenDataParams":
        fields = {k: v for k, v in data.items() if k in GenDataParams.__dataclass_fields__}
        if "distance_range" in fields:
            fields["distance_range"] = tuple(fields["distance_range"])
        return GenDataParams(**fields)


def gen_training_data(params: GenDataParams, seed: int) -> str:
    """Generate the observation facts as clause-program text."""
    rng = np.random.default_rng(seed)
    lines = ["% synthetic occlusion transitions (1-d positions)"]

    def pos_fact(obj: str, time: str, value: float) -> str:
        return f"pos({obj}):{time} ~= {round(float(value), 4)}."

    for j in range(1, params.n_onset + 1):
        exp = f"exp{j}"
        target = f"o1_{exp}"
        base = rng.uniform(0.0, 10.0)
        lines.append(f"% onset scene {j}")
        lines.append(pos_fact(target, "t", base))
        lines.append(f"observed({target}):t.")
        occluders = []
        for k in range(params.occluders_per_scene):
            obj = f"o{k + 2}_{exp}"
            d = rng.uniform(*params.distance_range)
            side = 1.0 if rng.random() < 0.5 else -1.0
            occluders.append((obj, d))
            lines.append(pos_fact(obj, "t", base + side * d))
            lines.append(pos_fact(obj, "t+1", base + side * d))
            lines.append(f"observed({obj}):t.")
            lines.append(f"observed({obj}):t+1.")
            lines.append(f"distance({target},{obj}):t ~= {round(d, 4)}.")
        for obj, d in occluders:
            if rng.random() < params.onset_prob(d):
                lines.append(f"occluded_by({target},{obj}):t+1.")
        if rng.random() < params.control_rate:
            control = f"o9_{exp}"
            cbase = base + rng.uniform(1.0, 2.0)
            lines.append(pos_fact(control, "t", cbase))
            lines.append(pos_fact(control, "t+1", cbase))
            lines.append(f"observed({control}):t.")
            lines.append(f"observed({control}):t+1.")
            for obj, _ in occluders:
                d = rng.uniform(*params.distance_range)
                lines.append(f"distance({control},{obj}):t ~= {round(d, 4)}.")

    for j in range(params.n_onset + 1, params.n_onset + params.n_persistence + 1):
        exp = f"exp{j}"
        hidden = f"o1_{exp}"
        occluder = f"o2_{exp}"
        base = rng.uniform(0.0, 10.0)
        lines.append(f"% persistence scene {j}")
        lines.append(pos_fact(hidden, "t", base))
        lines.append(pos_fact(occluder, "t", base))
        lines.append(pos_fact(occluder, "t+1", base))
        lines.append(f"observed({occluder}):t.")
        lines.append(f"observed({occluder}):t+1.")
        lines.append(f"occluded_by({hidden},{occluder}):t.")
        lines.append(
            f"distance({hidden},{occluder}):t ~= {params.persistence_distance}."
        )
        if rng.random() < params.reveal_rate:
            lines.append(f"observed({hidden}):t+1.")
            lines.append(pos_fact(hidden, "t+1", base))
        elif rng.random() < params.persistence:
            lines.append(f"occluded_by({hidden},{occluder}):t+1.")

    return "\n".join(lines) + "\n"

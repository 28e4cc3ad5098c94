"""Synthetic tabletop scenarios: percept streams with ground truth.

Objects live on a 1 m x 1 m table. Visible objects emit noisy percepts
(position, bounding-box extents, color histogram, category scores); hidden
objects are recorded in per-frame ground truth together with the object
hiding them. Generation is fully driven by the seed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..anchoring.attributes import DEFAULT_HISTOGRAM_BINS

TABLE_CENTER = np.array([0.5, 0.5])

CATEGORY_DISTRACTORS = {
    "ball": ("apple", "orange"),
    "mug": ("cup", "bowl"),
    "box": ("block", "book"),
    "can": ("bottle", "cup"),
    "cup": ("mug", "bowl"),
}

CATEGORY_SIZES = {
    "ball": (0.04, 0.04, 0.04),
    "mug": (0.08, 0.08, 0.10),
    "box": (0.12, 0.12, 0.14),
    "can": (0.06, 0.06, 0.08),
    "cup": (0.09, 0.09, 0.11),
}

POSITION_NOISE = 0.005
SIZE_NOISE = 0.02
HIST_CONCENTRATION = 200.0


@dataclass(frozen=True)
class SimObject:
    uid: str
    category: str
    hue: float
    size: tuple[float, float, float]

    @property
    def z_center(self) -> float:
        return self.size[2] / 2.0


@dataclass(frozen=True)
class FrameSpec:
    """Noise-free description of one frame."""

    positions: dict[str, np.ndarray]       # uid -> (x, y) tabletop position
    visible: tuple[str, ...]
    occluded_by: dict[str, str]            # hidden uid -> occluder uid


@dataclass(frozen=True)
class Percept:
    truth: str
    position: np.ndarray
    size: np.ndarray
    histogram: np.ndarray
    category: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class Frame:
    time: int
    percepts: tuple[Percept, ...]
    hidden: dict[str, dict]


@dataclass(frozen=True)
class Scenario:
    kind: str
    seed: int
    params: dict
    objects: tuple[SimObject, ...]
    frames: tuple[Frame, ...]


def base_histogram(hue: float, bins: int = DEFAULT_HISTOGRAM_BINS) -> np.ndarray:
    centers = np.arange(bins) / bins
    weights = np.exp(20.0 * np.cos(2.0 * np.pi * (centers - hue)))
    return weights / weights.sum()


def _category_scores(obj: SimObject, rng) -> tuple[tuple[str, float], ...]:
    top = float(rng.beta(8.0, 2.0))
    rest = 1.0 - top
    d1, d2 = CATEGORY_DISTRACTORS.get(obj.category, ("thing", "item"))
    return ((obj.category, top), (d1, rest * 2.0 / 3.0), (d2, rest / 3.0))


def _object_position(spec: FrameSpec, obj: SimObject) -> np.ndarray:
    xy = spec.positions[obj.uid]
    return np.array([xy[0], xy[1], obj.z_center])


def render(kind: str, seed: int, params: dict, objects: list[SimObject],
           specs: list[FrameSpec], rng) -> Scenario:
    """Turn noise-free frame specs into a percept-level scenario."""
    bases = {o.uid: base_histogram(o.hue) for o in objects}
    by_uid = {o.uid: o for o in objects}
    frames = []
    for k, spec in enumerate(specs):
        percepts = []
        order = list(spec.visible)
        rng.shuffle(order)
        for uid in order:
            obj = by_uid[uid]
            pos = _object_position(spec, obj) + rng.normal(0.0, POSITION_NOISE, 3)
            size = np.asarray(obj.size) * np.exp(rng.normal(0.0, SIZE_NOISE, 3))
            hist = rng.dirichlet(HIST_CONCENTRATION * bases[uid] + 0.02)
            hist = hist / hist.sum()
            percepts.append(
                Percept(uid, pos, size, hist, _category_scores(obj, rng))
            )
        hidden = {}
        for uid, occluder in spec.occluded_by.items():
            obj = by_uid[uid]
            xy = spec.positions[uid]
            hidden[uid] = {
                "position": [float(xy[0]), float(xy[1]), obj.z_center],
                "occluded_by": occluder,
            }
        frames.append(Frame(k, tuple(percepts), hidden))
    return Scenario(kind, seed, params, tuple(objects), tuple(frames))


# ---------------------------------------------------------------------------
# generators

def _interpolate(start: dict, goal: dict, steps: int):
    """Per-frame positions moving linearly from start to goal."""
    for i in range(1, steps + 1):
        f = i / steps
        yield {uid: (1.0 - f) * start[uid] + f * goal[uid] for uid in start}


def gen_scenario(kind: str, params: dict | None, seed: int) -> Scenario:
    params = dict(params or {})
    if kind == "shell_game":
        return _gen_shell_game(params, seed)
    if kind == "uni_modal":
        return _gen_uni_modal(params, seed)
    if kind == "transitive":
        return _gen_transitive(params, seed)
    raise ValueError(f"unknown scenario kind {kind!r}")


def _gen_shell_game(params: dict, seed: int) -> Scenario:
    n = int(params.setdefault("n_containers", 3))
    shuffles = int(params.setdefault("n_shuffles", 4))
    gather = float(params.setdefault("gather_radius", 0.16))
    spread = float(params.setdefault("spread_radius", 0.32))
    if not 2 <= n <= 5:
        raise ValueError("n_containers must be between 2 and 5")
    if shuffles < 0:
        raise ValueError("n_shuffles must be nonnegative")
    rng = np.random.default_rng(seed)
    categories = ["mug", "cup", "can", "box", "mug"][:n]
    objects = [SimObject("ball", "ball", float(rng.uniform()), CATEGORY_SIZES["ball"])]
    for i, cat in enumerate(categories):
        objects.append(
            SimObject(f"c{i}", cat, float(rng.uniform()), CATEGORY_SIZES[cat])
        )
    ball = objects[0]
    containers = [o.uid for o in objects[1:]]
    angles = 2.0 * np.pi * (np.arange(n) / n) + float(rng.uniform(0, 2 * np.pi / n))
    ring = {
        uid: TABLE_CENTER + spread * np.array([np.cos(a), np.sin(a)])
        for uid, a in zip(containers, angles)
    }
    gather_ring = {
        uid: TABLE_CENTER + gather * np.array([np.cos(a), np.sin(a)])
        for uid, a in zip(containers, angles)
    }
    ball_pos = TABLE_CENTER.copy()

    specs: list[FrameSpec] = []

    def frame(positions, visible, occluded):
        specs.append(FrameSpec(dict(positions), tuple(visible), dict(occluded)))

    positions = {**ring, "ball": ball_pos}
    all_visible = ["ball"] + containers
    for _ in range(2):
        frame(positions, all_visible, {})
    start = {uid: positions[uid] for uid in containers}
    for step_pos in _interpolate(start, gather_ring, 3):
        positions = {**step_pos, "ball": ball_pos}
        frame(positions, all_visible, {})

    # the ball goes under one container; belief should spread over all of them
    star = containers[int(rng.integers(n))]
    positions = dict(positions)
    positions["ball"] = positions[star]
    frame(positions, containers, {"ball": star})

    start = {uid: positions[uid] for uid in containers}
    for step_pos in _interpolate(start, ring, 3):
        positions = {**step_pos, "ball": step_pos[star]}
        frame(positions, containers, {"ball": star})

    for _ in range(shuffles):
        a, b = rng.choice(n, size=2, replace=False)
        ua, ub = containers[a], containers[b]
        pa, pb = positions[ua].copy(), positions[ub].copy()
        direction = pb - pa
        offset = 0.08 * np.array([-direction[1], direction[0]])
        offset /= max(np.linalg.norm(direction), 1e-9)
        mid = {uid: positions[uid] for uid in containers}
        mid[ua] = (pa + pb) / 2 + offset * np.linalg.norm(direction) * 0.5
        mid[ub] = (pa + pb) / 2 - offset * np.linalg.norm(direction) * 0.5
        goal = {uid: positions[uid] for uid in containers}
        goal[ua], goal[ub] = pb, pa
        for step_pos in [mid, goal]:
            positions = {**step_pos, "ball": step_pos[star]}
            frame(positions, containers, {"ball": star})

    # reveal: the hiding container steps aside, the ball reappears
    aside = dict(positions)
    to_center = TABLE_CENTER - positions[star]
    norm = max(np.linalg.norm(to_center), 1e-9)
    aside[star] = positions[star] + 0.16 * to_center / norm
    aside["ball"] = positions[star]
    frame(aside, all_visible, {})
    for _ in range(2):
        frame(aside, all_visible, {})
    return render("shell_game", seed, params, objects, specs, rng)


def _gen_uni_modal(params: dict, seed: int) -> Scenario:
    slide = float(params.setdefault("slide_distance", 0.2))
    slide_steps = int(params.setdefault("slide_steps", 5))
    rng = np.random.default_rng(seed)
    can = SimObject("can", "can", float(rng.uniform()), CATEGORY_SIZES["can"])
    box = SimObject("box", "box", float(rng.uniform()), CATEGORY_SIZES["box"])
    mug = SimObject("mug", "mug", float(rng.uniform()), CATEGORY_SIZES["mug"])
    objects = [can, box, mug]
    can_pos = np.array([0.35, 0.5])
    box_pos = np.array([0.75, 0.35])
    mug_pos = np.array([0.4, 0.8])
    specs: list[FrameSpec] = []

    def frame(positions, visible, occluded):
        specs.append(FrameSpec(dict(positions), tuple(visible), dict(occluded)))

    positions = {"can": can_pos, "box": box_pos, "mug": mug_pos}
    for _ in range(2):
        frame(positions, ("can", "box", "mug"), {})
    # box approaches until nearly touching the can
    approach_goal = {"box": can_pos + np.array([0.02, 0.0]), "can": can_pos, "mug": mug_pos}
    start = dict(positions)
    for step_pos in _interpolate(start, approach_goal, 3):
        positions = step_pos
        frame(positions, ("can", "box", "mug"), {})
    # cover: the can disappears under the box
    positions = dict(positions)
    positions["box"] = can_pos.copy()
    positions["can"] = can_pos.copy()
    frame(positions, ("box", "mug"), {"can": "box"})
    frame(positions, ("box", "mug"), {"can": "box"})
    # slide away, carrying the hidden can
    direction = np.array([0.0, 1.0]) if can_pos[1] < 0.5 else np.array([1.0, 0.0])
    goal = {
        "box": positions["box"] + slide * direction,
        "can": positions["can"] + slide * direction,
        "mug": mug_pos,
    }
    for step_pos in _interpolate(positions, goal, slide_steps):
        positions = step_pos
        frame(positions, ("box", "mug"), {"can": "box"})
    # reveal
    aside = dict(positions)
    aside["box"] = positions["box"] + np.array([0.16, 0.0])
    frame(aside, ("can", "box", "mug"), {})
    for _ in range(2):
        frame(aside, ("can", "box", "mug"), {})
    return render("uni_modal", seed, params, objects, specs, rng)


def _gen_transitive(params: dict, seed: int) -> Scenario:
    carry = float(params.setdefault("carry_distance", 0.55))
    carry_steps = int(params.setdefault("carry_steps", 6))
    rng = np.random.default_rng(seed)
    ball = SimObject("ball", "ball", float(rng.uniform()), CATEGORY_SIZES["ball"])
    mug = SimObject("mug", "mug", float(rng.uniform()), CATEGORY_SIZES["mug"])
    box = SimObject("box", "box", float(rng.uniform()), CATEGORY_SIZES["box"])
    objects = [ball, mug, box]
    ball_pos = np.array([0.25, 0.3])
    mug_pos = np.array([0.6, 0.3])
    box_pos = np.array([0.85, 0.55])
    specs: list[FrameSpec] = []

    def frame(positions, visible, occluded):
        specs.append(FrameSpec(dict(positions), tuple(visible), dict(occluded)))

    positions = {"ball": ball_pos, "mug": mug_pos, "box": box_pos}
    for _ in range(2):
        frame(positions, ("ball", "mug", "box"), {})
    # mug approaches and covers the ball
    goal = {"mug": ball_pos + np.array([0.02, 0.0]), "ball": ball_pos, "box": box_pos}
    for step_pos in _interpolate(positions, goal, 3):
        positions = step_pos
        frame(positions, ("ball", "mug", "box"), {})
    positions = dict(positions)
    positions["mug"] = ball_pos.copy()
    positions["ball"] = ball_pos.copy()
    frame(positions, ("mug", "box"), {"ball": "mug"})
    frame(positions, ("mug", "box"), {"ball": "mug"})
    # box approaches and covers the mug (ball still under the mug)
    goal = {"box": positions["mug"] + np.array([0.02, 0.0]),
            "mug": positions["mug"], "ball": positions["ball"]}
    for step_pos in _interpolate(positions, goal, 3):
        positions = step_pos
        frame(positions, ("mug", "box"), {"ball": "mug"})
    positions = dict(positions)
    positions["box"] = positions["mug"].copy()
    frame(positions, ("box",), {"ball": "mug", "mug": "box"})
    frame(positions, ("box",), {"ball": "mug", "mug": "box"})
    # carry the whole stack across the table
    direction = np.array([0.0, 1.0])
    goal = {uid: positions[uid] + carry * direction for uid in positions}
    for step_pos in _interpolate(positions, goal, carry_steps):
        positions = step_pos
        frame(positions, ("box",), {"ball": "mug", "mug": "box"})
    # box aside: the mug reappears, the ball stays hidden under it
    aside = dict(positions)
    aside["box"] = positions["box"] + np.array([0.18, 0.0])
    frame(aside, ("mug", "box"), {"ball": "mug"})
    frame(aside, ("mug", "box"), {"ball": "mug"})
    # mug aside: the ball reappears
    final = dict(aside)
    final["mug"] = aside["mug"] + np.array([-0.18, 0.0])
    frame(final, ("ball", "mug", "box"), {})
    for _ in range(2):
        frame(final, ("ball", "mug", "box"), {})
    return render("transitive", seed, params, objects, specs, rng)


# ---------------------------------------------------------------------------
# serialization

def scenario_to_lines(scenario: Scenario) -> list[str]:
    header = {
        "format": "panchor-scenario",
        "version": 1,
        "kind": scenario.kind,
        "seed": scenario.seed,
        "params": scenario.params,
        "objects": [
            {"uid": o.uid, "category": o.category, "hue": o.hue, "size": list(o.size)}
            for o in scenario.objects
        ],
    }
    lines = [json.dumps(header, sort_keys=True)]
    for frame in scenario.frames:
        record = {
            "time": frame.time,
            "percepts": [
                {
                    "truth": p.truth,
                    "position": [float(x) for x in p.position],
                    "size": [float(x) for x in p.size],
                    "histogram": [float(x) for x in p.histogram],
                    "category": [[label, float(prob)] for label, prob in p.category],
                }
                for p in frame.percepts
            ],
            "hidden": frame.hidden,
        }
        lines.append(json.dumps(record, sort_keys=True))
    return lines


def save_scenario(scenario: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(scenario_to_lines(scenario)) + "\n")


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line for line in handle.read().splitlines() if line.strip()]
    header = json.loads(lines[0])
    if header.get("format") != "panchor-scenario":
        raise ValueError(f"{path} is not a scenario file")
    objects = tuple(
        SimObject(o["uid"], o["category"], o["hue"], tuple(o["size"]))
        for o in header["objects"]
    )
    frames = []
    for line in lines[1:]:
        record = json.loads(line)
        percepts = tuple(
            Percept(
                p["truth"],
                np.array(p["position"]),
                np.array(p["size"]),
                np.array(p["histogram"]),
                tuple((label, prob) for label, prob in p["category"]),
            )
            for p in record["percepts"]
        )
        frames.append(Frame(record["time"], percepts, record["hidden"]))
    return Scenario(
        header["kind"], header["seed"], header.get("params", {}), objects,
        tuple(frames),
    )

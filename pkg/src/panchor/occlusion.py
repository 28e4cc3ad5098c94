"""Bridge between the anchor store and the probabilistic reasoner.

Each step the store's view of the world is turned into observation facts,
the theory of occlusion advances the particle belief one step against those
facts, and inferred positions of unseen objects flow back into the store as
probabilistic position attributes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .anchoring.store import AnchorStore
from .infer.engine import CompiledProgram, compile_program
from .infer.particle import Belief, Observation, filter_step
from .infer.world import FactLayer
from .lang.ast import Atom, Clause, Compound, Constant, Num, Program
from .lang.parser import parse_program

REQUIRED_PREDICATES = (
    ("occluder", 2, "t1"),
    ("occluded_by", 2, "t1"),
    ("sample_occluder", 1, "t1"),
)

DEFAULT_POSITION_OBS_VAR = 0.01**2  # meters


class TheoryError(ValueError):
    pass


@dataclass(frozen=True)
class TheoryOfOcclusion:
    program: Program
    compiled: CompiledProgram = field(compare=False, repr=False, default=None)

    @staticmethod
    def from_programs(*programs: Program) -> "TheoryOfOcclusion":
        merged = Program(tuple(c for p in programs for c in p.clauses))
        heads = {(c.head.pred, c.head.arity, c.head.time) for c in merged.clauses}
        missing = [key for key in REQUIRED_PREDICATES if key not in heads]
        if missing:
            raise TheoryError(f"theory of occlusion lacks predicates: {missing}")
        return TheoryOfOcclusion(merged, compile_program(merged))

    @staticmethod
    def load(*paths) -> "TheoryOfOcclusion":
        programs = []
        for path in paths:
            with open(path, "r", encoding="utf-8") as handle:
                programs.append(parse_program(handle.read()))
        return TheoryOfOcclusion.from_programs(*programs)


def asset_path(name: str) -> str:
    return str(resources.files("panchor.assets").joinpath(name))


def load_transitive_extension(too: TheoryOfOcclusion) -> TheoryOfOcclusion:
    """Append the recursive occlusion clause; loading twice is a no-op."""
    with open(asset_path("too_transitive_ext.ddc"), "r", encoding="utf-8") as handle:
        extension = parse_program(handle.read())
    new_clauses = [c for c in extension.clauses if c not in too.program.clauses]
    if not new_clauses:
        return too
    return TheoryOfOcclusion.from_programs(too.program, Program(tuple(new_clauses)))


# ---------------------------------------------------------------------------
# observation frames

@dataclass(frozen=True)
class ObservationFrame:
    time: int
    observed: tuple[str, ...]
    positions: dict[str, tuple[float, float, float]]
    distances: dict[tuple[str, str], float]
    categories: dict[str, str]
    objects: tuple[str, ...]

    def layer(self, slice_key: str) -> FactLayer:
        values = {}
        facts: list = []
        for obj in self.observed:
            facts.append(("observed", slice_key, (Constant(obj),)))
        for obj, pos in self.positions.items():
            values[("position", slice_key, (Constant(obj),))] = position_term(pos)
        for (a, b), d in self.distances.items():
            values[("distance", slice_key, (Constant(a), Constant(b)))] = Num(d)
        for obj in self.objects:
            facts.append(("object", None, (Constant(obj),)))
        for obj, cat in self.categories.items():
            facts.append(("category", None, (Constant(obj), Constant(cat))))
        return FactLayer(values, facts)


def position_term(pos) -> Compound:
    return Compound(",", tuple(Num(float(x)) for x in pos))


def position_from_term(term) -> np.ndarray:
    return np.array([a.value for a in term.args], dtype=float)


def build_observation_frame(store: AnchorStore, time: int) -> ObservationFrame:
    """Facts the reasoner sees this step, from the store's current state.

    An anchor counts as observed only if a percept matched it at this very
    step; positions and pairwise distances are emitted for those anchors
    while everything in the store contributes its identity and category.
    """
    observed = []
    positions = {}
    categories = {}
    objects = []
    for key in sorted(store.anchors):
        anchor = store.anchors[key]
        objects.append(key)
        categories[key] = anchor.top_category
        if anchor.last_observed == time:
            observed.append(key)
            state = anchor.latest("position")
            positions[key] = tuple(float(x) for x in state.value)
    distances = {}
    for a in observed:
        for b in observed:
            if a != b:
                pa = np.array(positions[a])
                pb = np.array(positions[b])
                distances[(a, b)] = float(np.linalg.norm(pa - pb))
    return ObservationFrame(
        time, tuple(observed), positions, distances, categories, tuple(objects)
    )


# ---------------------------------------------------------------------------
# stepping and feedback

def infer_step(too: TheoryOfOcclusion, belief: Belief, frame_t: ObservationFrame,
               frame_t1: ObservationFrame, rng,
               position_obs_var: float = DEFAULT_POSITION_OBS_VAR) -> Belief:
    """Advance the belief across one pair of consecutive frames.

    Percept positions at t+1 enter as evidence; the theory's transition
    clauses explain disappearances by sampling an occluder per particle and
    tying the hidden object's position to it.
    """
    if frame_t1.time != frame_t.time + 1:
        raise ValueError("frames must be consecutive")
    layers = (frame_t.layer("t"), frame_t1.layer("t1"))
    observations = [
        Observation(
            Atom("position", (Constant(obj),), "t1"),
            position_term(frame_t1.positions[obj]),
            position_obs_var,
        )
        for obj in frame_t1.observed
    ]
    compiled = too.compiled or compile_program(too.program)
    return filter_step(compiled, belief, observations, rng, layers=layers)


def feedback(belief: Belief, store: AnchorStore, time: int) -> AnchorStore:
    """Send inferred positions of unseen anchors back into the store.

    Every anchor that no percept matched this step but that still has
    particle support is tracked with its per-particle positions; observed
    anchors are never touched.
    """
    if belief.time != time:
        raise ValueError(f"belief is at time {belief.time}, expected {time}")
    weights = belief.normalized_weights()
    for key in sorted(store.anchors):
        anchor = store.anchors[key]
        if anchor.last_observed == time:
            continue
        world_key = ("position", "t", (Constant(key),))
        positions = []
        masses = []
        for particle, weight in zip(belief.particles, weights):
            value = particle.state_values.get(world_key)
            if value is not None:
                positions.append(position_from_term(value))
                masses.append(max(float(weight), 1e-300))
        if positions:
            store.track(key, np.array(positions), np.array(masses), time)
    return store

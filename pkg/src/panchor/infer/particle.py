"""Particle-filtered state estimation over dynamic programs.

A particle is one sampled world restricted to the current time slice plus
any static (atemporal) values it committed to. One filter step predicts the
next slice by grounding every t+1 clause against the particle's state,
conditions on the step's observations, and shifts the sampled slice to
become the new current state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..lang.ast import Atom, Compound, Constant, Num, Term
from .engine import CompiledProgram, Engine, InferenceError, compile_program
from .query import force_clause_heads
from .world import FactLayer, World


class DegenerateBeliefError(InferenceError):
    pass


@dataclass(frozen=True)
class Observation:
    """Evidence for one step: a valued fact, or a logical fact if value is None."""

    atom: Atom
    value: Term | None = None
    obs_var: float = 0.0


@dataclass
class Particle:
    state_values: dict = field(default_factory=dict)   # keys (pred, "t", args)
    state_facts: dict = field(default_factory=dict)
    static_values: dict = field(default_factory=dict)  # keys (pred, None, args)
    log_weight: float = 0.0


@dataclass
class Belief:
    particles: list[Particle]
    time: int = 0

    def __len__(self) -> int:
        return len(self.particles)

    def normalized_weights(self) -> np.ndarray:
        logw = np.array([p.log_weight for p in self.particles])
        finite = logw[np.isfinite(logw)]
        if finite.size == 0:
            raise DegenerateBeliefError("all particles have zero weight")
        shifted = np.exp(logw - finite.max())
        return shifted / shifted.sum()

    def effective_sample_size(self) -> float:
        w = self.normalized_weights()
        return float(1.0 / np.square(w).sum())


def init_belief(program, n_particles: int, rng) -> Belief:
    """Belief at time 0, sampled from the program's time-0 clauses."""
    compiled = program if isinstance(program, CompiledProgram) else compile_program(program)
    particles = []
    for _ in range(n_particles):
        world = World()
        engine = Engine(compiled, world, rng)
        force_clause_heads(engine, compiled.init_heads)
        values = {
            (k[0], "t", k[2]): v for k, v in world.values.items() if k[1] == 0
        }
        particles.append(Particle(values, {}, world.static_values(), 0.0))
    return Belief(particles, 0)


def filter_step(program, belief: Belief, observations: list[Observation], rng,
                layers: tuple[FactLayer, ...] = ()) -> Belief:
    """Advance the belief one time step.

    Per particle: condition the t+1 slice on the observed values (weighting
    by their likelihood under the defining transition clauses), then sample
    every remaining t+1 variable reachable through the transition clauses,
    and finally shift t+1 into the new current state. Resamples when the
    effective sample size drops below half the particle count.
    """
    compiled = program if isinstance(program, CompiledProgram) else compile_program(program)
    new_particles = []
    for particle in belief.particles:
        state = FactLayer(
            values={**particle.state_values, **particle.static_values},
            facts=particle.state_facts,
        )
        world = World(layers=(state,) + layers)
        engine = Engine(compiled, world, rng)
        logw = 0.0
        for obs in observations:
            if obs.value is None:
                gen = engine.solve_goal(_atom_goal(obs.atom), 0, 0)
                try:
                    holds = next(gen, None) is not None
                finally:
                    gen.close()
                if not holds:
                    logw = -math.inf
            else:
                logw += engine.clamp_evidence(obs.atom, obs.value, obs.obs_var)
            if logw == -math.inf:
                break
        if logw != -math.inf:
            force_clause_heads(engine, compiled.t1_heads)
        values, facts = world.next_state()
        static = {**particle.static_values, **world.static_values()}
        new_particles.append(Particle(values, facts, static, particle.log_weight + logw))
    out = Belief(new_particles, belief.time + 1)
    if out.effective_sample_size() < len(out) / 2.0:
        out = resample(out, rng)
    return out


def _atom_goal(atom: Atom):
    from ..lang.ast import AtomGoal

    return AtomGoal(atom)


def resample(belief: Belief, rng) -> Belief:
    """Systematic resampling to equal weights."""
    n = len(belief.particles)
    weights = belief.normalized_weights()
    positions = (np.arange(n) + rng.random()) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    indices = np.searchsorted(cumulative, positions, side="right")
    particles = [
        Particle(
            belief.particles[i].state_values,
            belief.particles[i].state_facts,
            belief.particles[i].static_values,
            0.0,
        )
        for i in indices
    ]
    return Belief(particles, belief.time)


# ---------------------------------------------------------------------------
# trace export

def value_to_json(value: Term):
    if isinstance(value, Num):
        return value.value
    if isinstance(value, Constant):
        return value.name
    if isinstance(value, Compound) and value.functor == ",":
        return [value_to_json(a) for a in value.args]
    from ..lang.printer import term_text

    return term_text(value)


def _key_text(key) -> str:
    pred, _, args = key
    if not args:
        return pred
    from ..lang.printer import term_text

    return f"{pred}({', '.join(term_text(a) for a in args)})"


def belief_records(belief: Belief, step: int | None = None) -> list[dict]:
    """One record per particle: step, id, weight and the state assignments."""
    weights = belief.normalized_weights()
    records = []
    for i, particle in enumerate(belief.particles):
        assignments = {
            _key_text(k): value_to_json(v) for k, v in particle.state_values.items()
        }
        records.append(
            {
                "step": belief.time if step is None else step,
                "particle_id": i,
                "weight": float(weights[i]),
                "assignments": dict(sorted(assignments.items())),
            }
        )
    return records

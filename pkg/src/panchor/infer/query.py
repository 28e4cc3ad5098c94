"""Query estimation: single proofs, Monte Carlo sampling, exact enumeration."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..lang.ast import Atom, Body, Program, Query, Term, Var
from ..lang.parser import parse_query
from .engine import (
    CompiledProgram,
    Engine,
    InferenceError,
    NeedChoice,
    compile_program,
)
from .world import UNDEFINED, World

Evidence = list[tuple[Atom, Term]]


def _as_body(goal) -> tuple[Body, tuple[str, ...]]:
    if isinstance(goal, str):
        goal = parse_query(goal)
    if isinstance(goal, Query):
        return goal.body, goal.free_vars
    return tuple(goal), ()


def prove(program, world: World, goal, rng) -> tuple[bool, dict, World]:
    """Prove a goal in the given world, sampling lazily as needed.

    Returns (success, bindings for the query's named variables, world). The
    world is mutated in place with any values forced by the proof.
    """
    compiled = program if isinstance(program, CompiledProgram) else compile_program(program)
    body, free = _as_body(goal)
    engine = Engine(compiled, world, rng)
    for _ in engine.solve_body(body, 0):
        bindings = {name: engine.reify(Var(name), 0) for name in free}
        return True, bindings, world
    return False, {}, world


def force_clause_heads(engine: Engine, clauses) -> None:
    """Ground every given clause head by enumerating its body solutions.

    Distributional heads are sampled (first satisfied clause wins), definite
    heads are cached as derived facts.
    """
    for clause in clauses:
        frame = engine.new_frame()
        mark = len(engine.trail)
        gen = engine.solve_body(clause.body, frame)
        try:
            for _ in gen:
                key = engine.atom_key(clause.head, frame)
                if key is None:
                    raise InferenceError(
                        f"clause head {clause.head.pred} not ground after body"
                    )
                if clause.dist is None:
                    engine.world.add_fact(key)
                elif engine.world.get_value(key) is None \
                        and key not in engine.world.failed:
                    engine._draw(key, clause, frame)
        finally:
            gen.close()
            engine.undo(mark)


def sample_world(program, rng, goals=None) -> World:
    """Sample a possible world.

    With explicit goals only the variables those proofs force are sampled;
    otherwise every satisfiable atemporal or time-0 distributional clause is
    grounded and sampled.
    """
    compiled = program if isinstance(program, CompiledProgram) else compile_program(program)
    world = World()
    engine = Engine(compiled, world, rng)
    if goals is not None:
        for goal in goals:
            body, _ = _as_body(goal)
            gen = engine.solve_body(body, 0)
            try:
                next(gen, None)
            finally:
                gen.close()
        return world
    static = [
        c for c in compiled.program.clauses
        if c.is_distributional and c.head.time in (None, 0)
    ]
    force_clause_heads(engine, static)
    return world


@dataclass(frozen=True)
class ProbabilityEstimate:
    estimate: float
    std_error: float
    n_samples: int


def query_prob(program, query, n_samples: int, rng,
               evidence: Evidence | None = None) -> ProbabilityEstimate:
    """Monte Carlo estimate of the query probability.

    Worlds are sampled lazily per query; with evidence, worlds are weighted
    by the likelihood of the observed values (importance sampling with
    likelihood weighting) and the estimate is self-normalized.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    compiled = program if isinstance(program, CompiledProgram) else compile_program(program)
    body, _ = _as_body(query)
    weights = np.empty(n_samples)
    hits = np.empty(n_samples)
    world = World()
    engine = Engine(compiled, world, rng)
    for i in range(n_samples):
        world.reset()
        engine.reset()
        logw = 0.0
        if evidence:
            for atom, value in evidence:
                logw += engine.clamp_evidence(atom, value)
                if logw == -math.inf:
                    break
        if logw == -math.inf:
            weights[i] = 0.0
            hits[i] = 0.0
            continue
        weights[i] = math.exp(logw)
        gen = engine.solve_body(body, 0)
        try:
            hits[i] = 1.0 if next(gen, None) else 0.0
        finally:
            gen.close()
    total = weights.sum()
    if total <= 0.0:
        raise InferenceError("all sampled worlds have zero evidence likelihood")
    estimate = float((weights * hits).sum() / total)
    std_error = float(np.sqrt((weights**2 * (hits - estimate) ** 2).sum()) / total)
    return ProbabilityEstimate(estimate, std_error, n_samples)


def enumerate_prob(program, query, max_worlds: int = 1_000_000) -> float:
    """Exact query probability by exhaustive enumeration.

    Only valid for programs whose reachable random variables are all finite;
    a continuous distribution raises. Enumeration is lazy: only variables the
    proof actually touches are branched on.
    """
    compiled = program if isinstance(program, CompiledProgram) else compile_program(program)
    body, _ = _as_body(query)
    total = 0.0
    stack: list[tuple[dict, float]] = [({}, 1.0)]
    expansions = 0
    while stack:
        preset, prob = stack.pop()
        world = World()
        for key, value in preset.items():
            world.set_value(key, value)
        engine = Engine(compiled, world, rng=None)
        gen = engine.solve_body(body, 0)
        try:
            success = next(gen, None) is not None
        except NeedChoice as choice:
            for p, value in choice.alternatives:
                if p > 0.0:
                    branch = dict(preset)
                    branch[choice.key] = value
                    stack.append((branch, prob * p))
            if choice.residual > 1e-12:
                branch = dict(preset)
                branch[choice.key] = UNDEFINED
                stack.append((branch, prob * choice.residual))
            expansions += 1
            if expansions > max_worlds:
                raise InferenceError(
                    f"enumeration exceeded {max_worlds} worlds"
                ) from None
            continue
        finally:
            gen.close()
        if success:
            total += prob
    return total

"""Backward-chaining proof engine with lazy sampling.

Goals are proved by SLD resolution against the program; when a proof needs
the value of an unsampled random variable, the variable's defining clause is
resolved and a value is drawn and recorded in the world. Sampled values are
never retracted: a failed proof branch leaves the world consistent.

Unification is structure-sharing: terms from the program are never copied,
a (term, frame) pair identifies an instance and bindings live in one dict
keyed by (frame, variable name) with a trail for backtracking.
"""
from __future__ import annotations

import math
from bisect import bisect_left

import numpy as np

from ..lang.ast import (
    Atom,
    AtomGoal,
    Body,
    BuiltinGoal,
    Clause,
    Compound,
    Constant,
    Finite,
    Gaussian,
    Num,
    PoissonDist,
    Program,
    Term,
    UniformList,
    UniformRange,
    ValueGoal,
    Var,
    list_items,
    make_list,
)
from .world import UNDEFINED, World

TRUE = Constant("true")

MAX_DEPTH = 400
_GROUND_FRAME = -1


class InferenceError(RuntimeError):
    pass


class SampleError(InferenceError):
    pass


class EvalError(InferenceError):
    pass


class _UndefinedValue(Exception):
    """An arithmetic operand resolved to the undefined residual value."""


class NeedChoice(Exception):
    """Raised instead of sampling when the engine runs in enumeration mode."""

    def __init__(self, key, alternatives, residual: float):
        super().__init__(f"choice needed for {key}")
        self.key = key
        self.alternatives = alternatives  # list of (probability, ground value)
        self.residual = residual


# ---------------------------------------------------------------------------
# compiled program

class CompiledProgram:
    def __init__(self, program: Program):
        self.program = program
        self.dist_preds: set[str] = set()
        self.definite_preds: set[str] = set()
        self.by_key: dict[tuple, list[Clause]] = {}
        # ground bodiless clauses index as facts for O(1) lookup; only the
        # remaining rule clauses need resolution
        self.rules: dict[tuple, list[Clause]] = {}
        self.fact_set: set[tuple] = set()
        self.fact_index: dict[tuple, list[tuple]] = {}
        self.dist_facts: dict[tuple, Clause] = {}
        self.dist_fact_index: dict[tuple, list[tuple]] = {}
        self.t1_heads: list[Clause] = []
        self.init_heads: list[Clause] = []
        for clause in program.clauses:
            head = clause.head
            key3 = (head.pred, head.arity, head.time)
            self.by_key.setdefault(key3, []).append(clause)
            if clause.is_distributional:
                self.dist_preds.add(head.pred)
            else:
                self.definite_preds.add(head.pred)
            if head.time == "t1":
                self.t1_heads.append(clause)
            elif head.time == 0:
                self.init_heads.append(clause)
            ground_head = not clause.body and not any(_has_var(a) for a in head.args)
            if ground_head:
                wkey = (head.pred, head.time, head.args)
                if clause.is_distributional:
                    if wkey not in self.dist_facts:
                        self.dist_facts[wkey] = clause
                        self.dist_fact_index.setdefault(
                            (head.pred, head.time), []
                        ).append(wkey)
                    continue
                self.fact_set.add(wkey)
                self.fact_index.setdefault((head.pred, head.time), []).append(wkey)
                continue
            self.rules.setdefault(key3, []).append(clause)
        both = self.dist_preds & self.definite_preds
        if both:
            raise InferenceError(
                f"predicates defined both as random variables and logically: {sorted(both)}"
            )
        self._finite_tables: dict[int, tuple] = {}
        for clause in program.clauses:
            if isinstance(clause.dist, Finite):
                table = _static_finite_table(clause.dist)
                if table is not None:
                    self._finite_tables[id(clause)] = table
        # ground atoms keep a precomputed world key; entries hold the atom
        # itself so the id stays valid
        self.atom_keys: dict[int, tuple] = {}
        # every predicate the program mentions anywhere; goals on other
        # predicates are reported as unknown instead of silently failing
        self.known_preds: set[str] = set(self.dist_preds) | set(self.definite_preds)
        for clause in program.clauses:
            _collect_body_preds(clause.body, self.known_preds)

    def clauses_for(self, pred: str, arity: int, time) -> list[Clause]:
        return self.by_key.get((pred, arity, time), [])

    def rules_for(self, pred: str, arity: int, time) -> list[Clause]:
        return self.rules.get((pred, arity, time), [])

    def finite_table(self, clause: Clause):
        return self._finite_tables.get(id(clause))


def _static_finite_table(dist: Finite):
    cum, values, total = [], [], 0.0
    for prob, value in dist.pairs:
        if not isinstance(prob, Num):
            return None
        if _has_var(value):
            return None
        total += float(prob.value)
        cum.append(total)
        values.append(value)
    return cum, values, total


def _has_var(term: Term) -> bool:
    if isinstance(term, Var):
        return True
    if isinstance(term, Compound):
        return any(_has_var(a) for a in term.args)
    return False


def _collect_body_preds(body, acc: set[str]) -> None:
    for lit in body:
        goal = lit.goal
        if isinstance(goal, (AtomGoal, ValueGoal)):
            acc.add(goal.atom.pred)
        elif isinstance(goal, BuiltinGoal) and goal.name == "findall":
            _collect_body_preds(goal.args[1], acc)


def compile_program(program: Program) -> CompiledProgram:
    return CompiledProgram(program)


# ---------------------------------------------------------------------------
# engine

class Engine:
    def __init__(self, compiled: CompiledProgram, world: World,
                 rng: np.random.Generator | None):
        self.cp = compiled
        self.world = world
        self.rng = rng
        self.bindings: dict = {}
        self.trail: list = []
        self._frame = 0
        self.false_cache: set = set()

    def reset(self) -> None:
        """Clear proof state so the engine can run a fresh world."""
        self.bindings.clear()
        self.trail.clear()
        self.false_cache.clear()

    # -- terms ------------------------------------------------------------

    def new_frame(self) -> int:
        self._frame += 1
        return self._frame

    def deref(self, term: Term, frame: int):
        while isinstance(term, Var):
            bound = self.bindings.get((frame, term.name))
            if bound is None:
                return term, frame
            term, frame = bound
        return term, frame

    def bind(self, frame: int, name: str, term: Term, tframe: int) -> None:
        key = (frame, name)
        self.bindings[key] = (term, tframe)
        self.trail.append(key)

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            del self.bindings[self.trail.pop()]

    def unify(self, t1: Term, f1: int, t2: Term, f2: int) -> bool:
        t1, f1 = self.deref(t1, f1)
        t2, f2 = self.deref(t2, f2)
        if isinstance(t1, Var):
            if isinstance(t2, Var) and f1 == f2 and t1.name == t2.name:
                return True
            self.bind(f1, t1.name, t2, f2)
            return True
        if isinstance(t2, Var):
            self.bind(f2, t2.name, t1, f1)
            return True
        if t1 is UNDEFINED or t2 is UNDEFINED:
            return False
        if isinstance(t1, Num):
            return isinstance(t2, Num) and t1.value == t2.value
        if isinstance(t1, Constant):
            return isinstance(t2, Constant) and t1.name == t2.name
        if isinstance(t2, Compound) and t1.functor == t2.functor \
                and len(t1.args) == len(t2.args):
            return all(self.unify(a, f1, b, f2) for a, b in zip(t1.args, t2.args))
        return False

    def reify(self, term: Term, frame: int) -> Term | None:
        """Ground instance of the term, or None if it still has variables."""
        term, frame = self.deref(term, frame)
        if isinstance(term, Var):
            return None
        if isinstance(term, Compound):
            args = []
            for a in term.args:
                g = self.reify(a, frame)
                if g is None:
                    return None
                args.append(g)
            return Compound(term.functor, tuple(args))
        return term

    def atom_key(self, atom: Atom, frame: int):
        cache = self.cp.atom_keys
        hit = cache.get(id(atom))
        if hit is not None and hit[0] is atom:
            return hit[1]
        if not atom.args:
            key = (atom.pred, atom.time, ())
            cache[id(atom)] = (atom, key)
            return key
        args = []
        ground_source = True
        for a in atom.args:
            if not isinstance(a, (Num, Constant)):
                ground_source = False
            g = self.reify(a, frame)
            if g is None:
                return None
            args.append(g)
        key = (atom.pred, atom.time, tuple(args))
        if ground_source:
            cache[id(atom)] = (atom, key)
        return key

    # -- goal solving -------------------------------------------------------

    def solve_body(self, body: Body, frame: int, depth: int = 0):
        yield from self._solve_seq(body, 0, (), frame, depth)

    def _solve_seq(self, lits, i: int, pending: tuple, frame: int, depth: int):
        if depth > MAX_DEPTH:
            raise InferenceError("proof depth limit exceeded")
        # settle any postponed negations whose arguments are now ground
        if pending:
            for idx, (goal, gframe) in enumerate(pending):
                if self._goal_ground(goal, gframe):
                    rest = pending[:idx] + pending[idx + 1:]
                    if self._negation_holds(goal, gframe, depth):
                        yield from self._solve_seq(lits, i, rest, frame, depth)
                    return
        if i == len(lits):
            if pending:
                raise InferenceError(
                    "negated goal never became ground in clause body"
                )
            yield True
            return
        lit = lits[i]
        if lit.negated:
            if not self._goal_ground(lit.goal, frame):
                yield from self._solve_seq(
                    lits, i + 1, pending + ((lit.goal, frame),), frame, depth
                )
            elif self._negation_holds(lit.goal, frame, depth):
                yield from self._solve_seq(lits, i + 1, pending, frame, depth)
            return
        for _ in self.solve_goal(lit.goal, frame, depth):
            yield from self._solve_seq(lits, i + 1, pending, frame, depth)

    def _goal_ground(self, goal, frame: int) -> bool:
        """Ready-for-negation check.

        Anonymous variables (from `_`) stay existential inside a negation, so
        only named variables must be bound before the goal is evaluated.
        """
        if isinstance(goal, AtomGoal):
            return all(self._bound_or_anon(a, frame) for a in goal.atom.args)
        if isinstance(goal, ValueGoal):
            return all(
                self._bound_or_anon(a, frame) for a in goal.atom.args
            ) and self._bound_or_anon(goal.value, frame)
        return True  # builtins check their own arguments

    def _bound_or_anon(self, term: Term, frame: int) -> bool:
        term, frame = self.deref(term, frame)
        if isinstance(term, Var):
            return term.name.startswith("_G")
        if isinstance(term, Compound):
            return all(self._bound_or_anon(a, frame) for a in term.args)
        return True

    def _negation_holds(self, goal, frame: int, depth: int) -> bool:
        mark = len(self.trail)
        gen = self.solve_goal(goal, frame, depth + 1)
        try:
            for _ in gen:
                return False
            return True
        finally:
            gen.close()
            self.undo(mark)

    def solve_goal(self, goal, frame: int, depth: int):
        if depth > MAX_DEPTH:
            raise InferenceError("proof depth limit exceeded")
        if isinstance(goal, AtomGoal):
            if goal.atom.pred in self.cp.dist_preds:
                yield from self._solve_value(goal.atom, TRUE, _GROUND_FRAME, frame, depth)
            else:
                yield from self._solve_atom(goal.atom, frame, depth)
        elif isinstance(goal, ValueGoal):
            yield from self._solve_value(goal.atom, goal.value, frame, frame, depth)
        else:
            yield from self._solve_builtin(goal, frame, depth)

    def _world_mentions(self, pred: str) -> bool:
        world = self.world
        if any(k[0] == pred for k in world.values) or \
                any(k[0] == pred for k in world.facts):
            return True
        for layer in world.layers:
            if any(k[0] == pred for k in layer.values) or \
                    any(k[0] == pred for k in layer.facts):
                return True
        return False

    # logical predicates ----------------------------------------------------

    def _solve_atom(self, atom: Atom, frame: int, depth: int):
        if atom.pred not in self.cp.known_preds and not self._world_mentions(atom.pred):
            raise InferenceError(f"unknown predicate {atom.pred}/{atom.arity}")
        key = self.atom_key(atom, frame)
        if key is not None:
            if key in self.cp.fact_set or self.world.has_fact(key):
                yield True
                return
            if key in self.false_cache or key in self.world.sampling:
                return
            self.world.sampling.add(key)
            try:
                for clause in self.cp.rules_for(atom.pred, atom.arity, atom.time):
                    nf = self.new_frame()
                    mark = len(self.trail)
                    if self._unify_args(atom.args, frame, clause.head.args, nf):
                        gen = self.solve_body(clause.body, nf, depth + 1)
                        try:
                            for _ in gen:
                                self.world.add_fact(key)
                                self.undo(mark)
                                yield True
                                return
                        finally:
                            gen.close()
                    self.undo(mark)
                self.false_cache.add(key)
            finally:
                self.world.sampling.discard(key)
            return
        # non-ground: enumerate facts, then clause derivations
        seen: set = set()
        program_facts = self.cp.fact_index.get((atom.pred, atom.time), [])
        for fkey in program_facts:
            if len(fkey[2]) != atom.arity:
                continue
            mark = len(self.trail)
            if self._unify_args(atom.args, frame, fkey[2], _GROUND_FRAME):
                seen.add(fkey)
                try:
                    yield True
                finally:
                    self.undo(mark)
            else:
                self.undo(mark)
        for fkey in list(self.world.iter_fact_keys(atom.pred, atom.time)):
            if len(fkey[2]) != atom.arity or fkey in seen:
                continue
            mark = len(self.trail)
            if self._unify_args(atom.args, frame, fkey[2], _GROUND_FRAME):
                seen.add(fkey)
                try:
                    yield True
                finally:
                    self.undo(mark)
            else:
                self.undo(mark)
        for clause in self.cp.rules_for(atom.pred, atom.arity, atom.time):
            nf = self.new_frame()
            mark = len(self.trail)
            if self._unify_args(atom.args, frame, clause.head.args, nf):
                for _ in self.solve_body(clause.body, nf, depth + 1):
                    key = self.atom_key(atom, frame)
                    if key is None:
                        raise InferenceError(
                            f"derived non-ground instance of {atom.pred}/{atom.arity}"
                        )
                    if key in seen:
                        continue
                    seen.add(key)
                    self.world.add_fact(key)
                    yield True
            self.undo(mark)

    def _unify_args(self, args1, f1, args2, f2) -> bool:
        return all(self.unify(a, f1, b, f2) for a, b in zip(args1, args2))

    # random variables --------------------------------------------------

    def _solve_value(self, atom: Atom, vterm: Term, vframe: int, frame: int, depth: int):
        if atom.pred not in self.cp.known_preds and not self._world_mentions(atom.pred):
            raise InferenceError(f"unknown random variable {atom.pred}/{atom.arity}")
        key = self.atom_key(atom, frame)
        if key is not None:
            value = self.rv_value(key, atom, frame, depth)
            if value is None or value is UNDEFINED:
                return
            mark = len(self.trail)
            if self.unify(vterm, vframe, value, _GROUND_FRAME):
                try:
                    yield True
                finally:
                    self.undo(mark)
            else:
                self.undo(mark)
            return
        yielded: set = set()
        for vkey in list(self.world.iter_value_keys(atom.pred, atom.time)):
            if len(vkey[2]) != atom.arity:
                continue
            value = self.world.get_value(vkey)
            if value is UNDEFINED:
                continue
            mark = len(self.trail)
            if self._unify_args(atom.args, frame, vkey[2], _GROUND_FRAME) \
                    and self.unify(vterm, vframe, value, _GROUND_FRAME):
                yielded.add(vkey)
                try:
                    yield True
                finally:
                    self.undo(mark)
            else:
                self.undo(mark)
        for vkey in self.cp.dist_fact_index.get((atom.pred, atom.time), []):
            if len(vkey[2]) != atom.arity or vkey in yielded or vkey in self.world.failed:
                continue
            mark = len(self.trail)
            if not self._unify_args(atom.args, frame, vkey[2], _GROUND_FRAME):
                self.undo(mark)
                continue
            value = self.world.get_value(vkey)
            if value is None:
                value = self._draw(vkey, self.cp.dist_facts[vkey], 0)
            if value is None or value is UNDEFINED:
                if value is UNDEFINED:
                    yielded.add(vkey)
                self.undo(mark)
                continue
            if self.unify(vterm, vframe, value, _GROUND_FRAME):
                yielded.add(vkey)
                try:
                    yield True
                finally:
                    self.undo(mark)
            else:
                self.undo(mark)
        for clause in self.cp.rules_for(atom.pred, atom.arity, atom.time):
            nf = self.new_frame()
            mark = len(self.trail)
            if self._unify_args(atom.args, frame, clause.head.args, nf):
                for _ in self.solve_body(clause.body, nf, depth + 1):
                    key = self.atom_key(atom, frame)
                    if key is None:
                        raise InferenceError(
                            f"non-ground random variable {atom.pred}/{atom.arity}"
                        )
                    if key in yielded or key in self.world.sampling:
                        continue
                    value = self.world.get_value(key)
                    if value is None:
                        if key in self.world.failed:
                            continue
                        value = self._draw(key, clause, nf)
                        if value is None:
                            continue
                    if value is UNDEFINED:
                        yielded.add(key)
                        continue
                    mark2 = len(self.trail)
                    if self.unify(vterm, vframe, value, _GROUND_FRAME):
                        yielded.add(key)
                        try:
                            yield True
                        finally:
                            self.undo(mark2)
                    else:
                        self.undo(mark2)
            self.undo(mark)

    def rv_value(self, key, atom: Atom, frame: int, depth: int):
        """Value of a ground random variable, sampling it on first use."""
        value = self.world.get_value(key)
        if value is not None:
            return value
        if key in self.world.failed or key in self.world.sampling:
            return None
        fact_clause = self.cp.dist_facts.get(key)
        if fact_clause is not None:
            value = self._draw(key, fact_clause, 0)
            if value is None:
                self.world.failed.add(key)
            return value
        self.world.sampling.add(key)
        try:
            for clause in self.cp.rules_for(atom.pred, atom.arity, atom.time):
                nf = self.new_frame()
                mark = len(self.trail)
                if self._unify_args(atom.args, frame, clause.head.args, nf):
                    gen = self.solve_body(clause.body, nf, depth + 1)
                    try:
                        for _ in gen:
                            value = self._draw(key, clause, nf)
                            self.undo(mark)
                            if value is None:
                                self.world.failed.add(key)
                            return value
                    finally:
                        gen.close()
                self.undo(mark)
            self.world.failed.add(key)
            return None
        finally:
            self.world.sampling.discard(key)

    def _draw(self, key, clause: Clause, frame: int):
        """Sample the clause's distribution and record the value."""
        value = self._sample_dist(key, clause, frame)
        if value is not None:
            self.world.set_value(key, value)
        return value

    def _sample_dist(self, key, clause: Clause, frame: int):
        dist = clause.dist
        rng = self.rng
        if isinstance(dist, Finite):
            table = self.cp.finite_table(clause)
            if table is None:
                cum, values, total = [], [], 0.0
                for prob, vterm in dist.pairs:
                    p = self._eval(prob, frame)
                    if not isinstance(p, (int, float)) or not 0.0 <= p <= 1.0 + 1e-9:
                        raise SampleError(f"finite probability {p!r} outside [0, 1]")
                    total += p
                    cum.append(total)
                    value = self.reify(vterm, frame)
                    if value is None:
                        raise SampleError("finite outcome with unbound variables")
                    values.append(value)
                if total > 1.0 + 1e-9:
                    raise SampleError(f"finite probabilities sum to {total} > 1")
            else:
                cum, values, total = table
            if rng is None:
                if len(values) == 1 and total >= 1.0 - 1e-12:
                    return values[0]  # deterministic fact, no branching needed
                residual = max(0.0, 1.0 - total)
                probs = [cum[0]] + [cum[i] - cum[i - 1] for i in range(1, len(cum))]
                raise NeedChoice(key, list(zip(probs, values)), residual)
            u = rng.random()
            if u >= total:
                return UNDEFINED
            return values[bisect_left(cum, u)]
        if rng is None:
            raise SampleError("continuous distribution in exact enumeration")
        if isinstance(dist, Gaussian):
            mean = self._eval(dist.mean, frame)
            var = self._eval(dist.variance, frame)
            if not var > 0:
                raise SampleError(f"gaussian variance {var} must be positive")
            sd = math.sqrt(var)
            if isinstance(mean, tuple):
                return Compound(",", tuple(Num(rng.normal(m, sd)) for m in mean))
            return Num(rng.normal(mean, sd))
        if isinstance(dist, UniformRange):
            lo = self._eval(dist.lo, frame)
            hi = self._eval(dist.hi, frame)
            if not hi > lo:
                raise SampleError(f"empty uniform range [{lo}, {hi}]")
            return Num(rng.uniform(lo, hi))
        if isinstance(dist, UniformList):
            items = self._list_values(dist.items, frame)
            if not items:
                return None
            return items[int(rng.integers(len(items)))]
        if isinstance(dist, PoissonDist):
            rate = self._eval(dist.rate, frame)
            if rate < 0:
                raise SampleError(f"poisson rate {rate} must be nonnegative")
            return Num(int(rng.poisson(rate)))
        raise SampleError(f"unsupported distribution {dist!r}")

    def _list_values(self, term: Term, frame: int) -> list[Term]:
        ground = self.reify(term, frame)
        if ground is None:
            raise SampleError("distribution over a list with unbound variables")
        items = list_items(ground)
        if items is None:
            raise SampleError(f"expected a list, found {ground!r}")
        return items

    # evidence ----------------------------------------------------------

    def clamp_evidence(self, atom: Atom, value: Term, extra_var: float = 0.0) -> float:
        """Condition a random variable on an observed value.

        Returns the log-likelihood contribution: the log-density of the value
        under the variable's defining distribution given the current world
        (for gaussians, with the observation variance added). A variable with
        no satisfiable defining clause is entered freely at zero cost.
        """
        key = self.atom_key(atom, _GROUND_FRAME)
        if key is None:
            raise InferenceError("evidence atoms must be ground")
        existing = self.world.get_value(key)
        if existing is not None:
            return 0.0 if existing == value else -math.inf
        if key in self.world.failed:
            self.world.failed.discard(key)
        fact_clause = self.cp.dist_facts.get(key)
        if fact_clause is not None:
            logw = self._log_density(fact_clause, 0, value, extra_var)
            self.world.set_value(key, value)
            return logw
        self.world.sampling.add(key)
        try:
            for clause in self.cp.rules_for(atom.pred, atom.arity, atom.time):
                nf = self.new_frame()
                mark = len(self.trail)
                if self._unify_args(atom.args, _GROUND_FRAME, clause.head.args, nf):
                    gen = self.solve_body(clause.body, nf, 0)
                    try:
                        for _ in gen:
                            logw = self._log_density(clause, nf, value, extra_var)
                            self.undo(mark)
                            self.world.set_value(key, value)
                            return logw
                    finally:
                        gen.close()
                self.undo(mark)
        finally:
            self.world.sampling.discard(key)
        self.world.set_value(key, value)
        return 0.0

    def _log_density(self, clause: Clause, frame: int, value: Term,
                     extra_var: float) -> float:
        dist = clause.dist
        if isinstance(dist, Gaussian):
            mean = self._eval(dist.mean, frame)
            var = self._eval(dist.variance, frame) + extra_var
            obs = _term_numbers(value)
            if obs is None:
                return -math.inf
            if isinstance(mean, tuple):
                if not isinstance(obs, tuple) or len(obs) != len(mean):
                    return -math.inf
                return sum(_gauss_logpdf(o, m, var) for o, m in zip(obs, mean))
            if isinstance(obs, tuple):
                return -math.inf
            return _gauss_logpdf(obs, mean, var)
        if isinstance(dist, Finite):
            prob = 0.0
            for pterm, vterm in dist.pairs:
                ground = self.reify(vterm, frame)
                if ground == value:
                    prob += self._eval(pterm, frame)
            return math.log(prob) if prob > 0 else -math.inf
        if isinstance(dist, UniformRange):
            lo = self._eval(dist.lo, frame)
            hi = self._eval(dist.hi, frame)
            obs = _term_numbers(value)
            if isinstance(obs, (int, float)) and lo <= obs <= hi and hi > lo:
                return -math.log(hi - lo)
            return -math.inf
        if isinstance(dist, UniformList):
            items = self._list_values(dist.items, frame)
            return -math.log(len(items)) if value in items else -math.inf
        if isinstance(dist, PoissonDist):
            rate = self._eval(dist.rate, frame)
            obs = _term_numbers(value)
            if isinstance(obs, int) and obs >= 0 and rate > 0:
                return obs * math.log(rate) - rate - math.lgamma(obs + 1)
            return -math.inf
        raise SampleError(f"unsupported distribution {dist!r}")

    # builtins ------------------------------------------------------------

    def _solve_builtin(self, goal: BuiltinGoal, frame: int, depth: int):
        name = goal.name
        if name == "true":
            yield True
            return
        if name == "is":
            lhs, rhs = goal.args
            try:
                value = self._eval(rhs, frame)
            except _UndefinedValue:
                return
            mark = len(self.trail)
            if self.unify(lhs, frame, _num_term(value), _GROUND_FRAME):
                try:
                    yield True
                finally:
                    self.undo(mark)
            else:
                self.undo(mark)
            return
        if name in ("<", ">", "=<", ">="):
            lhs, rhs = goal.args
            try:
                a = self._eval(lhs, frame)
                b = self._eval(rhs, frame)
            except _UndefinedValue:
                return
            if isinstance(a, tuple) or isinstance(b, tuple):
                raise EvalError("cannot order vector values")
            ok = {"<": a < b, ">": a > b, "=<": a <= b, ">=": a >= b}[name]
            if ok:
                yield True
            return
        if name == "between":
            lo_t, hi_t, var_t = goal.args
            lo = self._eval(lo_t, frame)
            hi = self._eval(hi_t, frame)
            if not (isinstance(lo, int) and isinstance(hi, int)):
                raise EvalError("between/3 bounds must be integers")
            target, tframe = self.deref(var_t, frame)
            if isinstance(target, Num):
                if isinstance(target.value, int) and lo <= target.value <= hi:
                    yield True
                return
            if not isinstance(target, Var):
                return
            for i in range(lo, hi + 1):
                mark = len(self.trail)
                self.bind(tframe, target.name, Num(i), _GROUND_FRAME)
                try:
                    yield True
                finally:
                    self.undo(mark)
            return
        if name == "findall":
            pattern, nested, result = goal.args
            collected: list[Term] = []
            mark = len(self.trail)
            gen = self.solve_body(nested, frame, depth + 1)
            try:
                for _ in gen:
                    ground = self.reify(pattern, frame)
                    if ground is None:
                        raise InferenceError("findall pattern not ground at solution")
                    collected.append(ground)
            finally:
                gen.close()
                self.undo(mark)
            mark = len(self.trail)
            if self.unify(result, frame, make_list(collected), _GROUND_FRAME):
                try:
                    yield True
                finally:
                    self.undo(mark)
            else:
                self.undo(mark)
            return
        if name == "logistic":
            feats_t, params_t, out_t = goal.args
            feats = [self._as_scalar(v) for v in self._list_values(feats_t, frame)]
            params = [self._as_scalar(v) for v in self._list_values(params_t, frame)]
            if len(params) != len(feats) + 1:
                raise EvalError("logistic/3 needs one weight per feature plus a bias")
            z = params[-1] + sum(w * f for w, f in zip(params, feats))
            p = 1.0 / (1.0 + math.exp(-z))
            mark = len(self.trail)
            if self.unify(out_t, frame, Num(p), _GROUND_FRAME):
                try:
                    yield True
                finally:
                    self.undo(mark)
            else:
                self.undo(mark)
            return
        raise InferenceError(f"unknown builtin {name}")

    def _as_scalar(self, term: Term) -> float:
        if isinstance(term, Num):
            return term.value
        raise EvalError(f"expected a number, found {term!r}")

    # arithmetic ----------------------------------------------------------

    def _eval(self, term: Term, frame: int):
        term, frame = self.deref(term, frame)
        if isinstance(term, Num):
            return term.value
        if term is UNDEFINED:
            raise _UndefinedValue()
        if isinstance(term, Var):
            raise EvalError(f"unbound variable {term.name} in arithmetic")
        if isinstance(term, Compound):
            f, args = term.functor, term.args
            if f == "," :
                return tuple(self._eval(a, frame) for a in args)
            if f == "+" and len(args) == 2:
                return self._eval(args[0], frame) + self._eval(args[1], frame)
            if f == "-" and len(args) == 2:
                return self._eval(args[0], frame) - self._eval(args[1], frame)
            if f == "-" and len(args) == 1:
                return -self._eval(args[0], frame)
            if f == "*" and len(args) == 2:
                return self._eval(args[0], frame) * self._eval(args[1], frame)
            if f == "/" and len(args) == 2:
                return self._eval(args[0], frame) / self._eval(args[1], frame)
            if f == "^" and len(args) == 2:
                return self._eval(args[0], frame) ** self._eval(args[1], frame)
            if f == "sqrt" and len(args) == 1:
                return math.sqrt(self._eval(args[0], frame))
        return self._eval_rv_ref(term, frame)

    def _eval_rv_ref(self, term: Term, frame: int):
        """Evaluate a reference to a random variable inside arithmetic."""
        atom = _term_to_atom_ref(term)
        if atom is None or atom.pred not in self.cp.dist_preds:
            raise EvalError(f"cannot evaluate {term!r} arithmetically")
        key = self.atom_key(atom, frame)
        if key is None:
            raise EvalError(f"non-ground variable reference {term!r}")
        value = self.rv_value(key, atom, frame, 0)
        if value is None:
            raise _UndefinedValue()
        nums = _term_numbers(value)
        if nums is None:
            raise _UndefinedValue()
        return nums


def _term_to_atom_ref(term: Term) -> Atom | None:
    time = None
    if (
        isinstance(term, Compound)
        and term.functor == "+"
        and len(term.args) == 2
        and isinstance(term.args[0], Compound)
        and term.args[0].functor == ":"
        and term.args[1] == Num(1)
    ):
        time = "t1"
        term = term.args[0].args[0]
    elif isinstance(term, Compound) and term.functor == ":" and len(term.args) == 2:
        tt = term.args[1]
        if tt == Constant("t"):
            time = "t"
        elif isinstance(tt, Num) and tt.value == 0:
            time = 0
        else:
            return None
        term = term.args[0]
    if isinstance(term, Constant):
        return Atom(term.name, (), time)
    if isinstance(term, Compound):
        return Atom(term.functor, term.args, time)
    return None


def _term_numbers(term: Term):
    if term is UNDEFINED:
        return None
    if isinstance(term, Num):
        return term.value
    if isinstance(term, Compound) and term.functor == ",":
        out = []
        for a in term.args:
            if not isinstance(a, Num):
                return None
            out.append(a.value)
        return tuple(out)
    return None


def _num_term(value) -> Term:
    if isinstance(value, tuple):
        return Compound(",", tuple(Num(v) for v in value))
    return Num(value)


def _gauss_logpdf(x: float, mean: float, var: float) -> float:
    return -0.5 * (math.log(2.0 * math.pi * var) + (x - mean) ** 2 / var)

"""Renaming between time-indexed predicates and plain ones.

`p(...):t` becomes `p_t(...)` and `p(...):t+1` becomes `p_t1(...)`, which
turns a dynamic program into a static one for the rule learner; the inverse
restores the time indices on its output.
"""
from __future__ import annotations

from .ast import (
    Atom,
    AtomGoal,
    Body,
    BuiltinGoal,
    Clause,
    Compound,
    Constant,
    Finite,
    Gaussian,
    Lit,
    Num,
    PoissonDist,
    Program,
    Term,
    UniformList,
    UniformRange,
    ValueGoal,
)

SUFFIXES = {"t": "_t", "t1": "_t1"}


class TimeMapError(ValueError):
    pass


def _mapped_name(pred: str, time) -> str:
    if pred.endswith("_t") or pred.endswith("_t1"):
        raise TimeMapError(f"predicate {pred} already carries a reserved time suffix")
    if time == 0:
        raise TimeMapError("literal time index 0 cannot be mapped; only t and t+1")
    return pred + SUFFIXES[time]


def _split_name(name: str) -> tuple[str, str] | None:
    if name.endswith("_t1"):
        return name[:-3], "t1"
    if name.endswith("_t"):
        return name[:-2], "t"
    return None


def map_atom(atom: Atom) -> Atom:
    args = tuple(map_term(a) for a in atom.args)
    if atom.time is None:
        return Atom(atom.pred, args, None)
    return Atom(_mapped_name(atom.pred, atom.time), args, None)


def unmap_atom(atom: Atom) -> Atom:
    args = tuple(unmap_term(a) for a in atom.args)
    split = _split_name(atom.pred)
    if split is None or atom.time is not None:
        return Atom(atom.pred, args, atom.time)
    return Atom(split[0], args, split[1])


def map_term(term: Term) -> Term:
    """Rewrite time-suffixed atom references embedded in plain terms."""
    if isinstance(term, Compound):
        if (
            term.functor == "+"
            and len(term.args) == 2
            and isinstance(term.args[0], Compound)
            and term.args[0].functor == ":"
            and term.args[1] == Num(1)
            and term.args[0].args[1] == Constant("t")
        ):
            return _wrap_mapped(term.args[0].args[0], "t1")
        if term.functor == ":" and len(term.args) == 2 and term.args[1] == Constant("t"):
            return _wrap_mapped(term.args[0], "t")
        return Compound(term.functor, tuple(map_term(a) for a in term.args))
    return term


def _wrap_mapped(inner: Term, time: str) -> Term:
    if isinstance(inner, Constant):
        return Constant(_mapped_name(inner.name, time))
    if isinstance(inner, Compound):
        return Compound(
            _mapped_name(inner.functor, time),
            tuple(map_term(a) for a in inner.args),
        )
    raise TimeMapError(f"cannot attach time suffix to {inner!r}")


def unmap_term(term: Term) -> Term:
    if isinstance(term, Constant):
        split = _split_name(term.name)
        if split is not None:
            return Compound(":", (Constant(split[0]), Constant("t"))) if split[1] == "t" \
                else Compound("+", (Compound(":", (Constant(split[0]), Constant("t"))), Num(1)))
        return term
    if isinstance(term, Compound):
        args = tuple(unmap_term(a) for a in term.args)
        split = _split_name(term.functor)
        if split is not None:
            inner = Compound(split[0], args)
            wrapped = Compound(":", (inner, Constant("t")))
            if split[1] == "t1":
                return Compound("+", (wrapped, Num(1)))
            return wrapped
        return Compound(term.functor, args)
    return term


def _map_goal(goal, mapper_atom, mapper_term):
    if isinstance(goal, AtomGoal):
        return AtomGoal(mapper_atom(goal.atom))
    if isinstance(goal, ValueGoal):
        return ValueGoal(mapper_atom(goal.atom), mapper_term(goal.value))
    assert isinstance(goal, BuiltinGoal)
    if goal.name == "findall":
        pattern, nested, result = goal.args
        return BuiltinGoal(
            "findall",
            (mapper_term(pattern), _map_body(nested, mapper_atom, mapper_term),
             mapper_term(result)),
        )
    return BuiltinGoal(goal.name, tuple(mapper_term(a) for a in goal.args))


def _map_body(body: Body, mapper_atom, mapper_term) -> Body:
    return tuple(Lit(_map_goal(l.goal, mapper_atom, mapper_term), l.negated) for l in body)


def _map_dist(dist, mapper_term):
    if dist is None:
        return None
    if isinstance(dist, Gaussian):
        return Gaussian(mapper_term(dist.mean), mapper_term(dist.variance))
    if isinstance(dist, UniformRange):
        return UniformRange(mapper_term(dist.lo), mapper_term(dist.hi))
    if isinstance(dist, UniformList):
        return UniformList(mapper_term(dist.items))
    if isinstance(dist, PoissonDist):
        return PoissonDist(mapper_term(dist.rate))
    assert isinstance(dist, Finite)
    return Finite(tuple((mapper_term(p), mapper_term(v)) for p, v in dist.pairs))


def _map_clause(clause: Clause, mapper_atom, mapper_term) -> Clause:
    return Clause(
        mapper_atom(clause.head),
        _map_dist(clause.dist, mapper_term),
        _map_body(clause.body, mapper_atom, mapper_term),
    )


def map_time_predicates(program: Program) -> Program:
    return Program(tuple(_map_clause(c, map_atom, map_term) for c in program.clauses))


def unmap_time_predicates(program: Program) -> Program:
    return Program(tuple(_map_clause(c, unmap_atom, unmap_term) for c in program.clauses))

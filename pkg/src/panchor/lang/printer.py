"""Canonical text rendering for programs, clauses and queries.

The printed form reparses to a structurally equal AST. Valued facts are
rendered in their normalized `~ finite([1.0:v])` form.
"""
from __future__ import annotations

import re

from .ast import (
    Atom,
    AtomGoal,
    Body,
    BuiltinGoal,
    Clause,
    Compound,
    Constant,
    DistExpr,
    Finite,
    Gaussian,
    Lit,
    Num,
    PoissonDist,
    Program,
    Query,
    Term,
    UniformList,
    UniformRange,
    ValueGoal,
    Var,
    list_items,
)

_PLAIN_ATOM = re.compile(r"^[a-z][a-zA-Z0-9_]*$")

_OP_BP = {
    "~=": 50, "is": 50, "<": 50, ">": 50, "=<": 50, ">=": 50,
    "+": 60, "-": 60, "*": 70, "/": 70, "^": 80, ":": 90,
}
_RIGHT_ASSOC = {"^"}


def constant_text(name: str) -> str:
    if name == "[]" or _PLAIN_ATOM.match(name):
        return name
    return f"'{name}'"


def term_text(term: Term, parent_bp: int = 0, right: bool = False) -> str:
    if isinstance(term, Num):
        return repr(term.value)
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Constant):
        return constant_text(term.name)
    assert isinstance(term, Compound)
    if term.functor == "," :
        inner = ", ".join(term_text(a) for a in term.args)
        return f"({inner})"
    if term.functor == "." and len(term.args) == 2:
        items = list_items(term)
        if items is not None:
            return "[" + ", ".join(term_text(i) for i in items) + "]"
        return f"[{term_text(term.args[0])}|{term_text(term.args[1])}]"
    if term.functor == "-" and len(term.args) == 1:
        return f"-{term_text(term.args[0], 85)}"
    if term.functor in _OP_BP and len(term.args) == 2:
        bp = _OP_BP[term.functor]
        if term.functor in _RIGHT_ASSOC:
            lhs = term_text(term.args[0], bp + 1)
            rhs = term_text(term.args[1], bp)
        else:
            lhs = term_text(term.args[0], bp)
            rhs = term_text(term.args[1], bp + 1)
        sep = term.functor if term.functor == ":" else f" {term.functor} "
        out = f"{lhs}{sep}{rhs}"
        if bp < parent_bp or (bp == parent_bp and right):
            return f"({out})"
        return out
    args = ", ".join(term_text(a) for a in term.args)
    return f"{constant_text(term.functor)}({args})"


def atom_text(atom: Atom) -> str:
    base = constant_text(atom.pred)
    if atom.args:
        base += "(" + ", ".join(term_text(a, 25) for a in atom.args) + ")"
    if atom.time is None:
        return base
    if atom.time == "t":
        return f"{base}:t"
    if atom.time == "t1":
        return f"{base}:t+1"
    return f"{base}:{atom.time}"


def dist_text(dist: DistExpr) -> str:
    if isinstance(dist, Gaussian):
        return f"gaussian({term_text(dist.mean, 25)}, {term_text(dist.variance, 25)})"
    if isinstance(dist, UniformRange):
        return f"uniform({term_text(dist.lo, 25)}, {term_text(dist.hi, 25)})"
    if isinstance(dist, UniformList):
        return f"uniform({term_text(dist.items, 25)})"
    if isinstance(dist, PoissonDist):
        return f"poisson({term_text(dist.rate, 25)})"
    assert isinstance(dist, Finite)
    pairs = ", ".join(
        f"{term_text(p, 91)}:{term_text(v, 91)}" for p, v in dist.pairs
    )
    return f"finite([{pairs}])"


def goal_text(goal) -> str:
    if isinstance(goal, AtomGoal):
        return atom_text(goal.atom)
    if isinstance(goal, ValueGoal):
        return f"{atom_text(goal.atom)} ~= {term_text(goal.value, 51)}"
    assert isinstance(goal, BuiltinGoal)
    if goal.name == "true":
        return "true"
    if goal.name == "findall":
        pattern, nested, result = goal.args
        return (
            f"findall({term_text(pattern, 25)}, "
            f"({body_text(nested)}), {term_text(result, 25)})"
        )
    if goal.name in ("is", "<", ">", "=<", ">="):
        lhs, rhs = goal.args
        return f"{term_text(lhs, 51)} {goal.name} {term_text(rhs, 51)}"
    args = ", ".join(term_text(a, 25) for a in goal.args)
    return f"{goal.name}({args})"


def lit_text(lit: Lit) -> str:
    text = goal_text(lit.goal)
    return f"\\+{text}" if lit.negated else text


def body_text(body: Body) -> str:
    return ", ".join(lit_text(l) for l in body)


def clause_text(clause: Clause) -> str:
    head = atom_text(clause.head)
    if clause.dist is not None:
        head = f"{head} ~ {dist_text(clause.dist)}"
    if clause.body:
        return f"{head} <- {body_text(clause.body)}."
    return f"{head}."


def print_program(program: Program) -> str:
    if not program.clauses:
        return ""
    return "\n".join(clause_text(c) for c in program.clauses) + "\n"


def query_text(query: Query) -> str:
    return body_text(query.body)

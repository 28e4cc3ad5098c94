"""AST for dynamic distributional clause programs.

Terms, atoms, distributions, clause bodies and programs are immutable;
parsed programs can be shared freely between threads and particles.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

# ---------------------------------------------------------------------------
# terms

@dataclass(frozen=True, slots=True, eq=False)
class Constant:
    name: str

    def __repr__(self) -> str:
        return f"Constant({self.name})"

    def __eq__(self, other):
        return self is other or (type(other) is Constant and self.name == other.name)

    def __hash__(self):
        return hash(self.name)


@dataclass(frozen=True, slots=True, eq=False)
class Var:
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name})"

    def __eq__(self, other):
        return self is other or (type(other) is Var and self.name == other.name)

    def __hash__(self):
        return hash(self.name)


@dataclass(frozen=True, slots=True, eq=False)
class Num:
    value: Union[int, float]

    def __repr__(self) -> str:
        return f"Num({self.value})"

    def __eq__(self, other):
        return type(other) is Num and self.value == other.value

    def __hash__(self):
        return hash(self.value)


@dataclass(frozen=True, slots=True, eq=False)
class Compound:
    functor: str
    args: tuple["Term", ...]

    def __repr__(self) -> str:
        return f"Compound({self.functor}, {list(self.args)})"

    def __eq__(self, other):
        return self is other or (
            type(other) is Compound
            and self.functor == other.functor
            and self.args == other.args
        )

    def __hash__(self):
        return hash((self.functor, self.args))


Term = Union[Constant, Var, Num, Compound]

EMPTY_LIST = Constant("[]")
TRUE = Constant("true")
FALSE = Constant("false")


def make_list(items: list[Term] | tuple[Term, ...], tail: Term = EMPTY_LIST) -> Term:
    out = tail
    for item in reversed(items):
        out = Compound(".", (item, out))
    return out


def list_items(term: Term) -> list[Term] | None:
    """Return the elements of a proper list term, or None if not one."""
    items: list[Term] = []
    while True:
        if term == EMPTY_LIST:
            return items
        if isinstance(term, Compound) and term.functor == "." and len(term.args) == 2:
            items.append(term.args[0])
            term = term.args[1]
        else:
            return None


def term_vars(term: Term, acc: set[str] | None = None) -> set[str]:
    if acc is None:
        acc = set()
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            acc.add(t.name)
        elif isinstance(t, Compound):
            stack.extend(t.args)
    return acc


# ---------------------------------------------------------------------------
# atoms and time indices

# time is None (atemporal), 0 (initial state), "t" or "t1"
TimeIndex = Union[None, int, str]


@dataclass(frozen=True, slots=True, eq=False)
class Atom:
    pred: str
    args: tuple[Term, ...]
    time: TimeIndex = None

    @property
    def arity(self) -> int:
        return len(self.args)

    def __repr__(self) -> str:
        suffix = "" if self.time is None else f":{self.time}"
        return f"Atom({self.pred}/{len(self.args)}{suffix})"

    def __eq__(self, other):
        return self is other or (
            type(other) is Atom
            and self.pred == other.pred
            and self.time == other.time
            and self.args == other.args
        )

    def __hash__(self):
        return hash((self.pred, self.args, self.time))


# ---------------------------------------------------------------------------
# distributions

@dataclass(frozen=True, slots=True)
class Gaussian:
    mean: Term
    variance: Term


@dataclass(frozen=True, slots=True)
class UniformRange:
    lo: Term
    hi: Term


@dataclass(frozen=True, slots=True)
class UniformList:
    items: Term


@dataclass(frozen=True, slots=True)
class PoissonDist:
    rate: Term


@dataclass(frozen=True, slots=True)
class Finite:
    # (probability expression, value) pairs; probabilities are evaluated on
    # grounding and may leave residual mass on the implicit undefined value
    pairs: tuple[tuple[Term, Term], ...]


DistExpr = Union[Gaussian, UniformRange, UniformList, PoissonDist, Finite]


def dist_terms(dist: DistExpr) -> list[Term]:
    if isinstance(dist, Gaussian):
        return [dist.mean, dist.variance]
    if isinstance(dist, UniformRange):
        return [dist.lo, dist.hi]
    if isinstance(dist, UniformList):
        return [dist.items]
    if isinstance(dist, PoissonDist):
        return [dist.rate]
    return [t for pair in dist.pairs for t in pair]


# ---------------------------------------------------------------------------
# goals and clause bodies

@dataclass(frozen=True, slots=True)
class AtomGoal:
    atom: Atom


@dataclass(frozen=True, slots=True)
class ValueGoal:
    # `atom ~= value`
    atom: Atom
    value: Term


@dataclass(frozen=True, slots=True)
class BuiltinGoal:
    # name in {"is", "<", ">", "=<", ">=", "between", "findall", "logistic", "true"}
    name: str
    args: tuple[object, ...]  # findall carries a nested Body as its middle arg


Goal = Union[AtomGoal, ValueGoal, BuiltinGoal]


@dataclass(frozen=True, slots=True)
class Lit:
    goal: Goal
    negated: bool = False


Body = tuple[Lit, ...]


def goal_vars(goal: Goal, acc: set[str] | None = None) -> set[str]:
    if acc is None:
        acc = set()
    if isinstance(goal, AtomGoal):
        for a in goal.atom.args:
            term_vars(a, acc)
    elif isinstance(goal, ValueGoal):
        for a in goal.atom.args:
            term_vars(a, acc)
        term_vars(goal.value, acc)
    else:
        for a in goal.args:
            if isinstance(a, tuple):  # nested body (findall)
                for lit in a:
                    goal_vars(lit.goal, acc)
            else:
                term_vars(a, acc)
    return acc


def body_vars(body: Body) -> set[str]:
    acc: set[str] = set()
    for lit in body:
        goal_vars(lit.goal, acc)
    return acc


# ---------------------------------------------------------------------------
# clauses and programs

@dataclass(frozen=True, slots=True)
class Clause:
    head: Atom
    dist: DistExpr | None  # None for definite clauses
    body: Body = ()

    @property
    def is_distributional(self) -> bool:
        return self.dist is not None


class ProgramError(ValueError):
    pass


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...] = ()
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        index: dict[tuple[str, int, TimeIndex], list[Clause]] = {}
        signatures: dict[str, tuple[int, bool]] = {}
        for clause in self.clauses:
            head = clause.head
            key = (head.pred, head.arity, head.time)
            index.setdefault(key, []).append(clause)
            sig = (head.arity, head.time is not None)
            seen = signatures.get(head.pred)
            if seen is None:
                signatures[head.pred] = sig
            elif seen != sig:
                raise ProgramError(
                    f"inconsistent use of predicate {head.pred}: "
                    f"arity/time signature {seen} vs {sig}"
                )
        object.__setattr__(self, "_index", index)
        for clause in self.clauses:
            _check_range_restriction(clause)

    def clauses_for(self, pred: str, arity: int, time: TimeIndex) -> list[Clause]:
        return self._index.get((pred, arity, time), [])

    def head_keys(self) -> Iterator[tuple[str, int, TimeIndex]]:
        return iter(self._index.keys())

    def extend(self, other: "Program") -> "Program":
        return Program(self.clauses + other.clauses)

    def __eq__(self, other) -> bool:
        return isinstance(other, Program) and self.clauses == other.clauses


def _check_range_restriction(clause: Clause) -> None:
    if clause.dist is None:
        return
    allowed: set[str] = set()
    for a in clause.head.args:
        term_vars(a, allowed)
    allowed |= body_vars(clause.body)
    used: set[str] = set()
    for t in dist_terms(clause.dist):
        term_vars(t, used)
    free = used - allowed
    if free:
        raise ProgramError(
            f"distribution of {clause.head.pred}/{clause.head.arity} uses "
            f"variables not in head or body: {sorted(free)}"
        )


@dataclass(frozen=True)
class Query:
    body: Body
    free_vars: tuple[str, ...] = ()


BUILTIN_NAMES = frozenset(
    {"is", "<", ">", "=<", ">=", "between", "findall", "logistic", "true"}
)

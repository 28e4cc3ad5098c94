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
    ProgramError,
    Query,
    Term,
    UniformList,
    UniformRange,
    ValueGoal,
    Var,
    make_list,
    list_items,
)
from .parser import ParseError, parse_program, parse_query
from .printer import clause_text, print_program, query_text, term_text
from .timemap import TimeMapError, map_time_predicates, unmap_time_predicates

__all__ = [
    "Atom", "AtomGoal", "Body", "BuiltinGoal", "Clause", "Compound",
    "Constant", "DistExpr", "Finite", "Gaussian", "Lit", "Num",
    "PoissonDist", "Program", "ProgramError", "Query", "Term",
    "UniformList", "UniformRange", "ValueGoal", "Var",
    "make_list", "list_items",
    "ParseError", "parse_program", "parse_query",
    "clause_text", "print_program", "query_text", "term_text",
    "TimeMapError", "map_time_predicates", "unmap_time_predicates",
]

import pytest

from panchor.lang import (
    Atom,
    Clause,
    Finite,
    Gaussian,
    Num,
    ParseError,
    PoissonDist,
    Program,
    ProgramError,
    UniformList,
    parse_program,
    parse_query,
)
from panchor.lang.ast import BuiltinGoal, Constant, ValueGoal

from conftest import fixture_text


def test_single_poisson_fact():
    program = parse_program("n ~ poisson(6).")
    assert len(program.clauses) == 1
    clause = program.clauses[0]
    assert clause.head == Atom("n", ())
    assert clause.dist == PoissonDist(Num(6))
    assert clause.body == ()


def test_empty_input_is_empty_program():
    assert parse_program("") == Program()
    assert parse_program("  % just a comment\n") == Program()


def test_transition_clause_times():
    program = parse_program("pos(P):t+1 ~ gaussian(X+3, 0.01) <- pos(P):t ~= X.")
    clause = program.clauses[0]
    assert clause.head.time == "t1"
    assert isinstance(clause.dist, Gaussian)
    body_atom = clause.body[0].goal.atom
    assert body_atom.pred == "pos"
    assert body_atom.time == "t"


def test_initial_time_zero():
    program = parse_program("pos(P):0 ~ uniform(0,100) <- n~=N, between(1,N,P).")
    assert program.clauses[0].head.time == 0


def test_unbalanced_parenthesis_reports_position():
    with pytest.raises(ParseError, match="end of input"):
        parse_program("foo(A")


def test_syntax_error_carries_line_and_column():
    try:
        parse_program("a ~ poisson(1).\nb ~~ poisson(2).")
    except ParseError as err:
        assert err.line == 2
        assert err.col >= 3
    else:
        pytest.fail("expected a parse error")


def test_nonzero_literal_time_rejected():
    with pytest.raises(ParseError, match="only :0"):
        parse_program("pos(a):5 ~ gaussian(0, 1).")


def test_arity_inconsistency_rejected():
    with pytest.raises(ProgramError, match="inconsistent"):
        parse_program("p(a). p(a, b).")


def test_temporal_atemporal_mixing_rejected():
    with pytest.raises(ProgramError, match="inconsistent"):
        parse_program("q(a). q(b):t.")


def test_finite_mass_above_one_rejected():
    with pytest.raises(ParseError, match="sum"):
        parse_program("c ~ finite([0.8:a, 0.3:b]).")


def test_finite_without_list_brackets():
    program = parse_program("c ~ finite(0.92:true, 0.08:false).")
    dist = program.clauses[0].dist
    assert isinstance(dist, Finite)
    assert [p.value for p, _ in dist.pairs] == [0.92, 0.08]


def test_uniform_over_list_variable():
    program = parse_program("s ~ uniform(L) <- findall(X, c(X), L).")
    assert isinstance(program.clauses[0].dist, UniformList)


def test_valued_fact_normalizes_to_deterministic_finite():
    program = parse_program("pos(o1):t ~= 2.3.")
    dist = program.clauses[0].dist
    assert dist == Finite(((Num(1.0), Num(2.3)),))


def test_quoted_constants():
    program = parse_program("observed('cup-4'):t.")
    assert program.clauses[0].head.args[0] == Constant("cup-4")


def test_negative_numbers_in_lists():
    program = parse_program("w(X) <- logistic([X], [-16.9, 0.8], P).")
    goal = program.clauses[0].body[0].goal
    assert isinstance(goal, BuiltinGoal) and goal.name == "logistic"


def test_unicode_arrow_accepted():
    a = parse_program("a <- b, c.")
    b = parse_program("a ← b, c.")
    assert a == b


def test_fixture_programs_parse(request):
    for name in (
        "moving_objects.ddc",
        "occluder_conditions.ddc",
        "learned_occluder.ddc",
        "recursive_occlusion.ddc",
    ):
        program = parse_program(fixture_text(name))
        assert len(program.clauses) >= 1


def test_query_two_literals():
    query = parse_query("left(1,2):t~=true, pos(1):t>0")
    assert len(query.body) == 2
    assert query.free_vars == ()
    first = query.body[0].goal
    assert isinstance(first, ValueGoal)
    assert first.atom.time == "t"


def test_query_single_value_literal():
    query = parse_query("c ~= heads")
    assert len(query.body) == 1


def test_query_free_variables_identified():
    query = parse_query("a ~= A, b ~= B, A < B")
    assert query.free_vars == ("A", "B")


def test_malformed_conjunction_rejected():
    with pytest.raises(ParseError):
        parse_query("p(X),, q(X)")

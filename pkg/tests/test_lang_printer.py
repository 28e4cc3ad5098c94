import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panchor.lang import ParseError, parse_program, print_program
from panchor.lang.ast import (
    Atom,
    AtomGoal,
    Clause,
    Compound,
    Constant,
    Finite,
    Gaussian,
    Lit,
    Num,
    Program,
    ValueGoal,
    Var,
)

from conftest import fixture_text

FIXTURE_NAMES = [
    "moving_objects.ddc",
    "occluder_conditions.ddc",
    "learned_occluder.ddc",
    "recursive_occlusion.ddc",
]


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixture_round_trip(name):
    parsed = parse_program(fixture_text(name))
    printed = print_program(parsed)
    assert parse_program(printed) == parsed
    # printing is a fixed point after one normalization pass
    assert print_program(parse_program(printed)) == printed


def test_empty_program_prints_empty():
    assert print_program(Program()) == ""


def test_quoted_constant_round_trip():
    program = parse_program("observed('cup-4'):t.")
    assert "'cup-4'" in print_program(program)
    assert parse_program(print_program(program)) == program


# -- randomized ASTs ---------------------------------------------------------

lower_names = st.text(string.ascii_lowercase, min_size=1, max_size=6)
upper_names = st.sampled_from(["X", "Y", "Z", "Acc", "V0"])

terms = st.recursive(
    st.one_of(
        lower_names.map(Constant),
        upper_names.map(Var),
        st.integers(-1000, 1000).map(Num),
        st.floats(-1e6, 1e6, allow_nan=False).map(Num),
    ),
    lambda children: st.builds(
        Compound,
        lower_names,
        st.lists(children, min_size=1, max_size=3).map(tuple),
    ),
    max_leaves=6,
)


@st.composite
def atoms(draw, time=st.sampled_from([None, "t", "t1"])):
    pred = draw(lower_names)
    args = tuple(draw(st.lists(terms, min_size=0, max_size=3)))
    return Atom("p_" + pred, args, draw(time))


@st.composite
def clauses(draw):
    head = draw(atoms())
    if draw(st.booleans()):
        pairs = draw(st.lists(
            st.tuples(st.floats(0.01, 0.5, allow_nan=False).map(Num), terms),
            min_size=1, max_size=2,
        ))
        dist = Finite(tuple(pairs))
    else:
        dist = Gaussian(Num(draw(st.floats(-10, 10, allow_nan=False))), Num(1.0))
    body = tuple(
        Lit(AtomGoal(draw(atoms())), negated=draw(st.booleans()))
        for _ in range(draw(st.integers(0, 2)))
    )
    return Clause(head, dist, body)


@given(st.lists(clauses(), min_size=0, max_size=4))
@settings(max_examples=60, deadline=None)
def test_generated_program_round_trip(clause_list):
    try:
        program = Program(tuple(clause_list))
    except Exception:
        return  # generated an inconsistent signature; not a printer concern
    printed = print_program(program)
    assert parse_program(printed) == program


@given(st.text(max_size=60))
@settings(max_examples=120, deadline=None)
def test_parsing_is_total(text):
    try:
        parse_program(text)
    except (ParseError, Exception) as err:
        # any failure must be a positioned parse error or a program-level
        # consistency error, never a crash of another kind
        from panchor.lang import ProgramError

        assert isinstance(err, (ParseError, ProgramError))

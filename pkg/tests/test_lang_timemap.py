import pytest

from panchor.lang import (
    TimeMapError,
    map_time_predicates,
    parse_program,
    print_program,
    unmap_time_predicates,
)

from conftest import fixture_text


def test_maps_current_and_next_step():
    program = parse_program("pos(o1):t ~= 2.3. occluder(o1,o2):t+1 ~ finite([1.0:true]).")
    mapped = map_time_predicates(program)
    heads = [c.head for c in mapped.clauses]
    assert heads[0].pred == "pos_t" and heads[0].time is None
    assert heads[1].pred == "occluder_t1" and heads[1].time is None


def test_atemporal_facts_unchanged():
    program = parse_program("color(o1, red).")
    assert map_time_predicates(program) == program


def test_unmap_inverts_map_on_fixture():
    program = parse_program(fixture_text("learned_occluder.ddc"))
    round_tripped = unmap_time_predicates(map_time_predicates(program))
    assert round_tripped == program
    assert print_program(round_tripped) == print_program(program)


@pytest.mark.parametrize(
    "name",
    ["occluder_conditions.ddc", "recursive_occlusion.ddc"],
)
def test_unmap_map_identity_on_fixtures(name):
    program = parse_program(fixture_text(name))
    assert unmap_time_predicates(map_time_predicates(program)) == program


def test_reserved_suffix_collision_is_an_error():
    program = parse_program("pos_t(o1):t ~= 1.")
    with pytest.raises(TimeMapError, match="reserved"):
        map_time_predicates(program)


def test_literal_zero_cannot_be_mapped():
    program = parse_program("pos(o1):0 ~= 1.")
    with pytest.raises(TimeMapError, match="0"):
        map_time_predicates(program)


def test_body_terms_inside_comparisons_are_mapped():
    program = parse_program("ok(A) <- pos(A):t > 0.")
    mapped = map_time_predicates(program)
    assert "pos_t(A) > 0" in print_program(mapped)
    assert unmap_time_predicates(mapped) == program

"""Rule parsing, cell transitions, lattice stepping, CA invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floatersim.rules import (
    EXCITED,
    REFRACTORY,
    RESTING,
    Lattice,
    RuleParams,
    RuleParseError,
    count_excited_neighbors,
    format_rule,
    next_cell_state,
    parse_rule,
    step_lattice,
)

from conftest import grid_to_lists, random_lattice
from oracles import oracle_step


# -- parsing ------------------------------------------------------------------

def test_parse_rule_basic():
    r = parse_rule("2201")
    assert (r.theta1, r.theta2, r.delta1, r.delta2) == (2, 2, 0, 1)
    assert r.code == "2201"


@pytest.mark.parametrize("code", ["0000", "9999", "1899", "2246"])
def test_parse_format_round_trip(code):
    assert format_rule(parse_rule(code)) == code


@pytest.mark.parametrize("bad", ["", "220", "22011", "22a1", "2-21", "22 1", "²201"])
def test_parse_rule_rejects_malformed(bad):
    with pytest.raises(RuleParseError):
        parse_rule(bad)


def test_parse_rule_error_names_offender():
    with pytest.raises(RuleParseError, match="position 3"):
        parse_rule("22x1")


def test_rule_params_validates_digits():
    with pytest.raises(RuleParseError):
        RuleParams(2, 2, 0, 10)
    with pytest.raises(RuleParseError):
        RuleParams(-1, 2, 0, 1)
    with pytest.raises(RuleParseError):
        RuleParams(2, 2.0, 0, 1)  # type: ignore[arg-type]


@given(st.integers(0, 9), st.integers(0, 9), st.integers(0, 9), st.integers(0, 9))
def test_any_digit_quadruple_round_trips(t1, t2, d1, d2):
    code = f"{t1}{t2}{d1}{d2}"
    assert parse_rule(code).code == code


# -- single-cell transitions --------------------------------------------------

def test_resting_excites_only_inside_theta_window():
    rule = parse_rule("2201")
    expected = {s: (EXCITED if s == 2 else RESTING) for s in range(9)}
    for sigma in range(9):
        assert next_cell_state(RESTING, sigma, rule) == expected[sigma]


def test_excited_retention_window():
    rule = parse_rule("2201")
    for sigma in range(9):
        want = EXCITED if 0 <= sigma <= 1 else REFRACTORY
        assert next_cell_state(EXCITED, sigma, rule) == want


def test_refractory_always_recovers():
    rule = parse_rule("2201")
    for sigma in range(9):
        assert next_cell_state(REFRACTORY, sigma, rule) == RESTING


def test_digit_nine_interval_is_unsatisfiable():
    # sigma never exceeds 8, so theta1=9 means "never excite" and the
    # degenerate theta window [9,9] can never fire; same for delta.
    rule = parse_rule("9901")
    for sigma in range(9):
        assert next_cell_state(RESTING, sigma, rule) == RESTING


def test_zero_lower_bound_allows_sigma_zero():
    rule = parse_rule("0801")
    assert next_cell_state(RESTING, 0, rule) == EXCITED


# -- lattice container --------------------------------------------------------

def test_lattice_from_to_text_round_trip():
    text = "010\n212\n000\n"
    lat = Lattice.from_text(text)
    assert lat.to_text() == text
    assert lat.get(1, 0) == EXCITED
    assert lat.get(0, 1) == REFRACTORY


def test_lattice_from_text_rejects_ragged_and_bad_digits():
    with pytest.raises(ValueError):
        Lattice.from_text("01\n012\n")
    with pytest.raises(ValueError):
        Lattice.from_text("013\n000\n000\n")


def test_lattice_counts():
    lat = Lattice.from_text("012\n110\n000\n")
    assert lat.counts() == (3, 1)  # excited, refractory


def test_with_center_seed():
    lat = Lattice.with_center_seed(5, 7)
    assert lat.get(2, 3) == EXCITED
    assert lat.counts() == (1, 0)


def test_lattice_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError):
        Lattice(np.zeros((0, 4), dtype=np.uint8))
    with pytest.raises(ValueError):
        Lattice(np.zeros(9, dtype=np.uint8))
    with pytest.raises(ValueError):
        Lattice(np.full((3, 3), 3, dtype=np.uint8))


def test_count_excited_neighbors_truncated_at_edges():
    lat = Lattice.from_text("110\n100\n000\n")
    # corner (0,0): neighbours (1,0),(0,1),(1,1) -> two excited
    assert count_excited_neighbors(lat, 0, 0) == 2
    # centre sees three excited
    assert count_excited_neighbors(lat, 1, 1) == 3
    # a cell does not count itself: (0,1) is excited but sees only (0,0),(1,0)
    assert count_excited_neighbors(lat, 0, 1) == 2


# -- stepping vs the hand rule ------------------------------------------------

def test_center_seed_one_step_hand_checked():
    # Single excited centre, R(1899): all eight neighbours see sigma=1 and
    # excite; the centre sees sigma=0, outside delta in [8,9], so it goes
    # refractory.
    lat = Lattice.with_center_seed(5, 5)
    out = step_lattice(lat, parse_rule("1899"))
    assert out.to_text() == ("00000\n"
                             "01110\n"
                             "01210\n"
                             "01110\n"
                             "00000\n")


def test_center_seed_is_still_life_under_2201():
    # R(2201): neighbours need sigma=2 to excite but see 1; the excited
    # centre sees sigma=0 inside delta in [0,1] and is retained. Fixed point.
    lat = Lattice.with_center_seed(5, 5)
    out = step_lattice(lat, parse_rule("2201"))
    assert out == lat


def test_step_increments_generation_and_leaves_input_alone():
    lat = Lattice.with_center_seed(5, 5)
    before = lat.to_text()
    out = step_lattice(lat, parse_rule("1899"))
    assert out.generation == lat.generation + 1
    assert lat.to_text() == before


def test_step_lattice_reuses_out_buffer():
    lat = random_lattice(np.random.default_rng(1), 10, 10)
    buf = np.empty_like(lat.grid)
    out = step_lattice(lat, parse_rule("2201"), out=buf)
    assert out.grid is buf


def test_refractory_lasts_exactly_one_step():
    lat = Lattice.from_text("000\n020\n000\n")
    out = step_lattice(lat, parse_rule("2201"))
    assert out.get(1, 1) == RESTING


def test_quiescent_lattice_is_absorbing():
    lat = Lattice.blank(6, 6)
    rule = parse_rule("1801")  # most excitable theta window short of zero
    out = step_lattice(lat, rule)
    assert out.counts() == (0, 0)
    assert np.array_equal(out.grid, lat.grid)


def test_no_spontaneous_excitation_when_theta1_positive():
    # With theta1 >= 1, resting cells with no excited neighbour stay resting.
    rng = np.random.default_rng(5)
    lat = random_lattice(rng, 12, 12, p=(0.7, 0.0, 0.3))  # no excited cells
    for code in ("1899", "2201", "2246"):
        out = step_lattice(lat, parse_rule(code))
        assert out.counts()[0] == 0


def test_rule_0xxx_spontaneously_excites():
    lat = Lattice.blank(4, 4)
    out = step_lattice(lat, parse_rule("0801"))
    assert out.counts() == (16, 0)


@pytest.mark.parametrize("code", ["2201", "1899", "1299", "2222", "2211", "2246"])
def test_matches_oracle_on_preset_rules(np_rng, code):
    rule = parse_rule(code)
    for _ in range(20):
        lat = random_lattice(np_rng, 15, 17)
        got = step_lattice(lat, rule)
        want = oracle_step(grid_to_lists(lat.grid),
                           (rule.theta1, rule.theta2, rule.delta1, rule.delta2))
        assert grid_to_lists(got.grid) == want


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, 9), st.integers(0, 9), st.integers(0, 9), st.integers(0, 9),
    st.integers(0, 2**32 - 1),
)
def test_matches_oracle_on_random_rules(t1, t2, d1, d2, seed):
    rule = RuleParams(t1, t2, d1, d2)
    lat = random_lattice(np.random.default_rng(seed), 9, 11)
    got = step_lattice(lat, rule)
    want = oracle_step(grid_to_lists(lat.grid), (t1, t2, d1, d2))
    assert grid_to_lists(got.grid) == want


def test_step_is_pure_function_of_grid():
    lat = random_lattice(np.random.default_rng(11), 20, 20)
    rule = parse_rule("2211")
    a = step_lattice(lat, rule)
    b = step_lattice(lat.copy(), rule)
    assert a == b

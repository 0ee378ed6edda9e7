"""Counter machine: encoding bijection, exact runs, stagewise jumps.

Frozen values derived with tests/oracles/machine_oracle.py (independent
pairing formula, string-keyed registers, from-scratch jump recursion).
"""

import pytest
from hypothesis import given, strategies as st

from ordtower.errors import BudgetExceeded
from ordtower.machine import (
    EMPTY_ORACLE,
    Exhausted,
    Halted,
    Instruction,
    MockOracle,
    Program,
    SetOracle,
    SettleSpec,
    SimulatedJumpOracle,
    echo_program,
    halt_program,
    jump_approx,
    loop_program,
    run_program,
    settle_time,
)

# derived: machine_oracle.py, "program indices" table
HALT_INDEX = 11
LOOP_INDEX = 4
ECHO_INDEX = 6218058

# derived: machine_oracle.py, "level-1 jump entry stages" table; each of
# these indices decodes to a QRY-free program halting in a step or two,
# so the i <= stage bound is what gates entry and i enters exactly at i
LEVEL1_ENTRY = {11: 11, 17: 17, 24: 24, 32: 32, 41: 41, 46: 46, 51: 51,
                57: 57, 62: 62}


def test_named_program_indices():
    assert halt_program().index == HALT_INDEX
    assert loop_program().index == LOOP_INDEX
    assert echo_program().index == ECHO_INDEX


def test_decode_recovers_named_programs():
    assert Program.decode(HALT_INDEX) == halt_program()
    assert Program.decode(LOOP_INDEX) == loop_program()
    assert Program.decode(ECHO_INDEX) == echo_program()


def test_runs_match_oracle_traces():
    # derived: machine_oracle.py, "runs" table
    assert run_program(halt_program(), EMPTY_ORACLE, 5, 10) == Halted(0, 1)
    inside = SetOracle({7})
    assert run_program(echo_program(), inside, 7, 10) == Halted(1, 3)
    assert run_program(echo_program(), EMPTY_ORACLE, 7, 10) == Halted(0, 2)
    assert run_program(loop_program(), EMPTY_ORACLE, 0, 50) == Exhausted(50)


def test_empty_program_stalls_without_stepping():
    assert run_program(Program(()), EMPTY_ORACLE, 0, 10) == Exhausted(0)


def test_run_rejects_nonpositive_budget():
    with pytest.raises(ValueError):
        run_program(halt_program(), EMPTY_ORACLE, 0, 0)


def test_first_naturals_all_round_trip():
    # derived: machine_oracle.py, "decode/encode bijection"
    for n in range(500):
        assert Program.decode(n).index == n


@given(st.integers(min_value=0, max_value=10**9))
def test_program_code_bijection(n):
    assert Program.decode(n).index == n


@given(st.integers(min_value=0, max_value=10**9))
def test_instruction_code_bijection(n):
    assert Instruction.decode(n).encode() == n


def test_parse_round_trips_pretty_printing():
    for p in (halt_program(), loop_program(), echo_program()):
        assert Program.parse(str(p)) == p


def test_parse_skips_comments_and_blank_lines():
    p = Program.parse("# nothing yet\n\n  QRY 1 2  # branch\nHLT 0\nINC 0\nhlt 0")
    assert p == echo_program()


def test_parse_rejects_unknown_opcode():
    with pytest.raises(ValueError, match="unknown opcode"):
        Program.parse("NOP 0")


def test_parse_rejects_wrong_arity():
    with pytest.raises(ValueError, match="JZ takes 2"):
        Program.parse("JZ 0")
    with pytest.raises(ValueError, match="HLT takes 1"):
        Program.parse("HLT 0 1")


def test_level1_entry_stages():
    seen = {}
    for s in range(1, 65):
        for i in jump_approx(1, s):
            seen.setdefault(i, s)
    assert seen == LEVEL1_ENTRY


def test_level1_entrants_are_permanent_to_probe():
    final = jump_approx(1, 64)
    for i in LEVEL1_ENTRY:
        assert i in final
    assert LOOP_INDEX not in final


def test_level2_snapshot():
    # derived: machine_oracle.py, "level-2 snapshot"; the small indices
    # are QRY-free so relativization does not separate the levels here
    assert sorted(jump_approx(2, 24)) == [11, 17, 24]
    assert jump_approx(2, 24) == jump_approx(1, 24)


def test_level_zero_and_stage_zero_are_empty():
    assert jump_approx(0, 50) == frozenset()
    assert jump_approx(3, 0) == frozenset()


def test_jump_level_bounds_enforced():
    with pytest.raises(BudgetExceeded):
        jump_approx(4, 10)
    with pytest.raises(BudgetExceeded):
        SimulatedJumpOracle(7)


def test_simulated_membership_tracks_entry_table():
    sim = SimulatedJumpOracle(1)
    assert not sim.membership_at(10, HALT_INDEX)
    assert sim.membership_at(11, HALT_INDEX)
    assert not sim.membership_at(64, LOOP_INDEX)


def test_settle_time_reads_mocks_exactly():
    mock = MockOracle(SettleSpec.of({3: 9, 5: 40}))
    assert settle_time(mock, 3, 24) == 9
    assert settle_time(mock, 5, 24) is None  # spec value beyond the budget
    assert settle_time(mock, 8, 24) == 0     # divergent: constant from the start


def test_settle_time_observational():
    sim = SimulatedJumpOracle(1)
    assert settle_time(sim, HALT_INDEX, 24) == 11
    assert settle_time(sim, LOOP_INDEX, 24) == 0
    # membership flips at the very last probed stage: no stabilization seen
    assert settle_time(sim, HALT_INDEX, 11) is None
    assert settle_time(sim, HALT_INDEX, 0) == 0


def test_settle_spec_json_round_trip():
    spec = SettleSpec.of({2: 5, 7: 1, 0: 0})
    doc = spec.to_json(level=3)
    back, level = SettleSpec.from_json(doc)
    assert back == spec and level == 3
    assert SettleSpec.from_json({}) == (SettleSpec.of({}), 0)


@given(st.dictionaries(st.integers(0, 50), st.integers(0, 50), max_size=8),
       st.integers(0, 60), st.integers(0, 60))
def test_mock_membership_is_monotone_in_stage(mapping, s, t):
    oracle = MockOracle(SettleSpec.of(mapping))
    if s <= t:
        for x in mapping:
            assert not oracle.membership_at(s, x) or oracle.membership_at(t, x)

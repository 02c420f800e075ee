import math

import numpy as np
import pytest

from foqc import parse_program
from foqc.interpreter import (
    BOTTOM,
    TOP,
    BottomError,
    BudgetExceededError,
    QuantumState,
    eval_int,
    eval_program,
    eval_qubit,
    eval_set,
    guard_errors,
    level_of,
    run,
)
from foqc.syntax import IntLit, QubitExpr, SetNil, SetRemove, SetSize, SetVar


Q = SetVar("q")


def test_eval_set_variable_and_nil():
    assert eval_set(Q, (1, 2, 3)) == (1, 2, 3)
    assert eval_set(SetNil(), (1, 2, 3)) == ()


def test_eval_set_single_removal():
    assert eval_set(SetRemove(Q, IntLit(2)), (1, 2, 3)) == (1, 3)


def test_eval_set_out_of_range_removal_is_empty():
    assert eval_set(SetRemove(Q, IntLit(5)), (1, 2, 3)) == ()
    assert eval_set(SetRemove(Q, IntLit(0)), (1, 2, 3)) == ()


def test_removal_chain_is_progressive():
    # Indices are evaluated against the list left by earlier removals:
    # removing [1, size(q)] from (1..4) drops the first and last elements.
    expr = SetRemove(SetRemove(Q, IntLit(1)), SetSize(Q))
    assert eval_set(expr, (1, 2, 3, 4)) == (2, 3)
    # Removing [1, 1] drops the first two elements.
    expr = SetRemove(SetRemove(Q, IntLit(1)), IntLit(1))
    assert eval_set(expr, (1, 2, 3, 4)) == (3, 4)


def test_triple_removal_first_secondlast_last():
    expr = SetRemove(
        SetRemove(SetRemove(Q, IntLit(1)), SetSize(Q)), SetSize(Q)
    )
    # Progressive sizes: remove 1, then index size-of-remaining twice.
    assert eval_set(expr, (1, 2, 3, 4, 5, 6)) == (2, 3, 4)


def test_eval_qubit_out_of_range_is_zero():
    assert eval_qubit(QubitExpr(Q, IntLit(4)), (1, 2, 3)) == 0
    assert eval_qubit(QubitExpr(Q, IntLit(2)), (5, 7, 9)) == 7


def test_eval_int_size():
    assert eval_int(SetSize(SetRemove(Q, IntLit(1))), (1, 2, 3)) == 2


def test_quantum_state_validation():
    with pytest.raises(ValueError):
        QuantumState(2, [1.0, 0.0, 0.0])  # wrong length
    with pytest.raises(ValueError):
        QuantumState(1, [0.9, 0.0])  # not normalized


def test_quantum_state_json_round_trip():
    rng = np.random.default_rng(7)
    state = QuantumState.random(3, rng)
    back = QuantumState.from_json(state.to_json())
    assert back.n == 3
    assert np.allclose(back.amplitudes, state.amplitudes, atol=1e-12)


def test_not_flips_most_significant_qubit():
    program = parse_program(":: q[1] *= NOT;")
    out = run(program, QuantumState.from_bits("00"))
    assert np.allclose(out.state.amplitudes, QuantumState.from_bits("10").amplitudes)


def test_qubit_one_is_most_significant():
    program = parse_program(":: q[2] *= NOT;")
    out = run(program, QuantumState.from_bits("00"))
    assert np.allclose(out.state.amplitudes, QuantumState.from_bits("01").amplitudes)


def test_hadamard_state():
    program = parse_program(":: q[1] *= H;")
    out = run(program, QuantumState.from_bits("0"))
    assert np.allclose(out.state.amplitudes, [1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_qcase_control_is_preserved():
    # A NOT under qcase-1 on the control's partner builds |00> -> |00>, |10> -> |11>.
    program = parse_program(":: qcase q[1] of { 0 -> skip; , 1 -> q[2] *= NOT; }")
    out = run(program, QuantumState.from_bits("10"))
    assert np.allclose(out.state.amplitudes, QuantumState.from_bits("11").amplitudes)


def test_qcase_superposed_control():
    program = parse_program(":: H(q[1]); CNOT(q[1], q[2]);")
    out = run(program, QuantumState.from_bits("00"))
    bell = np.zeros(4)
    bell[0] = bell[3] = 1 / math.sqrt(2)
    assert np.allclose(out.state.amplitudes, bell)


def test_out_of_range_assignment_reaches_bottom():
    program = parse_program(":: q[5] *= NOT;")
    outcome = eval_program(program, QuantumState.from_bits("00"))
    assert outcome.terminal == BOTTOM
    # The error terminal preserves the input state.
    assert np.allclose(outcome.state.amplitudes, QuantumState.from_bits("00").amplitudes)
    with pytest.raises(BottomError):
        run(program, QuantumState.from_bits("00"))


def test_control_qubit_reuse_reaches_bottom():
    program = parse_program(":: qcase q[1] of { 0 -> q[1] *= NOT; , 1 -> skip; }")
    outcome = eval_program(program, QuantumState.from_bits("0"))
    assert outcome.terminal == BOTTOM


def test_guard_errors_makes_out_of_range_a_skip():
    program = parse_program(":: q[5] *= NOT;")
    guarded = guard_errors(program)
    outcome = eval_program(guarded, QuantumState.from_bits("00"))
    assert outcome.terminal == TOP
    assert np.allclose(outcome.state.amplitudes, QuantumState.from_bits("00").amplitudes)


def test_guard_errors_identity_on_skip():
    program = parse_program(":: skip;")
    assert guard_errors(program) == program


def test_guard_errors_preserves_normal_semantics(qft):
    rng = np.random.default_rng(3)
    state = QuantumState.random(3, rng)
    plain = run(qft, state).state.amplitudes
    guarded = run(guard_errors(qft), state).state.amplitudes
    assert np.allclose(plain, guarded, atol=1e-12)


def test_call_on_empty_set_is_identity_level_one():
    program = parse_program("decl f(p) { p[1] *= NOT; }, :: call f(nil);")
    out = run(program, QuantumState.from_bits("0"))
    assert out.level == 1
    assert np.allclose(out.state.amplitudes, [1, 0])


def test_level_counts_nested_calls():
    program = parse_program(
        """
decl f(p) {
  if size(p) > 0 then { call f(p \\ [1]); } else { skip; }
},
:: call f(q);
"""
    )
    # n + 1 nested calls: n shrinking calls plus the final empty-set call.
    for n in range(1, 5):
        assert level_of(program, n) == n + 1


def test_level_seq_sums_and_qcase_maxes():
    program = parse_program(
        """
decl f(p) { skip; },
:: qcase q[1] of { 0 -> call f(q \\ [1]); , 1 -> skip; } call f(q);
"""
    )
    assert level_of(program, 2) == 2  # max(1, 0) + 1


def test_budget_exceeded():
    program = parse_program(
        "decl f(p) { call f(p); }, :: call f(q);"
    )
    with pytest.raises(BudgetExceededError):
        run(program, QuantumState.from_bits("0"), budget=1000)


def test_norm_preserved_on_corpus(corpus):
    rng = np.random.default_rng(11)
    for name, program in corpus.items():
        n = 3 if name == "teleport" else 3
        state = QuantumState.random(n, rng)
        out = run(program, state)
        assert abs(np.linalg.norm(out.state.amplitudes) - 1.0) < 1e-9

import math

import numpy as np
import pytest

from foqc import parse_program
from foqc.syntax import (
    IntLit,
    IntVar,
    Operator,
    OP_NOT,
    OP_PH,
    OP_RY,
    PhaseConst,
    PhaseDiv,
    PhaseNeg,
    PhasePi,
    PhasePow2,
    PhaseVar,
    Seq,
    Skip,
    eval_phase,
    gate_matrix,
    invert_operator,
    phase_neg,
    pretty_print,
    seq_all,
    seq_items,
    statement_calls,
    substitute_int,
    wellformed_check,
)


def test_phase_reduction_into_two_pi():
    # 2^x at x = 3 is 8, reduced modulo 2*pi.
    assert eval_phase(PhasePow2(PhaseVar()), 3) == pytest.approx(8 - 2 * math.pi)
    assert eval_phase(PhaseConst(-1), 0) == pytest.approx(2 * math.pi - 1)
    assert 0.0 <= eval_phase(PhaseConst(123456), 0) < 2 * math.pi


def test_phase_pi_over_power():
    # pi / 2^(x-1) at x = 2 is pi/2.
    expr = PhaseDiv(PhasePi(), PhasePow2(PhaseVar()))
    assert eval_phase(expr, 1) == pytest.approx(math.pi / 2)


def test_phase_double_negation_collapses():
    f = PhaseDiv(PhasePi(), PhaseConst(4))
    assert phase_neg(phase_neg(f)) == f


def test_not_matrix():
    op = Operator(OP_NOT)
    assert np.array_equal(gate_matrix(op), np.array([[0, 1], [1, 0]]))


def test_rotation_matrix_is_special_orthogonal():
    op = Operator(OP_RY, PhaseDiv(PhasePi(), PhaseConst(3)), IntLit(0))
    m = gate_matrix(op)
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    assert np.allclose(m, [[c, -s], [s, c]], atol=1e-12)


def test_phase_matrix_uses_argument():
    op = Operator(OP_PH, PhaseDiv(PhasePi(), PhasePow2(PhaseVar())), IntVar("x"))
    m = gate_matrix(op, 1)  # evaluated at argument value 1
    assert np.allclose(m, np.diag([1, np.exp(1j * math.pi / 2)]), atol=1e-12)


def test_operator_validation():
    with pytest.raises(ValueError):
        Operator(OP_NOT, PhasePi(), IntLit(0))
    with pytest.raises(ValueError):
        Operator(OP_RY)


def test_invert_operator():
    assert invert_operator(Operator(OP_NOT)) == Operator(OP_NOT)
    op = Operator(OP_PH, PhasePi(), IntLit(0))
    inv = invert_operator(op)
    assert inv.phase == PhaseNeg(PhasePi())
    assert invert_operator(inv) == op
    m = gate_matrix(op) @ gate_matrix(inv)
    assert np.allclose(m, np.eye(2), atol=1e-12)


def test_substitute_int_reaches_all_positions():
    src = """
decl f[x](p) {
  if x > 0 then {
    p[x] *= PH[pi](x + 1);
    call f[x - 1](p \\ [x]);
  } else { skip; }
},
:: call f[3](q);
"""
    program = parse_program(src)
    body = substitute_int(program.decls[0].body, "x", 3)
    text = pretty_print(parse_program(src))
    assert "x" in text  # original keeps the variable
    rendered_calls = statement_calls(body)
    assert rendered_calls[0].arg is not None
    # After substitution no integer variable named x remains anywhere.
    from foqc.syntax import statement_vars

    _, int_vars = statement_vars(body)
    assert int_vars == set()


def test_seq_all_normalizes_nesting():
    a, b, c = Skip(), Skip(), Skip()
    nested = seq_all([Seq(a, b), c])
    flat = seq_all([a, b, c])
    assert nested == flat
    assert len(seq_items(nested)) == 3


def test_wellformed_detects_problems():
    program = parse_program(
        """
decl f(p) { call g(p \\ [1]); },
decl f(p) { skip; },
:: call h(q);
"""
    )
    diags = wellformed_check(program)
    assert any("duplicate" in d for d in diags)
    assert any("undeclared" in d and "g" in d for d in diags)
    assert any("undeclared" in d and "h" in d for d in diags)


def test_wellformed_arity_mismatch():
    program = parse_program(
        """
decl f[x](p) { skip; },
decl g(p) { skip; },
:: call f(q); call g[1](q);
"""
    )
    diags = wellformed_check(program)
    assert any("requires a classical argument" in d for d in diags)
    assert any("takes no classical argument" in d for d in diags)


def test_wellformed_foreign_variables():
    program = parse_program("decl f(p) { r[1] *= NOT; }, :: call f(q);")
    diags = wellformed_check(program)
    assert any("unknown set variable" in d for d in diags)


def test_pretty_print_round_trip_corpus(corpus):
    for program in corpus.values():
        assert parse_program(pretty_print(program)) == program


def test_pretty_print_round_trip_edge_cases():
    src = """
decl f[x](p) {
  if (size(p) > 1 && !(x = 0)) || 2 > x then {
    qcase p[1] of {
      0 -> p[2] *= RY[-(pi / 2^(x - 1)) + 2 * pi](x - 1);
      ,
      1 -> skip;
    }
  } else {
    call f[x + 1](p \\ [1, size(p)]);
  }
},
:: call f[0](q);
"""
    program = parse_program(src)
    assert parse_program(pretty_print(program)) == program

"""Exact statevector semantics for FOQ programs.

The interpreter evaluates a statement against a configuration made of the
full n-qubit statevector, the set of accessible qubit positions, and the
current sorted list of qubit indices.  Qubit 1 is the most significant bit
of the basis-state index.  Evaluation is exact (no measurement, no
sampling): a quantum case evaluates both branches on the full state with
the control qubit removed from the accessible set, then recombines the
results under the two projections of the control.

Evaluation produces either a normal terminal (with a mutual-call nesting
level used by the resource analysis) or an error terminal, which arises
exactly when a statement touches a qubit position outside the accessible
set (for instance an out-of-range index, which evaluates to position 0).
The error terminal leaves the state unchanged.

`guard_errors` rewrites a program so that every qubit access is wrapped in
a classical bounds test, making the error terminal unreachable.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass

import numpy as np

from .syntax import (
    Assign,
    BoolAnd,
    BoolCmp,
    BoolExpr,
    BoolNot,
    BoolOr,
    Call,
    FoqError,
    If,
    IntAdd,
    IntExpr,
    IntLit,
    IntSub,
    IntVar,
    Program,
    ProcDecl,
    QCase,
    QubitExpr,
    Seq,
    SetExpr,
    SetNil,
    SetRemove,
    SetSize,
    SetVar,
    Skip,
    Statement,
    format_qubit,
    gate_matrix,
    substitute_int,
)

TOP = "top"
BOTTOM = "bottom"

DEFAULT_BUDGET = 1_000_000

STATE_TOLERANCE = 1e-9


class EvalError(FoqError):
    """An expression could not be evaluated (free variable, bad program)."""


class BottomError(FoqError):
    """The program reached the error terminal (inaccessible qubit)."""


class BudgetExceededError(FoqError):
    """The interpreter exceeded its statement-step budget."""


class QuantumState:
    """A normalized statevector over n qubits (qubit 1 = most significant)."""

    __slots__ = ("n", "amplitudes")

    def __init__(self, n: int, amplitudes):
        if n < 0:
            raise ValueError("qubit count must be nonnegative")
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} amplitudes for {n} qubits, got {amps.shape[0]}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > STATE_TOLERANCE:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        self.n = n
        self.amplitudes = amps

    @classmethod
    def zero(cls, n: int) -> "QuantumState":
        return cls.from_bits("0" * n)

    @classmethod
    def from_bits(cls, bits: str) -> "QuantumState":
        if set(bits) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {bits!r}")
        n = len(bits)
        amps = np.zeros(1 << n, dtype=complex)
        amps[int(bits, 2) if bits else 0] = 1.0
        return cls(n, amps)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "QuantumState":
        amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
        return cls(n, amps / np.linalg.norm(amps))

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "QuantumState":
        data = json.loads(text)
        if not isinstance(data, dict) or "n" not in data or "amplitudes" not in data:
            raise ValueError("state JSON must be an object with 'n' and 'amplitudes'")
        amps = [complex(re, im) for re, im in data["amplitudes"]]
        return cls(int(data["n"]), amps)

    def __repr__(self) -> str:
        return f"QuantumState(n={self.n})"


# ---------------------------------------------------------------------------
# Classical expression evaluation against the current sorted list l.
# ---------------------------------------------------------------------------


def eval_int(e: IntExpr, l: tuple[int, ...]) -> int:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, IntVar):
        raise EvalError(f"unsubstituted integer variable {e.name!r}")
    if isinstance(e, IntAdd):
        return eval_int(e.base, l) + e.offset
    if isinstance(e, IntSub):
        return eval_int(e.base, l) - e.offset
    if isinstance(e, SetSize):
        return len(eval_set(e.set_expr, l))
    raise TypeError(f"not an integer expression: {e!r}")


def eval_set(s: SetExpr, l: tuple[int, ...]) -> tuple[int, ...]:
    """Evaluate a sorted-set expression to a list of qubit positions.

    A removal's index is evaluated against the list produced by the base
    expression, so chained removals see the progressively shrinking list.
    An out-of-range removal index yields the empty list.
    """
    if isinstance(s, SetNil):
        return ()
    if isinstance(s, SetVar):
        return l
    if isinstance(s, SetRemove):
        base = eval_set(s.base, l)
        k = eval_int(s.index, base)
        if 1 <= k <= len(base):
            return base[: k - 1] + base[k:]
        return ()
    raise TypeError(f"not a set expression: {s!r}")


def eval_bool(b: BoolExpr, l: tuple[int, ...]) -> bool:
    if isinstance(b, BoolCmp):
        lhs, rhs = eval_int(b.left, l), eval_int(b.right, l)
        if b.op == ">":
            return lhs > rhs
        if b.op == ">=":
            return lhs >= rhs
        if b.op == "=":
            return lhs == rhs
        raise ValueError(f"unknown comparison {b.op!r}")
    if isinstance(b, BoolAnd):
        return eval_bool(b.left, l) and eval_bool(b.right, l)
    if isinstance(b, BoolOr):
        return eval_bool(b.left, l) or eval_bool(b.right, l)
    if isinstance(b, BoolNot):
        return not eval_bool(b.inner, l)
    raise TypeError(f"not a boolean expression: {b!r}")


def eval_qubit(q: QubitExpr, l: tuple[int, ...]) -> int:
    """The global position of s[i], or 0 when the index is out of range."""
    positions = eval_set(q.set_expr, l)
    k = eval_int(q.index, l)
    if 1 <= k <= len(positions):
        return positions[k - 1]
    return 0


# ---------------------------------------------------------------------------
# Statevector helpers.
# ---------------------------------------------------------------------------


def apply_single_qubit(psi: np.ndarray, n: int, target: int, matrix: np.ndarray) -> np.ndarray:
    """Apply a 2x2 unitary at position target (1-based, MSB first)."""
    t = psi.reshape([2] * n)
    t = np.moveaxis(t, target - 1, 0)
    t = np.tensordot(matrix, t, axes=([1], [0]))
    t = np.moveaxis(t, 0, target - 1)
    return np.ascontiguousarray(t).reshape(-1)


def project_qubit(psi: np.ndarray, n: int, target: int, bit: int) -> np.ndarray:
    """Zero the amplitudes where qubit `target` differs from `bit`."""
    t = psi.reshape([2] * n).copy()
    sel: list = [slice(None)] * n
    sel[target - 1] = 1 - bit
    t[tuple(sel)] = 0
    return t.reshape(-1)


# ---------------------------------------------------------------------------
# Statement evaluation.
# ---------------------------------------------------------------------------


@dataclass
class EvalOutcome:
    terminal: str  # TOP or BOTTOM
    state: QuantumState
    level: int
    error: str | None = None  # description of the first access violation


class _Budget:
    __slots__ = ("remaining",)

    def __init__(self, steps: int):
        self.remaining = steps

    def tick(self) -> None:
        self.remaining -= 1
        if self.remaining < 0:
            raise BudgetExceededError("statement-step budget exceeded")


def _eval(
    stmt: Statement,
    psi: np.ndarray,
    n: int,
    allowed: frozenset[int],
    l: tuple[int, ...],
    decls: dict[str, ProcDecl],
    budget: _Budget,
) -> tuple[str, np.ndarray, int, str | None]:
    budget.tick()
    if isinstance(stmt, Skip):
        return TOP, psi, 0, None
    if isinstance(stmt, Assign):
        pos = eval_qubit(stmt.qubit, l)
        if pos not in allowed:
            return BOTTOM, psi, 0, (
                f"assignment to {format_qubit(stmt.qubit)}: position {pos} is not accessible"
            )
        arg = eval_int(stmt.op.arg, l) if stmt.op.arg is not None else 0
        return TOP, apply_single_qubit(psi, n, pos, gate_matrix(stmt.op, arg)), 0, None
    if isinstance(stmt, Seq):
        t1, psi1, m1, err1 = _eval(stmt.first, psi, n, allowed, l, decls, budget)
        if t1 == BOTTOM:
            return BOTTOM, psi, m1, err1
        t2, psi2, m2, err2 = _eval(stmt.second, psi1, n, allowed, l, decls, budget)
        if t2 == BOTTOM:
            return BOTTOM, psi, m1 + m2, err2
        return TOP, psi2, m1 + m2, None
    if isinstance(stmt, If):
        branch = stmt.then_branch if eval_bool(stmt.cond, l) else stmt.else_branch
        return _eval(branch, psi, n, allowed, l, decls, budget)
    if isinstance(stmt, QCase):
        pos = eval_qubit(stmt.qubit, l)
        if pos not in allowed:
            return BOTTOM, psi, 0, (
                f"quantum case on {format_qubit(stmt.qubit)}: position {pos} is not accessible"
            )
        sub_allowed = allowed - {pos}
        t0, psi0, m0, err0 = _eval(stmt.if_zero, psi, n, sub_allowed, l, decls, budget)
        t1, psi1, m1, err1 = _eval(stmt.if_one, psi, n, sub_allowed, l, decls, budget)
        level = max(m0, m1)
        if t0 == BOTTOM or t1 == BOTTOM:
            return BOTTOM, psi, level, err0 if t0 == BOTTOM else err1
        combined = project_qubit(psi0, n, pos, 0) + project_qubit(psi1, n, pos, 1)
        return TOP, combined, level, None
    if isinstance(stmt, Call):
        sub_l = eval_set(stmt.set_expr, l)
        if not sub_l:
            return TOP, psi, 1, None
        decl = decls.get(stmt.proc)
        if decl is None:
            raise EvalError(f"call to undeclared procedure {stmt.proc!r}")
        body = decl.body
        if decl.param is not None:
            if stmt.arg is None:
                raise EvalError(f"procedure {stmt.proc!r} requires a classical argument")
            body = substitute_int(body, decl.param, eval_int(stmt.arg, l))
        t, psi2, m, err = _eval(body, psi, n, allowed, sub_l, decls, budget)
        if t == BOTTOM:
            return BOTTOM, psi, m + 1, err
        return TOP, psi2, m + 1, None
    raise TypeError(f"not a statement: {stmt!r}")


def eval_program(
    p: Program, state: QuantumState, budget: int = DEFAULT_BUDGET
) -> EvalOutcome:
    """Evaluate the main statement on `state`; never raises on the error terminal."""
    n = state.n
    allowed = frozenset(range(1, n + 1))
    l = tuple(range(1, n + 1))
    # Deep call chains consume Python stack frames faster than budget
    # units; give the evaluator headroom and report exhaustion of either
    # resource the same way.
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20_000))
    try:
        terminal, psi, level, error = _eval(
            p.main, state.amplitudes, n, allowed, l, p.decl_map(), _Budget(budget)
        )
    except RecursionError:
        raise BudgetExceededError(
            "call recursion exceeded the interpreter stack"
        ) from None
    finally:
        sys.setrecursionlimit(limit)
    return EvalOutcome(terminal, QuantumState(n, psi), level, error)


def run(p: Program, state: QuantumState, budget: int = DEFAULT_BUDGET) -> EvalOutcome:
    """Like eval_program, but raises BottomError on the error terminal."""
    outcome = eval_program(p, state, budget)
    if outcome.terminal == BOTTOM:
        raise BottomError(outcome.error or "program reached the error terminal")
    return outcome


def level_of(p: Program, n: int, budget: int = DEFAULT_BUDGET) -> int:
    """The mutual-call nesting level of the program on n qubits."""
    return eval_program(p, QuantumState.zero(n), budget).level


# ---------------------------------------------------------------------------
# Error-freeing transformation.
# ---------------------------------------------------------------------------


def _bounds_guard(q: QubitExpr) -> BoolExpr:
    """0 < i and i <= size(s) for the qubit expression s[i]."""
    return BoolAnd(
        BoolCmp(">", q.index, IntLit(0)),
        BoolCmp(">=", SetSize(q.set_expr), q.index),
    )


def guard_statement(stmt: Statement) -> Statement:
    if isinstance(stmt, (Skip, Call)):
        return stmt
    if isinstance(stmt, Assign):
        return If(_bounds_guard(stmt.qubit), stmt, Skip())
    if isinstance(stmt, Seq):
        return Seq(guard_statement(stmt.first), guard_statement(stmt.second))
    if isinstance(stmt, If):
        return If(
            stmt.cond,
            guard_statement(stmt.then_branch),
            guard_statement(stmt.else_branch),
        )
    if isinstance(stmt, QCase):
        guarded = QCase(
            stmt.qubit, guard_statement(stmt.if_zero), guard_statement(stmt.if_one)
        )
        return If(_bounds_guard(stmt.qubit), guarded, Skip())
    raise TypeError(f"not a statement: {stmt!r}")


def guard_errors(p: Program) -> Program:
    """Wrap every qubit access in a classical bounds test.

    On the guarded program the error terminal is unreachable: any access
    whose index falls outside the current sorted set collapses to skip.
    The guarded program computes the same states as the original wherever
    the original terminates normally.
    """
    decls = tuple(
        ProcDecl(d.name, d.param, d.set_param, guard_statement(d.body)) for d in p.decls
    )
    return Program(decls, guard_statement(p.main))

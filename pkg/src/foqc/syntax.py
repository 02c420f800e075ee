"""Abstract syntax for FOQ programs.

FOQ is a first-order quantum programming language: a program is a list of
procedure declarations over a sorted set of qubits, followed by a main
statement.  This module defines the expression and statement trees, the
phase-function DSL used by the rotation and phase operators, plus the basic
operations on them: well-formedness diagnostics, integer substitution,
operator matrix evaluation, and a pretty printer whose output re-parses to a
structurally identical program.

All node types are immutable dataclasses, safe to share freely.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass


class FoqError(Exception):
    """Base class for all toolchain errors."""


class PhaseEvalError(FoqError):
    """Raised when a phase expression cannot be evaluated (e.g. x/0)."""


# ---------------------------------------------------------------------------
# Phase expressions: a closed DSL over one bound integer variable.
# ---------------------------------------------------------------------------


class PhaseExpr:
    """Base class for phase-function expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class PhaseConst(PhaseExpr):
    value: int


@dataclass(frozen=True)
class PhasePi(PhaseExpr):
    pass


@dataclass(frozen=True)
class PhaseVar(PhaseExpr):
    """The single bound variable of the phase function."""


@dataclass(frozen=True)
class PhaseAdd(PhaseExpr):
    left: PhaseExpr
    right: PhaseExpr


@dataclass(frozen=True)
class PhaseSub(PhaseExpr):
    left: PhaseExpr
    right: PhaseExpr


@dataclass(frozen=True)
class PhaseMul(PhaseExpr):
    left: PhaseExpr
    right: PhaseExpr


@dataclass(frozen=True)
class PhaseDiv(PhaseExpr):
    left: PhaseExpr
    right: PhaseExpr


@dataclass(frozen=True)
class PhasePow2(PhaseExpr):
    """2 raised to a sub-expression."""

    exponent: PhaseExpr


@dataclass(frozen=True)
class PhaseNeg(PhaseExpr):
    inner: PhaseExpr


TWO_PI = 2.0 * math.pi


def _eval_phase_raw(f: PhaseExpr, n: int) -> float:
    if isinstance(f, PhaseConst):
        return float(f.value)
    if isinstance(f, PhasePi):
        return math.pi
    if isinstance(f, PhaseVar):
        return float(n)
    if isinstance(f, PhaseAdd):
        return _eval_phase_raw(f.left, n) + _eval_phase_raw(f.right, n)
    if isinstance(f, PhaseSub):
        return _eval_phase_raw(f.left, n) - _eval_phase_raw(f.right, n)
    if isinstance(f, PhaseMul):
        return _eval_phase_raw(f.left, n) * _eval_phase_raw(f.right, n)
    if isinstance(f, PhaseDiv):
        denom = _eval_phase_raw(f.right, n)
        if denom == 0.0:
            raise PhaseEvalError(f"division by zero in phase expression at n={n}")
        return _eval_phase_raw(f.left, n) / denom
    if isinstance(f, PhasePow2):
        return 2.0 ** _eval_phase_raw(f.exponent, n)
    if isinstance(f, PhaseNeg):
        return -_eval_phase_raw(f.inner, n)
    raise TypeError(f"not a phase expression: {f!r}")


def eval_phase(f: PhaseExpr, n: int) -> float:
    """Evaluate a phase function at integer n, reduced into [0, 2*pi)."""
    value = _eval_phase_raw(f, n) % TWO_PI
    if not math.isfinite(value):
        raise PhaseEvalError(f"phase expression is not finite at n={n}")
    # The modulo can land exactly on 2*pi through rounding; normalize.
    if value >= TWO_PI:
        value = 0.0
    return value


def phase_neg(f: PhaseExpr) -> PhaseExpr:
    """Syntactic negation of a phase function, collapsing double negation."""
    if isinstance(f, PhaseNeg):
        return f.inner
    return PhaseNeg(f)


# ---------------------------------------------------------------------------
# Classical expressions: integers, booleans, sorted sets, qubits.
# ---------------------------------------------------------------------------


class IntExpr:
    __slots__ = ()


@dataclass(frozen=True)
class IntLit(IntExpr):
    value: int


@dataclass(frozen=True)
class IntVar(IntExpr):
    name: str


@dataclass(frozen=True)
class IntAdd(IntExpr):
    """base + offset, where the grammar restricts offset to a literal."""

    base: IntExpr
    offset: int


@dataclass(frozen=True)
class IntSub(IntExpr):
    base: IntExpr
    offset: int


class SetExpr:
    __slots__ = ()


@dataclass(frozen=True)
class SetSize(IntExpr):
    """size(s): the number of elements of a sorted set."""

    set_expr: SetExpr


@dataclass(frozen=True)
class SetNil(SetExpr):
    pass


@dataclass(frozen=True)
class SetVar(SetExpr):
    name: str


@dataclass(frozen=True)
class SetRemove(SetExpr):
    """base with the element at position index removed.

    In a chain of removals each index is evaluated against the list left by
    the preceding removals, so `p \\ [1, size(p)]` drops the first and last
    elements of p (the second index sees the already-shrunk list).
    """

    base: SetExpr
    index: IntExpr


class BoolExpr:
    __slots__ = ()


@dataclass(frozen=True)
class BoolCmp(BoolExpr):
    op: str  # one of ">", ">=", "="
    left: IntExpr
    right: IntExpr


@dataclass(frozen=True)
class BoolAnd(BoolExpr):
    left: BoolExpr
    right: BoolExpr


@dataclass(frozen=True)
class BoolOr(BoolExpr):
    left: BoolExpr
    right: BoolExpr


@dataclass(frozen=True)
class BoolNot(BoolExpr):
    inner: BoolExpr


@dataclass(frozen=True)
class QubitExpr:
    """s[i]: one qubit of a sorted set."""

    set_expr: SetExpr
    index: IntExpr


# ---------------------------------------------------------------------------
# Operators and statements.
# ---------------------------------------------------------------------------

OP_NOT = "NOT"
OP_RY = "RY"
OP_PH = "PH"


@dataclass(frozen=True)
class Operator:
    """A single-qubit operator: NOT, RY[f](i), or PH[f](i)."""

    kind: str
    phase: PhaseExpr | None = None
    arg: IntExpr | None = None

    def __post_init__(self) -> None:
        if self.kind == OP_NOT:
            if self.phase is not None or self.arg is not None:
                raise ValueError("NOT carries neither phase nor argument")
        elif self.kind in (OP_RY, OP_PH):
            if self.phase is None or self.arg is None:
                raise ValueError(f"{self.kind} requires a phase and an argument")
        else:
            raise ValueError(f"unknown operator kind {self.kind!r}")


class Statement:
    __slots__ = ()


@dataclass(frozen=True)
class Skip(Statement):
    pass


@dataclass(frozen=True)
class Assign(Statement):
    qubit: QubitExpr
    op: Operator


@dataclass(frozen=True)
class Seq(Statement):
    first: Statement
    second: Statement


@dataclass(frozen=True)
class If(Statement):
    cond: BoolExpr
    then_branch: Statement
    else_branch: Statement


@dataclass(frozen=True)
class QCase(Statement):
    qubit: QubitExpr
    if_zero: Statement
    if_one: Statement


@dataclass(frozen=True)
class Call(Statement):
    proc: str
    arg: IntExpr | None
    set_expr: SetExpr


@dataclass(frozen=True)
class ProcDecl:
    name: str
    param: str | None  # optional classical integer parameter
    set_param: str  # sorted-set parameter
    body: Statement


@dataclass(frozen=True)
class Program:
    decls: tuple[ProcDecl, ...]
    main: Statement

    def decl_map(self) -> dict[str, ProcDecl]:
        return {d.name: d for d in self.decls}


def seq_all(stmts: list[Statement]) -> Statement:
    """Fold a statement list into a right-nested sequence.

    Nested sequences among the inputs are flattened first, so sequences
    built from the same statements always share one normal form.
    """
    flat = [item for stmt in stmts for item in seq_items(stmt)]
    if not flat:
        return Skip()
    result = flat[-1]
    for stmt in reversed(flat[:-1]):
        result = Seq(stmt, result)
    return result


def seq_items(stmt: Statement) -> list[Statement]:
    """Flatten nested sequences into a statement list."""
    if isinstance(stmt, Seq):
        return seq_items(stmt.first) + seq_items(stmt.second)
    return [stmt]


# ---------------------------------------------------------------------------
# Operator matrices.
# ---------------------------------------------------------------------------


def gate_matrix(op: Operator, n: int = 0):
    """The 2x2 unitary of an operator evaluated at integer argument n."""
    import numpy as np

    if op.kind == OP_NOT:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    theta = eval_phase(op.phase, n)
    if op.kind == OP_RY:
        c, s = math.cos(theta), math.sin(theta)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if op.kind == OP_PH:
        return np.array([[1, 0], [0, cmath.exp(1j * theta)]], dtype=complex)
    raise ValueError(f"unknown operator kind {op.kind!r}")


def invert_operator(op: Operator) -> Operator:
    """The adjoint of an operator: NOT is self-inverse, RY/PH negate phases."""
    if op.kind == OP_NOT:
        return op
    return Operator(op.kind, phase_neg(op.phase), op.arg)


# ---------------------------------------------------------------------------
# Substitution of classical parameters.
# ---------------------------------------------------------------------------


def _subst_int(e: IntExpr | None, var: str, n: int) -> IntExpr | None:
    if e is None:
        return None
    if isinstance(e, IntLit):
        return e
    if isinstance(e, IntVar):
        return IntLit(n) if e.name == var else e
    if isinstance(e, IntAdd):
        return IntAdd(_subst_int(e.base, var, n), e.offset)
    if isinstance(e, IntSub):
        return IntSub(_subst_int(e.base, var, n), e.offset)
    if isinstance(e, SetSize):
        return SetSize(_subst_set(e.set_expr, var, n))
    raise TypeError(f"not an integer expression: {e!r}")


def _subst_set(s: SetExpr, var: str, n: int) -> SetExpr:
    if isinstance(s, (SetNil, SetVar)):
        return s
    if isinstance(s, SetRemove):
        return SetRemove(_subst_set(s.base, var, n), _subst_int(s.index, var, n))
    raise TypeError(f"not a set expression: {s!r}")


def _subst_bool(b: BoolExpr, var: str, n: int) -> BoolExpr:
    if isinstance(b, BoolCmp):
        return BoolCmp(b.op, _subst_int(b.left, var, n), _subst_int(b.right, var, n))
    if isinstance(b, BoolAnd):
        return BoolAnd(_subst_bool(b.left, var, n), _subst_bool(b.right, var, n))
    if isinstance(b, BoolOr):
        return BoolOr(_subst_bool(b.left, var, n), _subst_bool(b.right, var, n))
    if isinstance(b, BoolNot):
        return BoolNot(_subst_bool(b.inner, var, n))
    raise TypeError(f"not a boolean expression: {b!r}")


def _subst_qubit(q: QubitExpr, var: str, n: int) -> QubitExpr:
    return QubitExpr(_subst_set(q.set_expr, var, n), _subst_int(q.index, var, n))


def substitute_int(stmt: Statement, var: str, n: int) -> Statement:
    """Replace every occurrence of the integer variable var by the literal n."""
    if isinstance(stmt, Skip):
        return stmt
    if isinstance(stmt, Assign):
        op = stmt.op
        if op.arg is not None:
            op = Operator(op.kind, op.phase, _subst_int(op.arg, var, n))
        return Assign(_subst_qubit(stmt.qubit, var, n), op)
    if isinstance(stmt, Seq):
        return Seq(substitute_int(stmt.first, var, n), substitute_int(stmt.second, var, n))
    if isinstance(stmt, If):
        return If(
            _subst_bool(stmt.cond, var, n),
            substitute_int(stmt.then_branch, var, n),
            substitute_int(stmt.else_branch, var, n),
        )
    if isinstance(stmt, QCase):
        return QCase(
            _subst_qubit(stmt.qubit, var, n),
            substitute_int(stmt.if_zero, var, n),
            substitute_int(stmt.if_one, var, n),
        )
    if isinstance(stmt, Call):
        return Call(stmt.proc, _subst_int(stmt.arg, var, n), _subst_set(stmt.set_expr, var, n))
    raise TypeError(f"not a statement: {stmt!r}")


# ---------------------------------------------------------------------------
# Variable collection and well-formedness.
# ---------------------------------------------------------------------------


def _int_vars(e: IntExpr | None, out: set[str]) -> None:
    if e is None or isinstance(e, IntLit):
        return
    if isinstance(e, IntVar):
        out.add(e.name)
    elif isinstance(e, (IntAdd, IntSub)):
        _int_vars(e.base, out)
    elif isinstance(e, SetSize):
        _set_vars(e.set_expr, out, set())


def _set_vars(s: SetExpr, set_out: set[str], int_out: set[str]) -> None:
    if isinstance(s, SetVar):
        set_out.add(s.name)
    elif isinstance(s, SetRemove):
        _set_vars(s.base, set_out, int_out)
        _int_vars_full(s.index, set_out, int_out)


def _int_vars_full(e: IntExpr | None, set_out: set[str], int_out: set[str]) -> None:
    if e is None or isinstance(e, IntLit):
        return
    if isinstance(e, IntVar):
        int_out.add(e.name)
    elif isinstance(e, (IntAdd, IntSub)):
        _int_vars_full(e.base, set_out, int_out)
    elif isinstance(e, SetSize):
        _set_vars(e.set_expr, set_out, int_out)


def _bool_vars(b: BoolExpr, set_out: set[str], int_out: set[str]) -> None:
    if isinstance(b, BoolCmp):
        _int_vars_full(b.left, set_out, int_out)
        _int_vars_full(b.right, set_out, int_out)
    elif isinstance(b, (BoolAnd, BoolOr)):
        _bool_vars(b.left, set_out, int_out)
        _bool_vars(b.right, set_out, int_out)
    elif isinstance(b, BoolNot):
        _bool_vars(b.inner, set_out, int_out)


def statement_vars(stmt: Statement) -> tuple[set[str], set[str]]:
    """Return (set variables, integer variables) referenced by a statement."""
    set_out: set[str] = set()
    int_out: set[str] = set()

    def walk(s: Statement) -> None:
        if isinstance(s, Skip):
            return
        if isinstance(s, Assign):
            _set_vars(s.qubit.set_expr, set_out, int_out)
            _int_vars_full(s.qubit.index, set_out, int_out)
            if s.op.arg is not None:
                _int_vars_full(s.op.arg, set_out, int_out)
        elif isinstance(s, Seq):
            walk(s.first)
            walk(s.second)
        elif isinstance(s, If):
            _bool_vars(s.cond, set_out, int_out)
            walk(s.then_branch)
            walk(s.else_branch)
        elif isinstance(s, QCase):
            _set_vars(s.qubit.set_expr, set_out, int_out)
            _int_vars_full(s.qubit.index, set_out, int_out)
            walk(s.if_zero)
            walk(s.if_one)
        elif isinstance(s, Call):
            _int_vars_full(s.arg, set_out, int_out)
            _set_vars(s.set_expr, set_out, int_out)

    walk(stmt)
    return set_out, int_out


def statement_calls(stmt: Statement) -> list[Call]:
    """All call statements nested anywhere inside a statement."""
    out: list[Call] = []

    def walk(s: Statement) -> None:
        if isinstance(s, Seq):
            walk(s.first)
            walk(s.second)
        elif isinstance(s, If):
            walk(s.then_branch)
            walk(s.else_branch)
        elif isinstance(s, QCase):
            walk(s.if_zero)
            walk(s.if_one)
        elif isinstance(s, Call):
            out.append(s)

    walk(stmt)
    return out


def wellformed_check(p: Program) -> list[str]:
    """Diagnostics for the static well-formedness rules; empty means OK.

    Checks: pairwise-distinct procedure names, every called name declared
    with matching classical-argument arity, procedure bodies only using
    their own parameters, and the main statement using at most one sorted
    set variable and no integer variables.
    """
    diags: list[str] = []
    seen: set[str] = set()
    for d in p.decls:
        if d.name in seen:
            diags.append(f"duplicate procedure declaration: {d.name}")
        seen.add(d.name)
    decl_map = p.decl_map()

    def check_calls(where: str, stmt: Statement) -> None:
        for call in statement_calls(stmt):
            target = decl_map.get(call.proc)
            if target is None:
                diags.append(f"{where}: call to undeclared procedure {call.proc}")
            elif target.param is None and call.arg is not None:
                diags.append(
                    f"{where}: procedure {call.proc} takes no classical argument"
                )
            elif target.param is not None and call.arg is None:
                diags.append(
                    f"{where}: procedure {call.proc} requires a classical argument"
                )

    for d in p.decls:
        set_vars, int_vars = statement_vars(d.body)
        bad_sets = set_vars - {d.set_param}
        if bad_sets:
            diags.append(
                f"procedure {d.name}: unknown set variable(s) {sorted(bad_sets)}"
            )
        allowed_ints = {d.param} if d.param is not None else set()
        bad_ints = int_vars - allowed_ints
        if bad_ints:
            diags.append(
                f"procedure {d.name}: unknown integer variable(s) {sorted(bad_ints)}"
            )
        check_calls(f"procedure {d.name}", d.body)

    set_vars, int_vars = statement_vars(p.main)
    if len(set_vars) > 1:
        diags.append(f"main statement uses several set variables: {sorted(set_vars)}")
    if int_vars:
        diags.append(f"main statement uses integer variable(s): {sorted(int_vars)}")
    check_calls("main statement", p.main)
    return diags


# ---------------------------------------------------------------------------
# Pretty printer.  The output re-parses to a structurally identical program.
# ---------------------------------------------------------------------------

_PHASE_PREC_ADD = 1
_PHASE_PREC_MUL = 2
_PHASE_PREC_ATOM = 3


def _fmt_phase(f: PhaseExpr, prec: int) -> str:
    if isinstance(f, PhaseConst):
        text, mine = str(f.value), _PHASE_PREC_ATOM
    elif isinstance(f, PhasePi):
        text, mine = "pi", _PHASE_PREC_ATOM
    elif isinstance(f, PhaseVar):
        text, mine = "x", _PHASE_PREC_ATOM
    elif isinstance(f, PhaseAdd):
        text = f"{_fmt_phase(f.left, _PHASE_PREC_ADD)} + {_fmt_phase(f.right, _PHASE_PREC_MUL)}"
        mine = _PHASE_PREC_ADD
    elif isinstance(f, PhaseSub):
        text = f"{_fmt_phase(f.left, _PHASE_PREC_ADD)} - {_fmt_phase(f.right, _PHASE_PREC_MUL)}"
        mine = _PHASE_PREC_ADD
    elif isinstance(f, PhaseMul):
        text = f"{_fmt_phase(f.left, _PHASE_PREC_MUL)} * {_fmt_phase(f.right, _PHASE_PREC_ATOM)}"
        mine = _PHASE_PREC_MUL
    elif isinstance(f, PhaseDiv):
        text = f"{_fmt_phase(f.left, _PHASE_PREC_MUL)} / {_fmt_phase(f.right, _PHASE_PREC_ATOM)}"
        mine = _PHASE_PREC_MUL
    elif isinstance(f, PhasePow2):
        text = f"2^{_fmt_phase(f.exponent, _PHASE_PREC_ATOM)}"
        mine = _PHASE_PREC_ATOM
    elif isinstance(f, PhaseNeg):
        text = f"-{_fmt_phase(f.inner, _PHASE_PREC_ATOM)}"
        mine = _PHASE_PREC_MUL
    else:
        raise TypeError(f"not a phase expression: {f!r}")
    if mine < prec:
        return f"({text})"
    return text


def format_phase(f: PhaseExpr) -> str:
    return _fmt_phase(f, _PHASE_PREC_ADD)


def format_int(e: IntExpr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, IntVar):
        return e.name
    if isinstance(e, IntAdd):
        return f"{format_int(e.base)} + {e.offset}"
    if isinstance(e, IntSub):
        return f"{format_int(e.base)} - {e.offset}"
    if isinstance(e, SetSize):
        return f"size({format_set(e.set_expr)})"
    raise TypeError(f"not an integer expression: {e!r}")


def format_set(s: SetExpr) -> str:
    if isinstance(s, SetNil):
        return "nil"
    if isinstance(s, SetVar):
        return s.name
    if isinstance(s, SetRemove):
        # Fold a removal chain into one bracket list.
        indices: list[IntExpr] = []
        base: SetExpr = s
        while isinstance(base, SetRemove):
            indices.append(base.index)
            base = base.base
        indices.reverse()
        inner = ", ".join(format_int(i) for i in indices)
        return f"{format_set(base)} \\ [{inner}]"
    raise TypeError(f"not a set expression: {s!r}")


def format_bool(b: BoolExpr) -> str:
    if isinstance(b, BoolCmp):
        return f"{format_int(b.left)} {b.op} {format_int(b.right)}"
    if isinstance(b, BoolAnd):
        return f"({format_bool(b.left)} && {format_bool(b.right)})"
    if isinstance(b, BoolOr):
        return f"({format_bool(b.left)} || {format_bool(b.right)})"
    if isinstance(b, BoolNot):
        return f"!({format_bool(b.inner)})"
    raise TypeError(f"not a boolean expression: {b!r}")


def format_qubit(q: QubitExpr) -> str:
    return f"{format_set(q.set_expr)}[{format_int(q.index)}]"


def format_operator(op: Operator) -> str:
    if op.kind == OP_NOT:
        return "NOT"
    return f"{op.kind}[{format_phase(op.phase)}]({format_int(op.arg)})"


def _print_stmt(stmt: Statement, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(stmt, Skip):
        out.append(f"{pad}skip;")
    elif isinstance(stmt, Assign):
        out.append(f"{pad}{format_qubit(stmt.qubit)} *= {format_operator(stmt.op)};")
    elif isinstance(stmt, Seq):
        _print_stmt(stmt.first, indent, out)
        _print_stmt(stmt.second, indent, out)
    elif isinstance(stmt, If):
        out.append(f"{pad}if {format_bool(stmt.cond)} then {{")
        _print_stmt(stmt.then_branch, indent + 1, out)
        out.append(f"{pad}}} else {{")
        _print_stmt(stmt.else_branch, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(stmt, QCase):
        out.append(f"{pad}qcase {format_qubit(stmt.qubit)} of {{")
        out.append(f"{pad}  0 ->")
        _print_stmt(stmt.if_zero, indent + 2, out)
        out.append(f"{pad}  ,")
        out.append(f"{pad}  1 ->")
        _print_stmt(stmt.if_one, indent + 2, out)
        out.append(f"{pad}}}")
    elif isinstance(stmt, Call):
        arg = f"[{format_int(stmt.arg)}]" if stmt.arg is not None else ""
        out.append(f"{pad}call {stmt.proc}{arg}({format_set(stmt.set_expr)});")
    else:
        raise TypeError(f"not a statement: {stmt!r}")


def pretty_print(p: Program) -> str:
    """Render a program in the concrete surface syntax."""
    out: list[str] = []
    for d in p.decls:
        param = f"[{d.param}]" if d.param is not None else ""
        out.append(f"decl {d.name}{param}({d.set_param}) {{")
        _print_stmt(d.body, 1, out)
        out.append("},")
    out.append("::")
    _print_stmt(p.main, 0, out)
    return "\n".join(out) + "\n"

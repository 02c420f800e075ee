"""Compilation of accepted programs into polynomial-size circuits.

`compile_program` turns an accepted (width <= 1, shrinking-recursion)
program on n qubits into a circuit whose non-ancilla behaviour matches the
interpreter exactly.  Classical control (conditionals, indices, set
expressions) is evaluated at compile time; quantum cases split the control
structure; recursive calls are the interesting part.

A width-1 procedure call starts a worklist pass (`optimize`): controlled
statement instances (cs, S, l) are peeled left context into C_L and right
context into C_R until only recursive calls remain.  Calls that target a
(procedure, argument, set-size) triple already seen are merged into the
existing instance's control ancilla — via a routing ancilla and wire swaps
when the wire lists differ — instead of being expanded again.  This is
what keeps the circuit polynomial: per worklist pass there are at most
|procedures| * (n+1)^2 distinct keys.

Soundness of the merge rests on an invariant: all control structures in
the worklist are pairwise orthogonal, so at most one instance is active on
any basis state.  The invariant is asserted on every iteration.

The bounds guards inserted by `guard_errors` are classical and compile to
zero gates, so compilation always operates on the guarded program.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .analysis import NotPfoqError, call_relations, check_pfoq, statement_width, widths
from .circuit import (
    Circuit,
    ControlledNot,
    ControlStructure,
    Gate,
    ancilla_residue,
    controlled_u_gate,
    routing_swaps,
    simulate_circuit,
    trace_ancillas,
)
from .interpreter import QuantumState, eval_bool, eval_int, eval_qubit, eval_set, guard_errors, run
from .syntax import (
    Assign,
    Call,
    FoqError,
    If,
    OP_NOT,
    Program,
    QCase,
    Seq,
    Skip,
    Statement,
    format_phase,
    gate_matrix,
    substitute_int,
)


class CompileError(FoqError):
    """Compilation failed (non-accepted program, internal inconsistency)."""


class OrthogonalityError(CompileError):
    """The worklist orthogonality invariant was violated (must not happen)."""


def _extend_control(cs: ControlStructure, wire: int, bit: int) -> ControlStructure:
    """Pin one more wire in a control structure.

    Isolated as a module function so the test suite can disable the
    quantum-case split and confirm the orthogonality assertion catches it.
    """
    return cs.extended(wire, bit)


@dataclass
class AncTable:
    """Ancilla table of one worklist pass.

    Maps (procedure, classical argument, set size) to the control ancilla
    and wire list of the first instance compiled for that key.
    """

    entries: dict[tuple[str, int | None, int], tuple[int, tuple[int, ...]]] = field(
        default_factory=dict
    )

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class _Context:
    decls: dict
    widths: dict[str, int]
    equiv: dict[str, set[str]]
    n: int
    ancillas: int = 0
    anc_keys: int = 0
    max_worklist: int = 0
    orthogonality_checks: int = 0
    # For each ancilla wire, the input-wire control structures under which
    # it holds 1: an ancilla accumulates one entry per call merged into it.
    meanings: dict[int, list[dict[int, int]]] = field(default_factory=dict)

    def new_ancilla(self) -> int:
        self.ancillas += 1
        return self.n + self.ancillas

    def key_budget(self) -> int:
        return (len(self.decls) + 1) * (self.n + 1) ** 2

    def resolve(self, cs: ControlStructure) -> list[dict[int, int]]:
        """Expand a control structure into input-wire structures.

        Ancilla pins are replaced by each structure the ancilla stands
        for; combinations pinning one wire to both bits are unsatisfiable
        and dropped.
        """
        expansions: list[dict[int, int]] = [{}]
        for wire, bit in cs.bits:
            if wire <= self.n:
                alternatives = [{wire: bit}]
            else:
                alternatives = self.meanings.get(wire, [{}])
            merged = []
            for partial in expansions:
                for alt in alternatives:
                    if any(partial.get(w) not in (None, b) for w, b in alt.items()):
                        continue
                    merged.append({**partial, **alt})
            expansions = merged
        return expansions


def _assign_gates(stmt: Assign, l: tuple[int, ...], cs: ControlStructure) -> list[Gate]:
    pos = eval_qubit(stmt.qubit, l)
    if pos < 1:
        raise CompileError(
            "assignment to an out-of-range qubit reached the compiler; "
            "programs are bounds-guarded, so this indicates an internal bug"
        )
    op = stmt.op
    if op.kind == OP_NOT:
        return [ControlledNot(cs, pos)]
    arg = eval_int(op.arg, l)
    matrix = gate_matrix(op, arg)
    label = f"{op.kind}[{format_phase(op.phase)}]({arg})"
    return [controlled_u_gate(cs, (pos,), matrix, label)]


def _call_parts(ctx: _Context, stmt: Call, l: tuple[int, ...]):
    """Evaluate a call's argument list and substituted body."""
    sub_l = eval_set(stmt.set_expr, l)
    decl = ctx.decls[stmt.proc]
    narg = None
    body = decl.body
    if decl.param is not None:
        narg = eval_int(stmt.arg, l)
        body = substitute_int(body, decl.param, narg)
    return sub_l, narg, body


def compr(
    ctx: _Context, stmt: Statement, l: tuple[int, ...], cs: ControlStructure
) -> list[Gate]:
    """Directly compile a statement whose recursive width is zero or whose
    recursive calls each start their own worklist pass."""
    if isinstance(stmt, Skip):
        return []
    if isinstance(stmt, Assign):
        return _assign_gates(stmt, l, cs)
    if isinstance(stmt, Seq):
        return compr(ctx, stmt.first, l, cs) + compr(ctx, stmt.second, l, cs)
    if isinstance(stmt, If):
        branch = stmt.then_branch if eval_bool(stmt.cond, l) else stmt.else_branch
        return compr(ctx, branch, l, cs)
    if isinstance(stmt, QCase):
        pos = eval_qubit(stmt.qubit, l)
        if pos < 1:
            raise CompileError("quantum case on an out-of-range qubit reached the compiler")
        return compr(ctx, stmt.if_zero, l, _extend_control(cs, pos, 0)) + compr(
            ctx, stmt.if_one, l, _extend_control(cs, pos, 1)
        )
    if isinstance(stmt, Call):
        sub_l, _, body = _call_parts(ctx, stmt, l)
        if not sub_l:
            return []
        if ctx.widths[stmt.proc] == 0:
            return compr(ctx, body, sub_l, cs)
        worklist: deque = deque([(cs, body, sub_l)])
        return optimize(ctx, worklist, stmt.proc, AncTable())
    raise TypeError(f"not a statement: {stmt!r}")


def optimize(
    ctx: _Context,
    worklist: deque,
    proc: str,
    anc: AncTable,
) -> list[Gate]:
    """Worklist compilation of one mutually recursive procedure group."""
    group = ctx.equiv[proc]
    c_left: list[Gate] = []
    c_right: list[Gate] = []
    while worklist:
        ctx.max_worklist = max(ctx.max_worklist, len(worklist))
        resolved = [ctx.resolve(cs_i) for cs_i, _, _ in worklist]
        for i, exp_i in enumerate(resolved):
            for exp_j in resolved[i + 1 :]:
                ctx.orthogonality_checks += 1
                disjoint = all(
                    any(m1.get(w) is not None and m1.get(w) != b for w, b in m2.items())
                    for m1 in exp_i
                    for m2 in exp_j
                )
                if not disjoint:
                    raise OrthogonalityError(
                        "two worklist instances share a satisfiable control region; "
                        "merging would corrupt the circuit"
                    )
        cs, stmt, l = worklist.popleft()
        w = statement_width(stmt, group)
        if w == 0:
            c_left += compr(ctx, stmt, l, cs)
            continue
        if isinstance(stmt, Seq):
            if statement_width(stmt.first, group) == 1:
                worklist.append((cs, stmt.first, l))
                c_right = compr(ctx, stmt.second, l, cs) + c_right
            else:
                worklist.append((cs, stmt.second, l))
                c_left += compr(ctx, stmt.first, l, cs)
        elif isinstance(stmt, If):
            branch = stmt.then_branch if eval_bool(stmt.cond, l) else stmt.else_branch
            worklist.append((cs, branch, l))
        elif isinstance(stmt, QCase):
            pos = eval_qubit(stmt.qubit, l)
            if pos < 1:
                raise CompileError("quantum case on an out-of-range qubit reached the compiler")
            w0 = statement_width(stmt.if_zero, group)
            w1 = statement_width(stmt.if_one, group)
            cs0 = _extend_control(cs, pos, 0)
            cs1 = _extend_control(cs, pos, 1)
            if w0 == 1 and w1 == 1:
                worklist.append((cs0, stmt.if_zero, l))
                worklist.append((cs1, stmt.if_one, l))
            elif w1 == 0:
                worklist.append((cs0, stmt.if_zero, l))
                c_right = compr(ctx, stmt.if_one, l, cs1) + c_right
            else:
                worklist.append((cs1, stmt.if_one, l))
                c_right = compr(ctx, stmt.if_zero, l, cs0) + c_right
        elif isinstance(stmt, Call):
            sub_l, narg, body = _call_parts(ctx, stmt, l)
            if not sub_l:
                continue
            if not cs.bits:
                # Nothing controls this instance, so there is nothing to
                # merge under: expand the body directly.
                worklist.append((cs, body, sub_l))
                continue
            key = (stmt.proc, narg, len(sub_l))
            if key in anc.entries:
                a, seen_l = anc.entries[key]
                ctx.meanings[a] = ctx.meanings[a] + ctx.resolve(cs)
                if sub_l == seen_l:
                    c_left.append(ControlledNot(cs, a))
                    c_right = [ControlledNot(cs, a)] + c_right
                else:
                    e = ctx.new_ancilla()
                    ctx.meanings[e] = ctx.resolve(cs)
                    route = routing_swaps(
                        ControlStructure.of({e: 1}), sub_l, seen_l
                    )
                    forward: list[Gate] = [
                        ControlledNot(cs, e),
                        ControlledNot(ControlStructure.of({e: 1}), a),
                    ] + route
                    c_left += forward
                    c_right = list(reversed(forward)) + c_right
            else:
                a = ctx.new_ancilla()
                ctx.meanings[a] = ctx.resolve(cs)
                anc.entries[key] = (a, sub_l)
                ctx.anc_keys += 1
                if len(anc) > ctx.key_budget():
                    raise CompileError(
                        "ancilla table exceeded its polynomial bound; "
                        "this indicates an internal bug"
                    )
                c_left.append(ControlledNot(cs, a))
                c_right = [ControlledNot(cs, a)] + c_right
                worklist.append((ControlStructure.of({a: 1}), body, sub_l))
        else:
            raise CompileError(f"width-1 statement of unexpected shape: {stmt!r}")
    return c_left + c_right


def compile_with_stats(p: Program, n: int, check: bool = True):
    """Compile to a circuit, returning (circuit, statistics dict)."""
    if check:
        verdict = check_pfoq(p)
        if not verdict.accepted:
            raise NotPfoqError(
                "program rejected by the tractability check: "
                + "; ".join(verdict.diagnostics)
            )
    guarded = guard_errors(p)
    relations = call_relations(guarded)
    ctx = _Context(
        decls=guarded.decl_map(),
        widths=widths(guarded, relations),
        equiv=relations.equiv,
        n=n,
    )
    gates = compr(ctx, guarded.main, tuple(range(1, n + 1)), ControlStructure.empty())
    circuit = Circuit(n, ctx.ancillas, tuple(gates))
    stats = {
        "gates": circuit.gate_count(),
        "wires": circuit.total_wires,
        "ancillas": circuit.ancillas,
        "anc_keys": ctx.anc_keys,
        "max_worklist": ctx.max_worklist,
        "orthogonality_checks": ctx.orthogonality_checks,
    }
    return circuit, stats


def compile_program(p: Program, n: int, check: bool = True) -> Circuit:
    return compile_with_stats(p, n, check)[0]


def compile_naive(p: Program, n: int, check: bool = True) -> Circuit:
    """Per-definition expansion without merging, for size comparisons.

    Every call is inlined under its full control structure, so repeated
    recursive calls in quantum-case branches multiply out and the gate
    count can grow exponentially with n.
    """
    if check:
        verdict = check_pfoq(p)
        if not verdict.accepted:
            raise NotPfoqError(
                "program rejected by the tractability check: "
                + "; ".join(verdict.diagnostics)
            )
    guarded = guard_errors(p)
    decls = guarded.decl_map()

    def expand(stmt: Statement, l: tuple[int, ...], cs: ControlStructure) -> list[Gate]:
        if isinstance(stmt, Skip):
            return []
        if isinstance(stmt, Assign):
            return _assign_gates(stmt, l, cs)
        if isinstance(stmt, Seq):
            return expand(stmt.first, l, cs) + expand(stmt.second, l, cs)
        if isinstance(stmt, If):
            branch = stmt.then_branch if eval_bool(stmt.cond, l) else stmt.else_branch
            return expand(branch, l, cs)
        if isinstance(stmt, QCase):
            pos = eval_qubit(stmt.qubit, l)
            return expand(stmt.if_zero, l, cs.extended(pos, 0)) + expand(
                stmt.if_one, l, cs.extended(pos, 1)
            )
        if isinstance(stmt, Call):
            sub_l = eval_set(stmt.set_expr, l)
            if not sub_l:
                return []
            decl = decls[stmt.proc]
            body = decl.body
            if decl.param is not None:
                body = substitute_int(body, decl.param, eval_int(stmt.arg, l))
            return expand(body, sub_l, cs)
        raise TypeError(f"not a statement: {stmt!r}")

    gates = expand(guarded.main, tuple(range(1, n + 1)), ControlStructure.empty())
    return Circuit(n, 0, tuple(gates))


# ---------------------------------------------------------------------------
# Differential check: interpreter vs. compiled circuit.
# ---------------------------------------------------------------------------


@dataclass
class DiffReport:
    n: int
    cases: int
    max_deviation: float
    max_ancilla_residue: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "cases": self.cases,
                "max_deviation": self.max_deviation,
                "max_ancilla_residue": self.max_ancilla_residue,
            }
        )


def diff_check(p: Program, n: int, seed: int = 0, samples: int = 32) -> DiffReport:
    """Compare interpreter and compiled circuit on basis states.

    Exhaustive over all 2^n basis states when that is at most 64, otherwise
    over `samples` basis states drawn at random.
    """
    circuit = compile_program(p, n)
    guarded = guard_errors(p)
    dim = 1 << n
    if dim <= 64:
        basis = list(range(dim))
    else:
        rng = np.random.default_rng(seed)
        basis = sorted(set(int(x) for x in rng.integers(0, dim, size=samples)))
    max_dev = 0.0
    max_residue = 0.0
    for b in basis:
        state = QuantumState.from_bits(format(b, f"0{n}b"))
        expected = run(guarded, state).state.amplitudes
        full = simulate_circuit(circuit, state)
        actual = trace_ancillas(full, circuit.ancillas)
        max_dev = max(max_dev, float(np.max(np.abs(actual - expected))))
        max_residue = max(max_residue, float(ancilla_residue(full, circuit.ancillas)))
    return DiffReport(n, len(basis), max_dev, max_residue)

"""Static analysis: call relations, recursion shape, and the tractability check.

A program is accepted by `check_pfoq` when (1) every call argument between
mutually recursive procedures is a strict syntactic restriction of the
procedure's own set parameter, and (2) no statement can trigger more than
one mutually recursive call on any control-flow path (width at most one).
Accepted programs admit a polynomial-size circuit compilation; the degree
of the bounding polynomial is read off the recursion ranks.

Relations on procedure names:
  - direct: P calls Q somewhere in P's body.
  - reaches: reflexive-transitive closure of direct.
  - equiv: mutual reachability (every procedure is equivalent to itself).
  - strict: reaches but not equiv.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .interpreter import guard_errors
from .syntax import (
    Assign,
    Call,
    FoqError,
    If,
    Program,
    QCase,
    Seq,
    SetRemove,
    SetVar,
    Skip,
    Statement,
    format_set,
    statement_calls,
    wellformed_check,
)

# Counter of elementary relation/width computations, exposed so the test
# suite can check the analysis scales quadratically with program size.
_OP_COUNT = 0


def reset_op_count() -> None:
    global _OP_COUNT
    _OP_COUNT = 0


def op_count() -> int:
    return _OP_COUNT


def _tick(amount: int = 1) -> None:
    global _OP_COUNT
    _OP_COUNT += amount


class NotPfoqError(FoqError):
    """Raised when an operation requires an accepted program but got none."""


@dataclass
class ProcRelations:
    procedures: tuple[str, ...]
    direct: dict[str, set[str]]
    reaches: dict[str, set[str]]
    equiv: dict[str, set[str]]
    strict: dict[str, set[str]]


def call_relations(p: Program) -> ProcRelations:
    names = tuple(d.name for d in p.decls)
    direct: dict[str, set[str]] = {name: set() for name in names}
    for d in p.decls:
        for call in statement_calls(d.body):
            if call.proc in direct[d.name] or call.proc not in direct:
                _tick()
            direct[d.name].add(call.proc)
            _tick()
    # Unknown callees would break the closures; drop them (well-formedness
    # reports them separately).
    for name in names:
        direct[name] &= set(names)

    reaches: dict[str, set[str]] = {}
    for name in names:
        seen = {name}
        frontier = [name]
        while frontier:
            current = frontier.pop()
            for callee in direct[current]:
                _tick()
                if callee not in seen:
                    seen.add(callee)
                    frontier.append(callee)
        reaches[name] = seen

    equiv = {
        name: {other for other in reaches[name] if name in reaches[other]}
        for name in names
    }
    strict = {name: reaches[name] - equiv[name] for name in names}
    _tick(sum(len(reaches[name]) for name in names))
    return ProcRelations(names, direct, reaches, equiv, strict)


# ---------------------------------------------------------------------------
# Well-founded call arguments.
# ---------------------------------------------------------------------------


def _is_strict_restriction(set_expr, param: str) -> bool:
    """True when the argument is the set parameter with >= 1 removals."""
    removals = 0
    base = set_expr
    while isinstance(base, SetRemove):
        removals += 1
        base = base.base
    return removals >= 1 and isinstance(base, SetVar) and base.name == param


def check_wf(p: Program) -> tuple[bool, list[str]]:
    """Check that mutual recursion always shrinks the set argument."""
    diags = wellformed_check(p)
    relations = call_relations(p)
    for d in p.decls:
        for call in statement_calls(d.body):
            _tick()
            if call.proc not in relations.equiv.get(d.name, set()):
                continue
            if not _is_strict_restriction(call.set_expr, d.set_param):
                diags.append(
                    f"procedure {d.name}: recursive call to {call.proc} does not "
                    f"strictly shrink the set parameter "
                    f"(argument {format_set(call.set_expr)})"
                )
    return not diags, diags


# ---------------------------------------------------------------------------
# Width: the maximum number of mutually recursive calls on one path.
# ---------------------------------------------------------------------------


def statement_width(stmt: Statement, group: set[str]) -> int:
    """Maximal number of calls into `group` along one control-flow path."""
    _tick()
    if isinstance(stmt, (Skip, Assign)):
        return 0
    if isinstance(stmt, Seq):
        return statement_width(stmt.first, group) + statement_width(stmt.second, group)
    if isinstance(stmt, If):
        return max(
            statement_width(stmt.then_branch, group),
            statement_width(stmt.else_branch, group),
        )
    if isinstance(stmt, QCase):
        return max(
            statement_width(stmt.if_zero, group),
            statement_width(stmt.if_one, group),
        )
    if isinstance(stmt, Call):
        return 1 if stmt.proc in group else 0
    raise TypeError(f"not a statement: {stmt!r}")


def widths(p: Program, relations: ProcRelations | None = None) -> dict[str, int]:
    relations = relations or call_relations(p)
    return {
        d.name: statement_width(d.body, relations.equiv[d.name]) for d in p.decls
    }


# ---------------------------------------------------------------------------
# Rank and the level-bound degree.
# ---------------------------------------------------------------------------


def ranks(p: Program, relations: ProcRelations | None = None) -> dict[str, int]:
    """rank(P) = 0 if P strictly dominates nothing, else 1 + max over those."""
    relations = relations or call_relations(p)
    memo: dict[str, int] = {}

    def rank_of(name: str) -> int:
        if name in memo:
            return memo[name]
        below = relations.strict[name]
        memo[name] = 1 + max(rank_of(q) for q in below) if below else 0
        return memo[name]

    return {name: rank_of(name) for name in relations.procedures}


@dataclass
class PfoqVerdict:
    accepted: bool
    widths: dict[str, int]
    ranks: dict[str, int]
    degree: int | None
    diagnostics: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "accepted": self.accepted,
                "widths": self.widths,
                "ranks": self.ranks,
                "degree": self.degree,
                "diagnostics": self.diagnostics,
            },
            indent=2,
            sort_keys=True,
        )


def check_pfoq(p: Program) -> PfoqVerdict:
    """Decide membership in the tractable fragment.

    The program is bounds-guarded first, so the verdict matches what the
    compiler actually consumes; guarding never changes the call structure.
    """
    guarded = guard_errors(p)
    ok, diags = check_wf(guarded)
    relations = call_relations(guarded)
    width_map = widths(guarded, relations)
    rank_map = ranks(guarded, relations)
    for name, w in width_map.items():
        if w > 1:
            diags.append(
                f"procedure {name}: {w} mutually recursive calls on one path "
                f"(at most one is allowed)"
            )
    accepted = ok and all(w <= 1 for w in width_map.values())
    degree = None
    if accepted:
        reachable: set[str] = set()
        for call in statement_calls(guarded.main):
            reachable |= relations.reaches.get(call.proc, set())
        max_rank = max((rank_map[name] for name in reachable), default=0)
        degree = max_rank + 1
    return PfoqVerdict(accepted, width_map, rank_map, degree, diags)


def level_bound_degree(p: Program) -> int:
    """Degree of the polynomial bounding the level; requires acceptance."""
    verdict = check_pfoq(p)
    if not verdict.accepted:
        raise NotPfoqError(
            "level bound is only available for accepted programs: "
            + "; ".join(verdict.diagnostics)
        )
    return verdict.degree

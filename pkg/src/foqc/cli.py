"""Command-line interface.

Exit codes: 0 success; 1 analysis rejection (or tolerance exceeded in
`diff`); 2 runtime error terminal; 3 step budget exceeded; 4 I/O, parse,
or schema errors.  The step budget defaults to 10^6 statement rules and
can be overridden with --budget or the FOQC_BUDGET environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import programs
from .algebra import AlgebraError, parse_term, to_pfoq
from .analysis import NotPfoqError, check_pfoq
from .circuit import (
    CircuitSchemaError,
    ancilla_residue,
    export_json,
    import_json,
    simulate_circuit,
)
from .compiler import compile_with_stats, diff_check
from .interpreter import (
    DEFAULT_BUDGET,
    BottomError,
    BudgetExceededError,
    QuantumState,
    run,
)
from .parser import ParseError, parse_program
from .syntax import FoqError, pretty_print
from .transform import invert

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_RUNTIME = 2
EXIT_BUDGET = 3
EXIT_IO = 4

DIFF_TOLERANCE = 1e-9


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _CliIOError(f"cannot read {path}: {exc}") from exc


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    try:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        raise _CliIOError(f"cannot write {path}: {exc}") from exc


class _CliIOError(FoqError):
    pass


def _load_program(path: str):
    return parse_program(_read_text(path), filename=path)


def _budget(args) -> int:
    if args.budget is not None:
        return args.budget
    env = os.environ.get("FOQC_BUDGET")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise _CliIOError(f"FOQC_BUDGET is not an integer: {env!r}") from exc
    return DEFAULT_BUDGET


def _input_state(args) -> QuantumState:
    if args.state is not None:
        return QuantumState.from_bits(args.state)
    if args.amplitudes is not None:
        try:
            return QuantumState.from_json(_read_text(args.amplitudes))
        except (ValueError, TypeError, KeyError) as exc:
            raise _CliIOError(f"bad state JSON: {exc}") from exc
    raise _CliIOError("provide an input state with --state or --amplitudes")


def cmd_check(args) -> int:
    verdict = check_pfoq(_load_program(args.file))
    print(verdict.to_json())
    return EXIT_OK if verdict.accepted else EXIT_REJECTED


def cmd_run(args) -> int:
    program = _load_program(args.file)
    state = _input_state(args)
    outcome = run(program, state, budget=_budget(args))
    print(
        json.dumps(
            {
                "n": outcome.state.n,
                "level": outcome.level,
                "amplitudes": [
                    [float(a.real), float(a.imag)] for a in outcome.state.amplitudes
                ],
            }
        )
    )
    return EXIT_OK


def cmd_level(args) -> int:
    program = _load_program(args.file)
    state = QuantumState.zero(args.n)
    outcome = run(program, state, budget=_budget(args))
    print(json.dumps({"n": args.n, "level": outcome.level}))
    return EXIT_OK


def cmd_invert(args) -> int:
    program = _load_program(args.file)
    _write_output(pretty_print(invert(program)), args.output)
    return EXIT_OK


def cmd_compile(args) -> int:
    program = _load_program(args.file)
    circuit, stats = compile_with_stats(program, args.n)
    _write_output(export_json(circuit), args.output)
    if args.stats:
        print(
            json.dumps(
                {
                    key: stats[key]
                    for key in ("gates", "wires", "ancillas", "anc_keys", "max_worklist")
                }
            ),
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_simulate(args) -> int:
    circuit = import_json(_read_text(args.file))
    state = _input_state(args)
    full = simulate_circuit(circuit, state)
    print(
        json.dumps(
            {
                "n": circuit.n,
                "ancillas": circuit.ancillas,
                "amplitudes": [[float(a.real), float(a.imag)] for a in full],
                "ancilla_residue": float(ancilla_residue(full, circuit.ancillas)),
            }
        )
    )
    return EXIT_OK


def cmd_diff(args) -> int:
    program = _load_program(args.file)
    report = diff_check(program, args.n, seed=args.seed)
    print(report.to_json())
    ok = (
        report.max_deviation < DIFF_TOLERANCE
        and report.max_ancilla_residue < DIFF_TOLERANCE
    )
    return EXIT_OK if ok else EXIT_REJECTED


def cmd_algebra(args) -> int:
    term = parse_term(_read_text(args.file))
    _write_output(pretty_print(to_pfoq(term)), args.output)
    return EXIT_OK


def cmd_examples(args) -> int:
    directory = Path(args.directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name, source in programs.EXAMPLES.items():
            (directory / name).write_text(source)
    except OSError as exc:
        raise _CliIOError(f"cannot write examples: {exc}") from exc
    print("\n".join(str(directory / name) for name in programs.EXAMPLES))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foqc",
        description="Toolchain for a first-order quantum programming language.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("check", cmd_check, "static analysis verdict as JSON")
    p.add_argument("file")

    p = add("run", cmd_run, "interpret a program on an input state")
    p.add_argument("file")
    p.add_argument("--state", help="basis input as a bitstring, e.g. 0110")
    p.add_argument("--amplitudes", help="path to a state JSON file")
    p.add_argument("--budget", type=int, default=None, help="statement-step budget")

    p = add("level", cmd_level, "mutual-call nesting level on n qubits")
    p.add_argument("file")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--budget", type=int, default=None)

    p = add("invert", cmd_invert, "emit the program computing the adjoint")
    p.add_argument("file")
    p.add_argument("-o", "--output", default=None)

    p = add("compile", cmd_compile, "compile an accepted program to a circuit")
    p.add_argument("file")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--stats", action="store_true", help="emit statistics on stderr")

    p = add("simulate", cmd_simulate, "simulate a circuit JSON file")
    p.add_argument("file")
    p.add_argument("--state", help="basis input as a bitstring")
    p.add_argument("--amplitudes", help="path to a state JSON file")

    p = add("diff", cmd_diff, "compare interpreter against compiled circuit")
    p.add_argument("file")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = add("algebra", cmd_algebra, "translate an algebra term file to a program")
    p.add_argument("file")
    p.add_argument("-o", "--output", default=None)

    p = add("examples", cmd_examples, "write the bundled example programs")
    p.add_argument("directory", nargs="?", default=".")

    return parser


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, CircuitSchemaError, AlgebraError, _CliIOError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NotPfoqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except BottomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (FoqError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))

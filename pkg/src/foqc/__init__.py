"""foqc: a toolchain for a first-order quantum programming language.

Modules:
  - syntax: AST, phase DSL, pretty printer
  - parser: .foq surface syntax
  - interpreter: exact statevector semantics with levels and bounds guards
  - analysis: call relations, recursion widths/ranks, tractability verdict
  - transform: program inversion
  - circuit: controlled-gate IR, simulator, merging primitive, JSON
  - compiler: worklist compilation with ancilla-table merging
  - algebra: function-algebra terms, evaluator, and program translation
  - programs: bundled example programs
  - cli: the `foqc` command
"""

from .analysis import PfoqVerdict, check_pfoq, level_bound_degree
from .circuit import Circuit, ControlStructure, export_json, import_json, simulate_circuit
from .compiler import compile_program, compile_with_stats, diff_check
from .interpreter import QuantumState, eval_program, guard_errors, level_of, run
from .parser import parse_program
from .syntax import Program, pretty_print
from .transform import invert

__all__ = [
    "PfoqVerdict",
    "check_pfoq",
    "level_bound_degree",
    "Circuit",
    "ControlStructure",
    "export_json",
    "import_json",
    "simulate_circuit",
    "compile_program",
    "compile_with_stats",
    "diff_check",
    "QuantumState",
    "eval_program",
    "guard_errors",
    "level_of",
    "run",
    "parse_program",
    "Program",
    "pretty_print",
    "invert",
]

__version__ = "0.1.0"

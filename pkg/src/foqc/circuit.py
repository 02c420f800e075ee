"""Controlled-gate circuit representation, simulation, and serialization.

Circuits act on n input wires plus ancilla wires numbered n+1 … n+ancillas,
each created in |0>.  Every gate carries a control structure: a partial map
from wires to required bit values; the gate acts only on the basis states
satisfying all controls.  Two control structures are orthogonal when some
wire is pinned to different bits in both — orthogonal regions are never
simultaneously active, which is what makes gate merging sound.

Gate kinds:
  - ControlledU: a 2^m x 2^m unitary on m target wires.
  - ControlledNot: an X gate on one target wire.
  - ControlledSwap: swaps m disjoint wire pairs simultaneously.

The JSON form is canonical: fixed key order, controls sorted by wire, no
whitespace variation — identical circuits serialize to identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .syntax import FoqError

MATRIX_TOLERANCE = 1e-12


class CircuitError(FoqError):
    """Invalid circuit construction (conflicting controls, bad wires)."""


class CircuitSchemaError(FoqError):
    """Circuit JSON does not match the expected schema."""


@dataclass(frozen=True)
class ControlStructure:
    """A partial map wire -> required bit, stored sorted by wire."""

    bits: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        wires = [w for w, _ in self.bits]
        if any(w < 1 for w in wires):
            raise CircuitError("control wires are 1-based positive integers")
        if len(set(wires)) != len(wires):
            raise CircuitError("duplicate wire in control structure")
        if any(b not in (0, 1) for _, b in self.bits):
            raise CircuitError("control bits must be 0 or 1")
        if list(self.bits) != sorted(self.bits):
            object.__setattr__(self, "bits", tuple(sorted(self.bits)))

    @classmethod
    def empty(cls) -> "ControlStructure":
        return cls(())

    @classmethod
    def of(cls, mapping: dict[int, int]) -> "ControlStructure":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[int, int]:
        return dict(self.bits)

    @property
    def wires(self) -> frozenset[int]:
        return frozenset(w for w, _ in self.bits)

    def get(self, wire: int) -> int | None:
        for w, b in self.bits:
            if w == wire:
                return b
        return None

    def extended(self, wire: int, bit: int) -> "ControlStructure":
        """This structure with one more pinned wire; rejects conflicts."""
        current = self.get(wire)
        if current is not None:
            if current != bit:
                raise CircuitError(f"wire {wire} already pinned to {current}")
            return self
        return ControlStructure(tuple(sorted(self.bits + ((wire, bit),))))

    def orthogonal(self, other: "ControlStructure") -> bool:
        """True when no basis state satisfies both structures."""
        theirs = other.as_dict()
        return any(w in theirs and theirs[w] != b for w, b in self.bits)


def orthogonal(cs1: ControlStructure, cs2: ControlStructure) -> bool:
    return cs1.orthogonal(cs2)


# ---------------------------------------------------------------------------
# Gates.
# ---------------------------------------------------------------------------


def _check_wires(controls: ControlStructure, targets: tuple[int, ...]) -> None:
    if any(t < 1 for t in targets):
        raise CircuitError("target wires are 1-based positive integers")
    if len(set(targets)) != len(targets):
        raise CircuitError(f"duplicate target wire in {targets}")
    overlap = controls.wires & set(targets)
    if overlap:
        raise CircuitError(f"control and target wires overlap: {sorted(overlap)}")


@dataclass(frozen=True)
class ControlledU:
    """A 2^m x 2^m unitary on m target wires, gated by a control structure.

    The matrix is stored as a tuple of tuples of complex so gates are
    hashable and comparable; targets[0] is the most significant qubit of
    the matrix's basis ordering.
    """

    controls: ControlStructure
    targets: tuple[int, ...]
    matrix: tuple[tuple[complex, ...], ...]
    label: str | None = None

    def __post_init__(self) -> None:
        _check_wires(self.controls, self.targets)
        dim = 1 << len(self.targets)
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (dim, dim):
            raise CircuitError(
                f"matrix shape {m.shape} does not fit {len(self.targets)} target wire(s)"
            )
        if np.max(np.abs(m.conj().T @ m - np.eye(dim))) > 1e-9:
            raise CircuitError("matrix is not unitary")

    def matrix_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=complex)

    def inverse(self) -> "ControlledU":
        adj = self.matrix_array().conj().T
        label = None
        if self.label is not None:
            label = self.label[:-1] if self.label.endswith("†") else self.label + "†"
        return controlled_u_gate(self.controls, self.targets, adj, label)


def controlled_u_gate(
    controls: ControlStructure,
    targets: tuple[int, ...],
    matrix: np.ndarray,
    label: str | None = None,
) -> ControlledU:
    m = np.asarray(matrix, dtype=complex)
    return ControlledU(controls, tuple(targets), tuple(map(tuple, m)), label)


@dataclass(frozen=True)
class ControlledNot:
    controls: ControlStructure
    target: int

    def __post_init__(self) -> None:
        _check_wires(self.controls, (self.target,))

    def inverse(self) -> "ControlledNot":
        return self


@dataclass(frozen=True)
class ControlledSwap:
    """Simultaneously swap the wire pairs (left[i], right[i])."""

    controls: ControlStructure
    left: tuple[int, ...]
    right: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.left) != len(self.right):
            raise CircuitError("swap wire lists must have equal length")
        swapped = self.left + self.right
        _check_wires(self.controls, swapped)

    def inverse(self) -> "ControlledSwap":
        return self


Gate = ControlledU | ControlledNot | ControlledSwap


def gate_wires(gate: Gate) -> frozenset[int]:
    if isinstance(gate, ControlledU):
        return gate.controls.wires | set(gate.targets)
    if isinstance(gate, ControlledNot):
        return gate.controls.wires | {gate.target}
    return gate.controls.wires | set(gate.left) | set(gate.right)


# ---------------------------------------------------------------------------
# Circuits.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Circuit:
    n: int  # input wires 1..n
    ancillas: int  # ancilla wires n+1..n+ancillas, created in |0>
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        total = self.n + self.ancillas
        for gate in self.gates:
            highest = max(gate_wires(gate), default=1)
            if highest > total:
                raise CircuitError(
                    f"gate touches wire {highest} but the circuit has {total} wires"
                )

    @property
    def total_wires(self) -> int:
        return self.n + self.ancillas

    def gate_count(self) -> int:
        """Gates, with a multi-pair swap counted once per swapped pair."""
        return sum(
            len(g.left) if isinstance(g, ControlledSwap) else 1 for g in self.gates
        )

    def compose(self, other: "Circuit") -> "Circuit":
        if self.n != other.n:
            raise CircuitError("composed circuits must share the input wire count")
        return Circuit(
            self.n, max(self.ancillas, other.ancillas), self.gates + other.gates
        )

    def inverse(self) -> "Circuit":
        return Circuit(
            self.n, self.ancillas, tuple(g.inverse() for g in reversed(self.gates))
        )


def circuit_size(c: Circuit) -> int:
    """Size metric: gate count plus wire count (ancillas included)."""
    return c.gate_count() + c.total_wires


def elementary_gate_count(c: Circuit) -> int:
    """Gate count after decomposing multi-controlled gates.

    A gate with c >= 2 controls costs 2(c - 1) + 1 elementary gates (the
    standard ancilla-chain decomposition into two-control gates); gates
    with at most one control cost 1.  Multi-pair swaps count per pair.
    """
    total = 0
    for g in c.gates:
        controls = len(g.controls.bits)
        units = len(g.left) if isinstance(g, ControlledSwap) else 1
        per_unit = 2 * (controls - 1) + 1 if controls >= 2 else 1
        total += units * per_unit
    return total


def size_report(c: Circuit) -> dict[str, int]:
    return {
        "gates": c.gate_count(),
        "input_wires": c.n,
        "ancillas": c.ancillas,
        "wires": c.total_wires,
        "size": circuit_size(c),
    }


def controlled_gate(
    matrix: np.ndarray,
    cs: ControlStructure,
    targets: int | tuple[int, ...],
    n: int | None = None,
    label: str | None = None,
) -> Circuit:
    """A one-gate circuit applying `matrix` on `targets` under controls `cs`."""
    if isinstance(targets, int):
        targets = (targets,)
    gate = controlled_u_gate(cs, targets, matrix, label)
    wires = max(gate_wires(gate), default=1) if n is None else n
    return Circuit(wires, 0, (gate,))


# ---------------------------------------------------------------------------
# Routing: move the contents of src wires into dst wires by transpositions.
# ---------------------------------------------------------------------------


def routing_swaps(
    cs: ControlStructure, src: tuple[int, ...], dst: tuple[int, ...]
) -> list[ControlledSwap]:
    """Single-pair controlled swaps carrying src[i]'s content to dst[i].

    src and dst may overlap; the decomposition into transpositions tracks
    which wire currently holds each payload.  The reversed gate list undoes
    the permutation exactly.
    """
    if len(src) != len(dst):
        raise CircuitError("routing requires equally long wire lists")
    holder = {i: w for i, w in enumerate(src)}  # payload index -> current wire
    at = {w: i for i, w in enumerate(src)}  # current wire -> payload index
    gates: list[ControlledSwap] = []
    for i in range(len(src)):
        w_from, w_to = holder[i], dst[i]
        if w_from == w_to:
            continue
        gates.append(ControlledSwap(cs, (w_from,), (w_to,)))
        displaced = at.get(w_to)
        at[w_from] = displaced
        if displaced is not None:
            holder[displaced] = w_from
        else:
            del at[w_from]
        at[w_to] = i
        holder[i] = w_to
    return gates


# ---------------------------------------------------------------------------
# Gate merging: k orthogonally-controlled instances of one unitary collapse
# into a single ancilla-controlled instance plus fan-in and routing.
# ---------------------------------------------------------------------------


def merge_gates(
    instances: list[tuple[ControlStructure, tuple[int, ...]]],
    matrix: np.ndarray,
    n: int,
    label: str | None = None,
) -> Circuit:
    """Merge controlled instances (cs_i, l_i) of one unitary into one gate.

    Construction: fresh ancillas a_1..a_k; NOT(cs_i, a_i) marks which
    instance fires; NOT(a_i=1, a_k) for i<k fans the mark into a_k; swaps
    controlled on a_i route l_i's wires into l_k's; a single ControlledU on
    (a_k=1, l_k) applies the unitary; the mirrored prefix restores ancillas
    and wire positions.  Every ancilla returns to |0> on basis inputs.
    """
    if not instances:
        raise CircuitError("merge_gates requires at least one instance")
    arity = len(instances[0][1])
    for _, l in instances:
        if len(l) != arity:
            raise CircuitError("all merged instances must have equal arity")
    for i, (cs_i, _) in enumerate(instances):
        for cs_j, _ in instances[i + 1 :]:
            if not cs_i.orthogonal(cs_j):
                raise CircuitError("merged control structures must be pairwise orthogonal")
    k = len(instances)
    anc = [n + i + 1 for i in range(k)]
    a_k = anc[-1]
    l_k = tuple(instances[-1][1])

    prefix: list[Gate] = []
    for (cs_i, _), a_i in zip(instances, anc):
        prefix.append(ControlledNot(cs_i, a_i))
    for a_i in anc[:-1]:
        prefix.append(ControlledNot(ControlStructure.of({a_i: 1}), a_k))
    for (_, l_i), a_i in zip(instances[:-1], anc[:-1]):
        prefix.extend(routing_swaps(ControlStructure.of({a_i: 1}), tuple(l_i), l_k))

    u_gate = controlled_u_gate(ControlStructure.of({a_k: 1}), l_k, matrix, label)
    gates = tuple(prefix) + (u_gate,) + tuple(reversed(prefix))
    return Circuit(n, k, gates)


# ---------------------------------------------------------------------------
# Simulation.
# ---------------------------------------------------------------------------


def pad_ancillas(psi: np.ndarray, m: int) -> np.ndarray:
    """chi_m: append m ancilla wires in |0> after the existing wires."""
    zero = np.zeros(1 << m, dtype=complex)
    zero[0] = 1.0
    return np.kron(np.asarray(psi, dtype=complex).reshape(-1), zero)


def trace_ancillas(psi: np.ndarray, m: int) -> np.ndarray:
    """xi_m: sum out the trailing m wires (exact when they are unentangled)."""
    full = np.asarray(psi, dtype=complex).reshape(-1)
    return full.reshape(-1, 1 << m).sum(axis=1)


def ancilla_residue(psi: np.ndarray, m: int) -> float:
    """Probability mass with any of the trailing m wires not in |0>."""
    full = np.asarray(psi, dtype=complex).reshape(-1, 1 << m)
    total = float(np.sum(np.abs(full) ** 2))
    clean = float(np.sum(np.abs(full[:, 0]) ** 2))
    return max(0.0, total - clean)


def _satisfied(cs: ControlStructure, total: int, idx: np.ndarray) -> np.ndarray:
    sat = np.ones(idx.shape, dtype=bool)
    for w, b in cs.bits:
        sat &= ((idx >> (total - w)) & 1) == b
    return sat


def apply_gate(psi: np.ndarray, total: int, gate: Gate) -> np.ndarray:
    idx = np.arange(1 << total)
    sat = _satisfied(gate.controls, total, idx)
    out = psi.copy()
    if isinstance(gate, ControlledNot):
        flipped = idx ^ (1 << (total - gate.target))
        out[sat] = psi[flipped[sat]]
        return out
    if isinstance(gate, ControlledSwap):
        src = idx.copy()
        for a, b in zip(gate.left, gate.right):
            bit_a = (idx >> (total - a)) & 1
            bit_b = (idx >> (total - b)) & 1
            diff = bit_a ^ bit_b
            src ^= (diff << (total - a)) | (diff << (total - b))
        out[sat] = psi[src[sat]]
        return out
    if isinstance(gate, ControlledU):
        m = len(gate.targets)
        matrix = gate.matrix_array()
        base_sel = sat.copy()
        for t in gate.targets:
            base_sel &= ((idx >> (total - t)) & 1) == 0
        base = idx[base_sel]
        offsets = [
            sum(((j >> (m - 1 - i)) & 1) << (total - gate.targets[i]) for i in range(m))
            for j in range(1 << m)
        ]
        columns = [psi[base + off] for off in offsets]
        for j_out, off in enumerate(offsets):
            acc = np.zeros(base.shape, dtype=complex)
            for j_in in range(1 << m):
                acc += matrix[j_out, j_in] * columns[j_in]
            out[base + off] = acc
        return out
    raise TypeError(f"not a gate: {gate!r}")


def simulate_circuit(c: Circuit, psi) -> np.ndarray:
    """Run the circuit; returns the state over all n + ancillas wires.

    Accepts a QuantumState or amplitude array over either the n input
    wires (ancillas are padded in |0>) or all wires.
    """
    amps = np.asarray(getattr(psi, "amplitudes", psi), dtype=complex).reshape(-1)
    if amps.shape[0] == 1 << c.n:
        amps = pad_ancillas(amps, c.ancillas)
    elif amps.shape[0] != 1 << c.total_wires:
        raise CircuitError(
            f"state has {amps.shape[0]} amplitudes; expected 2^{c.n} or 2^{c.total_wires}"
        )
    for gate in c.gates:
        amps = apply_gate(amps, c.total_wires, gate)
    return amps


# ---------------------------------------------------------------------------
# Canonical JSON serialization.
# ---------------------------------------------------------------------------


def _matrix_to_json(matrix: tuple[tuple[complex, ...], ...]) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def _gate_to_json(gate: Gate) -> dict:
    controls = [[w, b] for w, b in gate.controls.bits]
    if isinstance(gate, ControlledU):
        obj = {
            "kind": "cu",
            "controls": controls,
            "targets": list(gate.targets),
            "matrix": _matrix_to_json(gate.matrix),
        }
        if gate.label is not None:
            obj["label"] = gate.label
        return obj
    if isinstance(gate, ControlledNot):
        return {"kind": "cnot", "controls": controls, "targets": [gate.target]}
    # cswap targets: left wires then right wires, two equal halves.
    return {
        "kind": "cswap",
        "controls": controls,
        "targets": list(gate.left) + list(gate.right),
    }


def export_json(c: Circuit) -> str:
    obj = {
        "n": c.n,
        "ancillas": c.ancillas,
        "gates": [_gate_to_json(g) for g in c.gates],
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _gate_from_json(obj: dict) -> Gate:
    try:
        kind = obj["kind"]
        controls = ControlStructure(tuple((int(w), int(b)) for w, b in obj["controls"]))
        targets = [int(t) for t in obj["targets"]]
    except (KeyError, TypeError, ValueError, CircuitError) as exc:
        raise CircuitSchemaError(f"malformed gate object: {exc}") from exc
    if kind == "cnot":
        if len(targets) != 1:
            raise CircuitSchemaError("cnot takes exactly one target")
        return ControlledNot(controls, targets[0])
    if kind == "cswap":
        if len(targets) % 2:
            raise CircuitSchemaError("cswap targets must split into two equal halves")
        half = len(targets) // 2
        return ControlledSwap(controls, tuple(targets[:half]), tuple(targets[half:]))
    if kind == "cu":
        try:
            matrix = np.array(
                [[complex(re, im) for re, im in row] for row in obj["matrix"]]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CircuitSchemaError(f"malformed cu matrix: {exc}") from exc
        return controlled_u_gate(controls, tuple(targets), matrix, obj.get("label"))
    raise CircuitSchemaError(f"unknown gate kind {kind!r}")


def import_json(text: str) -> Circuit:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitSchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or not {"n", "ancillas", "gates"} <= set(obj):
        raise CircuitSchemaError("circuit JSON needs keys n, ancillas, gates")
    try:
        gates = tuple(_gate_from_json(g) for g in obj["gates"])
        return Circuit(int(obj["n"]), int(obj["ancillas"]), gates)
    except CircuitError as exc:
        raise CircuitSchemaError(str(exc)) from exc

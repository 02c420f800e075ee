import json
import math

import numpy as np
import pytest

from foqc.circuit import (
    Circuit,
    CircuitError,
    CircuitSchemaError,
    ControlStructure,
    ControlledNot,
    ControlledSwap,
    ControlledU,
    ancilla_residue,
    apply_gate,
    circuit_size,
    controlled_gate,
    controlled_u_gate,
    elementary_gate_count,
    export_json,
    gate_wires,
    import_json,
    merge_gates,
    orthogonal,
    pad_ancillas,
    routing_swaps,
    simulate_circuit,
    trace_ancillas,
)

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def basis(total, index):
    psi = np.zeros(1 << total, dtype=complex)
    psi[index] = 1.0
    return psi


def test_control_structure_normalization_and_lookup():
    cs = ControlStructure.of({3: 1, 1: 0})
    assert cs.bits == ((1, 0), (3, 1))
    assert cs.get(3) == 1 and cs.get(2) is None
    assert cs.wires == frozenset({1, 3})


def test_control_structure_validation():
    with pytest.raises(CircuitError):
        ControlStructure.of({0: 1})
    with pytest.raises(CircuitError):
        ControlStructure.of({1: 2})


def test_extension_conflict_detected():
    cs = ControlStructure.of({1: 0})
    assert cs.extended(2, 1).as_dict() == {1: 0, 2: 1}
    with pytest.raises(CircuitError):
        cs.extended(1, 1)


def test_orthogonality():
    a = ControlStructure.of({1: 0, 2: 1})
    b = ControlStructure.of({1: 1})
    c = ControlStructure.of({3: 0})
    assert orthogonal(a, b) and orthogonal(b, a)
    assert not orthogonal(a, c)
    assert not orthogonal(a, a)  # identical structures can both fire
    assert not orthogonal(ControlStructure.empty(), a)


def test_controlled_u_requires_unitary():
    with pytest.raises(CircuitError):
        controlled_u_gate(ControlStructure.empty(), (1,), np.array([[1, 0], [0, 2]]))


def test_gate_wire_disjointness():
    with pytest.raises(CircuitError):
        ControlledNot(ControlStructure.of({1: 1}), 1)
    with pytest.raises(CircuitError):
        ControlledSwap(ControlStructure.empty(), (1,), (1,))


def test_apply_cnot_and_cswap():
    # CNOT with control wire 1 (most significant of 2) and target 2.
    psi = apply_gate(basis(2, 0b10), 2, ControlledNot(ControlStructure.of({1: 1}), 2))
    assert np.allclose(psi, basis(2, 0b11))
    # Swap wires 1 and 2 of |10> gives |01>.
    psi = apply_gate(basis(2, 0b10), 2, ControlledSwap(ControlStructure.empty(), (1,), (2,)))
    assert np.allclose(psi, basis(2, 0b01))


def test_apply_controlled_u_matches_dense_matrix():
    rng = np.random.default_rng(5)
    gate = controlled_u_gate(ControlStructure.of({1: 1}), (2,), H)
    dense = np.kron(np.diag([1, 0]), np.eye(2)) + np.kron(np.diag([0, 1]), H)
    for _ in range(4):
        amp = rng.normal(size=4) + 1j * rng.normal(size=4)
        amp /= np.linalg.norm(amp)
        assert np.allclose(apply_gate(amp, 2, gate), dense @ amp, atol=1e-12)


def test_gate_inverses():
    u = controlled_u_gate(ControlStructure.of({1: 1}), (2,), np.diag([1, 1j]), "S")
    assert np.allclose(
        np.array(u.inverse().matrix), np.conjugate(np.array(u.matrix)).T
    )
    assert u.inverse().label == "S†" and u.inverse().inverse().label == "S"
    swap = ControlledSwap(ControlStructure.empty(), (1,), (2,))
    assert swap.inverse() == swap


def test_circuit_inverse_undoes_circuit():
    c = Circuit(
        2,
        0,
        (
            controlled_u_gate(ControlStructure.empty(), (1,), H),
            ControlledNot(ControlStructure.of({1: 1}), 2),
        ),
    )
    rng = np.random.default_rng(9)
    amp = rng.normal(size=4) + 1j * rng.normal(size=4)
    amp /= np.linalg.norm(amp)
    out = simulate_circuit(c.compose(c.inverse()), amp)
    assert np.allclose(out, amp, atol=1e-12)


def test_gate_and_size_metrics():
    gates = (
        ControlledNot(ControlStructure.of({1: 1, 2: 1, 3: 1}), 4),
        ControlledSwap(ControlStructure.empty(), (1, 2), (3, 4)),
    )
    c = Circuit(4, 1, gates)
    assert c.gate_count() == 3  # cswap counts per pair
    assert c.total_wires == 5
    assert circuit_size(c) == 8
    # Three controls decompose into 2*(3-1)+1 = 5 elementary gates.
    assert elementary_gate_count(c) == 5 + 2


def test_routing_swaps_route_and_reverse():
    cs = ControlStructure.empty()
    src, dst = (1, 2, 3), (3, 4, 1)
    gates = routing_swaps(cs, src, dst)
    psi = basis(4, 0b1100)  # wires 1,2 set
    for g in gates:
        psi = apply_gate(psi, 4, g)
    # payloads 1,1,0 from wires 1,2,3 now sit on wires 3,4,1.
    assert np.allclose(psi, basis(4, 0b0011))
    for g in reversed(gates):
        psi = apply_gate(psi, 4, g)
    assert np.allclose(psi, basis(4, 0b1100))


def test_routing_rejects_mismatched_lengths():
    with pytest.raises(CircuitError):
        routing_swaps(ControlStructure.empty(), (1, 2), (3,))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_merge_matches_sequential_application(k):
    n = 4
    # k pairwise-orthogonal controls on wire 1/2 and distinct targets.
    patterns = [{1: 0}, {1: 1, 2: 0}, {1: 1, 2: 1}][:k]
    targets = [(3,), (4,), (3,)][:k]
    instances = [(ControlStructure.of(p), t) for p, t in zip(patterns, targets)]
    merged = merge_gates(instances, H, n, "H")
    sequential = Circuit(
        n,
        0,
        tuple(controlled_u_gate(cs, t, H, "H") for cs, t in instances),
    )
    for index in range(1 << n):
        psi = basis(n, index)
        out_merged = trace_ancillas(simulate_circuit(merged, psi), merged.ancillas)
        out_seq = simulate_circuit(sequential, psi)
        assert np.allclose(out_merged, out_seq, atol=1e-12)
        residue = ancilla_residue(
            simulate_circuit(merged, psi), merged.ancillas
        )
        assert residue < 1e-12  # ancillas restored to |0>


def test_merge_uses_one_copy_of_the_unitary():
    instances = [
        (ControlStructure.of({1: 0}), (2,)),
        (ControlStructure.of({1: 1}), (3,)),
    ]
    merged = merge_gates(instances, H, 3, "H")
    assert sum(isinstance(g, ControlledU) for g in merged.gates) == 1
    assert merged.ancillas == 2


def test_merge_rejects_non_orthogonal_instances():
    with pytest.raises(CircuitError):
        merge_gates(
            [
                (ControlStructure.of({1: 0}), (2,)),
                (ControlStructure.of({2: 0}), (3,)),
            ],
            H,
            3,
        )


def test_pad_and_trace_ancillas():
    psi = np.array([0.6, 0.8j])
    padded = pad_ancillas(psi, 2)
    assert padded.shape == (8,)
    assert np.allclose(trace_ancillas(padded, 2), psi)
    assert ancilla_residue(padded, 2) == 0.0


def test_simulate_accepts_padded_or_plain_input():
    c = Circuit(1, 1, (ControlledNot(ControlStructure.empty(), 1),))
    plain = simulate_circuit(c, np.array([1.0, 0.0]))
    padded = simulate_circuit(c, pad_ancillas(np.array([1.0, 0.0]), 1))
    assert np.allclose(plain, padded)


def test_export_json_is_canonical():
    c = Circuit(
        2,
        0,
        (
            controlled_u_gate(ControlStructure.of({1: 1}), (2,), np.diag([1, 1j]), "S"),
            ControlledSwap(ControlStructure.empty(), (1,), (2,)),
        ),
    )
    text = export_json(c)
    assert text == json.dumps(json.loads(text), sort_keys=True, separators=(",", ":"))
    payload = json.loads(text)
    kinds = [g["kind"] for g in payload["gates"]]
    assert kinds == ["cu", "cswap"]
    # cswap targets serialize as left half then right half, flattened.
    assert payload["gates"][1]["targets"] == [1, 2]


def test_json_round_trip(qft):
    from foqc.compiler import compile_program

    c = compile_program(qft, 3)
    assert import_json(export_json(c)) == c


def test_import_json_schema_errors():
    with pytest.raises(CircuitSchemaError):
        import_json("{")
    with pytest.raises(CircuitSchemaError):
        import_json(json.dumps({"n": 1, "ancillas": 0}))
    with pytest.raises(CircuitSchemaError):
        import_json(
            json.dumps(
                {
                    "n": 1,
                    "ancillas": 0,
                    "gates": [{"kind": "mystery", "controls": [], "targets": [1]}],
                }
            )
        )


def test_gate_wires_helper():
    gate = ControlledSwap(ControlStructure.of({1: 1}), (2,), (3,))
    assert gate_wires(gate) == frozenset({1, 2, 3})
    c = controlled_gate(X, ControlStructure.of({1: 0}), 2)
    assert c.n == 2 and c.gate_count() == 1

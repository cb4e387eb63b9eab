import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _gen import circuits, random_circuit, random_unitary_sequence
from qstack.compiler import (
    CompileOptions,
    Placement,
    Topology,
    compile_circuit,
    compile_report,
    decompose,
    logical_amplitudes,
    place_initial,
    route,
    schedule_asap,
)
from qstack.errors import NotRoutedError, TooManyQubitsError
from qstack.ir import Circuit, Gate, Opcode
from qstack.qasm import parse, print_circuit
from qstack.simulator import statevector

BELL = parse("version 1.0\nqubits 2\nh q[0]\ncnot q[0], q[1]\nmeasure q[0]")


def g(op, *qubits, angle=None):
    return Gate(op, qubits, angle)


def ghz_chain(n, reverse=False):
    pairs = [(0, n - 1)] + [(q, q + 1) for q in range(n - 2)] if reverse else [(q, q + 1) for q in range(n - 1)]
    return Circuit.from_gates(n, [g(Opcode.H, 0)] + [g(Opcode.CNOT, a, b) for a, b in pairs])


def equivalent(original: Circuit, scheduled, tol=1e-10) -> bool:
    expected = statevector(original).amplitudes
    physical = statevector(scheduled.circuit).amplitudes
    got = logical_amplitudes(physical, scheduled.final_placement)
    # every amplitude outside the logical subspace must vanish
    return np.max(np.abs(got - expected)) < tol and abs(np.linalg.norm(got) - 1) < tol


def legal(scheduled, topo) -> bool:
    busy: dict[int, list[tuple[int, int]]] = {}
    for start, end, gate in scheduled.timed_gates(topo):
        if len(gate.qubits) == 2 and not topo.adjacent(*gate.qubits):
            return False
        for q in gate.qubits:
            for s, e in busy.get(q, []):
                if start < e and s < end:
                    return False
            busy.setdefault(q, []).append((start, end))
    return True


# ---------------------------------------------------------------- topology


def test_grid_edges_row_major():
    t = Topology.grid(2, 3)
    assert t.num_positions == 6
    assert t.edges == {(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)}
    assert t.distances[0, 5] == 3


@pytest.mark.parametrize(
    "bad",
    [dict(num_positions=2, edges=frozenset({(0, 0)})), dict(num_positions=2, edges=frozenset({(0, 2)})),
     dict(num_positions=3, edges=frozenset({(0, 1)}))],
)
def test_topology_validation(bad):
    with pytest.raises(ValueError):
        Topology(**bad)


def test_topology_from_dict_forms(tmp_path):
    a = Topology.from_dict({"grid": {"rows": 2, "cols": 2}})
    b = Topology.from_dict({"grid": [2, 2]})
    c = Topology.from_dict({"edges": [[0, 1], [1, 3], [3, 2], [2, 0]]})
    assert a.edges == b.edges == c.edges
    d = Topology.from_dict({"edges": [[0, 1], [1, 2]], "durations": {"cnot": 5, "H": 3}, "native_swap": False})
    assert d.duration(Opcode.CNOT) == 5 and d.duration(Opcode.H) == 3 and d.duration(Opcode.X) == 1
    assert d.duration(Opcode.MEASURE_Z) == 4 and d.duration(Opcode.CZ) == 2
    assert not d.native_swap
    path = tmp_path / "topo.json"
    path.write_text(json.dumps({"grid": {"rows": 1, "cols": 4}}))
    assert Topology.load(path).edges == Topology.line(4).edges
    for bad in ({}, {"edges": [[0, 1, 2]]}, {"grid": [2, 2], "durations": {"nop": 1}}, {"grid": [2, 2], "native_swap": "yes"}):
        with pytest.raises((ValueError, KeyError, TypeError)):
            Topology.from_dict(bad)


# ---------------------------------------------------------------- decompose


def test_swap_decomposition_without_native_swap():
    c = Circuit.from_gates(2, [g(Opcode.SWAP, 0, 1)])
    out = decompose(c, native_swap=False)
    assert [(x.opcode, x.qubits) for x in out.gates()] == [
        (Opcode.CNOT, (0, 1)), (Opcode.CNOT, (1, 0)), (Opcode.CNOT, (0, 1))
    ]


def test_decompose_is_fixed_point_without_swap_or_mcz():
    c = random_circuit(np.random.default_rng(0), 4, 10, ops=[Opcode.H, Opcode.CNOT, Opcode.RZ, Opcode.SWAP])
    assert decompose(c) is c


def test_decompose_preserves_statevector():
    rng = np.random.default_rng(1)
    for _ in range(20):
        c = random_circuit(rng, 4, 12)
        out = decompose(c, native_swap=False)
        assert np.max(np.abs(statevector(out).amplitudes - statevector(c).amplitudes)) < 1e-10


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_mcz_decomposition_up_to_global_phase(k):
    rng = np.random.default_rng(k)
    n = k + 1
    prep = random_unitary_sequence(rng, n, 15)
    qubits = tuple(int(q) for q in rng.permutation(n)[:k])
    c = Circuit(n, prep.bundles + Circuit.from_gates(n, [Gate(Opcode.MCZ, qubits)]).bundles)
    out = decompose(c)
    assert all(x.opcode is not Opcode.MCZ and len(x.qubits) <= 2 for x in out.gates())
    a, b = statevector(c).amplitudes, statevector(out).amplitudes
    phase = np.vdot(a, b)
    assert abs(abs(phase) - 1) < 1e-10
    assert np.max(np.abs(b - phase * a)) < 1e-10


# ---------------------------------------------------------------- placement


def test_identity_placement():
    assert place_initial(ghz_chain(3), Topology.grid(2, 2)).positions == (0, 1, 2)


def test_interaction_placement_adjacent_pair():
    c = Circuit.from_gates(2, [g(Opcode.CNOT, 0, 1)] * 5 + [g(Opcode.H, 1)])
    topo = Topology.grid(2, 2)
    p = place_initial(c, topo, "interaction")
    assert topo.adjacent(p[0], p[1])
    assert len(set(p.positions)) == 2


def test_interaction_placement_without_two_qubit_gates_is_identity():
    c = Circuit.from_gates(3, [g(Opcode.H, q) for q in range(3)])
    assert place_initial(c, Topology.grid(2, 2), "interaction") == Placement.identity(3)


def test_placement_too_many_qubits():
    with pytest.raises(TooManyQubitsError):
        place_initial(Circuit(5), Topology.grid(2, 2))


def test_placement_bijectivity_validated():
    with pytest.raises(ValueError):
        Placement((0, 0))
    assert Placement((2, 0, 1)).inverse() == {2: 0, 0: 1, 1: 2}


@settings(max_examples=30)
@given(circuits(max_qubits=6, max_bundles=10))
def test_interaction_placement_is_injective_and_deterministic(c):
    topo = Topology.grid(3, 3)
    p = place_initial(c, topo, "interaction")
    assert len(set(p.positions)) == c.num_qubits
    assert all(0 <= x < 9 for x in p.positions)
    assert p == place_initial(c, topo, "interaction")


# ---------------------------------------------------------------- routing


def test_adjacent_cnot_unchanged():
    c = Circuit.from_gates(2, [g(Opcode.CNOT, 0, 1)])
    routed, final = route(c, Topology.line(2), Placement.identity(2))
    assert [x.opcode for x in routed.gates()] == [Opcode.CNOT]
    assert final == Placement.identity(2)


def test_line_hand_trace():
    c = Circuit.from_gates(3, [g(Opcode.CNOT, 0, 2)])
    routed, final = route(c, Topology.line(3), Placement.identity(3))
    assert [(x.opcode, x.qubits) for x in routed.gates()] == [(Opcode.SWAP, (0, 1)), (Opcode.CNOT, (1, 2))]
    assert final.positions == (1, 0, 2)


def test_route_rejects_wide_gates():
    with pytest.raises(NotRoutedError):
        route(Circuit.from_gates(3, [Gate(Opcode.MCZ, (0, 1, 2))]), Topology.line(3), Placement.identity(3))


def test_routing_through_empty_position_moves():
    c = Circuit.from_gates(2, [g(Opcode.CNOT, 0, 1)])
    routed, final = route(c, Topology.line(4), Placement((0, 3)))
    assert routed.num_qubits == 4
    assert Topology.line(4).adjacent(*final.positions)
    s = compile_circuit(c, Topology.line(4))
    assert equivalent(c, s)


def test_routing_equivalence_2x3_grid():
    rng = np.random.default_rng(11)
    topo = Topology.grid(2, 3)
    for _ in range(100):
        c = random_circuit(rng, 5, 12)
        s = compile_circuit(c, topo)
        assert legal(s, topo)
        assert equivalent(c, s)


@settings(max_examples=60)
@given(circuits(max_qubits=6, max_bundles=10, ops=[Opcode.H, Opcode.T, Opcode.RY, Opcode.CNOT, Opcode.CZ, Opcode.SWAP]),
       st.sampled_from([(3, 3), (2, 3), (1, 6), (2, 4)]), st.sampled_from(["identity", "interaction"]),
       st.booleans())
def test_semantic_preservation_property(c, shape, strategy, native_swap):
    topo = Topology.grid(*shape, native_swap=native_swap)
    if c.num_qubits > topo.num_positions:
        return
    s = compile_circuit(c, topo, CompileOptions(strategy))
    assert legal(s, topo)
    assert equivalent(c, s)
    if not native_swap:
        assert all(x.opcode is not Opcode.SWAP for x in s.circuit.gates())


def test_mcz_circuit_compiles_and_routes():
    c = Circuit.from_gates(3, [g(Opcode.H, 0), g(Opcode.H, 1), g(Opcode.H, 2), Gate(Opcode.MCZ, (0, 1, 2))])
    s = compile_circuit(c, Topology.line(3))
    assert legal(s, Topology.line(3))
    a = statevector(c).amplitudes
    b = logical_amplitudes(statevector(s.circuit).amplitudes, s.final_placement)
    assert abs(abs(np.vdot(a, b)) - 1) < 1e-10


# ---------------------------------------------------------------- scheduling


def test_independent_gates_share_a_bundle():
    s = schedule_asap(Circuit.from_gates(2, [g(Opcode.H, 0), g(Opcode.X, 1)]), Topology.line(2))
    assert s.start_cycles == (0,) and len(s.circuit.bundles) == 1 and s.latency == 1


def test_dependency_chain_latency():
    s = schedule_asap(Circuit.from_gates(2, [g(Opcode.H, 0), g(Opcode.CNOT, 0, 1)]), Topology.line(2))
    assert s.start_cycles == (0, 1) and s.latency == 3


def test_empty_schedule():
    s = schedule_asap(Circuit(2), Topology.line(2))
    assert s.latency == 0 and s.circuit.bundles == ()


def test_schedule_rejects_unrouted():
    with pytest.raises(NotRoutedError):
        schedule_asap(Circuit.from_gates(3, [g(Opcode.CNOT, 0, 2)]), Topology.line(3))


def test_measure_duration_respected():
    c = Circuit.from_gates(2, [g(Opcode.MEASURE_Z, 0), g(Opcode.X, 0), g(Opcode.X, 1)])
    s = schedule_asap(c, Topology.line(2))
    assert s.start_cycles == (0, 4) and s.latency == 5


@settings(max_examples=40)
@given(circuits(max_qubits=5, max_bundles=12))
def test_schedule_is_legal_and_order_preserving(c):
    topo = Topology.line(5)
    routed, final = route(c, topo, Placement.identity(c.num_qubits))
    s = schedule_asap(routed, topo)
    assert legal(s, topo)
    per_qubit = lambda circ: {q: [x for x in circ.gates() if q in x.qubits] for q in range(topo.num_positions)}
    assert per_qubit(s.circuit) == per_qubit(routed)
    ends = [e for _, e, _ in s.timed_gates(topo)]
    assert s.latency == max(ends, default=0)


# ---------------------------------------------------------------- compile


def test_bell_on_grid_needs_no_swaps():
    s = compile_circuit(BELL, Topology.grid(2, 2))
    assert s.swaps == 0
    assert compile_report(s)["swaps"] == 0


def test_ghz_chain_on_line_no_swaps():
    assert compile_circuit(ghz_chain(4), Topology.line(4)).swaps == 0


def test_reversed_ghz_needs_swaps():
    s = compile_circuit(ghz_chain(4, reverse=True), Topology.line(4))
    assert s.swaps >= 1
    assert equivalent(ghz_chain(4, reverse=True), s)


def test_compile_deterministic_text():
    c = random_circuit(np.random.default_rng(5), 5, 20)
    topo = Topology.grid(2, 3)
    a = compile_circuit(c, topo, CompileOptions("interaction"))
    b = compile_circuit(c, topo, CompileOptions("interaction"))
    assert print_circuit(a.circuit, a.start_cycles) == print_circuit(b.circuit, b.start_cycles)
    assert compile_report(a) == compile_report(b)


def test_report_fields():
    report = compile_report(compile_circuit(ghz_chain(3, reverse=True), Topology.line(3)))
    assert set(report) == {"swaps", "latency", "bundles", "gates", "initial_placement", "final_placement"}
    assert report["initial_placement"] == {"0": 0, "1": 1, "2": 2}

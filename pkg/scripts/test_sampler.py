"""
Sampler Testing Script
Tests edgegrab layers, BiRB and Clifford-group circuits, scrambling and designs

Run with: pytest scripts/test_sampler.py
"""

import itertools
from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError

from birb.circuits.circuit import Circuit
from birb.circuits.serialization import serialize
from birb.core.errors import CapabilityError, ConfigurationError, DomainError
from birb.pauli.gates import conjugate_by_circuit, conjugate_by_layer
from birb.pauli.operator import PauliOperator, all_paulis, commutes, sample_random_pauli
from birb.sampler.birb_circuits import (
    BirbCircuit,
    build_birb_circuit,
    measurement_layer,
    prep_layer,
)
from birb.sampler.clifford_group import (
    build_clifford_group_birb_circuit,
    random_symplectic,
    sample_uniform_clifford,
)
from birb.sampler.design import ExperimentDesign, circuit_id
from birb.sampler.omega import (
    OmegaSpec,
    check_density,
    enumerate_omega_layers,
    greedy_matching,
    sample_omega_layer,
)
from birb.sampler.scrambling import estimate_scrambling


# -- edgegrab ---------------------------------------------------------------------


def test_greedy_matching():
    edges = [(0, 1), (1, 2), (2, 3)]
    assert greedy_matching(edges, [1, 0, 2]) == [(1, 2)]
    assert greedy_matching(edges, [0, 1, 2], n=4) == [(0, 1), (2, 3)]


def test_layers_cover_every_qubit(rng, omega):
    for _ in range(200):
        layer = sample_omega_layer(omega, 5, rng)
        assert layer.support == 0b11111


def test_no_two_qubit_gates_at_zero_density(rng):
    spec = OmegaSpec(xi=0.0)
    assert all(sample_omega_layer(spec, 4, rng).two_qubit_gate_count == 0 for _ in range(100))


def test_full_density_on_one_edge(rng):
    spec = OmegaSpec(xi=1.0)
    assert all(sample_omega_layer(spec, 2, rng).two_qubit_gate_count == 1 for _ in range(100))


def test_mean_two_qubit_gate_count(rng):
    spec = OmegaSpec(xi=0.25)
    counts = np.array([sample_omega_layer(spec, 4, rng).two_qubit_gate_count for _ in range(10_000)])
    # Bin(2, 1/4) per layer: mean 0.5, variance 0.375
    assert abs(counts.mean() - 0.5) < 4 * np.sqrt(0.375 / len(counts))


def test_no_edges_with_positive_density(rng):
    with pytest.raises(ConfigurationError):
        sample_omega_layer(OmegaSpec(xi=0.25), 1, rng)


def test_check_density_warns_above_capacity():
    assert check_density(OmegaSpec(xi=0.5, connectivity="line"), 3)
    assert not check_density(OmegaSpec(xi=1.0, connectivity="line"), 3)


def test_list_form_gate_set():
    spec = OmegaSpec.model_validate({"xi": 0.1, "gate_set": ["H", "S"], "connectivity": "line"})
    assert spec.gate_set.single_qubit_gates == ["H", "S"]
    assert spec.gate_set.connectivity == "line"


def test_enumerated_distribution():
    layers = enumerate_omega_layers(OmegaSpec(xi=0.5), 2)
    assert sum(p for _, p in layers) == pytest.approx(1.0)
    two_qubit = sum(p for layer, p in layers if layer.two_qubit_gate_count == 1)
    assert two_qubit == pytest.approx(0.5)


def test_enumeration_matches_sampling(rng):
    spec = OmegaSpec(xi=0.5, connectivity="line")
    exact = {serialize(Circuit(3, (layer,))): p for layer, p in enumerate_omega_layers(spec, 3)}
    assert sum(exact.values()) == pytest.approx(1.0)
    draws = 20_000
    counts = Counter(serialize(Circuit(3, (sample_omega_layer(spec, 3, rng),))) for _ in range(draws))
    assert set(counts) <= set(exact)
    for key, p in exact.items():
        sigma = np.sqrt(p * (1 - p) / draws)
        assert abs(counts[key] / draws - p) < 5 * sigma + 1e-3


def test_enumeration_edge_cap():
    with pytest.raises(CapabilityError):
        enumerate_omega_layers(OmegaSpec(xi=0.2), 5)


# -- BiRB circuits ----------------------------------------------------------------


def test_prep_layer_stabilizes_s(rng):
    for label in ("+Z", "+XX", "-ZY", "+XIZ", "+IIY"):
        s = PauliOperator.from_label(label)
        for _ in range(20):
            layer = prep_layer(s, rng)
            pulled = conjugate_by_layer(s, layer.inverse())
            assert pulled.x_bits == 0
            assert pulled.sign == 1


def test_prep_layer_single_z(rng):
    s = PauliOperator.from_label("+Z")
    assert {prep_layer(s, rng).gates[0].gate.name for _ in range(20)} == {"I"}


def test_prep_layer_zz_is_uniform(rng):
    s = PauliOperator.from_label("+ZZ")
    names = Counter(tuple(g.gate.name for g in prep_layer(s, rng).gates) for _ in range(2000))
    assert set(names) == {("I", "I"), ("X", "X")}
    assert abs(names[("I", "I")] / 2000 - 0.5) < 4 * np.sqrt(0.25 / 2000)


def test_prep_layer_identity():
    with pytest.raises(DomainError):
        prep_layer(PauliOperator.identity(2), np.random.default_rng(0))


def test_measurement_layer():
    layer = measurement_layer(PauliOperator.from_label("+X"))
    assert [g.gate.name for g in layer.gates] == ["H"]
    assert conjugate_by_layer(PauliOperator.from_label("+X"), layer).to_label() == "+Z"

    s_prime = PauliOperator.from_label("+YZ")
    layer = measurement_layer(s_prime)
    assert [g.gate.name for g in layer.gates] == ["HSDG", "I"]
    assert conjugate_by_layer(s_prime, layer).to_label() == "+ZZ"

    s_prime = PauliOperator.from_label("-ZIZ")
    assert conjugate_by_layer(s_prime, measurement_layer(s_prime)).to_label() == "−ZIZ"


def test_build_birb_circuit(rng, omega):
    for d in (0, 1, 5):
        bc = build_birb_circuit(3, d, omega, rng)
        assert bc.circuit.depth == d + 2
        assert bc.target.x_bits == 0
        assert bc.z_mask != 0
        assert len(bc.core_layers) == d
        core = Circuit(3, bc.circuit.layers[1:])
        assert conjugate_by_circuit(bc.stabilizer, core) == bc.target


def _embed(unitary, qubits, n):
    """Unitary of a k-qubit gate on `qubits` of an n-qubit register (qubit 0 least significant)"""
    full = np.zeros((2**n, 2**n), dtype=complex)
    k = len(qubits)
    for column in range(2**n):
        local_in = sum(((column >> q) & 1) << j for j, q in enumerate(qubits))
        rest = column & ~sum(1 << q for q in qubits)
        for local_out in range(2**k):
            row = rest | sum(((local_out >> j) & 1) << q for j, q in enumerate(qubits))
            full[row, column] += unitary[local_out, local_in]
    return full


def _circuit_unitary(layers, n):
    total = np.eye(2**n, dtype=complex)
    for layer in layers:
        for gate, qubits in layer.gates:
            total = _embed(gate.unitary, qubits, n) @ total
    return total


@pytest.mark.parametrize("n", [1, 2, 3])
def test_birb_target_matches_unitary_conjugation(n, rng):
    spec = OmegaSpec(xi=0.5 if n > 1 else 0.0)
    for d in (0, 1, 4):
        for _ in range(5):
            bc = build_birb_circuit(n, d, spec, rng)
            u = _circuit_unitary(bc.circuit.layers[1:], n)
            expected = u @ bc.stabilizer.to_matrix() @ u.conj().T
            assert np.allclose(bc.target.to_matrix(), expected, atol=1e-10)


def test_prep_layer_prepares_a_stabilizer_state(rng, omega):
    for _ in range(10):
        bc = build_birb_circuit(3, 2, omega, rng)
        u = _circuit_unitary(bc.circuit.layers[:1], 3)
        psi = u[:, 0]
        assert np.allclose(bc.stabilizer.to_matrix() @ psi, psi, atol=1e-10)


def test_conjugation_preserves_commutation(rng, omega):
    for trial in range(1000):
        n = 2 + trial % 5
        circuit = Circuit(n, tuple(sample_omega_layer(omega, n, rng) for _ in range(3)))
        a, b = sample_random_pauli(n, rng), sample_random_pauli(n, rng)
        assert commutes(a, b) == commutes(conjugate_by_circuit(a, circuit), conjugate_by_circuit(b, circuit))


def test_negative_depth(rng, omega):
    with pytest.raises(DomainError):
        build_birb_circuit(2, -1, omega, rng)


def test_shot_values(rng, omega):
    bc = build_birb_circuit(3, 2, omega, rng)
    outcomes = np.arange(8)
    expected = [bc.value(int(b)) for b in outcomes]
    assert bc.values(outcomes).tolist() == expected
    assert bc.value(0) == bc.sign


def test_record_round_trip(rng, line_omega):
    bc = build_birb_circuit(4, 3, line_omega, rng)
    record = bc.to_record("d3-k0", {"seed": 5})
    assert record["metadata"]["seed"] == 5
    assert record["metadata"]["n"] == 4
    restored = BirbCircuit.from_record(record)
    assert restored == bc


# -- Clifford-group variant -------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_random_symplectic(n, rng):
    omega_form = np.zeros((2 * n, 2 * n), dtype=int)
    omega_form[:n, n:] = np.eye(n, dtype=int)
    omega_form[n:, :n] = np.eye(n, dtype=int)
    for _ in range(20):
        m = random_symplectic(n, rng).astype(int)
        assert np.array_equal((m.T @ omega_form @ m) % 2, omega_form)


def test_uniform_single_qubit_cliffords(rng):
    draws = 9600
    counts = Counter(sample_uniform_clifford(1, rng).key for _ in range(draws))
    assert len(counts) == 24
    expected = draws / 24
    sigma = np.sqrt(expected * (1 - 1 / 24))
    assert all(abs(c - expected) < 5 * sigma for c in counts.values())


def test_uniform_clifford_is_valid(rng):
    for n in (2, 3, 5):
        assert sample_uniform_clifford(n, rng).is_valid()


def test_two_qubit_clifford_collisions(rng):
    # |C_2| = 11520 up to phase; 300 draws give ~3.9 expected colliding pairs
    draws = 300
    keys = [sample_uniform_clifford(2, rng).key for _ in range(draws)]
    collisions = sum(c * (c - 1) // 2 for c in Counter(keys).values())
    expected = draws * (draws - 1) / 2 / 11520
    assert collisions < expected + 5 * np.sqrt(expected) + 1


def test_clifford_cap(rng):
    with pytest.raises(CapabilityError):
        sample_uniform_clifford(9, rng)


def test_clifford_group_circuit(rng):
    bc = build_clifford_group_birb_circuit(2, 3, rng)
    assert bc.variant == "clifford-group-birb"
    assert bc.core_start == 0
    assert bc.circuit.depth == 5
    assert bc.target.x_bits == 0
    assert len(bc.core_layers) == 4
    # s stabilizes C_0|00>
    first = bc.circuit.layers[0]
    assert conjugate_by_layer(bc.stabilizer, first.inverse()).x_bits == 0


# -- tensor-product stabilizer states ---------------------------------------------


def _stabilizer_state_sum(s: PauliOperator, p: PauliOperator) -> int:
    """Sum of <psi|p|psi> over all tensor-product stabilizer states stabilized by s"""
    total = 0
    for chars in itertools.product(("X", "Y", "Z"), repeat=s.n):
        for signs in itertools.product((1, -1), repeat=s.n):
            # psi stabilized by signs[q] * chars[q] on every qubit q
            value_s, value_p = 1, 1
            for q in range(s.n):
                for op, acc in ((s, "s"), (p, "p")):
                    c = op.char(q)
                    if c == "I":
                        continue
                    factor = signs[q] if c == chars[q] else 0
                    if acc == "s":
                        value_s *= factor
                    else:
                        value_p *= factor
            if value_s * s.sign == 1:
                total += value_p * p.sign
    return total


@pytest.mark.parametrize("n", [2, 3])
def test_stabilizer_states_average_out(n):
    paulis = list(all_paulis(n, include_identity=False))
    for s in paulis:
        for p in paulis:
            if p == s or not commutes(s, p):
                continue
            assert _stabilizer_state_sum(s, p) == 0


# -- scrambling -------------------------------------------------------------------


def test_scrambling_zero_layers(rng, omega):
    report = estimate_scrambling(omega, 2, 0, 10, 2, None, rng)
    assert report.k == 0
    assert report.samples["probes"] == 16
    for e in report.estimates:
        assert e.estimate == (1.0 if e.pauli == e.pauli_prime else 0.0)


@pytest.mark.slow
def test_scrambling_decreases_with_depth(rng, omega):
    report = estimate_scrambling(omega, 2, 12, 5, 40, None, rng)
    assert report.delta_hat < 0.35


def test_scrambling_exhaustive_cap(rng, omega):
    with pytest.raises(CapabilityError):
        estimate_scrambling(omega, 7, 1, 1, 1, None, rng)


# -- designs ----------------------------------------------------------------------


def _design(**overrides):
    data = {"n": 2, "depths": [0, 2, 4], "K": 3, "omega": {"xi": 0.5}, "seed": 17}
    data.update(overrides)
    return ExperimentDesign.model_validate(data)


def test_design_keys():
    design = _design()
    assert design.circuit_count == 9
    assert design.keys()[:3] == [(0, 0), (0, 1), (0, 2)]
    assert circuit_id(4, 2) == "d4-k2"


def test_design_is_deterministic():
    first = list(_design().records())
    second = list(_design().records())
    assert first == second
    assert [r["id"] for r in first][:2] == ["d0-k0", "d0-k1"]
    assert all(r["metadata"]["seed"] == 17 for r in first)


def test_design_circuits_regenerate_alone():
    design = _design()
    records = {r["id"]: r for r in design.records()}
    assert serialize(design.build(2, 1).circuit) == records["d2-k1"]["circuit_text"]


def test_design_seed_changes_circuits():
    a = [r["circuit_text"] for r in _design().records()]
    b = [r["circuit_text"] for r in _design(seed=18).records()]
    assert a != b


def test_design_validation():
    with pytest.raises(ValidationError):
        _design(depths=[0, 0])
    with pytest.raises(ValidationError):
        _design(depths=[-1, 2])
    with pytest.raises(ValidationError):
        _design(K=0)
    with pytest.raises(CapabilityError):
        _design(n=9, variant="clifford-group-birb")


def test_clifford_group_design():
    design = _design(variant="clifford-group-birb")
    records = list(design.records())
    assert all(r["metadata"]["core_start"] == 0 for r in records)
    assert all(r["metadata"]["variant"] == "clifford-group-birb" for r in records)

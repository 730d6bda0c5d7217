"""
BiRB Circuits
Random stabilizer preparation, Omega-distributed core and basis-change layer

Circuit layout (execution order):
    L_0          prepares a random tensor-product stabilizer state of s
    L_1 .. L_d   benchmark layers drawn from Omega
    L_{d+1}      rotates s' = U(L_d)...U(L_1) s U(L_1)†...U(L_d)† onto Z/I
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from birb.circuits.circuit import Circuit, GateInstance, GateLayer
from birb.circuits.serialization import parse, serialize
from birb.core.errors import DomainError
from birb.pauli.gates import MEASUREMENT_GATES, PREP_GATES, conjugate_by_circuit, conjugate_by_layer
from birb.pauli.operator import PauliOperator, sample_random_pauli
from birb.sampler.omega import OmegaSpec, sample_omega_layer

_STABILIZER_STATES = ["+X", "-X", "+Y", "-Y", "+Z", "-Z"]


@dataclass(frozen=True)
class BirbCircuit:
    """
    A BiRB circuit and the Pauli whose expectation it measures

    Benchmark layers are circuit.layers[core_start : benchmark_depth + 1];
    the last layer is always the basis change.
    """

    circuit: Circuit
    benchmark_depth: int
    target: PauliOperator
    stabilizer: PauliOperator
    core_start: int = 1
    variant: str = "birb"

    def __post_init__(self):
        if self.target.x_bits != 0:
            raise DomainError(f"target {self.target} is not a Z/I Pauli")
        if self.circuit.depth != self.benchmark_depth + 2:
            raise DomainError(
                f"circuit has {self.circuit.depth} layers, expected {self.benchmark_depth + 2}"
            )

    @property
    def n(self) -> int:
        return self.circuit.n

    @property
    def z_mask(self) -> int:
        return self.target.z_bits

    @property
    def sign(self) -> int:
        return self.target.sign

    @property
    def core_layers(self):
        return self.circuit.layers[self.core_start : self.benchmark_depth + 1]

    def value(self, bits: int) -> int:
        """Shot value sign(s_C) * (-1)^|b & z_mask| for the bitstring b (bit q = qubit q)"""
        return self.sign * (-1 if (bits & self.z_mask).bit_count() & 1 else 1)

    def values(self, outcomes: np.ndarray) -> np.ndarray:
        """Vectorized `value` over integer outcomes (n <= 63)"""
        outcomes = np.asarray(outcomes, dtype=np.int64)
        masked = outcomes & np.int64(self.z_mask)
        parity = np.zeros(outcomes.shape, dtype=np.int64)
        for q in range(self.n):
            parity ^= (masked >> q) & 1
        return (self.sign * (1 - 2 * parity)).astype(np.int8)

    def to_record(self, circuit_id: str, metadata: Optional[dict] = None) -> dict:
        meta = {
            "n": self.n,
            "stabilizer": self.stabilizer.to_label(),
            "core_start": self.core_start,
            "variant": self.variant,
        }
        meta.update(metadata or {})
        return {
            "id": circuit_id,
            "depth": self.benchmark_depth,
            "circuit_text": serialize(self.circuit),
            "target_pauli": self.target.to_label(),
            "metadata": meta,
        }

    @classmethod
    def from_record(cls, record: dict) -> "BirbCircuit":
        meta = record.get("metadata") or {}
        circuit = parse(record["circuit_text"])
        stabilizer = meta.get("stabilizer")
        return cls(
            circuit=circuit,
            benchmark_depth=int(record["depth"]),
            target=PauliOperator.from_label(record["target_pauli"]),
            stabilizer=PauliOperator.from_label(stabilizer) if stabilizer else PauliOperator.identity(circuit.n),
            core_start=int(meta.get("core_start", 1)),
            variant=meta.get("variant", "birb"),
        )


def prep_layer(s: PauliOperator, rng: np.random.Generator) -> GateLayer:
    """
    Layer L_0 with U(L_0)|0...0> a uniformly random tensor-product
    stabilizer state stabilized by s

    Qubits in the support of s get a random eigenstate of s_q, the signs
    constrained so that their product equals the sign of s; idle qubits get
    one of the six single-qubit stabilizer states.
    """
    if s.weight == 0:
        raise DomainError("cannot prepare a stabilizer state of the identity")
    support = [q for q in range(s.n) if (s.support >> q) & 1]
    signs = {q: 1 if rng.random() < 0.5 else -1 for q in support[:-1]}
    signs[support[-1]] = s.sign * int(np.prod([signs[q] for q in support[:-1]], dtype=np.int64))

    gates = []
    for q in range(s.n):
        if q in signs:
            label = ("+" if signs[q] == 1 else "-") + s.char(q)
        else:
            label = _STABILIZER_STATES[int(rng.integers(6))]
        gates.append(GateInstance(PREP_GATES[label], (q,)))
    return GateLayer(s.n, tuple(gates))


def measurement_layer(s_prime: PauliOperator) -> GateLayer:
    """Layer L_{d+1}: H on X, HS† on Y, identity on I and Z"""
    if not s_prime.is_hermitian:
        raise DomainError(f"{s_prime} is not Hermitian")
    gates = [GateInstance(MEASUREMENT_GATES[s_prime.char(q)], (q,)) for q in range(s_prime.n)]
    return GateLayer(s_prime.n, tuple(gates))


def finish_circuit(
    prep: GateLayer,
    core: list,
    stabilizer: PauliOperator,
    s_prime: PauliOperator,
    core_start: int,
    variant: str,
) -> BirbCircuit:
    """Append the basis change for s' and record the target"""
    final = measurement_layer(s_prime)
    target = conjugate_by_layer(s_prime, final)
    circuit = Circuit(prep.n, (prep, *core, final))
    return BirbCircuit(circuit, len(core), target, stabilizer, core_start, variant)


def build_birb_circuit(n: int, d: int, spec: OmegaSpec, rng: np.random.Generator) -> BirbCircuit:
    """Sample a depth-d BiRB circuit with its target Pauli"""
    if d < 0:
        raise DomainError(f"benchmark depth must be non-negative, got {d}")
    s = sample_random_pauli(n, rng)
    prep = prep_layer(s, rng)
    core = [sample_omega_layer(spec, n, rng) for _ in range(d)]
    s_prime = conjugate_by_circuit(s, Circuit(n, tuple(core)))
    return finish_circuit(prep, core, s, s_prime, core_start=1, variant="birb")

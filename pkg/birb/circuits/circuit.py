"""
Layers and Circuits
Layers are stored in execution order: index 0 runs first
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, List, NamedTuple, Sequence, Tuple, Union

from pydantic import BaseModel, Field, field_validator

from birb.core.errors import ConfigurationError, DimensionError
from birb.pauli.gates import CliffordGate, check_qubits, get_gate, is_known_gate
from birb.pauli.tableau import CliffordTableau, embed_tableau


class GateInstance(NamedTuple):
    gate: CliffordGate
    qubits: Tuple[int, ...]


@dataclass(frozen=True)
class GateLayer:
    """Gates with pairwise disjoint supports; idle qubits are implicit identities"""

    n: int
    gates: Tuple[GateInstance, ...] = ()

    def __post_init__(self):
        used = set()
        normalized = []
        for gate, qubits in self.gates:
            qubits = tuple(int(q) for q in qubits)
            check_qubits(gate, qubits, self.n)
            overlap = used.intersection(qubits)
            if overlap:
                raise DimensionError(
                    f"gate {gate.name}{qubits} overlaps qubit(s) {sorted(overlap)} already used in the layer"
                )
            used.update(qubits)
            normalized.append(GateInstance(gate, qubits))
        object.__setattr__(self, "gates", tuple(normalized))

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Tuple[Union[str, CliffordGate], Sequence[int]]]) -> "GateLayer":
        """Build from (gate or name, qubits) pairs, e.g. [("H", [0]), ("CNOT", [1, 2])]"""
        gates = []
        for gate, qubits in pairs:
            if isinstance(gate, str):
                gate = get_gate(gate, len(qubits))
            gates.append(GateInstance(gate, tuple(qubits)))
        return cls(n, tuple(gates))

    @property
    def support(self) -> int:
        mask = 0
        for _, qubits in self.gates:
            for q in qubits:
                mask |= 1 << q
        return mask

    @property
    def two_qubit_gate_count(self) -> int:
        return sum(1 for gate, _ in self.gates if gate.arity == 2)

    def inverse(self) -> "GateLayer":
        return GateLayer(self.n, tuple(GateInstance(g.inverse(), q) for g, q in self.gates))

    def tableau(self) -> CliffordTableau:
        result = CliffordTableau.identity(self.n)
        for gate, qubits in self.gates:
            result = result.compose(embed_tableau(gate.tableau, qubits, self.n))
        return result


@dataclass(frozen=True)
class Circuit:
    """Ordered layers over a fixed qubit count"""

    n: int
    layers: Tuple[GateLayer, ...] = ()

    def __post_init__(self):
        layers = tuple(self.layers)
        for i, layer in enumerate(layers):
            if layer.n != self.n:
                raise DimensionError(f"layer {i} acts on {layer.n} qubits, circuit on {self.n}")
        object.__setattr__(self, "layers", layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def compose(self, other: "Circuit") -> "Circuit":
        """`self` followed by `other`"""
        if other.n != self.n:
            raise DimensionError(f"cannot compose circuits on {self.n} and {other.n} qubits")
        return Circuit(self.n, self.layers + other.layers)

    def inverse(self) -> "Circuit":
        return Circuit(self.n, tuple(layer.inverse() for layer in reversed(self.layers)))

    def tableau(self) -> CliffordTableau:
        result = CliffordTableau.identity(self.n)
        for layer in self.layers:
            result = result.compose(layer.tableau())
        return result

    def slice(self, start: int, stop: int) -> "Circuit":
        return Circuit(self.n, self.layers[start:stop])


def depth(c: Circuit) -> int:
    return c.depth


def qubit_count(c: Circuit) -> int:
    return c.n


def compose(c1: Circuit, c2: Circuit) -> Circuit:
    return c1.compose(c2)


class GateSetSpec(BaseModel):
    """
    Gate set and connectivity of a layer set

    `connectivity` is "all-to-all", "line" or an explicit undirected edge list.
    """

    single_qubit_gates: List[str] = Field(default_factory=lambda: ["XPI2", "YPI2"], min_length=1)
    two_qubit_gate: str = "CNOT"
    connectivity: Union[str, List[Tuple[int, int]]] = "all-to-all"

    @field_validator("single_qubit_gates")
    @classmethod
    def _check_single_qubit_gates(cls, names: List[str]) -> List[str]:
        for name in names:
            if not is_known_gate(name) or get_gate(name).arity != 1:
                raise ValueError(f"{name!r} is not a single-qubit gate")
        return names

    @field_validator("two_qubit_gate")
    @classmethod
    def _check_two_qubit_gate(cls, name: str) -> str:
        if not is_known_gate(name) or get_gate(name).arity != 2:
            raise ValueError(f"{name!r} is not a two-qubit gate")
        return name

    @field_validator("connectivity")
    @classmethod
    def _check_connectivity(cls, value):
        if isinstance(value, str):
            if value not in ("all-to-all", "line"):
                raise ValueError(f"unknown topology {value!r}; use all-to-all, line or an edge list")
            return value
        for a, b in value:
            if a == b:
                raise ValueError(f"self-loop on qubit {a}")
            if a < 0 or b < 0:
                raise ValueError(f"negative qubit index in edge ({a}, {b})")
        return value

    def edges(self, n: int) -> List[Tuple[int, int]]:
        """Undirected edges over n qubits, each as (low, high), sorted and deduplicated"""
        if self.connectivity == "all-to-all":
            return list(combinations(range(n), 2))
        if self.connectivity == "line":
            return [(q, q + 1) for q in range(n - 1)]
        edges = set()
        for a, b in self.connectivity:
            if max(a, b) >= n:
                raise ConfigurationError(f"edge ({a}, {b}) references a qubit outside 0..{n - 1}")
            edges.add((min(a, b), max(a, b)))
        return sorted(edges)

    def single_gates(self) -> List[CliffordGate]:
        return [get_gate(name) for name in self.single_qubit_gates]

    def entangling_gate(self) -> CliffordGate:
        return get_gate(self.two_qubit_gate)

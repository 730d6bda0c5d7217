"""
Clifford Gate Set
Named gates, the 24 single-qubit Cliffords and gate-level conjugation
"""

from collections import deque
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from birb.core.errors import DimensionError, DomainError
from birb.pauli.operator import PauliOperator
from birb.pauli.tableau import CliffordTableau


@dataclass(frozen=True)
class CliffordGate:
    """
    A Clifford gate acting on `arity` qubits

    The tableau is the action on the gate's local qubits, local qubit j being
    the j-th index of the instance (for CNOT, local qubit 0 is the control).
    """

    name: str
    arity: int
    tableau: CliffordTableau = field(repr=False)
    unitary: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.tableau.n != self.arity:
            raise DimensionError(f"gate {self.name} has arity {self.arity} but a {self.tableau.n}-qubit tableau")

    def __hash__(self):
        return hash((self.name, self.arity))

    @property
    def is_tableau_gate(self) -> bool:
        return self.name.startswith("CLIFF[")

    def inverse(self) -> "CliffordGate":
        return _inverse_gate(self)


# -- unitaries ----------------------------------------------------------

_SQRT2 = np.sqrt(2.0)
_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2
_S = np.diag([1, 1j]).astype(complex)
_SDG = np.diag([1, -1j]).astype(complex)

# Basis index b0 + 2*b1, control on local qubit 0
_CNOT = np.zeros((4, 4), dtype=complex)
for _old, _new in ((0, 0), (1, 3), (2, 2), (3, 1)):
    _CNOT[_new, _old] = 1.0

_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)

_NAMED_SINGLE_QUBIT = {
    "I": (["+X"], ["+Z"], _I2),
    "X": (["+X"], ["-Z"], _X),
    "Y": (["-X"], ["-Z"], _Y),
    "Z": (["-X"], ["+Z"], _Z),
    "H": (["+Z"], ["+X"], _H),
    "S": (["+Y"], ["+Z"], _S),
    "SDG": (["-Y"], ["+Z"], _SDG),
    "HSDG": (["+Y"], ["+X"], _H @ _SDG),
    "XPI2": (["+X"], ["-Y"], (_I2 - 1j * _X) / _SQRT2),
    "YPI2": (["-Z"], ["+X"], (_I2 - 1j * _Y) / _SQRT2),
}

_NAMED_TWO_QUBIT = {
    "CNOT": (["+XX", "+IX"], ["+ZI", "+ZZ"], _CNOT),
    "CZ": (["+XZ", "+ZX"], ["+ZI", "+IZ"], _CZ),
}


def _build_named() -> Dict[str, CliffordGate]:
    gates = {}
    for table, arity in ((_NAMED_SINGLE_QUBIT, 1), (_NAMED_TWO_QUBIT, 2)):
        for name, (x_labels, z_labels, unitary) in table.items():
            tableau = CliffordTableau.from_labels(x_labels, z_labels)
            gates[name] = CliffordGate(name, arity, tableau, unitary)
    return gates


# -- the 24 single-qubit Cliffords ---------------------------------------

_SIGNED_X_IMAGES = ["+X", "-X", "+Y", "-Y", "+Z", "-Z"]
_SIGNED_Z_IMAGES = ["+Z", "-Z", "+X", "-X", "+Y", "-Y"]


def _unitaries_by_key() -> Dict[Tuple[int, ...], np.ndarray]:
    """Breadth-first search over words in H and S, first word per action"""
    found: Dict[Tuple[int, ...], np.ndarray] = {}
    queue = deque([_I2])
    while queue and len(found) < 24:
        unitary = queue.popleft()
        key = CliffordTableau.from_unitary(unitary).key
        if key in found:
            continue
        found[key] = unitary
        queue.append(_H @ unitary)
        queue.append(_S @ unitary)
    return found


def _build_canonical() -> List[CliffordGate]:
    """
    C0..C23 indexed 4*i + j

    i indexes the image of X in _SIGNED_X_IMAGES, j the anticommuting
    images of Z in _SIGNED_Z_IMAGES order; C0 is the identity.
    """
    unitaries = _unitaries_by_key()
    gates = []
    for x_label in _SIGNED_X_IMAGES:
        z_choices = [z for z in _SIGNED_Z_IMAGES if z[1] != x_label[1]]
        for z_label in z_choices:
            tableau = CliffordTableau.from_labels([x_label], [z_label])
            name = f"C{len(gates)}"
            gates.append(CliffordGate(name, 1, tableau, unitaries[tableau.key]))
    return gates


NAMED_GATES: Dict[str, CliffordGate] = _build_named()
CANONICAL_CLIFFORDS: List[CliffordGate] = _build_canonical()

_BY_NAME: Dict[str, CliffordGate] = {g.name: g for g in CANONICAL_CLIFFORDS}
_BY_NAME.update(NAMED_GATES)

# Named gates take precedence over their canonical index
_BY_TABLEAU: Dict[Tuple[int, Tuple[int, ...]], CliffordGate] = {
    (g.arity, g.tableau.key): g for g in CANONICAL_CLIFFORDS
}
_BY_TABLEAU.update({(g.arity, g.tableau.key): g for g in NAMED_GATES.values()})

SINGLE_QUBIT_CLIFFORD_NAMES = [g.name for g in CANONICAL_CLIFFORDS]


def tableau_gate(tableau: CliffordTableau) -> CliffordGate:
    """Anonymous gate for an arbitrary tableau, serialized as CLIFF[<hex>]"""
    return CliffordGate(f"CLIFF[{tableau.to_hex()}]", tableau.n, tableau)


def gate_for_tableau(tableau: CliffordTableau) -> CliffordGate:
    """Registered gate with this action, falling back to a tableau gate"""
    gate = _BY_TABLEAU.get((tableau.n, tableau.key))
    return gate if gate is not None else tableau_gate(tableau)


def get_gate(name: str, arity: Optional[int] = None) -> CliffordGate:
    """
    Resolve a gate name

    Tableau gates (CLIFF[<hex>]) need the arity, which the caller takes from
    the number of qubits in the instance.
    """
    if name.startswith("CLIFF[") and name.endswith("]"):
        if arity is None:
            raise DomainError(f"tableau gate {name} needs an explicit arity")
        return gate_for_tableau(CliffordTableau.from_hex(name[6:-1], arity))
    gate = _BY_NAME.get(name)
    if gate is None:
        raise DomainError(f"unknown gate {name!r}")
    return gate


def is_known_gate(name: str) -> bool:
    return name in _BY_NAME


@lru_cache(maxsize=4096)
def _inverse_gate(gate: CliffordGate) -> CliffordGate:
    return gate_for_tableau(gate.tableau.inverse())


# Gate preparing a +1 eigenstate of each signed single-qubit Pauli from |0>,
# i.e. its image of Z
def _prep_table() -> Dict[str, CliffordGate]:
    g = NAMED_GATES
    composites = {
        "+Z": g["I"].tableau,
        "-Z": g["X"].tableau,
        "+X": g["H"].tableau,
        "-X": g["X"].tableau.compose(g["H"].tableau),
        "+Y": g["H"].tableau.compose(g["S"].tableau),
        "-Y": g["H"].tableau.compose(g["SDG"].tableau),
    }
    return {label: gate_for_tableau(t) for label, t in composites.items()}


PREP_GATES: Dict[str, CliffordGate] = _prep_table()

# Rotation of each single-qubit Pauli onto Z (I and Z need nothing)
MEASUREMENT_GATES: Dict[str, CliffordGate] = {
    "I": NAMED_GATES["I"],
    "Z": NAMED_GATES["I"],
    "X": NAMED_GATES["H"],
    "Y": NAMED_GATES["HSDG"],
}


# -- conjugation ------------------------------------------------------------


def check_qubits(gate: CliffordGate, qubits: Sequence[int], n: int):
    if len(qubits) != gate.arity:
        raise DimensionError(f"gate {gate.name} takes {gate.arity} qubits, got {len(qubits)}")
    if len(set(qubits)) != len(qubits):
        raise DimensionError(f"repeated qubit index in {tuple(qubits)} for gate {gate.name}")
    for q in qubits:
        if not 0 <= q < n:
            raise DimensionError(f"qubit index {q} out of range for {n} qubits")


def conjugate_by_gate(p: PauliOperator, gate: CliffordGate, qubits: Sequence[int]) -> PauliOperator:
    """
    U_g P U_g† for the gate placed on `qubits`; identity elsewhere

    Examples:
        >>> conjugate_by_gate(PauliOperator.from_label("+X"), get_gate("H"), [0])
        PauliOperator(n=1, x_bits=0, z_bits=1, phase_exp=0)
    """
    check_qubits(gate, qubits, p.n)
    x, z, phase = conjugate_bits(p.x_bits, p.z_bits, gate, qubits)
    return PauliOperator(p.n, x, z, p.phase_exp + phase)


def conjugate_bits(x: int, z: int, gate: CliffordGate, qubits: Sequence[int]) -> Tuple[int, int, int]:
    """Bit-level conjugation; returns (x', z', phase increment)"""
    k = gate.arity
    local_x = local_z = 0
    clear = 0
    for j, q in enumerate(qubits):
        local_x |= ((x >> q) & 1) << j
        local_z |= ((z >> q) & 1) << j
        clear |= 1 << q
    if k <= 2:
        new_x, new_z, phase = gate.tableau.lookup[local_x | (local_z << k)]
    else:
        image = gate.tableau.apply(PauliOperator(k, local_x, local_z))
        new_x, new_z, phase = image.x_bits, image.z_bits, image.phase_exp
    x &= ~clear
    z &= ~clear
    for j, q in enumerate(qubits):
        x |= ((new_x >> j) & 1) << q
        z |= ((new_z >> j) & 1) << q
    return x, z, phase


def conjugate_by_layer(p: PauliOperator, layer) -> PauliOperator:
    """Conjugate by every gate of a layer (supports are disjoint, order is irrelevant)"""
    if layer.n != p.n:
        raise DimensionError(f"layer on {layer.n} qubits, Pauli on {p.n}")
    x, z, phase = p.x_bits, p.z_bits, p.phase_exp
    for gate, qubits in layer.gates:
        x, z, step = conjugate_bits(x, z, gate, qubits)
        phase += step
    return PauliOperator(p.n, x, z, phase)


def conjugate_by_circuit(p: PauliOperator, circuit) -> PauliOperator:
    """
    Fold conjugate_by_gate over the circuit's layers in execution order

    Layer 0 executes first, so the result is U(L_last)...U(L_0) P U(L_0)†...
    """
    if circuit.n != p.n:
        raise DimensionError(f"circuit on {circuit.n} qubits, Pauli on {p.n}")
    for layer in circuit.layers:
        p = conjugate_by_layer(p, layer)
    return p

"""
Clifford-Group BiRB
Uniform n-qubit Cliffords and the circuit variant built from them

Uniform sampling follows the recursive transvection construction over the
symplectic group: each level fixes the images of one qubit's generators,
then uniform sign bits complete the Clifford.
"""

import numpy as np

from birb.circuits.circuit import Circuit, GateInstance, GateLayer
from birb.core.config import settings
from birb.core.errors import CapabilityError, DomainError
from birb.pauli.gates import conjugate_by_circuit, gate_for_tableau
from birb.pauli.operator import PauliOperator
from birb.pauli.tableau import CliffordTableau
from birb.sampler.birb_circuits import BirbCircuit, finish_circuit

# Internal vectors use the interleaved layout (x_0, z_0, x_1, z_1, ...)


def _inner(v: np.ndarray, w: np.ndarray) -> int:
    return int(np.sum(v[0::2] * w[1::2] + w[0::2] * v[1::2]) % 2)


def _transvection(k: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (v + _inner(k, v) * k) % 2


def _find_transvection(x: np.ndarray, y: np.ndarray):
    """Vectors h1, h2 with y = Z_h2 Z_h1 x (zero vectors act trivially)"""
    size = x.size
    h1 = np.zeros(size, dtype=np.int8)
    h2 = np.zeros(size, dtype=np.int8)
    if np.array_equal(x, y):
        return h1, h2
    if _inner(x, y) == 1:
        return (x + y) % 2, h2

    z = np.zeros(size, dtype=np.int8)
    for i in range(size // 2):
        ii = 2 * i
        if (x[ii] or x[ii + 1]) and (y[ii] or y[ii + 1]):
            z[ii] = (x[ii] + y[ii]) % 2
            z[ii + 1] = (x[ii + 1] + y[ii + 1]) % 2
            if z[ii] + z[ii + 1] == 0:
                z[ii + 1] = 1
                if x[ii] != x[ii + 1]:
                    z[ii] = 1
            return (x + z) % 2, (z + y) % 2

    for i in range(size // 2):
        ii = 2 * i
        if (x[ii] or x[ii + 1]) and not (y[ii] or y[ii + 1]):
            if x[ii] == x[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = x[ii]
                z[ii] = x[ii + 1]
            break
    for i in range(size // 2):
        ii = 2 * i
        if not (x[ii] or x[ii + 1]) and (y[ii] or y[ii + 1]):
            if y[ii] == y[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = y[ii]
                z[ii] = y[ii + 1]
            break
    return (x + z) % 2, (z + y) % 2


def _random_symplectic_interleaved(n: int, rng: np.random.Generator) -> np.ndarray:
    size = 2 * n
    f1 = np.zeros(size, dtype=np.int8)
    while not f1.any():
        f1 = rng.integers(0, 2, size=size, dtype=np.int8)
    bits = rng.integers(0, 2, size=size - 1, dtype=np.int8)

    e1 = np.zeros(size, dtype=np.int8)
    e1[0] = 1
    t1, t2 = _find_transvection(e1, f1)

    e_prime = e1.copy()
    e_prime[2:] = bits[1:]
    h0 = _transvection(t2, _transvection(t1, e_prime))
    if bits[0] == 1:
        f1 = np.zeros(size, dtype=np.int8)

    g = np.zeros((size, size), dtype=np.int8)
    g[0, 0] = g[1, 1] = 1
    if n > 1:
        g[2:, 2:] = _random_symplectic_interleaved(n - 1, rng)

    for j in range(size):
        row = _transvection(t1, g[j])
        row = _transvection(t2, row)
        row = _transvection(h0, row)
        g[j] = _transvection(f1, row)
    return g


def random_symplectic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform 2n x 2n symplectic matrix in the grouped (x block, z block) layout"""
    interleaved = _random_symplectic_interleaved(n, rng)
    order = [2 * q for q in range(n)] + [2 * q + 1 for q in range(n)]
    return interleaved[np.ix_(order, order)].astype(np.uint8)


def sample_uniform_clifford(n: int, rng: np.random.Generator) -> CliffordTableau:
    """Uniformly random n-qubit Clifford (up to global phase)"""
    if n < 1:
        raise DomainError("need at least one qubit")
    if n > settings.clifford_max_qubits:
        raise CapabilityError(
            f"uniform Clifford sampling on {n} qubits",
            hint=f"the cap is {settings.clifford_max_qubits} qubits (BIRB_CLIFFORD_MAX_QUBITS)",
        )
    matrix = random_symplectic(n, rng)
    signs = rng.integers(0, 2, size=2 * n)
    return CliffordTableau.from_symplectic(matrix, signs)


def clifford_layer(tableau: CliffordTableau) -> GateLayer:
    """One layer applying an n-qubit Clifford to all qubits"""
    gate = gate_for_tableau(tableau)
    return GateLayer(tableau.n, (GateInstance(gate, tuple(range(tableau.n))),))


def build_clifford_group_birb_circuit(n: int, d: int, rng: np.random.Generator) -> BirbCircuit:
    """
    Clifford-group BiRB: C_0 .. C_d uniform Cliffords, s a uniformly random
    non-identity stabilizer of C_0|0...0>, then the basis change for s'
    """
    if d < 0:
        raise DomainError(f"benchmark depth must be non-negative, got {d}")
    cliffords = [sample_uniform_clifford(n, rng) for _ in range(d + 1)]
    z_mask = int(rng.integers(1, 2**n))
    s = cliffords[0].apply(PauliOperator.z_type(n, z_mask))
    core = [clifford_layer(t) for t in cliffords[1:]]
    s_prime = conjugate_by_circuit(s, Circuit(n, tuple(core)))
    return finish_circuit(
        clifford_layer(cliffords[0]), core, s, s_prime, core_start=0, variant="clifford-group-birb"
    )

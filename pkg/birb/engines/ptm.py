"""
Pauli-Transfer Matrix Helpers
Gate PTMs and gate-local application to states in the normalized Pauli basis

A state on n qubits is a tensor of shape (..., 4, 4, ..., 4) whose last axis
is qubit 0, matching the PTM basis order (qubit 0 is the least significant
base-4 digit). Leading axes are batch axes. Full 4^n x 4^n operators are
only built on request (circuit_ptm); layers are applied block by block.
"""

from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from birb.core.config import settings
from birb.core.errors import CapabilityError, DomainError
from birb.noise.models import CompiledNoiseModel
from birb.pauli.gates import CliffordGate
from birb.pauli.operator import PauliOperator, pauli_from_index, pauli_index_from_bits

ZERO_STATE_QUBIT = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)


def check_dense_capacity(n: int, cap: Optional[int] = None):
    cap = cap or settings.dense_max_qubits
    if n > cap:
        raise CapabilityError(
            f"dense simulation of {n} qubits",
            hint=f"the dense engine stops at {cap} qubits; use the frame engine for n > {cap} stochastic models",
        )


@lru_cache(maxsize=1024)
def gate_ptm(gate: CliffordGate) -> np.ndarray:
    """Signed permutation PTM of a Clifford gate on its local qubits"""
    k = gate.arity
    ptm = np.zeros((4**k, 4**k))
    for j in range(4**k):
        p = pauli_from_index(k, j)
        image = gate.tableau.apply(p)
        if not image.is_hermitian:
            raise DomainError(f"gate {gate.name} maps a Hermitian Pauli to a non-Hermitian one")
        ptm[pauli_index_from_bits(k, image.x_bits, image.z_bits), j] = image.sign
    ptm.setflags(write=False)
    return ptm


def apply_local(state: np.ndarray, block: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """
    Apply a 4^k x 4^k block acting on `qubits` (local qubit j = qubits[j])
    """
    k = len(qubits)
    ndim = state.ndim
    tensor = block.reshape((4,) * (2 * k))
    # Local qubit j is output axis k-1-j and input axis 2k-1-j of the block
    in_axes = [2 * k - 1 - j for j in range(k)]
    state_axes = [ndim - 1 - q for q in qubits]
    result = np.tensordot(tensor, state, axes=(in_axes, state_axes))
    destinations = [ndim - 1 - qubits[k - 1 - i] for i in range(k)]
    return np.moveaxis(result, list(range(k)), destinations)


def depolarize(state: np.ndarray, gamma: float, n: int) -> np.ndarray:
    """Scale every non-identity coefficient by gamma"""
    flat = state.reshape(state.shape[: state.ndim - n] + (4**n,)).copy()
    flat[..., 1:] *= gamma
    return flat.reshape(state.shape)


def apply_layer(
    state: np.ndarray,
    layer,
    n: int,
    compiled: Optional[CompiledNoiseModel] = None,
    benchmark: bool = False,
) -> np.ndarray:
    """
    The ideal layer, then the post-gate errors of its gates, then the
    gate-independent errors of benchmark layers

    Errors act after the whole layer unitary, so an error reaching past its
    gate's qubits never sees a later gate of the same layer.
    """
    for gate, qubits in layer.gates:
        state = apply_local(state, gate_ptm(gate), qubits)
    if compiled is not None:
        for gate, qubits in layer.gates:
            error = compiled.gate_channel(gate.name, qubits)
            if error is not None:
                support, channel = error
                state = apply_local(state, channel, support)
    if compiled is not None and benchmark:
        channel = compiled.layer_channel()
        if channel is not None:
            state = apply_local(state, channel, compiled.layer_support)
        if compiled.depolarizing != 1.0:
            state = depolarize(state, compiled.depolarizing, n)
    return state


def circuit_ptm(
    layers: Sequence,
    n: int,
    compiled: Optional[CompiledNoiseModel] = None,
    benchmark: bool = True,
) -> np.ndarray:
    """
    Full 4^n x 4^n PTM of a layer sequence with its noise

    Every layer counts as a benchmark layer unless `benchmark` is False.
    """
    check_dense_capacity(n)
    dim = 4**n
    batch = np.eye(dim).reshape((dim,) + (4,) * n)
    for layer in layers:
        batch = apply_layer(batch, layer, n, compiled, benchmark)
    # Row j of the batch is the image of basis vector j
    return batch.reshape(dim, dim).T


def ideal_circuit_ptm(layers: Sequence, n: int) -> np.ndarray:
    return circuit_ptm(layers, n, None, benchmark=False)


def pauli_coefficient_index(p: PauliOperator) -> int:
    return pauli_index_from_bits(p.n, p.x_bits, p.z_bits)

"""
Dense PTM Engine
Exact expectations and shot sampling for small n under arbitrary Markovian noise
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import hadamard

from birb.core.config import settings
from birb.core.logging import get_logger
from birb.engines.ptm import ZERO_STATE_QUBIT, apply_layer, apply_local, check_dense_capacity
from birb.noise.models import CompiledNoiseModel, NoiseModel
from birb.pauli.operator import PauliOperator, pauli_index_from_bits
from birb.sampler.birb_circuits import BirbCircuit

logger = get_logger()


@dataclass
class DenseState:
    """
    Coefficients over the normalized Pauli basis, shape (4,)*n

    The identity coefficient is 2^(-n/2) for a unit-trace state.
    Physicality is not enforced between layers.
    """

    n: int
    tensor: np.ndarray

    @classmethod
    def zero(cls, n: int) -> "DenseState":
        check_dense_capacity(n)
        vector = np.ones(1)
        for _ in range(n):
            vector = np.kron(ZERO_STATE_QUBIT, vector)
        return cls(n, vector.reshape((4,) * n))

    @property
    def coefficients(self) -> np.ndarray:
        return self.tensor.reshape(4**self.n)

    def expectation(self, p: PauliOperator) -> float:
        """Tr(P rho) for a Hermitian Pauli, sign included"""
        index = pauli_index_from_bits(self.n, p.x_bits, p.z_bits)
        return p.sign * float(np.sqrt(2.0**self.n) * self.coefficients[index])

    def z_expectations(self) -> np.ndarray:
        """<Z^m> for every mask m in 0 .. 2^n - 1"""
        values = np.empty(2**self.n)
        coefficients = self.coefficients
        scale = np.sqrt(2.0**self.n)
        for mask in range(2**self.n):
            values[mask] = scale * coefficients[pauli_index_from_bits(self.n, 0, mask)]
        return values

    def z_distribution(self) -> np.ndarray:
        """Raw computational-basis probabilities p(b) = 2^-n sum_m (-1)^|b&m| <Z^m>"""
        return hadamard(2**self.n) @ self.z_expectations() / 2**self.n


def _compiled(noise: Optional[NoiseModel], n: int, compiled: Optional[CompiledNoiseModel]):
    if compiled is not None:
        return compiled
    return CompiledNoiseModel(noise or NoiseModel(), n)


def evolve(bc: BirbCircuit, compiled: CompiledNoiseModel) -> DenseState:
    """Noisy final state, readout channel included"""
    n = bc.n
    state = DenseState.zero(n).tensor
    for q in range(n):
        channel = compiled.prep_ptm(q)
        if channel is not None:
            state = apply_local(state, channel, (q,))
    last_benchmark = bc.benchmark_depth
    for i, layer in enumerate(bc.circuit.layers):
        state = apply_layer(state, layer, n, compiled, benchmark=bc.core_start <= i <= last_benchmark)
    for q in range(n):
        channel = compiled.measurement_ptm(q)
        if channel is not None:
            state = apply_local(state, channel, (q,))
    return DenseState(n, state)


def dense_expectation(
    bc: BirbCircuit,
    noise: Optional[NoiseModel] = None,
    compiled: Optional[CompiledNoiseModel] = None,
) -> float:
    """Exact <s_C> of the noisy circuit"""
    check_dense_capacity(bc.n)
    compiled = _compiled(noise, bc.n, compiled)
    return evolve(bc, compiled).expectation(bc.target)


def outcome_probabilities(state: DenseState) -> np.ndarray:
    """Computational-basis distribution with roundoff negativity clipped"""
    probabilities = state.z_distribution()
    negativity = -float(probabilities.min())
    if negativity > settings.negative_probability_warn:
        logger.warning(f"Outcome distribution has negative mass {negativity:.3g}; clipping")
    elif negativity > settings.negative_probability_clip:
        logger.debug(f"Clipping negative probability {negativity:.3g}")
    probabilities = np.clip(probabilities, 0.0, None)
    return probabilities / probabilities.sum()


def dense_sample(
    bc: BirbCircuit,
    noise: Optional[NoiseModel],
    shots: int,
    rng: np.random.Generator,
    compiled: Optional[CompiledNoiseModel] = None,
) -> np.ndarray:
    """±1 shot values drawn from the exact output distribution"""
    check_dense_capacity(bc.n)
    if shots == 0:
        return np.empty(0, dtype=np.int8)
    compiled = _compiled(noise, bc.n, compiled)
    probabilities = outcome_probabilities(evolve(bc, compiled))
    outcomes = rng.choice(len(probabilities), size=shots, p=probabilities)
    return bc.values(outcomes)

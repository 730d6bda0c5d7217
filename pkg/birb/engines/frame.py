"""
Pauli-Frame Engine
Monte Carlo shots of BiRB circuits under stochastic Pauli noise

The ideal circuit returns +1 on every shot. A Pauli error E inserted after
layer t flips the shot exactly when E anticommutes with the target pulled
back to that point, P_t = U_{>t}† s_C U_{>t}. The engine computes every P_t
once per circuit, then samples all shots of a block at once.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from birb.core.config import settings
from birb.core.errors import DomainError
from birb.noise.generators import commutation_characters
from birb.noise.models import CompiledNoiseModel, NoiseModel
from birb.pauli.gates import conjugate_by_layer
from birb.pauli.operator import PauliOperator, pauli_index_from_bits
from birb.sampler.birb_circuits import BirbCircuit


@dataclass
class FlipSource:
    """Independent error with a per-outcome flip indicator"""

    probabilities: np.ndarray
    flips: np.ndarray


def _local_index(p: PauliOperator, support) -> int:
    x = z = 0
    for j, q in enumerate(support):
        x |= ((p.x_bits >> q) & 1) << j
        z |= ((p.z_bits >> q) & 1) << j
    return pauli_index_from_bits(len(support), x, z)


def _pauli_source(probabilities: np.ndarray, support, target: PauliOperator) -> Optional[FlipSource]:
    chi = commutation_characters(len(support))
    flips = chi[:, _local_index(target, support)] < 0
    if not np.any(probabilities[flips] > 0):
        return None
    return FlipSource(probabilities, flips)


def pulled_back_targets(bc: BirbCircuit) -> List[PauliOperator]:
    """
    Targets P_{-1}, P_0, ..., P_{d+1}: entry t+1 is s_C pulled back to just
    after layer t, the first entry to before the first layer
    """
    layers = bc.circuit.layers
    targets = [bc.target]
    current = bc.target
    for layer in reversed(layers):
        current = conjugate_by_layer(current, layer.inverse())
        targets.append(current)
    targets.reverse()
    return targets


def flip_sources(bc: BirbCircuit, compiled: CompiledNoiseModel) -> Tuple[List[FlipSource], int]:
    """
    Every noise location that can flip the shot, plus the count of global
    depolarizing locations (each flips with probability (1 - gamma)/2)
    """
    noise = compiled.noise
    if not noise.is_stochastic:
        raise DomainError("the frame engine needs stochastic generators and bit-flip SPAM errors only")

    n = bc.n
    targets = pulled_back_targets(bc)
    sources: List[FlipSource] = []

    before = targets[0]
    for q in range(n):
        p_flip = compiled.prep_flip(q)
        if p_flip > 0 and (before.z_bits >> q) & 1:
            sources.append(FlipSource(np.array([1 - p_flip, p_flip]), np.array([False, True])))

    depolarizing_count = 0
    layer_table = compiled.layer_pauli_errors()
    for i, layer in enumerate(bc.circuit.layers):
        after = targets[i + 1]
        for gate, qubits in layer.gates:
            table = compiled.gate_pauli_errors(gate.name, qubits)
            if table is not None:
                source = _pauli_source(table[1], table[0], after)
                if source is not None:
                    sources.append(source)
        if bc.core_start <= i <= bc.benchmark_depth:
            if layer_table is not None:
                source = _pauli_source(layer_table, compiled.layer_support, after)
                if source is not None:
                    sources.append(source)
            if compiled.depolarizing != 1.0:
                depolarizing_count += 1

    for q in range(n):
        p_flip = compiled.readout_flip(q)
        if p_flip > 0 and (bc.z_mask >> q) & 1:
            sources.append(FlipSource(np.array([1 - p_flip, p_flip]), np.array([False, True])))
    return sources, depolarizing_count


def sample_block(
    sources: List[FlipSource], depolarizing_count: int, gamma: float, shots: int, rng: np.random.Generator
) -> np.ndarray:
    parity = np.zeros(shots, dtype=bool)
    for source in sources:
        outcomes = rng.choice(len(source.probabilities), size=shots, p=source.probabilities)
        parity ^= source.flips[outcomes]
    if depolarizing_count:
        p_flip = (1.0 - gamma) / 2.0
        for _ in range(depolarizing_count):
            parity ^= rng.random(shots) < p_flip
    return np.where(parity, -1, 1).astype(np.int8)


def frame_run(
    bc: BirbCircuit,
    noise: Optional[NoiseModel],
    shots: int,
    rng: np.random.Generator,
    compiled: Optional[CompiledNoiseModel] = None,
    block_shots: Optional[int] = None,
) -> np.ndarray:
    """±1 shot values of a BiRB circuit under stochastic Pauli noise"""
    if compiled is None:
        compiled = CompiledNoiseModel(noise or NoiseModel(), bc.n)
    sources, depolarizing_count = flip_sources(bc, compiled)
    if shots == 0:
        return np.empty(0, dtype=np.int8)
    if not sources and not depolarizing_count:
        return np.ones(shots, dtype=np.int8)

    block_shots = block_shots or settings.frame_block_shots
    blocks = []
    for start in range(0, shots, block_shots):
        size = min(block_shots, shots - start)
        blocks.append(sample_block(sources, depolarizing_count, compiled.depolarizing, size, rng))
    return np.concatenate(blocks)


def sources_expectation(sources: List[FlipSource], depolarizing_count: int, gamma: float) -> float:
    """Product over locations of the bias 1 - 2 P(flip)"""
    value = gamma**depolarizing_count
    for source in sources:
        value *= 1.0 - 2.0 * float(source.probabilities[source.flips].sum())
    return value


def frame_expectation(bc: BirbCircuit, compiled: CompiledNoiseModel) -> float:
    """Exact expectation of the shot value under the frame model"""
    sources, depolarizing_count = flip_sources(bc, compiled)
    return sources_expectation(sources, depolarizing_count, compiled.depolarizing)

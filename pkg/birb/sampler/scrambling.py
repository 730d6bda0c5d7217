"""
Scrambling Estimator
Monte Carlo check that k Omega-layers spread any Pauli over all others

For Paulis P, P' the quantity (1/4^n) Tr(P' U P U^-1), with P, P' acting as
superoperators rho -> P rho P, equals the mean over probe Paulis R of
c_{P'}(R) c_Q(R), where Q is P conjugated by the circuit and c_A(R) is +1
when A and R commute and -1 otherwise. A highly scrambling layer set keeps
this close to 1/4^n for every pair.
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel

from birb.circuits.circuit import Circuit
from birb.core.errors import CapabilityError, DomainError
from birb.core.logging import get_logger
from birb.pauli.gates import conjugate_by_circuit
from birb.pauli.operator import PauliOperator, all_paulis, commutes, sample_random_pauli
from birb.sampler.omega import OmegaSpec, sample_omega_layer

logger = get_logger()

_EXHAUSTIVE_MAX_QUBITS = 6


class PairEstimate(BaseModel):
    pauli: str
    pauli_prime: str
    estimate: float
    stderr: float


class ScramblingReport(BaseModel):
    n: int
    k: int
    delta_hat: float
    samples: dict
    estimates: List[PairEstimate]


def _character(a: PauliOperator, r: PauliOperator) -> int:
    return 1 if commutes(a, r) else -1


def _random_probe(n: int, rng: np.random.Generator) -> PauliOperator:
    """Uniform over all 4^n Paulis, identity included"""
    bits = rng.integers(0, 2, size=2 * n)
    x = sum(1 << q for q in range(n) if bits[q])
    z = sum(1 << q for q in range(n) if bits[n + q])
    return PauliOperator(n, x, z)


def estimate_scrambling(
    spec: OmegaSpec,
    n: int,
    k: int,
    n_pauli_pairs: int,
    n_circuits: int,
    n_probes: Optional[int],
    rng: np.random.Generator,
) -> ScramblingReport:
    """
    Estimate the scrambling deviation of k-layer Omega circuits

    `n_probes=None` sums over all 4^n probe Paulis instead of sampling them.
    k = 0 is accepted and evaluates the identity circuit.
    """
    if k < 0:
        raise DomainError(f"layer count must be non-negative, got {k}")
    if n_probes is None and n > _EXHAUSTIVE_MAX_QUBITS:
        raise CapabilityError(
            f"exhaustive probe sums on {n} qubits", hint="pass a probe count to sample probes"
        )
    probes_all = list(all_paulis(n)) if n_probes is None else None

    floor = 1.0 / 4**n
    estimates = []
    for _ in range(n_pauli_pairs):
        p = sample_random_pauli(n, rng)
        p_prime = sample_random_pauli(n, rng)
        values = []
        for _ in range(n_circuits):
            circuit = Circuit(n, tuple(sample_omega_layer(spec, n, rng) for _ in range(k)))
            q = conjugate_by_circuit(p, circuit).unsigned()
            probes = probes_all if probes_all is not None else [_random_probe(n, rng) for _ in range(n_probes)]
            values.append(np.mean([_character(p_prime, r) * _character(q, r) for r in probes]))
        values = np.asarray(values, dtype=float)
        stderr = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
        estimates.append(
            PairEstimate(
                pauli=p.to_label(),
                pauli_prime=p_prime.to_label(),
                estimate=float(values.mean()),
                stderr=stderr,
            )
        )

    delta_hat = max(e.estimate for e in estimates) - floor if estimates else 0.0
    logger.info(f"Scrambling k={k}: delta_hat={delta_hat:.4g} over {len(estimates)} pairs")
    return ScramblingReport(
        n=n,
        k=k,
        delta_hat=delta_hat,
        samples={"pairs": n_pauli_pairs, "circuits": n_circuits, "probes": n_probes or 4**n},
        estimates=estimates,
    )

"""
Average Layer Error Oracle
Exact circuit polarizations of Omega-distributed core circuits and the fitted eps_Omega

Each core circuit C_d = L_d ... L_1 (no preparation or measurement layers)
is simulated as a full PTM. Its error channel is phi(C) U(C)^-1, whose
polarization is (Tr(phi(C) U(C)^T) - 1) / (4^n - 1). Averages over K
circuits per depth are fitted to A p^d (+ B) and p is converted to eps_Omega.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field

from birb.analysis.fitting import Convention, bootstrap, fit_dataset
from birb.core.config import settings
from birb.core.logging import get_logger
from birb.engines.ptm import check_dense_capacity, circuit_ptm, ideal_circuit_ptm
from birb.engines.runner import Dataset, DatasetRow
from birb.noise.models import CompiledNoiseModel, NoiseModel
from birb.pauli.operator import PauliOperator
from birb.sampler.omega import OmegaSpec, check_density, sample_omega_layer
from birb.utils.helpers import derive_rng

logger = get_logger()


class EpsilonOmegaEstimate(BaseModel):
    """eps_Omega with the decay fit it came from"""

    n: int
    epsilon: float
    p_rc: float
    A: float
    B: float = 0.0
    floor: bool = False
    depths: List[int]
    gamma_bar: List[float]
    sigma: Dict[str, float] = Field(default_factory=dict)
    convention: Convention = "entanglement"
    seed: int

    def report(self) -> dict:
        data = self.model_dump()
        data["schema_version"] = settings.schema_version
        return data


def core_circuit_polarization(layers, n: int, compiled: Optional[CompiledNoiseModel]) -> float:
    """Polarization of phi(C) U(C)^-1 for a list of layers"""
    noisy = circuit_ptm(layers, n, compiled, benchmark=True)
    ideal = ideal_circuit_ptm(layers, n)
    # Tr(A B^T) as an elementwise sum
    trace = float(np.sum(noisy * ideal))
    return (trace - noisy[0, 0]) / (4**n - 1)


def _oracle_chunk(
    spec: OmegaSpec, noise: NoiseModel, n: int, keys: List[Tuple[int, int]], seed: int
) -> List[DatasetRow]:
    compiled = CompiledNoiseModel(noise, n)
    label = PauliOperator.identity(n).to_label()
    rows = []
    for depth, index in keys:
        rng = derive_rng(seed, "oracle", depth, index)
        layers = [sample_omega_layer(spec, n, rng) for _ in range(depth)]
        gamma = core_circuit_polarization(layers, n, compiled)
        rows.append(
            DatasetRow(id=f"d{depth}-k{index}", n=n, d=depth, target=label, N=0, exact=gamma, seed=seed)
        )
    return rows


def circuit_polarizations(
    spec: OmegaSpec,
    noise: Optional[NoiseModel],
    n: int,
    depths: List[int],
    circuits_per_depth: int,
    seed: int,
    workers: Optional[int] = None,
) -> Dataset:
    """Exact polarization of K sampled core circuits per depth, as a dataset"""
    check_dense_capacity(n)
    noise = noise or NoiseModel()
    noise.check_qubits(n)
    check_density(spec, n)
    workers = workers or settings.workers

    keys = [(d, i) for d in depths for i in range(circuits_per_depth)]
    if workers == 1:
        rows = _oracle_chunk(spec, noise, n, keys, seed)
    else:
        size = max(1, -(-len(keys) // (workers * 4)))
        parts = Parallel(n_jobs=workers)(
            delayed(_oracle_chunk)(spec, noise, n, keys[i : i + size], seed) for i in range(0, len(keys), size)
        )
        rows = [row for part in parts for row in part]
    return Dataset(rows=rows)


def epsilon_omega_oracle(
    spec: OmegaSpec,
    noise: Optional[NoiseModel],
    n: int,
    depths: List[int],
    circuits_per_depth: int,
    seed: int,
    floor: bool = False,
    bootstrap_samples: Optional[int] = 0,
    workers: Optional[int] = None,
    convention: Convention = "entanglement",
) -> EpsilonOmegaEstimate:
    """
    Fit eps_Omega from exact core-circuit polarizations

    Args:
        spec: Layer distribution
        noise: Noise model (gate errors plus gate-independent layer errors)
        depths: Core circuit depths
        circuits_per_depth: K
        floor: Free the additive constant B
        bootstrap_samples: Bootstrap replicates for sigma (0 skips it)

    Returns:
        EpsilonOmegaEstimate
    """
    dataset = circuit_polarizations(spec, noise, n, depths, circuits_per_depth, seed, workers)
    fit = fit_dataset(dataset, weighted=False, floor=floor, convention=convention)

    sigma: Dict[str, float] = {}
    if bootstrap_samples:
        sigma, _ = bootstrap(dataset, bootstrap_samples, seed, workers, weighted=False, floor=floor, convention=convention)
        sigma = {"epsilon" if k == "r_omega" else k: v for k, v in sigma.items()}

    logger.info(f"eps_Omega on {n} qubits: {fit.r_omega:.6g} (p_rc={fit.p:.6f})")
    return EpsilonOmegaEstimate(
        n=n,
        epsilon=fit.r_omega,
        p_rc=fit.p,
        A=fit.A,
        B=fit.B,
        floor=floor,
        depths=fit.depths,
        gamma_bar=fit.fbar,
        sigma=sigma,
        convention=convention,
        seed=seed,
    )

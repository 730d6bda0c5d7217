"""
Layer Superchannel
The map M -> E_L[ U(L)^-1 M phi(L) ] on superoperators and its spectrum

With row-major vectorization vec(A M B) = (A kron B^T) vec(M), the map is
the 16^n x 16^n matrix E_L[ U(L)^T kron phi(L)^T ]. Its two largest
eigenvalues are 1 for noiseless layers; under weak noise the second one,
lambda, sets the decay rate of the circuit-averaged polarization.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.linalg import eigvals

from birb.circuits.circuit import GateLayer
from birb.core.config import settings
from birb.core.errors import CapabilityError
from birb.core.logging import get_logger
from birb.engines.ptm import circuit_ptm, ideal_circuit_ptm
from birb.noise.models import CompiledNoiseModel, NoiseModel
from birb.sampler.omega import OmegaSpec, check_density, enumerate_omega_layers, sample_omega_layer
from birb.utils.helpers import derive_rng

logger = get_logger()

UNIT_TOLERANCE = 1e-10


class LSuperchannelReport(BaseModel):
    """Spectrum of the layer superchannel, sorted by decreasing modulus"""

    n: int
    dimension: int
    eigenvalues_real: List[float]
    eigenvalues_imag: List[float]
    moduli: List[float]
    lam: float = Field(serialization_alias="lambda")
    unit_eigenvalue_count: int
    layer_count: int
    monte_carlo: bool = False

    def report(self) -> dict:
        data = self.model_dump(by_alias=True)
        data["schema_version"] = settings.schema_version
        return data


def _check_capacity(n: int):
    if n > settings.lspec_max_qubits:
        raise CapabilityError(
            f"layer superchannel on {n} qubits",
            hint=f"the 16^n x 16^n construction stops at {settings.lspec_max_qubits} qubits",
        )


def layer_distribution(
    spec: OmegaSpec, n: int, samples: Optional[int] = None, seed: int = 0
) -> Tuple[List[Tuple[GateLayer, float]], bool]:
    """
    Exact edgegrab distribution, or `samples` equally weighted draws from
    the substream (seed, "lspec") when a sample count is given
    """
    check_density(spec, n)
    if samples is None:
        return enumerate_omega_layers(spec, n), False
    rng = derive_rng(seed, "lspec")
    return [(sample_omega_layer(spec, n, rng), 1.0 / samples) for _ in range(samples)], True


def build_superchannel_matrix(
    layers: Sequence[Tuple[GateLayer, float]], n: int, noise: Optional[NoiseModel] = None
) -> np.ndarray:
    _check_capacity(n)
    compiled = CompiledNoiseModel(noise or NoiseModel(), n)
    dim = 4**n
    matrix = np.zeros((dim * dim, dim * dim))
    for layer, probability in layers:
        noisy = circuit_ptm([layer], n, compiled, benchmark=True)
        ideal = ideal_circuit_ptm([layer], n)
        matrix += probability * np.kron(ideal.T, noisy.T)
    return matrix


def build_L_superchannel(
    spec: OmegaSpec,
    noise: Optional[NoiseModel],
    n: int,
    samples: Optional[int] = None,
    seed: int = 0,
) -> LSuperchannelReport:
    """
    Materialize the layer superchannel and report its spectrum

    Args:
        spec: Layer distribution (enumerated exactly unless `samples` is set)
        noise: Noise model
        n: Qubit count, at most the configured cap
        samples: Monte Carlo layer count instead of exact enumeration

    Raises:
        CapabilityError: n above the cap, or too many edges to enumerate
    """
    _check_capacity(n)
    layers, monte_carlo = layer_distribution(spec, n, samples, seed)
    matrix = build_superchannel_matrix(layers, n, noise)

    values = eigvals(matrix)
    order = np.argsort(-np.abs(values), kind="stable")
    values = values[order]
    moduli = np.abs(values)
    unit_count = int(np.sum(np.abs(values - 1.0) < UNIT_TOLERANCE))

    logger.info(f"Layer superchannel on {n} qubits over {len(layers)} layers: lambda={moduli[1]:.8f}")
    return LSuperchannelReport(
        n=n,
        dimension=matrix.shape[0],
        eigenvalues_real=values.real.tolist(),
        eigenvalues_imag=values.imag.tolist(),
        moduli=moduli.tolist(),
        lam=float(moduli[1]),
        unit_eigenvalue_count=unit_count,
        layer_count=len(layers),
        monte_carlo=monte_carlo,
    )


def exact_fbar(
    spec: OmegaSpec,
    noise: Optional[NoiseModel],
    n: int,
    depths: Sequence[int],
    samples: Optional[int] = None,
    seed: int = 0,
) -> Dict[int, float]:
    """
    Circuit-averaged core polarization at each depth from powers of the
    superchannel: gamma_bar_d = (Tr L^d(I) - 1) / (4^n - 1)
    """
    _check_capacity(n)
    layers, _ = layer_distribution(spec, n, samples, seed)
    matrix = build_superchannel_matrix(layers, n, noise)

    dim = 4**n
    vector = np.eye(dim).reshape(-1)
    result: Dict[int, float] = {}
    current = 0
    for depth in sorted(depths):
        while current < depth:
            vector = matrix @ vector
            current += 1
        trace = float(np.trace(vector.reshape(dim, dim)))
        result[depth] = (trace - 1.0) / (dim - 1)
    return {d: result[d] for d in depths}

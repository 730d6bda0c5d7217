"""
Error Generators and Channels
Elementary error generators, their Pauli-transfer matrices and channel utilities

All superoperators are Pauli-transfer matrices (PTMs) in the normalized
Pauli basis P/sqrt(2^k), ordered as in birb.pauli.operator.pauli_index:
R[i, j] = Tr(P_i L(P_j)) / 2^k.

Generator kinds (P, Q non-identity Paulis on the support):
    stochastic(P)      rho -> P rho P - rho
    hamiltonian(P)     rho -> -i[P, rho]
    active(P, Q)       rho -> i(P rho Q - Q rho P + 1/2 {[P, Q], rho})
    correlation(P, Q)  rho -> P rho Q + Q rho P - 1/2 {QP + PQ, rho}
"""

from functools import lru_cache
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.linalg import expm

from birb.core.errors import CapabilityError, DomainError
from birb.pauli.operator import PauliOperator, pauli_basis_matrices, pauli_index, pauli_from_index

MAX_GENERATOR_QUBITS = 4

GeneratorKind = Literal["stochastic", "hamiltonian", "active", "correlation"]
_TWO_LABEL_KINDS = ("active", "correlation")


class ErrorGenerator(BaseModel):
    """
    One elementary generator with its rate

    `paulis` holds unsigned labels, one character per support qubit.
    `qubits` defaults to the qubits of the gate the generator is attached to.
    """

    kind: GeneratorKind
    paulis: List[str] = Field(min_length=1, max_length=2)
    rate: float
    qubits: Optional[Tuple[int, ...]] = None

    @model_validator(mode="after")
    def _check(self):
        expected = 2 if self.kind in _TWO_LABEL_KINDS else 1
        if len(self.paulis) != expected:
            raise ValueError(f"{self.kind} generators take {expected} Pauli label(s)")
        widths = {len(label) for label in self.paulis}
        if len(widths) != 1:
            raise ValueError(f"Pauli labels {self.paulis} have different widths")
        for label in self.paulis:
            if set(label) - set("IXYZ"):
                raise ValueError(f"invalid Pauli label {label!r}")
            if set(label) == {"I"}:
                raise ValueError("generator Paulis must be non-identity")
        if self.qubits is not None and len(self.qubits) != self.width:
            raise ValueError(f"labels of width {self.width} placed on {len(self.qubits)} qubits")
        if self.kind == "stochastic" and self.rate < 0:
            raise ValueError("stochastic rates must be non-negative")
        if not np.isfinite(self.rate):
            raise ValueError("rates must be finite")
        return self

    @property
    def width(self) -> int:
        return len(self.paulis[0])

    @classmethod
    def stochastic(cls, label: str, rate: float, qubits=None) -> "ErrorGenerator":
        return cls(kind="stochastic", paulis=[label], rate=rate, qubits=qubits)

    @classmethod
    def hamiltonian(cls, label: str, rate: float, qubits=None) -> "ErrorGenerator":
        return cls(kind="hamiltonian", paulis=[label], rate=rate, qubits=qubits)

    @classmethod
    def active(cls, p: str, q: str, rate: float, qubits=None) -> "ErrorGenerator":
        return cls(kind="active", paulis=[p, q], rate=rate, qubits=qubits)

    @classmethod
    def correlation(cls, p: str, q: str, rate: float, qubits=None) -> "ErrorGenerator":
        return cls(kind="correlation", paulis=[p, q], rate=rate, qubits=qubits)

    def embedded(self, support: Sequence[int]) -> Tuple[str, ...]:
        """Labels widened to `support` (which must contain `qubits`)"""
        own = self.qubits
        labels = []
        for label in self.paulis:
            chars = ["I"] * len(support)
            for char, q in zip(label, own):
                chars[support.index(q)] = char
            labels.append("".join(chars))
        return tuple(labels)


def _superop_to_ptm(apply, k: int) -> np.ndarray:
    basis = pauli_basis_matrices(k)
    dim = 2**k
    images = np.array([apply(p) for p in basis])
    # R[i, j] = Tr(P_i images[j]) / dim
    ptm = np.einsum("iab,jba->ij", basis, images) / dim
    if np.abs(ptm.imag).max(initial=0.0) > 1e-10:
        raise DomainError("superoperator is not Hermiticity preserving")
    return ptm.real


@lru_cache(maxsize=4096)
def _unit_generator(kind: str, labels: Tuple[str, ...]) -> np.ndarray:
    k = len(labels[0])
    if k > MAX_GENERATOR_QUBITS:
        raise CapabilityError(
            f"error generator on {k} qubits", hint=f"supports are limited to {MAX_GENERATOR_QUBITS} qubits"
        )
    mats = [PauliOperator.from_label(label).to_matrix() for label in labels]
    p = mats[0]
    if kind == "stochastic":
        matrix = _superop_to_ptm(lambda rho: p @ rho @ p - rho, k)
    elif kind == "hamiltonian":
        matrix = _superop_to_ptm(lambda rho: -1j * (p @ rho - rho @ p), k)
    elif kind == "active":
        q = mats[1]
        comm = p @ q - q @ p
        matrix = _superop_to_ptm(
            lambda rho: 1j * (p @ rho @ q - q @ rho @ p + 0.5 * (comm @ rho + rho @ comm)), k
        )
    elif kind == "correlation":
        q = mats[1]
        anti = q @ p + p @ q
        matrix = _superop_to_ptm(lambda rho: p @ rho @ q + q @ rho @ p - 0.5 * (anti @ rho + rho @ anti), k)
    else:
        raise DomainError(f"unsupported generator kind {kind!r}")
    matrix.setflags(write=False)
    return matrix


def generator_matrix(g: ErrorGenerator, k: Optional[int] = None, support: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    PTM (4^k x 4^k) of the unit-rate generator

    With `support`, the generator's labels are placed on its own qubits
    within that support; otherwise they must already span k qubits.
    """
    if support is not None:
        labels = g.embedded(list(support))
    else:
        labels = tuple(g.paulis)
    if k is not None and len(labels[0]) != k:
        raise DomainError(f"generator of width {len(labels[0])} used on {k} qubits")
    return _unit_generator(g.kind, labels)


def total_generator(gens: Sequence[ErrorGenerator], k: int, support: Optional[Sequence[int]] = None) -> np.ndarray:
    total = np.zeros((4**k, 4**k))
    for g in gens:
        if g.rate != 0.0:
            total = total + g.rate * generator_matrix(g, k, support)
    return total


def channel_from_generators(gens: Sequence[ErrorGenerator], k: int, support: Optional[Sequence[int]] = None) -> np.ndarray:
    """PTM of exp(sum of rate * generator); the identity for an empty list"""
    if not gens:
        return np.eye(4**k)
    channel = expm(total_generator(gens, k, support))
    if not np.all(np.isfinite(channel)):
        raise DomainError("channel exponential is not finite")
    return channel


@lru_cache(maxsize=8)
def commutation_characters(k: int) -> np.ndarray:
    """chi[a, b] = +1 if Paulis a and b commute, -1 otherwise (PTM order)"""
    paulis = [pauli_from_index(k, i) for i in range(4**k)]
    xs = np.array([p.x_bits for p in paulis], dtype=np.int64)
    zs = np.array([p.z_bits for p in paulis], dtype=np.int64)
    overlap = (xs[:, None] & zs[None, :]) ^ (zs[:, None] & xs[None, :])
    parity = np.zeros_like(overlap)
    for q in range(k):
        parity ^= (overlap >> q) & 1
    chi = (1 - 2 * parity).astype(np.int8)
    chi.setflags(write=False)
    return chi


def pauli_error_distribution(gens: Sequence[ErrorGenerator], k: int, support: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    Error probabilities over the 4^k Paulis (PTM order) of a stochastic model

    Pauli fidelities f_Q come from exponentiating the diagonal generator;
    the error probabilities are p_P = 4^-k sum_Q chi(P, Q) f_Q.
    """
    for g in gens:
        if g.kind != "stochastic":
            raise DomainError(f"{g.kind} generators have no Pauli error distribution")
    log_fidelity = np.zeros(4**k)
    for g in gens:
        log_fidelity += g.rate * np.diag(generator_matrix(g, k, support))
    fidelities = np.exp(log_fidelity)
    probabilities = commutation_characters(k).astype(float) @ fidelities / 4**k
    probabilities[np.abs(probabilities) < 1e-15] = 0.0
    if probabilities.min() < -1e-12:
        raise DomainError("stochastic model produced a negative error probability")
    probabilities = np.clip(probabilities, 0.0, None)
    return probabilities / probabilities.sum()


# -- channel utilities ------------------------------------------------------


def ptm_to_choi(ptm: np.ndarray) -> np.ndarray:
    """Choi state (id (x) E)(|Phi><Phi|), unit trace"""
    k = int(round(np.log(ptm.shape[0]) / np.log(4)))
    basis = pauli_basis_matrices(k)
    dim = 2**k
    choi = np.einsum("ij,jab,icd->acbd", ptm, np.transpose(basis, (0, 2, 1)), basis)
    return choi.reshape(dim * dim, dim * dim) / dim**2


def is_trace_preserving(ptm: np.ndarray, atol: float = 1e-12) -> bool:
    first_row = np.zeros(ptm.shape[0])
    first_row[0] = 1.0
    return bool(np.allclose(ptm[0], first_row, atol=atol))


def is_completely_positive(ptm: np.ndarray, atol: float = 1e-10) -> bool:
    choi = ptm_to_choi(ptm)
    eigenvalues = np.linalg.eigvalsh((choi + choi.conj().T) / 2)
    return bool(eigenvalues.min() >= -atol)


def entanglement_fidelity(ptm: np.ndarray, ideal: Optional[np.ndarray] = None) -> float:
    """
    Process fidelity <Phi| (id (x) E U^-1)(|Phi><Phi|) |Phi>

    `ideal` is the PTM of the target unitary; the error channel is
    ptm @ ideal^T (PTMs of unitaries are orthogonal).
    """
    error = ptm if ideal is None else ptm @ ideal.T
    dim2 = error.shape[0]
    dim = int(round(np.sqrt(dim2)))
    phi = np.eye(dim).reshape(dim * dim) / np.sqrt(dim)
    return float(np.real(phi.conj() @ ptm_to_choi(error) @ phi))


def polarization(ptm: np.ndarray) -> float:
    """Mean of the non-identity diagonal, i.e. the average Pauli survival"""
    return float((np.trace(ptm) - ptm[0, 0]) / (ptm.shape[0] - 1))


def polarization_from_fidelity(fidelity: float, k: int) -> float:
    d2 = 4**k
    return (d2 * fidelity - 1) / (d2 - 1)


def fidelity_from_polarization(gamma: float, k: int) -> float:
    d2 = 4**k
    return ((d2 - 1) * gamma + 1) / d2


def pauli_channel_ptm(probabilities: np.ndarray) -> np.ndarray:
    """Diagonal PTM of rho -> sum_P p_P P rho P"""
    k = int(round(np.log(len(probabilities)) / np.log(4)))
    return np.diag(commutation_characters(k).astype(float) @ probabilities)


def label_index(label: str) -> int:
    return pauli_index(PauliOperator.from_label(label))

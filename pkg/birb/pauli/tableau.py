"""
Clifford Tableaus
Images of the 2n single-qubit generators under conjugation by a Clifford

Column j of the symplectic matrix is the (x, z) bit vector of the image of
X_j and column n+j the image of Z_j. Signs are tracked per image.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np

from birb.core.errors import DimensionError, DomainError
from birb.pauli.operator import PauliOperator, all_paulis, commutes, multiply


@dataclass(frozen=True)
class CliffordTableau:
    """Clifford action U P U† given by the images of X_0..X_{n-1}, Z_0..Z_{n-1}"""

    n: int
    x_images: Tuple[PauliOperator, ...]
    z_images: Tuple[PauliOperator, ...]

    def __post_init__(self):
        if len(self.x_images) != self.n or len(self.z_images) != self.n:
            raise DimensionError(f"tableau needs {self.n} X and {self.n} Z images")
        for image in self.x_images + self.z_images:
            if image.n != self.n:
                raise DimensionError("generator image has the wrong qubit count")
            if not image.is_hermitian:
                raise DomainError(f"generator image {image} is not Hermitian")

    # -- construction -------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(
            n,
            tuple(PauliOperator(n, 1 << q, 0) for q in range(n)),
            tuple(PauliOperator(n, 0, 1 << q) for q in range(n)),
        )

    @classmethod
    def from_labels(cls, x_labels: Sequence[str], z_labels: Sequence[str]) -> "CliffordTableau":
        """
        Build from image labels, e.g. H = from_labels(["+Z"], ["+X"])
        """
        x_images = tuple(PauliOperator.from_label(s) for s in x_labels)
        z_images = tuple(PauliOperator.from_label(s) for s in z_labels)
        return cls(len(x_images), x_images, z_images)

    @classmethod
    def from_symplectic(cls, matrix: np.ndarray, signs: Sequence[int]) -> "CliffordTableau":
        """
        Build from a 2n x 2n symplectic matrix and 2n sign bits (1 = minus)
        """
        matrix = np.asarray(matrix, dtype=np.uint8) & 1
        n = matrix.shape[0] // 2
        images = []
        for col in range(2 * n):
            x = _bits_to_int(matrix[:n, col])
            z = _bits_to_int(matrix[n:, col])
            images.append(PauliOperator(n, x, z, 2 * int(signs[col])))
        return cls(n, tuple(images[:n]), tuple(images[n:]))

    @classmethod
    def from_unitary(cls, unitary: np.ndarray) -> "CliffordTableau":
        """Tableau of a dense Clifford unitary (small n oracle path)"""
        dim = unitary.shape[0]
        n = int(round(np.log2(dim)))
        if 2**n != dim:
            raise DimensionError(f"unitary dimension {dim} is not a power of two")
        images = []
        for generator in [PauliOperator(n, 1 << q, 0) for q in range(n)] + [
            PauliOperator(n, 0, 1 << q) for q in range(n)
        ]:
            conjugated = unitary @ generator.to_matrix() @ unitary.conj().T
            images.append(pauli_from_matrix(conjugated))
        return cls(n, tuple(images[:n]), tuple(images[n:]))

    # -- action -------------------------------------------------------

    def apply(self, p: PauliOperator) -> PauliOperator:
        """Conjugate p by the Clifford: U p U†"""
        if p.n != self.n:
            raise DimensionError(f"Pauli on {p.n} qubits, tableau on {self.n}")
        result = PauliOperator(self.n, 0, 0, p.phase_exp)
        for q in range(self.n):
            bx = (p.x_bits >> q) & 1
            bz = (p.z_bits >> q) & 1
            if bx and bz:
                # Y = i X Z
                result = multiply(result, self.x_images[q])
                result = multiply(result, self.z_images[q])
                result = PauliOperator(self.n, result.x_bits, result.z_bits, result.phase_exp + 1)
            elif bx:
                result = multiply(result, self.x_images[q])
            elif bz:
                result = multiply(result, self.z_images[q])
        return result

    @cached_property
    def lookup(self) -> List[Tuple[int, int, int]]:
        """
        (x', z', phase) for every unsigned local Pauli, indexed by x | z << n

        Only built for small tableaus; gates use it as their fast path.
        """
        if self.n > 4:
            raise DomainError("lookup tables are only built for up to 4 qubits")
        table = [(0, 0, 0)] * (4**self.n)
        for x in range(1 << self.n):
            for z in range(1 << self.n):
                image = self.apply(PauliOperator(self.n, x, z))
                table[x | (z << self.n)] = (image.x_bits, image.z_bits, image.phase_exp)
        return table

    def compose(self, other: "CliffordTableau") -> "CliffordTableau":
        """Tableau of `self` followed by `other` (U_other U_self)"""
        if other.n != self.n:
            raise DimensionError(f"cannot compose {self.n}- and {other.n}-qubit tableaus")
        return CliffordTableau(
            self.n,
            tuple(other.apply(p) for p in self.x_images),
            tuple(other.apply(p) for p in self.z_images),
        )

    def symplectic_matrix(self) -> np.ndarray:
        matrix = np.zeros((2 * self.n, 2 * self.n), dtype=np.uint8)
        for col, image in enumerate(self.x_images + self.z_images):
            for q in range(self.n):
                matrix[q, col] = (image.x_bits >> q) & 1
                matrix[self.n + q, col] = (image.z_bits >> q) & 1
        return matrix

    def inverse(self) -> "CliffordTableau":
        """
        Inverse Clifford

        The symplectic part is inverted as Omega M^T Omega; each inverse
        image starts with + sign and is negated if applying `self` to it
        yields the negative generator.
        """
        n = self.n
        m = self.symplectic_matrix().astype(np.int64)
        omega = np.zeros((2 * n, 2 * n), dtype=np.int64)
        omega[:n, n:] = np.eye(n, dtype=np.int64)
        omega[n:, :n] = np.eye(n, dtype=np.int64)
        inv = (omega @ m.T @ omega) % 2
        signs = []
        for col in range(2 * n):
            candidate = PauliOperator(n, _bits_to_int(inv[:n, col]), _bits_to_int(inv[n:, col]))
            signs.append(0 if self.apply(candidate).phase_exp == 0 else 1)
        return CliffordTableau.from_symplectic(inv, signs)

    def is_valid(self) -> bool:
        """Images are Hermitian and satisfy the canonical commutation relations"""
        for i in range(self.n):
            for j in range(self.n):
                if not commutes(self.x_images[i], self.x_images[j]):
                    return False
                if not commutes(self.z_images[i], self.z_images[j]):
                    return False
                if commutes(self.x_images[i], self.z_images[j]) != (i != j):
                    return False
        return all(p.is_hermitian for p in self.x_images + self.z_images)

    @property
    def key(self) -> Tuple[int, ...]:
        """Hashable identity of the Clifford action"""
        return tuple(
            v for p in self.x_images + self.z_images for v in (p.x_bits, p.z_bits, p.phase_exp)
        )

    # -- serialization ------------------------------------------------

    def to_hex(self) -> str:
        """
        Compact hex form: per generator (X_0..X_{n-1}, Z_0..Z_{n-1}) a field
        of x bits, z bits and one sign bit, packed from the low end
        """
        width = 2 * self.n + 1
        value = 0
        for g, image in enumerate(self.x_images + self.z_images):
            field = image.x_bits | (image.z_bits << self.n) | ((image.phase_exp // 2) << (2 * self.n))
            value |= field << (g * width)
        return format(value, "x")

    @classmethod
    def from_hex(cls, text: str, n: int) -> "CliffordTableau":
        try:
            value = int(text, 16)
        except ValueError:
            raise DomainError(f"invalid tableau hex {text!r}")
        width = 2 * n + 1
        if value >> (2 * n * width):
            raise DomainError(f"tableau hex {text!r} is too long for {n} qubits")
        images = []
        mask = (1 << n) - 1
        for g in range(2 * n):
            field = (value >> (g * width)) & ((1 << width) - 1)
            images.append(
                PauliOperator(n, field & mask, (field >> n) & mask, 2 * (field >> (2 * n)))
            )
        tableau = cls(n, tuple(images[:n]), tuple(images[n:]))
        if not tableau.is_valid():
            raise DomainError(f"tableau hex {text!r} does not encode a Clifford")
        return tableau


def _bits_to_int(column: np.ndarray) -> int:
    value = 0
    for q, bit in enumerate(column):
        if int(bit) & 1:
            value |= 1 << q
    return value


def pauli_from_matrix(matrix: np.ndarray, atol: float = 1e-9) -> PauliOperator:
    """
    Identify a (phase times) Pauli matrix

    Raises a DomainError if `matrix` is not a Pauli up to a power of i.
    """
    dim = matrix.shape[0]
    n = int(round(np.log2(dim)))
    for p in all_paulis(n):
        coefficient = np.trace(p.to_matrix().conj().T @ matrix) / dim
        if abs(coefficient) > 0.5:
            for k in range(4):
                if abs(coefficient - 1j**k) < atol:
                    return PauliOperator(n, p.x_bits, p.z_bits, k)
            break
    raise DomainError("matrix is not a Pauli operator up to phase")


def embed_tableau(local: CliffordTableau, qubits: Sequence[int], n: int) -> CliffordTableau:
    """Lift a k-qubit tableau acting on `qubits` to an n-qubit tableau"""
    if len(qubits) != local.n:
        raise DimensionError(f"{local.n}-qubit tableau placed on {len(qubits)} qubits")
    full = CliffordTableau.identity(n)
    x_images = list(full.x_images)
    z_images = list(full.z_images)
    for j, q in enumerate(qubits):
        x_images[q] = _embed_pauli(local.x_images[j], qubits, n)
        z_images[q] = _embed_pauli(local.z_images[j], qubits, n)
    return CliffordTableau(n, tuple(x_images), tuple(z_images))


def _embed_pauli(p: PauliOperator, qubits: Sequence[int], n: int) -> PauliOperator:
    x = z = 0
    for j, q in enumerate(qubits):
        x |= ((p.x_bits >> j) & 1) << q
        z |= ((p.z_bits >> j) & 1) << q
    return PauliOperator(n, x, z, p.phase_exp)

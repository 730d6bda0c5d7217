"""
Signed Pauli Operators
Symplectic (x-bits, z-bits, phase) representation with exact phase tracking

An operator is stored as i^phase_exp times the tensor product of Hermitian
single-qubit labels, where qubit q carries X if only its x-bit is set, Z if
only its z-bit is set and Y if both are set. Bit q of x_bits/z_bits is
qubit q. Hermitian operators therefore have phase_exp 0 (+) or 2 (-).
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from birb.core.errors import DimensionError, DomainError

_LABEL_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
MINUS_SIGN = "−"
_MINUS_SIGNS = ("-", MINUS_SIGN)

# PTM basis digit per qubit, ordered I, X, Y, Z
_DIGIT = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}
_DIGIT_BITS = [(0, 0), (1, 0), (1, 1), (0, 1)]

_SINGLE_QUBIT_MATRICES = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliOperator:
    """n-qubit Pauli operator i^phase_exp * P_0 (x) P_1 (x) ... (x) P_{n-1}"""

    n: int
    x_bits: int = 0
    z_bits: int = 0
    phase_exp: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise DimensionError(f"qubit count must be non-negative, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise DimensionError(f"bit vectors do not fit in {self.n} qubits")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # -- construction -------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def from_label(cls, label: str) -> "PauliOperator":
        """
        Parse the text format: optional sign then one of I/X/Y/Z per qubit

        Examples:
            >>> PauliOperator.from_label("+XIZY")
            >>> PauliOperator.from_label("-ZZ")
        """
        text = label.strip()
        phase = 0
        if text[:1] == "+":
            text = text[1:]
        elif text[:1] in _MINUS_SIGNS:
            phase = 2
            text = text[1:]
        x = z = 0
        for q, char in enumerate(text):
            if char not in _LABEL_BITS:
                raise DomainError(f"invalid Pauli character {char!r} in {label!r}")
            bx, bz = _LABEL_BITS[char]
            x |= bx << q
            z |= bz << q
        return cls(len(text), x, z, phase)

    @classmethod
    def single(cls, n: int, qubit: int, char: str) -> "PauliOperator":
        """Weight-one Pauli `char` on `qubit`"""
        bx, bz = _LABEL_BITS[char]
        return cls(n, bx << qubit, bz << qubit)

    @classmethod
    def z_type(cls, n: int, mask: int, negative: bool = False) -> "PauliOperator":
        """Tensor product of Z on `mask` and I elsewhere"""
        return cls(n, 0, mask, 2 if negative else 0)

    # -- properties ---------------------------------------------------

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0 and self.phase_exp == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp in (0, 2)

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian operators"""
        if not self.is_hermitian:
            raise DomainError(f"operator with phase i^{self.phase_exp} has no real sign")
        return 1 if self.phase_exp == 0 else -1

    @property
    def support(self) -> int:
        return self.x_bits | self.z_bits

    def unsigned(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x_bits, self.z_bits, 0)

    def negate(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x_bits, self.z_bits, self.phase_exp + 2)

    def char(self, qubit: int) -> str:
        bits = ((self.x_bits >> qubit) & 1, (self.z_bits >> qubit) & 1)
        return "IXYZ"[_DIGIT[bits]]

    def to_label(self) -> str:
        if not self.is_hermitian:
            raise DomainError("only Hermitian Paulis have a text form")
        sign = "+" if self.phase_exp == 0 else MINUS_SIGN
        return sign + "".join(self.char(q) for q in range(self.n))

    def __str__(self) -> str:
        if self.is_hermitian:
            return self.to_label()
        prefix = {1: "+i", 3: "-i"}[self.phase_exp]
        return prefix + "".join(self.char(q) for q in range(self.n))

    def to_matrix(self) -> np.ndarray:
        """
        Dense 2^n x 2^n matrix (oracle path, small n only)

        Qubit 0 is the least significant bit of the computational basis
        index, so the Kronecker product runs from qubit n-1 down to 0.
        """
        matrix = np.ones((1, 1), dtype=complex)
        for q in reversed(range(self.n)):
            bits = ((self.x_bits >> q) & 1, (self.z_bits >> q) & 1)
            matrix = np.kron(matrix, _SINGLE_QUBIT_MATRICES[bits])
        return (1j ** self.phase_exp) * matrix

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)


def _check_dims(a: PauliOperator, b: PauliOperator):
    if a.n != b.n:
        raise DimensionError(f"Pauli dimensions differ: {a.n} vs {b.n}")


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """
    Group product a·b with exact phase tracking mod 4

    Per qubit, XY = iZ, YZ = iX, ZX = iY and the reversed orders pick up -i.
    """
    _check_dims(a, b)
    xa, za, xb, zb = a.x_bits, a.z_bits, b.x_bits, b.z_bits
    a_x, a_y, a_z = xa & ~za, xa & za, za & ~xa
    b_x, b_y, b_z = xb & ~zb, xb & zb, zb & ~xb
    plus = ((a_x & b_y) | (a_y & b_z) | (a_z & b_x)).bit_count()
    minus = ((a_x & b_z) | (a_y & b_x) | (a_z & b_y)).bit_count()
    return PauliOperator(
        a.n,
        xa ^ xb,
        za ^ zb,
        a.phase_exp + b.phase_exp + plus - minus,
    )


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """True iff the symplectic form x_a·z_b + z_a·x_b vanishes mod 2"""
    _check_dims(a, b)
    return symplectic_parity(a.x_bits, a.z_bits, b.x_bits, b.z_bits) == 0


def symplectic_parity(xa: int, za: int, xb: int, zb: int) -> int:
    """Symplectic inner product of two bit-vector Paulis (0 = commute)"""
    return ((xa & zb).bit_count() + (za & xb).bit_count()) & 1


def _bits_to_int(bits: np.ndarray) -> int:
    value = 0
    for position in np.flatnonzero(bits):
        value |= 1 << int(position)
    return value


def sample_random_pauli(n: int, rng: np.random.Generator) -> PauliOperator:
    """
    Uniformly random non-identity n-qubit Pauli with + sign

    The sign is fixed because averages of the form Tr(s E[s]) are invariant
    under s -> -s.
    """
    if n < 1:
        raise DomainError("need at least one qubit")
    while True:
        bits = rng.integers(0, 2, size=2 * n, dtype=np.uint8)
        if bits.any():
            return PauliOperator(n, _bits_to_int(bits[:n]), _bits_to_int(bits[n:]))


def pauli_index(p: PauliOperator) -> int:
    """
    Index of p in the PTM basis

    The basis is ordered lexicographically with qubit 0 as the least
    significant base-4 digit and digits I=0, X=1, Y=2, Z=3 per qubit.
    """
    return pauli_index_from_bits(p.n, p.x_bits, p.z_bits)


def pauli_index_from_bits(n: int, x: int, z: int) -> int:
    index = 0
    for q in reversed(range(n)):
        index = 4 * index + _DIGIT[((x >> q) & 1, (z >> q) & 1)]
    return index


def pauli_from_index(n: int, index: int) -> PauliOperator:
    x = z = 0
    for q in range(n):
        bx, bz = _DIGIT_BITS[index % 4]
        x |= bx << q
        z |= bz << q
        index //= 4
    return PauliOperator(n, x, z)


def all_paulis(n: int, include_identity: bool = True) -> Iterator[PauliOperator]:
    """All unsigned n-qubit Paulis in PTM basis order"""
    start = 0 if include_identity else 1
    for index in range(start, 4**n):
        yield pauli_from_index(n, index)


@lru_cache(maxsize=None)
def pauli_basis_matrices(k: int) -> np.ndarray:
    """Stack of the 4^k unnormalized Pauli matrices in PTM basis order"""
    return np.array([p.to_matrix() for p in all_paulis(k)])

"""Composite Hilbert space and the elementary sparse operators.

The composite space is ordered boson-first: a basis index ``i`` decomposes
as ``i = fock * 2**n_ions + s`` where ``s`` encodes the ion configuration
with ion 1 as the most significant bit (bit value 1 = ion excited).  Every
operator assembled in this package follows that ordering, which makes the
reduction over the boson a contiguous block sum.

Each ion uses the local basis (ground, excited), so ``sigma_z = diag(-1, +1)``
and the population operator ``sigma^+ sigma^- = diag(0, 1)`` counts the
excitation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from .errors import HermiticityError

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-10


@dataclass(frozen=True)
class HilbertSpec:
    """Dimensions of the composite boson (x) ion-chain space.

    Parameters
    ----------
    n_ions : int
        Number of two-level ions (>= 1).
    fock_dim : int
        Retained boson levels 0 .. fock_dim - 1 (>= 2).
    """

    n_ions: int
    fock_dim: int

    def __post_init__(self):
        if self.n_ions < 1:
            raise ValueError(f"n_ions must be >= 1, got {self.n_ions}")
        if self.fock_dim < 2:
            raise ValueError(f"fock_dim must be >= 2, got {self.fock_dim}")

    @property
    def spin_dim(self) -> int:
        return 2 ** self.n_ions

    @property
    def total_dim(self) -> int:
        return self.fock_dim * self.spin_dim

    def compose_index(self, fock: int, spin_index: int) -> int:
        """Basis index of boson level `fock` combined with ion configuration `spin_index`."""
        if not 0 <= fock < self.fock_dim:
            raise ValueError(f"fock level {fock} outside 0..{self.fock_dim - 1}")
        if not 0 <= spin_index < self.spin_dim:
            raise ValueError(f"spin index {spin_index} outside 0..{self.spin_dim - 1}")
        return fock * self.spin_dim + spin_index

    def decompose_index(self, index: int) -> tuple[int, int]:
        """Inverse of `compose_index`: (fock level, ion configuration)."""
        if not 0 <= index < self.total_dim:
            raise ValueError(f"index {index} outside 0..{self.total_dim - 1}")
        return divmod(index, self.spin_dim)

    def ion_bit(self, spin_index: int, site: int) -> int:
        """Excitation bit (0 or 1) of ion `site` (1-based) in configuration `spin_index`."""
        if not 1 <= site <= self.n_ions:
            raise IndexError(f"site {site} outside 1..{self.n_ions}")
        return (spin_index >> (self.n_ions - site)) & 1

    def spin_index_of_bits(self, bits) -> int:
        """Configuration index for per-ion excitation bits ordered ion 1 .. ion N."""
        if len(bits) != self.n_ions:
            raise ValueError(f"expected {self.n_ions} bits, got {len(bits)}")
        s = 0
        for b in bits:
            s = (s << 1) | (1 if b else 0)
        return s


class Operator:
    """Square sparse complex matrix with an asserted-and-verified Hermiticity flag.

    The underlying CSR matrix is in canonical form (duplicates summed,
    indices sorted) and is never mutated after construction.
    """

    __slots__ = ("matrix", "hermitian")

    def __init__(self, matrix, hermitian: bool = False):
        m = sparse.csr_matrix(matrix, dtype=np.complex128)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        m.sum_duplicates()
        m.sort_indices()
        self.matrix = m
        self.hermitian = bool(hermitian)
        if self.hermitian:
            dev = self.hermiticity_deviation()
            if dev > HERMITICITY_TOL:
                raise HermiticityError(
                    f"operator flagged Hermitian deviates by {dev:.3e} "
                    f"(> {HERMITICITY_TOL:.0e})"
                )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def hermiticity_deviation(self) -> float:
        """Largest entry of |A - A^dagger|."""
        diff = (self.matrix - self.matrix.conj().T).tocoo()
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, hermitian=self.hermitian)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def expectation(self, amplitudes: np.ndarray) -> complex:
        """<psi|A|psi> for an amplitude vector (no realness check here)."""
        return complex(np.vdot(amplitudes, self.matrix @ amplitudes))

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix + other.matrix,
                        hermitian=self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix - other.matrix,
                        hermitian=self.hermitian and other.hermitian)

    def __mul__(self, scalar) -> "Operator":
        keep = self.hermitian and np.imag(scalar) == 0
        return Operator(self.matrix * scalar, hermitian=keep)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, hermitian=self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.matrix @ other.matrix)
        return self.matrix @ other

    def __repr__(self):
        return (f"Operator(dim={self.dim}, nnz={self.nnz}, "
                f"hermitian={self.hermitian})")


class PureState:
    """Normalized complex amplitude vector."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise ValueError(f"amplitudes must be a 1-d vector, got shape {amps.shape}")
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {nrm!r} deviates from 1 by more than {NORM_TOL:.0e}")
        self.amplitudes = amps

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"PureState(dim={self.dim})"


# Single-ion matrices in the (ground, excited) basis.
_SITE_KINDS = {
    "x": (np.array([[0, 1], [1, 0]], dtype=np.complex128), True),
    "y": (np.array([[0, 1j], [-1j, 0]], dtype=np.complex128), True),
    "z": (np.array([[-1, 0], [0, 1]], dtype=np.complex128), True),
    "raise": (np.array([[0, 0], [1, 0]], dtype=np.complex128), False),
    "lower": (np.array([[0, 1], [0, 0]], dtype=np.complex128), False),
    "population": (np.array([[0, 0], [0, 1]], dtype=np.complex128), True),
}


def identity_operator(dim: int) -> Operator:
    return Operator(sparse.identity(dim, dtype=np.complex128, format="csr"),
                    hermitian=True)


def boson_annihilator(fock_dim: int) -> Operator:
    """Boson lowering operator on the truncated Fock space: <n-1|c|n> = sqrt(n)."""
    if fock_dim < 2:
        raise ValueError(f"fock_dim must be >= 2, got {fock_dim}")
    n = np.arange(1, fock_dim)
    mat = sparse.csr_matrix((np.sqrt(n), (n - 1, n)),
                            shape=(fock_dim, fock_dim), dtype=np.complex128)
    return Operator(mat)


def spin_site_matrix(n_ions: int, site: int, kind: str) -> Operator:
    """Single-ion operator embedded in the 2**n_ions ion-chain space.

    `site` is 1-based; `kind` is one of x, y, z, raise, lower, population.
    """
    if kind not in _SITE_KINDS:
        raise ValueError(f"unknown operator kind {kind!r}")
    if not 1 <= site <= n_ions:
        raise IndexError(f"site {site} outside 1..{n_ions}")
    local, herm = _SITE_KINDS[kind]
    mat = sparse.csr_matrix(local)
    left = 2 ** (site - 1)
    right = 2 ** (n_ions - site)
    if left > 1:
        mat = sparse.kron(sparse.identity(left, dtype=np.complex128), mat, format="csr")
    if right > 1:
        mat = sparse.kron(mat, sparse.identity(right, dtype=np.complex128), format="csr")
    return Operator(mat, hermitian=herm)


def spin_site_operator(spec: HilbertSpec, site: int, kind: str) -> Operator:
    """Single-ion operator embedded in the full boson (x) ion-chain space."""
    return tensor_embed(identity_operator(spec.fock_dim),
                        spin_site_matrix(spec.n_ions, site, kind))


def tensor_embed(a: Operator, b: Operator) -> Operator:
    """Kronecker product a (x) b, preserving the Hermiticity flag."""
    return Operator(sparse.kron(a.matrix, b.matrix, format="csr"),
                    hermitian=a.hermitian and b.hermitian)

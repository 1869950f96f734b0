"""Reduced states and the measured quantities of a charging run.

Everything here is a pure function of its inputs.  Energies are reported in
units of the boson frequency; entropy is in bits (log base 2).
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalConsistencyError
from .hilbert import HilbertSpec, Operator, PureState

TRACE_TOL = 1e-10
HERM_TOL = 1e-12
EIG_NEGATIVITY_TOL = 1e-10   # round-off allowance for reduced-state eigenvalues
ENTROPY_EIG_FLOOR = 1e-12    # eigenvalues below this are skipped in the entropy
ERGOTROPY_CLAMP = 1e-9       # raw values in [-clamp, 0) are reported as 0
IMAG_RESIDUE_TOL = 1e-8


class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix.

    Eigenvalues are computed once during validation and cached.
    """

    __slots__ = ("matrix", "_eigvals")

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} deviates from 1 beyond {TRACE_TOL:.0e}")
        dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if dev > HERM_TOL:
            raise ValueError(f"matrix deviates from Hermitian by {dev:.3e}")
        eigvals = np.linalg.eigvalsh(m)
        if eigvals[0] < -EIG_NEGATIVITY_TOL:
            raise ValueError(f"negative eigenvalue {eigvals[0]:.3e} below "
                             f"-{EIG_NEGATIVITY_TOL:.0e}")
        self.matrix = m
        self._eigvals = eigvals

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in ascending order."""
        return self._eigvals

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def partial_trace(psi: PureState, spec: HilbertSpec, keep: str) -> DensityMatrix:
    """Reduce a composite pure state to one subsystem.

    keep="ions" sums over the boson index and returns the 2**N ion-chain
    state; keep="boson" returns the fock_dim boson state.
    """
    if psi.dim != spec.total_dim:
        raise ValueError(f"state dim {psi.dim} != spec total dim {spec.total_dim}")
    block = psi.amplitudes.reshape(spec.fock_dim, spec.spin_dim)
    if keep == "ions":
        rho = block.T @ block.conj()
    elif keep == "boson":
        rho = block @ block.conj().T
    else:
        raise ValueError(f"keep must be 'ions' or 'boson', got {keep!r}")
    return DensityMatrix(rho)


def ion_energy(rho_a: DensityMatrix, h_spin: Operator) -> float:
    """Tr[H rho] for the ion chain; the imaginary residue must be noise."""
    if rho_a.dim != h_spin.dim:
        raise ValueError(f"density dim {rho_a.dim} != operator dim {h_spin.dim}")
    val = complex((h_spin.matrix @ rho_a.matrix).trace())
    if abs(val.imag) > IMAG_RESIDUE_TOL:
        raise NumericalConsistencyError(
            f"energy has imaginary residue {val.imag:.3e} > {IMAG_RESIDUE_TOL:.0e}")
    return float(val.real)


def charging_energy(e_t: float, e_0: float) -> float:
    """Energy gained since the start of the run."""
    return e_t - e_0


def passive_energy(rho_a: DensityMatrix, h_spin: Operator) -> float:
    """Lowest energy reachable from rho by unitaries: descending populations
    paired with ascending energy levels."""
    r = np.sort(rho_a.eigenvalues)[::-1]
    e = np.sort(np.linalg.eigvalsh(h_spin.to_dense()))
    return float(r @ e)


def ergotropy(rho_a: DensityMatrix, h_spin: Operator) -> float:
    """Maximum unitarily extractable work: Tr[H rho] minus the passive energy.

    The exact value is >= 0; round-off below zero within ERGOTROPY_CLAMP is
    reported as 0, anything lower raises.
    """
    raw = ergotropy_raw(rho_a, h_spin)
    if raw < -ERGOTROPY_CLAMP:
        raise NumericalConsistencyError(
            f"ergotropy {raw:.3e} below -{ERGOTROPY_CLAMP:.0e}")
    return max(raw, 0.0)


def ergotropy_raw(rho_a: DensityMatrix, h_spin: Operator) -> float:
    """Unclamped ergotropy, kept for drift monitoring."""
    return ion_energy(rho_a, h_spin) - passive_energy(rho_a, h_spin)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-sum r log2 r over eigenvalues above ENTROPY_EIG_FLOOR, in bits."""
    r = rho.eigenvalues
    r = r[r > ENTROPY_EIG_FLOOR]
    if r.size == 0:
        return 0.0
    return float(-np.sum(r * np.log2(r)))


def site_populations(rho_a: DensityMatrix, spec: HilbertSpec) -> np.ndarray:
    """Excitation probability of each ion, ordered ion 1 .. ion N."""
    if rho_a.dim != spec.spin_dim:
        raise ValueError(f"density dim {rho_a.dim} != spin dim {spec.spin_dim}")
    diag = rho_a.matrix.diagonal().real
    sigma = np.empty(spec.n_ions)
    for site in range(1, spec.n_ions + 1):
        bits = np.array([spec.ion_bit(s, site) for s in range(spec.spin_dim)])
        sigma[site - 1] = float(diag @ bits)
    return sigma


def population_difference(sigma: np.ndarray, m: int, n: int) -> float:
    """sigma_m - sigma_n for 1-based ion labels."""
    return float(sigma[m - 1] - sigma[n - 1])


def magnetization(g: PureState, n_ions: int) -> tuple[float, float]:
    """Collective magnetization of a spin-space state.

    Returns (<S_z>/N, <S_z**2>/N**2) with S_z = sum_n sigma_n^z, which is
    diagonal in the configuration basis with value 2*(excited count) - N.
    """
    dim = 2 ** n_ions
    if g.dim != dim:
        raise ValueError(f"state dim {g.dim} != spin dim {dim}")
    sz = np.array([2 * bin(s).count("1") - n_ions for s in range(dim)], dtype=float)
    prob = np.abs(g.amplitudes) ** 2
    m_z = float(prob @ sz) / n_ions
    o_z = float(prob @ sz ** 2) / n_ions ** 2
    return m_z, o_z


def leakage(psi: PureState, spec: HilbertSpec) -> float:
    """Probability weight at the top retained boson level (truncation monitor)."""
    if psi.dim != spec.total_dim:
        raise ValueError(f"state dim {psi.dim} != spec total dim {spec.total_dim}")
    top = psi.amplitudes[(spec.fock_dim - 1) * spec.spin_dim:]
    return float(np.sum(np.abs(top) ** 2))

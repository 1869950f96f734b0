"""Hamiltonian assembly for the driven ion-chain battery.

The model couples N two-level ions, with pairwise hopping decaying as a
power law of the inter-ion distance, to a single truncated boson mode:

    H = H_c + H_a + H_ac
    H_c  = omega_c * c^dag c
    H_a  = omega_a * sum_n sigma_n^+ sigma_n^-  +  sum_{n<m} C_nm sigma_n^x sigma_m^x
    H_ac = lambda * sum_n (c + c^dag) sigma_n^x

with C_nm = j_hop / |z_m - z_n|**p_exp.  Two toggles select the
excitation-conserving variants of the interaction terms:

  * coupling_mode = "rotating_only" replaces (c + c^dag) sigma^x by
    c sigma^+ + c^dag sigma^-  (the terms that create or destroy one
    excitation in each subsystem simultaneously are dropped);
  * hopping_mode = "excitation_conserving" replaces sigma^x sigma^x by the
    flip-flop term sigma_n^+ sigma_m^- + sigma_n^- sigma_m^+ with the same
    distance coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from .hilbert import (
    HilbertSpec,
    Operator,
    boson_annihilator,
    identity_operator,
    spin_site_matrix,
    tensor_embed,
)

COUPLING_MODES = ("full", "rotating_only")
HOPPING_MODES = ("full", "excitation_conserving")

#: Scaled equilibrium positions of five ions in a harmonic trap.
DEFAULT_POSITIONS = (-1.7429, -0.8221, 0.0, 0.8221, 1.7429)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters, in units of the boson frequency (hbar = 1).

    Attributes
    ----------
    omega_a : ion level splitting.
    omega_c : boson frequency.
    coupling : ion-boson coupling strength (lambda).
    j_hop : pairwise hopping strength J.
    p_exp : power-law exponent of the distance decay (>= 0).
    positions : scaled equilibrium positions z_n, strictly increasing.
    coupling_mode : "full" or "rotating_only".
    hopping_mode : "full" or "excitation_conserving".
    """

    omega_a: float = 1.0
    omega_c: float = 1.0
    coupling: float = 0.25
    j_hop: float = 0.2
    p_exp: float = 3.0
    positions: tuple = field(default=DEFAULT_POSITIONS)
    coupling_mode: str = "full"
    hopping_mode: str = "full"

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(float(z) for z in self.positions))
        if len(self.positions) < 1:
            raise ValueError("positions must contain at least one ion")
        diffs = np.diff(self.positions)
        if len(diffs) and not np.all(diffs > 0):
            raise ValueError("positions must be strictly increasing")
        if self.p_exp < 0:
            raise ValueError(f"p_exp must be >= 0, got {self.p_exp}")
        if self.coupling_mode not in COUPLING_MODES:
            raise ValueError(f"coupling_mode must be one of {COUPLING_MODES}")
        if self.hopping_mode not in HOPPING_MODES:
            raise ValueError(f"hopping_mode must be one of {HOPPING_MODES}")

    @property
    def n_ions(self) -> int:
        return len(self.positions)


def pair_coupling_matrix(positions, j_hop: float, p_exp: float) -> np.ndarray:
    """Symmetric matrix of pair coefficients j_hop / |z_m - z_n|**p_exp, zero diagonal."""
    z = np.asarray(positions, dtype=float)
    n = z.shape[0]
    dist = np.abs(z[:, None] - z[None, :])
    off = ~np.eye(n, dtype=bool)
    if p_exp > 0 and np.any(dist[off] == 0):
        raise ValueError("coincident ion positions give a singular distance "
                         f"with p_exp={p_exp}")
    coeff = np.zeros((n, n))
    coeff[off] = j_hop / dist[off] ** p_exp
    return coeff


@dataclass(frozen=True)
class Hamiltonian:
    """The assembled operators, all over the full composite space except h_spin."""

    h_a: Operator
    h_c: Operator
    h_ac: Operator
    h_total: Operator
    h_spin: Operator  # ion-chain part alone, over the 2**N spin space


def build_spin_hamiltonian(params: ModelParams) -> Operator:
    """Ion-chain Hamiltonian H_a on the 2**N spin space (no boson factor)."""
    n = params.n_ions
    dim = 2 ** n
    h = sparse.csr_matrix((dim, dim), dtype=np.complex128)
    for site in range(1, n + 1):
        h = h + params.omega_a * spin_site_matrix(n, site, "population").matrix
    coeff = pair_coupling_matrix(params.positions, params.j_hop, params.p_exp)
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            c_ab = coeff[a - 1, b - 1]
            if c_ab == 0.0:
                continue
            if params.hopping_mode == "full":
                term = (spin_site_matrix(n, a, "x").matrix
                        @ spin_site_matrix(n, b, "x").matrix)
            else:
                up_a = spin_site_matrix(n, a, "raise").matrix
                dn_a = spin_site_matrix(n, a, "lower").matrix
                up_b = spin_site_matrix(n, b, "raise").matrix
                dn_b = spin_site_matrix(n, b, "lower").matrix
                term = up_a @ dn_b + dn_a @ up_b
            h = h + c_ab * term
    return Operator(h, hermitian=True)


def build_hamiltonian(params: ModelParams, spec: HilbertSpec) -> Hamiltonian:
    """Assemble H_a, H_c, H_ac and their sum over the composite space."""
    if spec.n_ions != params.n_ions:
        raise ValueError(f"spec has {spec.n_ions} ions but params describe "
                         f"{params.n_ions} positions")
    n = spec.n_ions
    i_fock = identity_operator(spec.fock_dim)
    c_op = boson_annihilator(spec.fock_dim)
    c_dag = c_op.dagger()

    h_spin = build_spin_hamiltonian(params)
    h_a = tensor_embed(i_fock, h_spin)

    number = Operator(c_dag.matrix @ c_op.matrix, hermitian=True)
    h_c = params.omega_c * tensor_embed(number, identity_operator(spec.spin_dim))

    sum_x = sparse.csr_matrix((spec.spin_dim, spec.spin_dim), dtype=np.complex128)
    sum_up = sparse.csr_matrix((spec.spin_dim, spec.spin_dim), dtype=np.complex128)
    for site in range(1, n + 1):
        sum_x = sum_x + spin_site_matrix(n, site, "x").matrix
        sum_up = sum_up + spin_site_matrix(n, site, "raise").matrix
    if params.coupling_mode == "full":
        quad = (c_op.matrix + c_dag.matrix)
        h_ac_mat = params.coupling * sparse.kron(quad, sum_x, format="csr")
    else:
        # keep only the excitation-conserving part: c sigma^+ + c^dag sigma^-
        half = sparse.kron(c_op.matrix, sum_up, format="csr")
        h_ac_mat = params.coupling * (half + half.conj().T)
    h_ac = Operator(h_ac_mat, hermitian=True)

    h_total = Operator(h_a.matrix + h_c.matrix + h_ac.matrix, hermitian=True)
    return Hamiltonian(h_a=h_a, h_c=h_c, h_ac=h_ac, h_total=h_total, h_spin=h_spin)


def excitation_number(spec: HilbertSpec) -> Operator:
    """Total excitation count c^dag c + sum_n sigma_n^+ sigma_n^- (diagonal)."""
    return Operator(sparse.diags(excitation_diagonal(spec)), hermitian=True)


def excitation_diagonal(spec: HilbertSpec) -> np.ndarray:
    """Diagonal of the total excitation count, as a real vector."""
    fock = np.arange(spec.fock_dim)
    pop = np.array([bin(s).count("1") for s in range(spec.spin_dim)])
    return (fock[:, None] + pop[None, :]).reshape(-1).astype(float)


def parity_operator(spec: HilbertSpec) -> Operator:
    """Excitation parity exp(i*pi*N_exc) = (-1)**N_exc (diagonal, +-1)."""
    return Operator(sparse.diags(parity_diagonal(spec)), hermitian=True)


def parity_diagonal(spec: HilbertSpec) -> np.ndarray:
    """Diagonal of the excitation parity, as a real vector of +-1."""
    return np.where(excitation_diagonal(spec).astype(int) % 2 == 0, 1.0, -1.0)

"""Ground states, spin spectra, initial states, and unitary propagation.

Two propagation paths compute psi(t) = exp(-i H t) psi(0):

  * dense_eig: one full eigendecomposition, exact phase factors per sample.
    The reference path; default up to DENSE_DEFAULT_MAX_DIM.
  * krylov: short-recurrence Hermitian Lanczos approximation of the
    exponential action with adaptive substepping, for larger spaces.

Both are generators so a run never holds more than a chunk of states.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np
import scipy.linalg

from .errors import PropagationError
from .hilbert import HilbertSpec, Operator, PureState
from .model import ModelParams, build_spin_hamiltonian
from .observables import magnetization

DEGENERACY_TOL = 1e-9
DENSE_DEFAULT_MAX_DIM = 4096
DEFAULT_KRYLOV_DIM = 30
DEFAULT_TOL = 1e-8

_DENSE_CHUNK = 256          # time samples per dense propagation block
_SILENT_RENORM = 1e-12      # norm corrections beyond this are never applied
_KRYLOV_ERR_FLOOR = 1e-15   # round-off floor of the local error estimate


def _eigh_dense(h: Operator):
    """Deterministic full eigendecomposition (ascending eigenvalues)."""
    return scipy.linalg.eigh(h.to_dense(), driver="evr")


def _canonical_phase(vec: np.ndarray) -> np.ndarray:
    """Fix the global phase so the largest-magnitude entry is real positive."""
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    return vec * phase.conjugate()


def ground_state(h_spin: Operator) -> tuple[float, PureState, bool]:
    """Lowest eigenpair of the spin-space Hamiltonian.

    Returns (e0, ground vector, degenerate flag); the flag is set when the
    gap to the next level is below DEGENERACY_TOL, in which case the vector
    is still a deterministic choice (lowest index of the dense solve, phase
    fixed).
    """
    if not h_spin.hermitian:
        raise ValueError("ground_state requires a verified Hermitian operator")
    evals, evecs = _eigh_dense(h_spin)
    e0 = float(evals[0])
    vec = _canonical_phase(evecs[:, 0])
    degenerate = bool(evals[1] - evals[0] < DEGENERACY_TOL)
    return e0, PureState(vec), degenerate


@dataclass
class SpectrumScan:
    """Spin-space spectrum and ground-state magnetization along a J grid."""

    j_grid: np.ndarray
    eigenvalues: np.ndarray   # (n_j, 2**N), ascending within each row
    m_z: np.ndarray
    o_z: np.ndarray
    degenerate: np.ndarray    # bool per J: ground gap < DEGENERACY_TOL

    def __post_init__(self):
        if np.any(np.diff(self.eigenvalues, axis=1) < 0):
            raise ValueError("eigenvalues must be ascending within each row")
        if np.any(np.abs(self.m_z) > 1 + 1e-9):
            raise ValueError("m_z outside [-1, 1]")
        if np.any(self.o_z < -1e-9) or np.any(self.o_z > 1 + 1e-9):
            raise ValueError("o_z outside [0, 1]")


def spectrum_scan(params_template: ModelParams, j_grid) -> SpectrumScan:
    """Diagonalize the spin Hamiltonian for each J and record e_k, M_z, O_z."""
    grid = np.asarray(list(j_grid), dtype=float)
    if grid.size == 0:
        raise ValueError("j_grid must be non-empty")
    n = params_template.n_ions
    dim = 2 ** n
    eigenvalues = np.empty((grid.size, dim))
    m_z = np.empty(grid.size)
    o_z = np.empty(grid.size)
    degenerate = np.empty(grid.size, dtype=bool)
    for i, j in enumerate(grid):
        params = dataclasses.replace(params_template, j_hop=float(j))
        evals, evecs = _eigh_dense(build_spin_hamiltonian(params))
        eigenvalues[i] = evals
        g = PureState(_canonical_phase(evecs[:, 0]))
        m_z[i], o_z[i] = magnetization(g, n)
        degenerate[i] = bool(evals[1] - evals[0] < DEGENERACY_TOL)
    return SpectrumScan(j_grid=grid, eigenvalues=eigenvalues,
                        m_z=m_z, o_z=o_z, degenerate=degenerate)


def initial_state(spec: HilbertSpec, boson_amps: Mapping[int, complex],
                  spin_state: PureState) -> PureState:
    """Tensor product of a sparse boson superposition with a spin-space state."""
    if spin_state.dim != spec.spin_dim:
        raise ValueError(f"spin state dim {spin_state.dim} != {spec.spin_dim}")
    total = sum(abs(a) ** 2 for a in boson_amps.values())
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"boson amplitudes have squared weight {total!r}, not 1")
    amps = np.zeros(spec.total_dim, dtype=np.complex128)
    for level, amp in boson_amps.items():
        if not 0 <= int(level) < spec.fock_dim:
            raise ValueError(f"fock level {level} beyond the cutoff {spec.fock_dim}")
        start = int(level) * spec.spin_dim
        amps[start:start + spec.spin_dim] = amp * spin_state.amplitudes
    return PureState(amps)


def propagate(h: Operator, psi0: PureState, times, method: str = "dense_eig",
              tol: float = DEFAULT_TOL,
              krylov_dim: int = DEFAULT_KRYLOV_DIM) -> Iterator[PureState]:
    """Stream psi(t_k) = exp(-i H t_k) psi0 for each requested sample time.

    `times` must increase strictly and start at 0.  `tol` bounds the local
    Krylov error estimate per unit time; the dense path ignores it.
    """
    if not h.hermitian:
        raise ValueError("propagation requires a verified Hermitian operator")
    if psi0.dim != h.dim:
        raise ValueError(f"state dim {psi0.dim} != operator dim {h.dim}")
    ts = np.asarray(times, dtype=float)
    if ts.size == 0:
        raise ValueError("times must be non-empty")
    if ts[0] != 0.0:
        raise ValueError("times must start at 0")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("times must be strictly increasing")
    if method == "dense_eig":
        return _dense_stream(h, psi0, ts)
    if method == "krylov":
        # below 3 vectors the local error estimate scales like the budget
        # itself and the substep controller cannot converge
        if krylov_dim < 3:
            raise ValueError(f"krylov_dim must be >= 3, got {krylov_dim}")
        return _krylov_stream(h, psi0, ts, tol, krylov_dim)
    raise ValueError(f"method must be 'dense_eig' or 'krylov', got {method!r}")


def _dense_stream(h: Operator, psi0: PureState, ts: np.ndarray) -> Iterator[PureState]:
    energies, vectors = _eigh_dense(h)
    coeff = vectors.conj().T @ psi0.amplitudes
    for start in range(0, ts.size, _DENSE_CHUNK):
        chunk = ts[start:start + _DENSE_CHUNK]
        phases = np.exp(-1j * np.outer(energies, chunk))
        block = vectors @ (phases * coeff[:, None])
        for col in range(block.shape[1]):
            yield PureState(block[:, col])


def _lanczos_expm(mat, v: np.ndarray, dt: float, m: int):
    """One Lanczos approximation of exp(-i dt H) v.

    Returns (w, err) where err is the standard residual-based local error
    estimate; err = 0 on an invariant subspace (happy breakdown).
    """
    dim = v.shape[0]
    k_max = min(m, dim)
    vnorm = float(np.linalg.norm(v))
    basis = np.empty((dim, k_max), dtype=np.complex128)
    basis[:, 0] = v / vnorm
    alphas = np.empty(k_max)
    betas = np.empty(k_max)
    k = k_max
    happy = False
    scale = 1.0
    for j in range(k_max):
        w = mat @ basis[:, j]
        if j > 0:
            w -= betas[j - 1] * basis[:, j - 1]
        a = float(np.vdot(basis[:, j], w).real)
        alphas[j] = a
        w -= a * basis[:, j]
        # one full reorthogonalization pass keeps the basis orthonormal
        w -= basis[:, :j + 1] @ (basis[:, :j + 1].conj().T @ w)
        b = float(np.linalg.norm(w))
        betas[j] = b
        scale = max(scale, abs(a), b)
        if b <= 1e-13 * scale:
            k = j + 1
            happy = True
            break
        if j + 1 < k_max:
            basis[:, j + 1] = w / b
    theta, u = scipy.linalg.eigh_tridiagonal(alphas[:k], betas[:k - 1])
    coef = u @ (np.exp(-1j * dt * theta) * u[0, :].conj())
    w_out = basis[:, :k] @ (vnorm * coef)
    err = 0.0 if happy else float(vnorm * betas[k - 1] * abs(coef[k - 1]))
    return w_out, err


def _krylov_stream(h: Operator, psi0: PureState, ts: np.ndarray, tol: float,
                   krylov_dim: int) -> Iterator[PureState]:
    mat = h.matrix
    psi = psi0.amplitudes.copy()
    # Gershgorin bound on the spectral radius sets the first substep scale
    hnorm = float(np.max(np.asarray(np.abs(mat).sum(axis=1)).ravel()))
    step = min(1.0, krylov_dim / max(hnorm, 1e-30))
    min_step = 1e-13 * max(float(ts[-1]), 1.0)
    t_now = 0.0
    for t_k in ts:
        remaining = float(t_k) - t_now
        while remaining > 1e-15 * max(float(t_k), 1.0):
            dt = min(step, remaining)
            w, err = _lanczos_expm(mat, psi, dt, krylov_dim)
            # the estimate cannot resolve below round-off, so neither can
            # the budget; without the floor the controller would deadlock
            budget = max(tol * dt, _KRYLOV_ERR_FLOOR)
            if err > budget:
                step = dt / 2
                if step < min_step:
                    raise PropagationError(
                        f"Krylov substep underflow near t={t_now:g} "
                        f"(error estimate {err:.3e} for dt={dt:.3e})")
                continue
            psi = w
            nrm = float(np.linalg.norm(psi))
            if abs(nrm - 1.0) <= _SILENT_RENORM:
                psi /= nrm
            remaining -= dt
            t_now += dt
            if err < 0.05 * budget:
                step *= 1.4
        t_now = float(t_k)
        yield PureState(psi.copy())


@dataclass
class EvolutionTrace:
    """Per-sample observables of one charging run.

    `sigma` has shape (n_samples, N); everything else is one value per
    sample.  `ergotropy` is the clamped value; `ergotropy_raw_min` keeps the
    most negative unclamped value seen.
    """

    times: np.ndarray
    energy: np.ndarray          # E(t), ion-chain energy
    charging: np.ndarray        # E_c(t) = E(t) - E(0)
    ergotropy: np.ndarray       # E_e(t)
    entropy: np.ndarray         # S(t) of the ion reduction, bits
    sigma: np.ndarray           # per-ion excitation probabilities
    n_exc: np.ndarray           # <total excitation count>
    parity: np.ndarray          # <excitation parity>
    leakage: np.ndarray         # top-level boson weight
    norm_error: np.ndarray      # | ||psi|| - 1 |
    energy_drift: np.ndarray    # relative <H_total> drift
    ergotropy_raw_min: float = 0.0

    def __post_init__(self):
        if self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must increase strictly from 0")
        if self.charging[0] != 0.0:
            raise ValueError("charging energy must be exactly 0 at t=0")
        if np.any(self.ergotropy < -1e-9):
            raise ValueError("ergotropy below -1e-9")
        if np.any(self.norm_error > 1e-8):
            raise PropagationError(
                f"norm drift {np.max(self.norm_error):.3e} exceeds 1e-8")

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def max_leakage(self) -> float:
        return float(np.max(self.leakage))

    @property
    def max_norm_error(self) -> float:
        return float(np.max(self.norm_error))

    @property
    def max_energy_drift(self) -> float:
        return float(np.max(self.energy_drift))

"""Hamiltonian assembly, pair couplings, and the counter-rotating toggles."""

import dataclasses

import numpy as np
import pytest
import scipy.sparse as sparse

from ionbattery import (DEFAULT_POSITIONS, HilbertSpec, ModelParams,
                        build_hamiltonian, build_spin_hamiltonian,
                        pair_coupling_matrix)
from ionbattery.hilbert import spin_site_matrix
from ionbattery.model import excitation_diagonal, parity_diagonal


def test_pair_coupling_p0_is_uniform():
    coeff = pair_coupling_matrix((-1.0, 0.0, 2.5), j_hop=0.7, p_exp=0.0)
    off = ~np.eye(3, dtype=bool)
    np.testing.assert_allclose(coeff[off], 0.7)
    np.testing.assert_allclose(np.diag(coeff), 0.0)


def test_pair_coupling_default_positions():
    j = 0.2
    coeff = pair_coupling_matrix(DEFAULT_POSITIONS, j_hop=j, p_exp=3.0)
    # nearest neighbours sit 0.9208 apart, the outermost pair 3.4858 apart
    assert coeff[0, 1] == pytest.approx(j / 0.9208 ** 3, rel=1e-14)
    assert coeff[1, 2] == pytest.approx(j / 0.8221 ** 3, rel=1e-14)
    assert coeff[0, 4] == pytest.approx(j / 3.4858 ** 3, rel=1e-14)
    np.testing.assert_allclose(coeff, coeff.T, atol=0)


def test_pair_coupling_coincident_positions():
    with pytest.raises(ValueError):
        pair_coupling_matrix((0.0, 0.0, 1.0), j_hop=1.0, p_exp=2.0)
    # p = 0 removes the distance dependence, so coincidence is harmless
    coeff = pair_coupling_matrix((0.0, 0.0), j_hop=1.0, p_exp=0.0)
    assert coeff[0, 1] == 1.0


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(positions=(0.0, -1.0))
    with pytest.raises(ValueError):
        ModelParams(p_exp=-0.5)
    with pytest.raises(ValueError):
        ModelParams(coupling_mode="dispersive")
    with pytest.raises(ValueError):
        ModelParams(hopping_mode="nearest")
    assert ModelParams().n_ions == 5


def test_decoupled_spectrum_is_diagonal():
    # lambda = J = 0: eigenvalues are omega_c * n + omega_a * k
    params = ModelParams(omega_a=0.75, omega_c=1.0, coupling=0.0, j_hop=0.0,
                         positions=(0.0, 1.0))
    spec = HilbertSpec(n_ions=2, fock_dim=3)
    ham = build_hamiltonian(params, spec)
    dense = ham.h_total.to_dense()
    np.testing.assert_allclose(dense, np.diag(np.diag(dense)), atol=0)
    expected = sorted(1.0 * n + 0.75 * k
                      for n in range(3) for k in (0, 1, 1, 2))
    np.testing.assert_allclose(np.sort(np.diag(dense).real), expected,
                               atol=1e-14)


def test_all_terms_hermitian():
    spec = HilbertSpec(n_ions=3, fock_dim=4)
    for coupling_mode in ("full", "rotating_only"):
        for hopping_mode in ("full", "excitation_conserving"):
            params = ModelParams(positions=(0.0, 1.0, 2.0),
                                 coupling_mode=coupling_mode,
                                 hopping_mode=hopping_mode)
            ham = build_hamiltonian(params, spec)
            for op in (ham.h_a, ham.h_c, ham.h_ac, ham.h_total, ham.h_spin):
                assert op.hermitian
                assert op.hermiticity_deviation() == 0.0


def test_spec_params_ion_count_mismatch():
    with pytest.raises(ValueError):
        build_hamiltonian(ModelParams(), HilbertSpec(n_ions=3, fock_dim=4))


def _commutator_norm(a, b):
    comm = (a @ b - b @ a).tocoo()
    return float(np.max(np.abs(comm.data))) if comm.nnz else 0.0


def test_excitation_conserved_only_without_counter_rotating_terms():
    spec = HilbertSpec(n_ions=2, fock_dim=5)
    base = dict(positions=(0.0, 1.0), coupling=0.3, j_hop=0.4)
    n_exc = sparse.diags(excitation_diagonal(spec)).tocsr()

    rwa = ModelParams(coupling_mode="rotating_only",
                      hopping_mode="excitation_conserving", **base)
    h_rwa = build_hamiltonian(rwa, spec).h_total.matrix
    assert _commutator_norm(h_rwa, n_exc) < 1e-14

    full = ModelParams(**base)
    h_full = build_hamiltonian(full, spec).h_total.matrix
    assert _commutator_norm(h_full, n_exc) > 0.1


def test_parity_always_conserved():
    spec = HilbertSpec(n_ions=2, fock_dim=5)
    parity = sparse.diags(parity_diagonal(spec)).tocsr()
    for coupling_mode in ("full", "rotating_only"):
        for hopping_mode in ("full", "excitation_conserving"):
            params = ModelParams(positions=(0.0, 1.0), coupling=0.3,
                                 j_hop=0.4, coupling_mode=coupling_mode,
                                 hopping_mode=hopping_mode)
            h = build_hamiltonian(params, spec).h_total.matrix
            assert _commutator_norm(h, parity) < 1e-14


def test_coupling_mode_difference_is_counter_rotating_term():
    # H_ac(full) - H_ac(rotating_only) = lambda sum_n (c^dag sigma_n^+ + c sigma_n^-)
    spec = HilbertSpec(n_ions=2, fock_dim=4)
    lam = 0.35
    base = dict(positions=(0.0, 1.0), coupling=lam)
    h_full = build_hamiltonian(ModelParams(**base), spec).h_ac.to_dense()
    h_rot = build_hamiltonian(ModelParams(coupling_mode="rotating_only",
                                          **base), spec).h_ac.to_dense()
    from ionbattery import boson_annihilator
    c = boson_annihilator(4).to_dense()
    sum_up = sum(np.kron(np.eye(4),
                         spin_site_matrix(2, site, "raise").to_dense())
                 for site in (1, 2))
    c_full = np.kron(c.conj().T, np.eye(4)) @ sum_up
    expected = lam * (c_full + c_full.conj().T)
    np.testing.assert_allclose(h_full - h_rot, expected, atol=1e-14)


def test_hopping_mode_difference_is_double_flip_term():
    # H_J(full) - H_J(excitation_conserving)
    #   = sum_{a<b} C_ab (sigma_a^+ sigma_b^+ + sigma_a^- sigma_b^-)
    params_full = ModelParams(positions=(0.0, 0.5, 1.7), j_hop=0.6, p_exp=2.0)
    params_ff = dataclasses.replace(params_full,
                                    hopping_mode="excitation_conserving")
    diff = (build_spin_hamiltonian(params_full).to_dense()
            - build_spin_hamiltonian(params_ff).to_dense())
    coeff = pair_coupling_matrix(params_full.positions, 0.6, 2.0)
    expected = np.zeros((8, 8), dtype=complex)
    for a in range(1, 4):
        for b in range(a + 1, 4):
            up_a = spin_site_matrix(3, a, "raise").to_dense()
            dn_a = spin_site_matrix(3, a, "lower").to_dense()
            up_b = spin_site_matrix(3, b, "raise").to_dense()
            dn_b = spin_site_matrix(3, b, "lower").to_dense()
            expected += coeff[a - 1, b - 1] * (up_a @ up_b + dn_a @ dn_b)
    np.testing.assert_allclose(diff, expected, atol=1e-14)


def test_hopping_modes_coincide_at_j_zero():
    for mode in ("full", "excitation_conserving"):
        params = ModelParams(j_hop=0.0, hopping_mode=mode)
        h = build_spin_hamiltonian(params).to_dense()
        np.testing.assert_allclose(h, np.diag(np.diag(h)), atol=0)


def test_reflection_symmetry_of_spin_hamiltonian():
    # the default positions are mirror symmetric; site reversal must commute
    params = ModelParams()
    h = build_spin_hamiltonian(params).to_dense()
    n = params.n_ions
    perm = np.zeros((2 ** n, 2 ** n))
    for s in range(2 ** n):
        bits = [(s >> k) & 1 for k in range(n)]          # low to high
        mirrored = sum(b << (n - 1 - k) for k, b in enumerate(bits))
        perm[mirrored, s] = 1.0
    np.testing.assert_allclose(perm @ h @ perm.T, h, atol=1e-12)


def test_excitation_and_parity_diagonals():
    spec = HilbertSpec(n_ions=2, fock_dim=3)
    exc = excitation_diagonal(spec)
    # order: fock-major, then spin states 00, 01, 10, 11
    np.testing.assert_array_equal(exc, [0, 1, 1, 2,
                                        1, 2, 2, 3,
                                        2, 3, 3, 4])
    np.testing.assert_array_equal(parity_diagonal(spec),
                                  (-1.0) ** exc)


def test_full_space_sparsity():
    # per row: 1 diagonal, one column per ion pair, 2N coupling flips
    spec = HilbertSpec(n_ions=5, fock_dim=101)
    ham = build_hamiltonian(ModelParams(), spec)
    n = spec.n_ions
    per_row = ham.h_total.nnz / spec.total_dim
    assert per_row <= n * (n - 1) / 2 + 2 * n + 1

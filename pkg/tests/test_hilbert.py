"""Index conventions, sparse operators, and state validation."""

import math

import numpy as np
import pytest

from ionbattery import (HermiticityError, HilbertSpec, Operator, PureState,
                        boson_annihilator, identity_operator,
                        spin_site_matrix, spin_site_operator, tensor_embed)


def test_spec_dims_and_index_roundtrip():
    spec = HilbertSpec(n_ions=3, fock_dim=7)
    assert spec.spin_dim == 8
    assert spec.total_dim == 56
    rng = np.random.default_rng(11)
    for _ in range(200):
        fock = int(rng.integers(0, spec.fock_dim))
        s = int(rng.integers(0, spec.spin_dim))
        i = spec.compose_index(fock, s)
        assert spec.decompose_index(i) == (fock, s)
    # boson-major layout: consecutive spin states share a fock level
    assert spec.compose_index(2, 5) == 2 * 8 + 5


def test_spec_validation():
    with pytest.raises(ValueError):
        HilbertSpec(n_ions=0, fock_dim=5)
    with pytest.raises(ValueError):
        HilbertSpec(n_ions=2, fock_dim=1)


def test_ion_bit_most_significant_first():
    spec = HilbertSpec(n_ions=3, fock_dim=2)
    s = 0b100  # ion 1 excited, ions 2 and 3 down
    assert spec.ion_bit(s, 1) == 1
    assert spec.ion_bit(s, 2) == 0
    assert spec.ion_bit(s, 3) == 0
    with pytest.raises(IndexError):
        spec.ion_bit(s, 0)
    with pytest.raises(IndexError):
        spec.ion_bit(s, 4)


def test_annihilator_smallest_cutoff():
    c = boson_annihilator(2)
    np.testing.assert_array_equal(c.to_dense(), [[0, 1], [0, 0]])
    with pytest.raises(ValueError):
        boson_annihilator(1)


def test_annihilator_matrix_elements():
    c = boson_annihilator(12)
    dense = c.to_dense()
    # <n-1| c |n> = sqrt(n)
    assert dense[9, 10] == pytest.approx(math.sqrt(10), abs=0, rel=1e-15)
    for n in range(1, 12):
        assert dense[n - 1, n] == pytest.approx(math.sqrt(n), rel=1e-15)
    # truncated commutator [c, c^dag] = 1 except at the top level
    comm = dense @ dense.conj().T - dense.conj().T @ dense
    expected = np.eye(12)
    expected[11, 11] = 1 - 12  # top row loses its upward neighbour
    np.testing.assert_allclose(comm, expected, atol=1e-12)


def test_number_operator_on_basis_state():
    fock_dim = 20
    c = boson_annihilator(fock_dim)
    number = Operator(c.dagger().matrix @ c.matrix, hermitian=True)
    state = PureState.basis(fock_dim, 15)
    assert number.expectation(state.amplitudes) == pytest.approx(15.0, abs=1e-12)


def test_pauli_algebra_on_site():
    n = 3
    sx = spin_site_matrix(n, 2, "x").to_dense()
    sy = spin_site_matrix(n, 2, "y").to_dense()
    sz = spin_site_matrix(n, 2, "z").to_dense()
    np.testing.assert_allclose(sx @ sy, 1j * sz, atol=1e-14)
    np.testing.assert_allclose(sx @ sx, np.eye(2 ** n), atol=1e-14)
    # raising against ground/excited convention: sigma^+ = |e><g|
    up = spin_site_matrix(1, 1, "raise").to_dense()
    np.testing.assert_array_equal(up, [[0, 0], [1, 0]])


def test_distinct_sites_commute():
    n = 4
    rng = np.random.default_rng(23)
    kinds = ("x", "y", "z", "raise", "lower", "population")
    for _ in range(20):
        a, b = rng.choice(np.arange(1, n + 1), size=2, replace=False)
        ka, kb = rng.choice(kinds, size=2)
        ma = spin_site_matrix(n, int(a), str(ka)).to_dense()
        mb = spin_site_matrix(n, int(b), str(kb)).to_dense()
        np.testing.assert_allclose(ma @ mb - mb @ ma, 0, atol=1e-14)


def test_population_is_projector():
    pop = spin_site_matrix(3, 1, "population").to_dense()
    evals = np.linalg.eigvalsh(pop)
    assert set(np.round(evals).astype(int)) <= {0, 1}
    np.testing.assert_allclose(pop @ pop, pop, atol=1e-14)
    # population = (sigma^z + 1) / 2
    sz = spin_site_matrix(3, 1, "z").to_dense()
    np.testing.assert_allclose(pop, (sz + np.eye(8)) / 2, atol=1e-14)


def test_site_embedding_positions():
    # site 1 acts on the most significant factor, site n on the least
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    eye = np.eye(2)
    np.testing.assert_allclose(spin_site_matrix(2, 1, "x").to_dense(),
                               np.kron(sx, eye), atol=0)
    np.testing.assert_allclose(spin_site_matrix(2, 2, "x").to_dense(),
                               np.kron(eye, sx), atol=0)
    with pytest.raises(IndexError):
        spin_site_matrix(2, 3, "x")
    with pytest.raises(ValueError):
        spin_site_matrix(2, 1, "hadamard")


def test_spin_site_operator_acts_trivially_on_boson():
    spec = HilbertSpec(n_ions=2, fock_dim=3)
    full = spin_site_operator(spec, 1, "x").to_dense()
    expected = np.kron(np.eye(3), spin_site_matrix(2, 1, "x").to_dense())
    np.testing.assert_allclose(full, expected, atol=0)


def test_tensor_embed_matches_kron_oracle():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    out = tensor_embed(Operator(a), Operator(b)).to_dense()
    np.testing.assert_allclose(out, np.kron(a, b), atol=1e-14)


def test_tensor_embed_hermitian_flag():
    h = Operator(np.diag([1.0, 2.0]), hermitian=True)
    g = Operator(np.array([[0, 1j], [0, 0]]))
    assert tensor_embed(h, h).hermitian
    assert not tensor_embed(h, g).hermitian


def test_hermitian_flag_verified():
    bad = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(HermiticityError):
        Operator(bad, hermitian=True)
    # flag survives algebra only when justified
    a = Operator(bad)
    assert not a.hermitian
    s = Operator(bad + bad.conj().T, hermitian=True)
    assert (s + s).hermitian
    assert (2.0 * s).hermitian
    assert not (1j * s).hermitian


def test_identity_operator():
    eye = identity_operator(5)
    assert eye.hermitian
    np.testing.assert_array_equal(eye.to_dense(), np.eye(5))


def test_pure_state_validation_and_overlap():
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 1.0]))  # norm sqrt(2)
    e0 = PureState.basis(4, 0)
    e1 = PureState.basis(4, 1)
    assert e0.overlap(e1) == 0
    assert e0.overlap(e0) == pytest.approx(1.0)
    plus = PureState(np.array([1, 1, 0, 0]) / np.sqrt(2))
    assert abs(plus.overlap(e0)) == pytest.approx(1 / np.sqrt(2))


def test_operator_matmul_and_apply():
    c = boson_annihilator(4)
    vec = PureState.basis(4, 2).amplitudes
    out = c.apply(vec)
    assert out[1] == pytest.approx(math.sqrt(2))
    prod = c @ c  # Operator @ Operator stays an Operator
    assert isinstance(prod, Operator)
    assert prod.to_dense()[0, 2] == pytest.approx(math.sqrt(2))

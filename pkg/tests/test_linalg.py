import numpy as np
import pytest

from oracles import family_state, random_hermitian, random_state, reduce_loops
from qcorr.linalg import (
    DimensionError,
    NotHermitianError,
    SIGMA_X,
    SIGMA_Z,
    bloch_vector,
    check_density_matrix,
    fidelity,
    from_bloch,
    hermitian_eigen,
    is_density_matrix,
    jacobi_eigh,
    nearest_density_matrix,
    partial_trace,
    partial_transpose,
    tensor_product,
)

PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def test_tensor_product_matches_kron():
    rng = np.random.default_rng(1)
    a, b = random_hermitian(2, rng), random_hermitian(3, rng)
    np.testing.assert_allclose(tensor_product(a, b), np.kron(a, b))


@pytest.mark.parametrize("keep", ["A", "B"])
def test_partial_trace_against_loops(keep):
    rho = random_state(4, np.random.default_rng(2))
    np.testing.assert_allclose(partial_trace(rho, 2, 2, keep), reduce_loops(rho, keep), atol=1e-15)


def test_partial_trace_of_family_state():
    p, theta = 0.37, 0.9
    c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    expected = p * np.diag([c2, s2]) + (1 - p) * np.eye(2) / 2
    np.testing.assert_allclose(partial_trace(family_state(p, theta), 2, 2, "A"), expected, atol=1e-15)


def test_partial_trace_uneven_dims():
    rng = np.random.default_rng(3)
    a, b = random_state(2, rng), random_state(3, rng)
    np.testing.assert_allclose(partial_trace(np.kron(a, b), 2, 3, "A"), a, atol=1e-14)
    np.testing.assert_allclose(partial_trace(np.kron(a, b), 2, 3, "B"), b, atol=1e-14)


def test_partial_trace_dimension_error():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4), 2, 3)


def test_partial_transpose_examples():
    d = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    np.testing.assert_array_equal(partial_transpose(d, 2, 2), d)
    pt = partial_transpose(np.outer(PHI_PLUS, PHI_PLUS), 2, 2)
    assert np.linalg.eigvalsh(pt)[0] == pytest.approx(-0.5, abs=1e-14)
    rho = random_state(6, np.random.default_rng(4))
    for side in "AB":
        np.testing.assert_array_equal(partial_transpose(partial_transpose(rho, 2, 3, side), 2, 3, side), rho)


def test_partial_transpose_index_rule():
    # (ρ^{T_A})_{ik,jl} = ρ_{jk,il}
    rho = random_state(6, np.random.default_rng(5))
    pt = partial_transpose(rho, 2, 3, "A")
    for i, j, k, l in np.ndindex(2, 2, 3, 3):
        assert pt[3 * i + k, 3 * j + l] == rho[3 * j + k, 3 * i + l]


def test_partial_transpose_dimension_error():
    with pytest.raises(DimensionError):
        partial_transpose(np.eye(5), 2, 2)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_hermitian_eigen_paulis(method):
    for s in (SIGMA_Z, SIGMA_X):
        w, _ = hermitian_eigen(s, method)
        np.testing.assert_allclose(w, [-1, 1], atol=1e-14)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_hermitian_eigen_reconstruction(method):
    h = random_hermitian(8, np.random.default_rng(6))
    w, v = hermitian_eigen(h, method)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - h)) < 1e-8
    np.testing.assert_allclose(v.conj().T @ v, np.eye(8), atol=1e-10)


def test_jacobi_matches_lapack_on_27_dims():
    h = random_hermitian(27, np.random.default_rng(7))
    np.testing.assert_allclose(jacobi_eigh(h)[0], np.linalg.eigvalsh(h), atol=1e-9)


def test_hermitian_eigen_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eigen(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        hermitian_eigen(np.eye(2), method="qr")


def test_bloch_vector_examples():
    np.testing.assert_allclose(bloch_vector(np.diag([1, 0])), [0, 0, 1])
    np.testing.assert_allclose(bloch_vector(np.eye(2) / 2), [0, 0, 0])
    np.testing.assert_allclose(bloch_vector((np.eye(2) + 0.5 * SIGMA_X) / 2), [0.5, 0, 0])
    with pytest.raises(DimensionError):
        bloch_vector(np.eye(4) / 4)


def test_bloch_round_trip():
    rho = random_state(2, np.random.default_rng(8))
    np.testing.assert_allclose(from_bloch(bloch_vector(rho)), rho, atol=1e-12)


def test_nearest_density_matrix_examples():
    rho = random_state(4, np.random.default_rng(9))
    np.testing.assert_allclose(nearest_density_matrix(rho), rho, atol=1e-9)
    np.testing.assert_allclose(nearest_density_matrix(np.diag([1.2, -0.2])), np.diag([1.0, 0.0]), atol=1e-12)
    a = np.random.default_rng(10).normal(size=(3, 3)) + np.eye(3)
    np.testing.assert_allclose(nearest_density_matrix(a), nearest_density_matrix((a + a.T) / 2), atol=1e-14)
    with pytest.raises(ValueError):
        nearest_density_matrix(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        nearest_density_matrix(np.diag([0.3, -0.5]))


def test_nearest_density_matrix_redistribution():
    # eigenvalues (0.7, 0.5, -0.2): deficit -0.2 split 7:5 over the positive ones
    out = nearest_density_matrix(np.diag([0.7, 0.5, -0.2]))
    np.testing.assert_allclose(np.diag(out).real, [0.7 - 0.2 * 7 / 12, 0.5 - 0.2 * 5 / 12, 0.0], atol=1e-12)


def test_check_density_matrix():
    assert is_density_matrix(np.eye(4) / 4)
    assert not is_density_matrix(np.diag([1.1, -0.1]))
    assert not is_density_matrix(np.eye(2))
    with pytest.raises(ValueError):
        check_density_matrix(np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_fidelity_values():
    rng = np.random.default_rng(11)
    rho = random_state(4, rng)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)
    pure = np.outer(PHI_PLUS, PHI_PLUS.conj())
    # for a pure state F = <ψ|σ|ψ>
    assert fidelity(pure, rho) == pytest.approx((PHI_PLUS.conj() @ rho @ PHI_PLUS).real, abs=1e-9)
    assert fidelity(np.diag([1, 0]), np.diag([0, 1])) == pytest.approx(0.0, abs=1e-15)

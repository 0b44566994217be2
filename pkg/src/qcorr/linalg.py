"""Dense linear algebra for small bipartite Hilbert spaces.

Matrices are plain complex ``numpy`` arrays. Density matrices are not wrapped
in a class; :func:`check_density_matrix` validates one on demand.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"expected a nonempty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def hermiticity_residual(h) -> float:
    h = np.asarray(h)
    return float(np.max(np.abs(h - h.conj().T)))


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def _check_bipartite(rho: np.ndarray, dim_a: int, dim_b: int) -> None:
    n = dim_a * dim_b
    if rho.shape != (n, n):
        raise DimensionError(
            f"operator of shape {rho.shape} does not act on a {dim_a}x{dim_b} space"
        )


def partial_trace(rho, dim_a: int, dim_b: int, keep: str = "A") -> np.ndarray:
    """Reduce a bipartite operator to subsystem ``keep`` ('A' or 'B')."""
    rho = _as_matrix(rho)
    _check_bipartite(rho, dim_a, dim_b)
    t = rho.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_transpose(rho, dim_a: int, dim_b: int, subsystem: str = "A") -> np.ndarray:
    """Transpose the indices of one tensor factor.

    For ``subsystem='A'`` the entries map as ``(ik, jl) -> (jk, il)``.
    """
    rho = _as_matrix(rho)
    _check_bipartite(rho, dim_a, dim_b)
    t = rho.reshape(dim_a, dim_b, dim_a, dim_b)
    if subsystem == "A":
        t = t.transpose(2, 1, 0, 3)
    elif subsystem == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.reshape(dim_a * dim_b, dim_a * dim_b)


def jacobi_eigh(h, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi eigensolver for Hermitian matrices.

    Each step zeroes one off-diagonal pair with a complex Givens rotation.
    Returns eigenvalues ascending and eigenvectors as columns.
    """
    a = np.array(_as_matrix(h), dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1e-300)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = 0.5 * np.arctan2(2 * mag, aqq - app)
                c = np.cos(theta)
                s = np.sin(theta)
                # rotation acting on the (p, q) plane
                rot_p = c * a[:, p] - s * np.conj(phase) * a[:, q]
                rot_q = s * phase * a[:, p] + c * a[:, q]
                a[:, p] = rot_p
                a[:, q] = rot_q
                row_p = c * a[p, :] - s * phase * a[q, :]
                row_q = s * np.conj(phase) * a[p, :] + c * a[q, :]
                a[p, :] = row_p
                a[q, :] = row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = c * v[:, p] - s * np.conj(phase) * v[:, q]
                vq = s * phase * v[:, p] + c * v[:, q]
                v[:, p] = vp
                v[:, q] = vq
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigen(h, method: str = "lapack"):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    h : array_like
        Square matrix, Hermitian to within ``HERMITIAN_TOL``.
    method : {'lapack', 'jacobi'}
        ``'lapack'`` calls ``numpy.linalg.eigh``; ``'jacobi'`` uses the
        pure-Python cyclic Jacobi rotations of :func:`jacobi_eigh`.

    Returns
    -------
    w : ndarray
        Real eigenvalues in ascending order.
    v : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    h = _as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionError("matrix is not square")
    if hermiticity_residual(h) > HERMITIAN_TOL:
        raise NotHermitianError(
            f"matrix is not Hermitian (residual {hermiticity_residual(h):.3g})"
        )
    h = 0.5 * (h + h.conj().T)
    if method == "lapack":
        return np.linalg.eigh(h)
    if method == "jacobi":
        return jacobi_eigh(h)
    raise ValueError(f"unknown method {method!r}")


def min_eigenvalue(h) -> float:
    h = np.asarray(h, dtype=complex)
    return float(np.linalg.eigvalsh(0.5 * (h + h.conj().T))[0])


def bloch_vector(rho) -> np.ndarray:
    """Return ``(Tr ρσx, Tr ρσy, Tr ρσz)`` for a single-qubit operator."""
    rho = _as_matrix(rho)
    if rho.shape != (2, 2):
        raise DimensionError(f"bloch_vector needs a 2x2 operator, got {rho.shape}")
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def from_bloch(r) -> np.ndarray:
    x, y, z = r
    return 0.5 * (I2 + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


def nearest_density_matrix(h) -> np.ndarray:
    """Project an estimate onto the set of density matrices.

    The input is Hermitized, negative eigenvalues are clipped to zero with the
    clipped weight taken proportionally from the positive ones, and the result
    is normalized to unit trace.
    """
    h = _as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionError("matrix is not square")
    if np.max(np.abs(h)) == 0:
        raise ValueError("cannot normalize the zero matrix")
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    if w.sum() <= 0:
        # the deficit would swallow the whole positive spectrum
        raise ValueError(f"estimate has non-positive trace {w.sum():.3g}")
    pos = w > 0
    total_pos = w[pos].sum()
    deficit = w[~pos].sum()
    w = np.where(pos, w + deficit * w / total_pos, 0.0)
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.conj().T
    out = 0.5 * (out + out.conj().T)
    return out / np.trace(out).real


def check_density_matrix(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate and return ``rho`` as a complex array; raise ``ValueError`` if invalid."""
    rho = _as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise DimensionError("density matrix must be square")
    if hermiticity_residual(rho) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise ValueError(f"density matrix has trace {np.trace(rho).real}")
    if min_eigenvalue(rho) < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def is_density_matrix(rho, tol: float = HERMITIAN_TOL) -> bool:
    try:
        check_density_matrix(rho, tol)
    except ValueError:
        return False
    return True


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(ρ) σ sqrt(ρ)))**2``."""
    w, v = np.linalg.eigh(0.5 * (rho + np.conj(rho).T))
    sqrt_rho = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    inner = sqrt_rho @ sigma @ sqrt_rho
    ev = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2)


def ket(*amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=complex)
    return v / np.linalg.norm(v)


def projector(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(vec, vec.conj())

"""Dense complex linear algebra for 2x2 / 4x4 operators and Bloch 3-vectors.

Everything here is a pure function on plain numpy arrays.  Equality is
always tolerance-based; the default tolerance is ``DEFAULT_TOL``.
"""

from __future__ import annotations

import numpy as np

DEFAULT_TOL = 1e-10

ID2 = np.eye(2, dtype=complex)
ID4 = np.eye(4, dtype=complex)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

# Jones matrices of a quarter- and half-wave plate with horizontal fast axis.
Q0 = np.array([[1.0, 0.0], [0.0, 1.0j]], dtype=complex)
H0 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def as_cmat(m, dim: int | None = None) -> np.ndarray:
    """Coerce to a square complex array with finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m, dtype=complex).conj().T


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two 2x2 matrices in (pol x mode) index order.

    Row/column index of the result is ``2 * pol_index + mode_index``, so the
    composite basis reads |Hh>, |Hv>, |Vh>, |Vv>.
    """
    return np.kron(as_cmat(a, 2), as_cmat(b, 2))


def frob_dist(a, b) -> float:
    """Frobenius distance between two same-shape matrices."""
    return float(np.linalg.norm(np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)))


def mats_close(a, b, tol: float = DEFAULT_TOL) -> bool:
    return frob_dist(a, b) <= tol


def unitarity_residual(u) -> float:
    u = as_cmat(u)
    return frob_dist(dagger(u) @ u, np.eye(u.shape[0]))


def is_unitary(u, tol: float = 1e-8) -> bool:
    return unitarity_residual(u) <= tol


def phase_invariant_distance(u, v) -> float:
    """min over phi of ||u - e^{i phi} v||_F for unitary u, v.

    Equals sqrt(2 d - 2 |Tr(u^dag v)|), but is evaluated at the minimizing
    phase phi = arg Tr(u^dag v) so that near-equal matrices resolve to the
    floating-point floor instead of sqrt(eps).
    """
    u = as_cmat(u)
    v = as_cmat(v, u.shape[0])
    if unitarity_residual(u) > 1e-8 or unitarity_residual(v) > 1e-8:
        raise ValueError("phase_invariant_distance requires unitary inputs")
    phase = np.exp(-1j * np.angle(np.trace(dagger(u) @ v)))
    return frob_dist(u, phase * v)


def hermiticity_residual(m) -> float:
    m = as_cmat(m)
    return frob_dist(m, dagger(m))


def eig_hermitian(m, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvectors in the columns of ``v``.  Rejects non-Hermitian input.
    """
    m = as_cmat(m)
    if hermiticity_residual(m) > tol:
        raise ValueError("eig_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh((m + dagger(m)) / 2.0)
    return w.real, v


def svd3(t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Signed SVD of a real 3x3 matrix: t = L diag(s) R^T with L, R rotations.

    Both factors are forced to determinant +1; any reflection is absorbed
    into the sign of the last singular value, so entries of ``s`` may be
    negative.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (3, 3) or not np.all(np.isfinite(t)):
        raise ValueError("svd3 expects a finite real 3x3 matrix")
    u, s, vt = np.linalg.svd(t)
    left = u.copy()
    right = vt.T.copy()
    s = s.copy()
    if np.linalg.det(left) < 0:
        left[:, 2] *= -1.0
        s[2] *= -1.0
    if np.linalg.det(right) < 0:
        right[:, 2] *= -1.0
        s[2] *= -1.0
    return left, s, right


def bloch_vector(rho) -> np.ndarray:
    """Bloch vector of a 2x2 Hermitian operator: r_i = Tr(sigma_i rho)."""
    rho = as_cmat(rho, 2)
    return np.array([np.trace(p @ rho).real for p in PAULIS])


def density_from_bloch(r, tol: float = DEFAULT_TOL) -> np.ndarray:
    """rho = (I + r . sigma) / 2; requires ||r|| <= 1 within tolerance."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError("Bloch vector must have 3 real components")
    if np.linalg.norm(r) > 1.0 + tol:
        raise ValueError(f"Bloch vector length {np.linalg.norm(r):.6g} exceeds 1")
    return (ID2 + r[0] * PAULI_X + r[1] * PAULI_Y + r[2] * PAULI_Z) / 2.0


def assert_density_matrix(rho, tol: float = 1e-8) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return the coerced array."""
    rho = as_cmat(rho)
    if hermiticity_residual(rho) > tol:
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol or abs(np.trace(rho).imag) > tol:
        raise ValueError("density matrix must have unit trace")
    w = np.linalg.eigvalsh((rho + dagger(rho)) / 2.0)
    if w.min() < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {w.min():.3g}")
    return rho

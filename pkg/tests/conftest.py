import numpy as np

from qchansim import KrausChannel


def haar_unitary(rng):
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q @ np.diag(np.diag(r) / np.abs(np.diag(r)))


def random_density(rng):
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure(rng):
    psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_kraus_pair_channel(rng, label="random"):
    # A 4x2 isometry sliced into two blocks is exactly trace preserving.
    z = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    q, _ = np.linalg.qr(z)
    return KrausChannel((q[0:2, :], q[2:4, :]), label)

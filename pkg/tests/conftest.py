import numpy as np
import pytest

from matchgate_shadows import SlaterDescriptor
from matchgate_shadows import dense as dn
from matchgate_shadows.gaussian import CovarianceState


def random_slater(m: int, n: int, rng: np.random.Generator) -> SlaterDescriptor:
    x = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    q, _ = np.linalg.qr(x)
    return SlaterDescriptor(m=m, n=n, u=q)


def random_gaussian_dense(m: int, rng: np.random.Generator, layers: int = 10) -> np.ndarray:
    """Dense pure Gaussian state built from (gamma_a gamma_b)-rotations.

    (gamma_a gamma_b)^2 = -1, so each layer is cos(t) + sin(t) gamma_a gamma_b
    exactly; no matrix exponential needed.
    """
    psi = np.zeros(2**m, dtype=complex)
    psi[0] = 1.0
    gammas = dn.gammas_dense(m)
    eye = np.eye(2**m)
    for _ in range(layers):
        a, b = rng.choice(2 * m, size=2, replace=False)
        t = rng.normal()
        psi = (np.cos(t) * eye + np.sin(t) * gammas[a] @ gammas[b]) @ psi
    return psi / np.linalg.norm(psi)


def gaussian_state_pair(m: int, rng: np.random.Generator) -> tuple[np.ndarray, CovarianceState]:
    """Matched (dense density matrix, covariance state) for a random pure Gaussian."""
    psi = random_gaussian_dense(m, rng)
    rho = np.outer(psi, psi.conj())
    return rho, CovarianceState(m=m, matrix=dn.covariance_from_dense(rho, m))


def dense_snapshot(m: int, perm, bits: str) -> np.ndarray:
    """Dense snapshot of shadow (p, b) per the package basis convention."""
    u = dn.unitary_of_permutation_dense(m, tuple(perm))
    v = u[:, dn.basis_index(bits)]
    return np.outer(v, v.conj())


def bad_pair(n: int) -> tuple[SlaterDescriptor, SlaterDescriptor]:
    """The 2n-mode pair 2^{-n/2} (|01> +/- |10>)^{x n}: orthogonal Slater states
    with identical computational-basis distributions."""
    m = 2 * n
    out = []
    for sign in (+1.0, -1.0):
        u = np.zeros((m, m), dtype=complex)
        for i in range(n):
            u[i, 2 * i] = 1 / np.sqrt(2)
            u[i, 2 * i + 1] = sign / np.sqrt(2)
            u[n + i, 2 * i] = 1 / np.sqrt(2)
            u[n + i, 2 * i + 1] = -sign / np.sqrt(2)
        out.append(SlaterDescriptor(m=m, n=n, u=u))
    return out[0], out[1]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)

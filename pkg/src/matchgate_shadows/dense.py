"""Brute-force 2^m-dimensional reference implementation.

Everything here builds explicit matrices under the Jordan-Wigner encoding
(gamma_{2i-1} = Z^(i-1) X, gamma_{2i} = Z^(i-1) Y) and is used to validate the
polynomial-time routines at small mode counts.  The encoding is internal to
this module; nothing outside depends on it.

Guards are hard errors: this layer must never silently attempt huge algebra.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations
from math import factorial
from typing import Callable, Iterable, Sequence

import numpy as np

from .coefficients import channel_eigenvalue_of_degree
from .majorana import (
    CoefficientMap,
    all_sequences,
    validate_permutation,
    validate_sequence,
)

__all__ = [
    "gamma_dense",
    "annihilator_dense",
    "gammas_dense",
    "unitary_of_permutation_dense",
    "full_permutation_group",
    "channel_dense",
    "inverse_channel_dense",
    "second_moment_dense",
    "coefficient_map_from_dense",
    "dense_from_coefficient_map",
    "covariance_from_dense",
    "slater_statevector",
    "born_probabilities",
    "basis_index",
    "random_even_coefficient_map",
    "random_density_coefficient_map",
]

_GAMMA_LIMIT = 10
_UNITARY_LIMIT = 6
_CHANNEL_LIMIT = 4
_FULL_GROUP_LIMIT = 3
_COEFF_MAP_LIMIT = 6

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I = np.eye(2, dtype=complex)


def _guard(m: int, limit: int, what: str) -> None:
    if m > limit:
        raise ValueError(f"dense {what} is limited to m <= {limit}, got m = {m}")


def _kron_chain(ops: Iterable[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


@lru_cache(maxsize=None)
def gammas_dense(m: int) -> tuple[np.ndarray, ...]:
    """The 2m Jordan-Wigner Majorana matrices, cached per m."""
    _guard(m, _GAMMA_LIMIT, "Majorana matrices")
    gammas = []
    for i in range(m):
        for tail in (_X, _Y):
            ops = [_Z] * i + [tail] + [_I] * (m - i - 1)
            mat = _kron_chain(ops)
            mat.setflags(write=False)
            gammas.append(mat)
    return tuple(gammas)


def gamma_dense(m: int, seq: Sequence[int]) -> np.ndarray:
    """Gamma_mu = (-i)^{k(k-1)/2} gamma_{mu_1} ... gamma_{mu_k} as a matrix."""
    seq = validate_sequence(m, tuple(seq))
    gammas = gammas_dense(m)
    out = np.eye(2**m, dtype=complex)
    for idx in seq:
        out = out @ gammas[idx - 1]
    k = len(seq)
    return (-1j) ** (k * (k - 1) // 2) * out


def annihilator_dense(m: int, i: int) -> np.ndarray:
    """a_i = (gamma_{2i-1} + i gamma_{2i}) / 2 (1-based mode index)."""
    gammas = gammas_dense(m)
    return (gammas[2 * i - 2] + 1j * gammas[2 * i - 1]) / 2


def unitary_of_permutation_dense(m: int, p: Sequence[int]) -> np.ndarray:
    """A unitary with U gamma_j U^dag = gamma_{p(j)} for every j.

    Built from Majorana reflections (gamma_j + gamma_k)/sqrt(2) along a
    transposition decomposition of p; the residual sign pattern those leave
    behind is cancelled by conjugation with an explicit gamma monomial.
    Cached: the exhaustive channel sums revisit the same small groups.
    """
    return _unitary_of_permutation_cached(m, validate_permutation(p))


@lru_cache(maxsize=4096)
def _unitary_of_permutation_cached(m: int, p: tuple[int, ...]) -> np.ndarray:
    _guard(m, _UNITARY_LIMIT, "permutation unitary")
    gammas = gammas_dense(m)
    dim = 2**m

    # Left-compose reflections until the realized index map equals p; each
    # reflection (gamma_a + gamma_b)/sqrt(2) swaps images a <-> b (and flips
    # signs elsewhere, cancelled later).
    u = np.eye(dim, dtype=complex)
    realized = list(range(1, 2 * m + 1))
    for j in range(2 * m):
        if realized[j] != p[j]:
            a, b = realized[j], p[j]
            refl = (gammas[a - 1] + gammas[b - 1]) / np.sqrt(2)
            u = refl @ u
            realized = [b if x == a else a if x == b else x for x in realized]

    # Measure the residual signs and cancel them with a gamma monomial.
    flips = []
    for j in range(2 * m):
        conj = u @ gammas[j] @ u.conj().T
        target = gammas[p[j] - 1]
        if np.allclose(conj, target, atol=1e-10):
            continue
        if np.allclose(conj, -target, atol=1e-10):
            flips.append(p[j] - 1)
        else:
            raise AssertionError("reflection product did not realize a signed permutation")
    if len(flips) % 2:
        flips = sorted(set(range(2 * m)) - set(flips))
    w = np.eye(dim, dtype=complex)
    for c in flips:
        w = w @ gammas[c]
    u = w @ u

    for j in range(2 * m):
        if not np.allclose(u @ gammas[j] @ u.conj().T, gammas[p[j] - 1], atol=1e-10):
            raise AssertionError("permutation unitary failed the conjugation relation")
    u.setflags(write=False)
    return u


def full_permutation_group(m: int) -> list[tuple[int, ...]]:
    _guard(m, _FULL_GROUP_LIMIT, "full permutation group")
    return [tuple(p) for p in permutations(range(1, 2 * m + 1))]


def channel_dense(m: int, ensemble: Sequence[Sequence[int]]) -> Callable[[np.ndarray], np.ndarray]:
    """The dense measure-and-reprepare channel averaged over the ensemble.

    M(A) = avg_p sum_b <b|W A W^dag|b> W^dag |b><b| W with basis rotation
    W(p) = U(p)^{-1}, matching the shadow protocol: the frame vectors are
    v_{p,b} = W^dag|b> = U(p)|b>, the b-th column of U(p).
    """
    _guard(m, _CHANNEL_LIMIT, "channel")
    dim = 2**m
    vs = np.empty((len(ensemble) * dim, dim), dtype=complex)
    for idx, p in enumerate(ensemble):
        u = unitary_of_permutation_dense(m, tuple(p))
        vs[idx * dim : (idx + 1) * dim] = u.T
    count = len(ensemble)

    def apply(a: np.ndarray) -> np.ndarray:
        vals = np.einsum("si,ij,sj->s", vs.conj(), a, vs)
        out = (vs * vals[:, None]).T @ vs.conj()
        return out / count

    return apply


def inverse_channel_dense(m: int, a: np.ndarray) -> np.ndarray:
    """M^{-1}(A) for even-supported A, via the exact Majorana eigenbasis."""
    _guard(m, _COEFF_MAP_LIMIT, "inverse channel")
    out = np.zeros_like(a, dtype=complex)
    dim = 2**m
    for seq in all_sequences(m):
        coeff = np.trace(gamma_dense(m, seq) @ a) / dim
        if abs(coeff) < 1e-15:
            continue
        lam = channel_eigenvalue_of_degree(m, len(seq))
        if lam == 0:
            raise ValueError("inverse channel applied to odd-degree support")
        out += (coeff / float(lam)) * gamma_dense(m, seq)
    return out


def second_moment_dense(m: int, h: np.ndarray, rho: np.ndarray) -> float:
    """E[(Tr[M^{-1}(H) snapshot])^2] over the full ensemble, exact.

    Snapshot frame vectors v_{p,b} = U(p)|b> per the package basis convention
    (direction-irrelevant over the full group, which is inverse-closed).
    """
    _guard(m, _FULL_GROUP_LIMIT, "second moment")
    dim = 2**m
    hinv = inverse_channel_dense(m, h)
    total = 0.0
    for p in full_permutation_group(m):
        u = unitary_of_permutation_dense(m, p)
        for b in range(dim):
            v = u[:, b]
            prob = float(np.real(v.conj() @ rho @ v))
            est = float(np.real(v.conj() @ hinv @ v))
            total += prob * est**2
    return total / factorial(2 * m)


def coefficient_map_from_dense(op: np.ndarray, m: int) -> CoefficientMap:
    """Expand a dense operator with real Majorana coefficients."""
    _guard(m, _COEFF_MAP_LIMIT, "coefficient extraction")
    dim = 2**m
    entries: dict[tuple[int, ...], float] = {}
    for seq in all_sequences(m):
        coeff = np.trace(gamma_dense(m, seq) @ op) / dim
        if abs(coeff.imag) > 1e-10:
            raise ValueError(f"operator has non-real coefficient at {seq}")
        if abs(coeff.real) > 1e-14:
            entries[seq] = float(coeff.real)
    return CoefficientMap(m=m, entries=entries)


def dense_from_coefficient_map(a: CoefficientMap) -> np.ndarray:
    _guard(a.m, _COEFF_MAP_LIMIT, "coefficient expansion")
    out = np.zeros((2**a.m, 2**a.m), dtype=complex)
    for seq, coeff in a.entries.items():
        out += coeff * gamma_dense(a.m, seq)
    return out


def covariance_from_dense(rho: np.ndarray, m: int) -> np.ndarray:
    """Majorana covariance M[j,k] = -i Tr(rho gamma_j gamma_k), j != k."""
    gammas = gammas_dense(m)
    out = np.zeros((2 * m, 2 * m))
    for j in range(2 * m):
        for k in range(j + 1, 2 * m):
            val = -1j * np.trace(rho @ gammas[j] @ gammas[k])
            if abs(val.imag) > 1e-10:
                raise ValueError("covariance entry came out complex; state not Hermitian?")
            out[j, k] = val.real
            out[k, j] = -val.real
    return out


def basis_index(bits: str) -> int:
    """Row index of |bits> with mode 1 as the most significant qubit."""
    return int(bits, 2) if bits else 0


def slater_statevector(m: int, n: int, u: np.ndarray) -> np.ndarray:
    """Dense |psi> = b_1^dag ... b_n^dag |0> with b_i = sum_j U[i,j] a_j."""
    _guard(m, _GAMMA_LIMIT, "Slater statevector")
    dim = 2**m
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0
    creators = [annihilator_dense(m, j + 1).conj().T for j in range(m)]
    for i in range(n - 1, -1, -1):
        bdag = sum(np.conj(u[i, j]) * creators[j] for j in range(m))
        psi = bdag @ psi
    return psi


def born_probabilities(rho_or_psi: np.ndarray) -> np.ndarray:
    """Computational-basis probabilities of a dense state (vector or matrix)."""
    if rho_or_psi.ndim == 1:
        return np.abs(rho_or_psi) ** 2
    return np.real(np.diag(rho_or_psi))


def random_even_coefficient_map(m: int, rng: np.random.Generator, scale: float = 1.0) -> CoefficientMap:
    """Random Hermitian observable supported on even degrees."""
    entries = {
        seq: float(rng.normal(scale=scale))
        for k in range(0, 2 * m + 1, 2)
        for seq in all_sequences(m, degrees=[k])
    }
    return CoefficientMap(m=m, entries=entries)


def random_density_coefficient_map(m: int, rng: np.random.Generator) -> tuple[CoefficientMap, np.ndarray]:
    """A random mixed state as (coefficient map, dense matrix)."""
    dim = 2**m
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return coefficient_map_from_dense(rho, m), rho

"""Polynomial-time free-fermion simulation on Majorana covariance matrices.

Sign convention, fixed here and imported by every other module: with
gamma_{2i-1} = a_i + a_i^dag and gamma_{2i} = -i(a_i - a_i^dag),

    M[j, k] = -i <gamma_j gamma_k>     (j != k, 0-based indices j, k),

so that M[2i-2, 2i-1] = <Z_i> = 1 - 2<n_i>.  The vacuum is the direct sum of
blocks [[0, 1], [-1, 0]].  A state is pure iff M M^T = I.

Gaussian unitaries enter only through their orthogonal action on Majorana
operators.  For a Gaussian unitary V we store R with

    V^dag gamma_j V = sum_d R[j, d] gamma_d,

under which cov(V rho V^dag) = R M R^T.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .majorana import validate_permutation

__all__ = [
    "CovarianceState",
    "SlaterDescriptor",
    "vacuum",
    "basis_state",
    "covariance_of_slater",
    "apply_permutation",
    "sample_bits",
    "pfaffian",
    "expect_diag_gaussian_op",
    "expect_xtype_gaussian_op",
    "fidelity_slaters",
    "orbital_rotation_action",
    "slater_inverse_preparation",
    "UnphysicalStateError",
]

_ANTISYM_TOL = 1e-12
_PURITY_TOL = 1e-10
_PROB_CLAMP = 1e-9


class UnphysicalStateError(ValueError):
    """Raised when a covariance matrix fails physicality checks."""


@dataclass(frozen=True)
class CovarianceState:
    """A (pure or mixed) fermionic Gaussian state as its covariance matrix."""

    m: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (2 * self.m, 2 * self.m):
            raise UnphysicalStateError(f"covariance must be {2*self.m}x{2*self.m}")
        if np.max(np.abs(mat + mat.T)) > _ANTISYM_TOL:
            raise UnphysicalStateError("covariance matrix is not antisymmetric")
        # ||M|| <= 1 up to roundoff slack.
        if np.linalg.norm(mat, 2) > 1 + 1e-8:
            raise UnphysicalStateError("covariance matrix has singular values > 1")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def is_pure(self, tol: float = _PURITY_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix @ self.matrix.T - np.eye(2 * self.m))) <= tol)


@dataclass(frozen=True)
class SlaterDescriptor:
    """n-electron Slater determinant: psi = b_1^dag ... b_n^dag |0> with
    b_i = sum_j U[i, j] a_j; the first n rows of U span the occupied orbitals.
    """

    m: int
    n: int
    u: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (self.m, self.m):
            raise ValueError(f"orbital matrix must be {self.m}x{self.m}")
        if not 0 <= self.n <= self.m:
            raise ValueError(f"need 0 <= n <= m, got n={self.n}")
        if np.max(np.abs(u @ u.conj().T - np.eye(self.m))) > 1e-10:
            raise ValueError("orbital matrix is not unitary")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def to_json(self) -> str:
        rows = [[[float(z.real), float(z.imag)] for z in row] for row in self.u]
        return json.dumps({"m": self.m, "n": self.n, "U": rows})

    @classmethod
    def from_json(cls, text: str) -> "SlaterDescriptor":
        data = json.loads(text)
        u = np.array([[complex(re, im) for re, im in row] for row in data["U"]])
        return cls(m=int(data["m"]), n=int(data["n"]), u=u)


def vacuum(m: int) -> CovarianceState:
    mat = np.zeros((2 * m, 2 * m))
    for i in range(m):
        mat[2 * i, 2 * i + 1] = 1.0
        mat[2 * i + 1, 2 * i] = -1.0
    return CovarianceState(m=m, matrix=mat)


def basis_state(bits: str) -> CovarianceState:
    m = len(bits)
    mat = np.zeros((2 * m, 2 * m))
    for i, ch in enumerate(bits):
        sign = -1.0 if ch == "1" else 1.0
        mat[2 * i, 2 * i + 1] = sign
        mat[2 * i + 1, 2 * i] = -sign
    return CovarianceState(m=m, matrix=mat)


def covariance_of_slater(slater: SlaterDescriptor) -> CovarianceState:
    """Covariance of the Slater state, via C[i,j] = <a_i^dag a_j> = (Uocc^dag Uocc)^T."""
    m, n = slater.m, slater.n
    occ = slater.u[:n]
    c = (occ.conj().T @ occ).T
    mat = np.zeros((2 * m, 2 * m))
    re = c.real
    im = c.imag
    eye = np.eye(m)
    mat[0::2, 0::2] = 2 * im
    mat[1::2, 1::2] = 2 * im
    mat[0::2, 1::2] = eye - 2 * re
    mat[1::2, 0::2] = -(eye - 2 * re).T
    return CovarianceState(m=m, matrix=mat)


def apply_permutation(state: CovarianceState, p: Sequence[int]) -> CovarianceState:
    """Covariance of U(p) rho U(p)^dag, where U(p) gamma_j U(p)^dag = gamma_{p(j)}.

    cov'[j, k] = cov[p^{-1}(j), p^{-1}(k)].
    """
    p = validate_permutation(p)
    p0 = np.asarray(p, dtype=int) - 1
    inv = np.argsort(p0)
    return CovarianceState(m=state.m, matrix=state.matrix[np.ix_(inv, inv)])


def _measure_all_modes(mat: np.ndarray, rng: np.random.Generator) -> str:
    """Sequentially measure every mode of a covariance matrix (in place)."""
    m = mat.shape[0] // 2
    bits = []
    for i in range(m):
        a, b = 2 * i, 2 * i + 1
        p0 = (1.0 + mat[a, b]) / 2.0
        if p0 < -_PROB_CLAMP or p0 > 1.0 + _PROB_CLAMP:
            raise UnphysicalStateError(f"mode {i+1} occupation probability {1-p0} out of range")
        p0 = min(max(p0, 0.0), 1.0)
        outcome = 0 if rng.random() < p0 else 1
        sigma = 1.0 - 2.0 * outcome
        denom = 1.0 + sigma * mat[a, b]
        # denom = 2 P(outcome) > 0 for any outcome actually drawn.
        denom = max(denom, 1e-12)
        va = mat[:, a].copy()
        vb = mat[:, b].copy()
        mat += sigma * (np.outer(vb, va) - np.outer(va, vb)) / denom
        mat[[a, b], :] = 0.0
        mat[:, [a, b]] = 0.0
        mat[a, b] = sigma
        mat[b, a] = -sigma
        bits.append(outcome)
    return "".join(map(str, bits))


def sample_bits(state: CovarianceState, rng: np.random.Generator) -> str:
    """Draw a computational-basis outcome with Born probability <b|rho|b>.

    Sequential single-mode measurement with conditional-covariance updates,
    O(m^3) total.
    """
    return _measure_all_modes(np.array(state.matrix, dtype=float), rng)


def pfaffian(a: np.ndarray) -> float | complex:
    """Pfaffian of an antisymmetric matrix by Gaussian elimination with pivoting.

    Tracks the sign exactly (needed for estimator phases); odd dimension gives
    0 by convention.  Complex matrices are supported.
    """
    a = np.array(a)
    d = a.shape[0]
    if a.shape != (d, d):
        raise ValueError("pfaffian needs a square matrix")
    if d > 0 and np.max(np.abs(a + a.T)) > 1e-8 * max(1.0, np.max(np.abs(a))):
        raise ValueError("pfaffian needs an antisymmetric matrix")
    if d % 2:
        return 0.0
    iscomplex = np.iscomplexobj(a)
    a = a.astype(complex if iscomplex else float)
    result = complex(1.0) if iscomplex else 1.0
    for k in range(0, d - 1, 2):
        pivot = k + 1 + int(np.argmax(np.abs(a[k, k + 1 :])))
        if a[k, pivot] == 0:
            return 0.0 * result
        if pivot != k + 1:
            a[[k + 1, pivot], :] = a[[pivot, k + 1], :]
            a[:, [k + 1, pivot]] = a[:, [pivot, k + 1]]
            result = -result
        result *= a[k, k + 1]
        if k + 2 < d:
            tau = a[k, k + 2 :] / a[k, k + 1]
            col = a[k + 2 :, k + 1]
            a[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return result


def _diag_kernel_matrix(matrix: np.ndarray, z: np.ndarray) -> np.ndarray:
    """The antisymmetric matrix whose Pfaffian is Tr[(x)_i diag(1, z_i) rho].

    Each factor diag(1, z) = alpha + beta Z with Z = Gamma_{(2i-1,2i)}; the
    subset sum over modes collapses into Pf(D M D + C) with D = diag(sqrt(beta))
    per mode and C the block-diagonal alpha insertions.
    """
    m = matrix.shape[0] // 2
    alpha = (1.0 + z) / 2.0
    beta = (1.0 - z) / 2.0
    t = np.sqrt(beta.astype(complex))
    d = np.repeat(t, 2)
    out = (d[:, None] * d[None, :]) * matrix
    for i in range(m):
        out[2 * i, 2 * i + 1] += alpha[i]
        out[2 * i + 1, 2 * i] -= alpha[i]
    return out


def expect_diag_gaussian_op(state: CovarianceState, z: Sequence[complex]) -> complex:
    """Tr[(x)_i diag(1, z_i) rho] for a Gaussian rho, via one Pfaffian."""
    z = np.asarray(z, dtype=complex)
    if z.shape != (state.m,):
        raise ValueError(f"need one diagonal entry per mode, got shape {z.shape}")
    return _expect_diag_matrix(state.matrix, z)


def _expect_diag_matrix(mat: np.ndarray, z: np.ndarray) -> complex:
    return complex(pfaffian(_diag_kernel_matrix(mat, z)))


def expect_xtype_gaussian_op(state: CovarianceState, n: int, z: Sequence[complex]) -> complex:
    """Tr[(|0><1|)^n (x) (x)_i diag(1, z_i) rho], Wick-contracted to one Pfaffian.

    |0><1| on mode j is the Majorana-linear factor phi_j = (gamma_{2j-1} +
    i gamma_{2j}) / 2; the n linear factors and the diagonal kernel on the
    trailing m - n modes combine into an extended (n + 2(m-n))-dimensional
    antisymmetric matrix.  O((m+n)^3).
    """
    if n % 2:
        raise ValueError("X-type expectation requires even n")
    m = state.m
    z = np.asarray(z, dtype=complex)
    if z.shape != (m - n,):
        raise ValueError(f"need one diagonal entry per trailing mode, got shape {z.shape}")
    return _expect_xtype_matrix(state.matrix, n, z)


def _expect_xtype_matrix(mat: np.ndarray, n: int, z: np.ndarray) -> complex:
    m = mat.shape[0] // 2
    if n == 0:
        return _expect_diag_matrix(mat, z)
    dim = n + 2 * (m - n)
    omega = np.zeros((dim, dim), dtype=complex)

    # phi-phi block: <phi_j phi_k> with phi_j = gamma_{2j-1} + i gamma_{2j}
    # (the 1/2 normalizations are collected into the 2^-n prefactor below).
    modes = np.arange(n)
    oo = mat[np.ix_(2 * modes, 2 * modes)]
    oe = mat[np.ix_(2 * modes, 2 * modes + 1)]
    eo = mat[np.ix_(2 * modes + 1, 2 * modes)]
    ee = mat[np.ix_(2 * modes + 1, 2 * modes + 1)]
    omega[:n, :n] = 1j * (oo + 1j * oe + 1j * eo - ee)

    # Kernel block over trailing modes, with the per-mode scalings
    # u^2 = -i beta absorbing both the Z normalization and beta weights.
    alpha = (1.0 + z) / 2.0
    beta = (1.0 - z) / 2.0
    u = np.sqrt(-1j * beta)
    du = np.repeat(u, 2)
    kernel_idx = np.arange(2 * n, 2 * m)
    kblock = (du[:, None] * du[None, :]) * (1j * mat[np.ix_(kernel_idx, kernel_idx)])
    for i in range(m - n):
        kblock[2 * i, 2 * i + 1] += alpha[i]
        kblock[2 * i + 1, 2 * i] -= alpha[i]
    omega[n:, n:] = kblock

    # phi-kernel block: u_c <phi_j gamma_c>.
    q = 1j * (mat[np.ix_(2 * modes, kernel_idx)] + 1j * mat[np.ix_(2 * modes + 1, kernel_idx)])
    q = q * du[None, :]
    omega[:n, n:] = q
    omega[n:, :n] = -q.T

    prefactor = (-1.0) ** (n * (n - 1) // 2) * 2.0 ** (-n)
    return complex(prefactor * pfaffian(omega))


def fidelity_slaters(s1: SlaterDescriptor, s2: SlaterDescriptor) -> float:
    """|<psi_1|psi_2>|^2 = |det of the occupied-block Gram matrix|^2."""
    if s1.m != s2.m:
        raise ValueError("mode counts differ")
    if s1.n != s2.n:
        raise ValueError("electron counts differ")
    n = s1.n
    if n == 0:
        return 1.0
    gram = s1.u[:n] @ s2.u[:n].conj().T
    fid = abs(np.linalg.det(gram)) ** 2
    if fid > 1 + 1e-10:
        raise ValueError(f"fidelity {fid} > 1; non-unitary inputs?")
    return float(min(fid, 1.0))


def orbital_rotation_action(v: np.ndarray) -> np.ndarray:
    """Orthogonal Majorana action of the number-preserving map a_j -> sum_k v[j,k] a_k."""
    m = v.shape[0]
    out = np.zeros((2 * m, 2 * m))
    out[0::2, 0::2] = v.real
    out[0::2, 1::2] = -v.imag
    out[1::2, 0::2] = v.imag
    out[1::2, 1::2] = v.real
    return out


def slater_inverse_preparation(slater: SlaterDescriptor, number_preserving: bool = False) -> np.ndarray:
    """Orthogonal matrix R with cov(V^dag rho V) = R . cov(rho) . R^T, where V
    prepares the target: psi = V|0...0> (default) or psi = V|1^n 0^(m-n)>
    (number_preserving=True, the occupation-flip factor omitted).

    V factors as W F: W is the orbital rotation with W a_j W^dag =
    sum_k U[j,k] a_k and F = gamma_2 gamma_4 ... gamma_2n fills the first n
    modes.  Conjugation by F flips signs; global phases drop out entirely.
    """
    m, n = slater.m, slater.n
    # R_W = action of W^dag on gammas: annihilator map v = U^dag.
    r = orbital_rotation_action(slater.u.conj().T)
    if number_preserving:
        return r.T
    eps = np.full(2 * m, (-1.0) ** n)
    for i in range(n):
        eps[2 * i + 1] = (-1.0) ** (n - 1)
    # R_V = R_W diag(eps); the estimator needs R_V^T = diag(eps) R_W^T.
    return (r @ np.diag(eps)).T

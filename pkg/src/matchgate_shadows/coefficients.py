"""Exact combinatorial scalars of the measurement channel and its statistics.

All binomial/multinomial arithmetic is done in arbitrary-precision rationals
(binom(2m, 2k) overflows 64-bit integers near m = 33); conversion to floating
point happens only at API boundaries.  The m <= 50 norm scans additionally use
a vectorized log-gamma path, cross-checked against the exact one in tests.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, lgamma
from typing import Sequence

import numpy as np

__all__ = [
    "channel_eigenvalue",
    "channel_eigenvalue_of_degree",
    "joint_eigenvalue",
    "moment_weight",
    "InverseDiagDecomposition",
    "inverse_diag_decomposition",
    "inverse_diag_f_exact",
    "XTypeDecomposition",
    "xtype_decomposition",
    "projector_norm_bound",
    "projector_norm_bound_exact",
    "xtype_norm_bound",
    "xtype_norm_bound_exact",
    "xtype_norm_bound_halved",
    "xtype_norm_scan",
    "F0_bound",
    "F1_bound",
]


def _multinomial(n: int, parts: Sequence[int]) -> int:
    if any(x < 0 for x in parts) or sum(parts) != n:
        return 0
    out = 1
    rest = n
    for x in parts:
        out *= comb(rest, x)
        rest -= x
    return out


@lru_cache(maxsize=None)
def channel_eigenvalue(m: int, k: int) -> Fraction:
    """Channel eigenvalue on degree-2k monomials: binom(m,k) / binom(2m,2k).

    Equals the probability that a uniformly random permutation of [2m] maps a
    fixed 2k-index sequence onto a union of adjacent pairs.
    """
    if not 0 <= k <= m:
        raise ValueError(f"need 0 <= k <= m, got k={k}, m={m}")
    return Fraction(comb(m, k), comb(2 * m, 2 * k))


def channel_eigenvalue_of_degree(m: int, degree: int) -> Fraction:
    """Eigenvalue by monomial degree; odd degrees are annihilated."""
    if not 0 <= degree <= 2 * m:
        raise ValueError(f"need 0 <= degree <= 2m, got {degree}")
    if degree % 2:
        return Fraction(0)
    return channel_eigenvalue(m, degree // 2)


@lru_cache(maxsize=None)
def joint_eigenvalue(m: int, k: int, kp: int, a: int) -> Fraction:
    """Probability that two even sequences (sizes 2k, 2kp, overlap 2a) are
    simultaneously mapped onto diagonal sequences by a random permutation.

    Zero outside the valid range max(0, k+kp-m) <= a <= min(k, kp); callers
    passing half-integer class sizes are handled by the degree-based entry
    points returning zero.
    """
    if not (0 <= k <= m and 0 <= kp <= m):
        return Fraction(0)
    if a < max(0, k + kp - m) or a > min(k, kp):
        return Fraction(0)
    parts = (a, k - a, kp - a, m - k - kp + a)
    num = _multinomial(m, parts)
    den = _multinomial(2 * m, tuple(2 * x for x in parts))
    return Fraction(num, den)


@lru_cache(maxsize=None)
def moment_weight(m: int, k: int, kp: int, a: int) -> Fraction:
    """Second-moment weight: joint_eigenvalue / (eigenvalue_k * eigenvalue_kp).

    This is the factor multiplying h_mu h_mu' g_{mu mu'} in the second-moment
    expansion; for mu = mu' it reduces to 1/eigenvalue (the single-monomial
    squared shadow norm).
    """
    joint = joint_eigenvalue(m, k, kp, a)
    if joint == 0:
        return Fraction(0)
    return joint / (channel_eigenvalue(m, k) * channel_eigenvalue(m, kp))


@lru_cache(maxsize=None)
def inverse_diag_f_exact(m: int) -> tuple[Fraction, ...]:
    """Diagonal entries f_{m,i} of the inverse channel applied to |0><0|.

    f_{m,i} = 2^-m sum_k eigenvalue(m,k)^-1 sum_a (-1)^a C(i,a) C(m-i, k-a),
    the entry on every basis state with Hamming weight i.
    """
    out = []
    for i in range(m + 1):
        total = Fraction(0)
        for k in range(m + 1):
            inv_lam = 1 / channel_eigenvalue(m, k)
            for a in range(max(0, k + i - m), min(k, i) + 1):
                total += inv_lam * ((-1) ** a) * comb(i, a) * comb(m - i, k - a)
        out.append(total / 2**m)
    return tuple(out)


@dataclass(frozen=True)
class InverseDiagDecomposition:
    """M^{-1}(|0><0|) = sum_j c_j [diag(1, omega^-j)]^{tensor m}.

    f[i] is the diagonal entry on Hamming-weight-i basis states; c is its
    size-(m+1) inverse DFT; omega = exp(2 pi i / (m+1)).
    """

    m: int
    f: tuple[float, ...]
    f_exact: tuple[Fraction, ...]
    c: tuple[complex, ...]
    omega: complex


def inverse_diag_decomposition(m: int) -> InverseDiagDecomposition:
    if m < 1:
        raise ValueError("need m >= 1")
    f_exact = inverse_diag_f_exact(m)
    f = tuple(float(x) for x in f_exact)
    omega = cmath.exp(2j * cmath.pi / (m + 1))
    c = tuple(
        sum(omega ** (i * j) * f[i] for i in range(m + 1)) / (m + 1) for j in range(m + 1)
    )
    return InverseDiagDecomposition(m=m, f=f, f_exact=f_exact, c=c, omega=omega)


@lru_cache(maxsize=None)
def _xtype_f_exact(m: int, n: int) -> tuple[Fraction, ...]:
    """Diagonal factor entries for the X-type inverse-channel decomposition.

    The off-diagonal block (|0><1|)^n carries degree n on the first n modes,
    so the trailing diagonal kernel on r = m - n modes is scaled per Hamming
    weight class by eigenvalue(m, n/2 + k)^-1.
    """
    r = m - n
    out = []
    for i in range(r + 1):
        total = Fraction(0)
        for k in range(r + 1):
            inv_lam = 1 / channel_eigenvalue(m, n // 2 + k)
            for a in range(max(0, k + i - r), min(k, i) + 1):
                total += inv_lam * ((-1) ** a) * comb(i, a) * comb(r - i, k - a)
        out.append(total / 2**r)
    return tuple(out)


@dataclass(frozen=True)
class XTypeDecomposition:
    """M^{-1}((|0><1|)^n x (|0><0|)^(m-n)) = sum_j c[j] (|0><1|)^n x diag(1, omega^-j)^(m-n).

    The sum has m - n + 1 terms; omega is a primitive (m-n+1)-th root of unity.
    """

    m: int
    n: int
    f: tuple[float, ...]
    f_exact: tuple[Fraction, ...]
    c: tuple[complex, ...]
    omega: complex


def xtype_decomposition(m: int, n: int) -> XTypeDecomposition:
    if n % 2:
        raise ValueError("X-type decomposition requires a fixed, even particle number")
    if not 0 <= n <= m:
        raise ValueError(f"need 0 <= n <= m, got n={n}, m={m}")
    f_exact = _xtype_f_exact(m, n)
    f = tuple(float(x) for x in f_exact)
    r = m - n
    omega = cmath.exp(2j * cmath.pi / (r + 1))
    c = tuple(sum(omega ** (i * j) * f[i] for i in range(r + 1)) / (r + 1) for j in range(r + 1))
    return XTypeDecomposition(m=m, n=n, f=f, f_exact=f_exact, c=c, omega=omega)


# ---------------------------------------------------------------------------
# Shadow-norm bounds evaluated by summation over weight classes.
# ---------------------------------------------------------------------------


def projector_norm_bound_exact(m: int) -> Fraction:
    """Squared-shadow-norm bound of |0><0|^(x m): exact class-summed double sum.

    2^-2m sum over pairs of diagonal sequences of the second-moment weight,
    grouped by (|S|, |S'|, |S cap S'|) classes.  At most 2m.
    """
    total = Fraction(0)
    for k in range(m + 1):
        for a in range(k + 1):
            for b in range(m - k + 1):
                count = comb(m, k) * comb(k, a) * comb(m - k, b)
                total += count * moment_weight(m, k, a + b, a)
    return total / 4**m


def projector_norm_bound(m: int) -> float:
    if m < 1:
        raise ValueError("need m >= 1")
    if m <= 12:
        return float(projector_norm_bound_exact(m))
    w = _weight_table(m)
    total = 0.0
    for kk in range(m + 1):
        a = np.arange(kk + 1)
        b = np.arange(m - kk + 1)
        counts = comb(m, kk) * np.array([comb(kk, x) for x in a], dtype=float)[:, None] * np.array(
            [comb(m - kk, x) for x in b], dtype=float
        )[None, :]
        total += float(np.sum(counts * w[kk, a[:, None] + b[None, :], a[:, None]]))
    return total / 4.0**m


def _xtype_class_sum_exact(m: int, n: int) -> Fraction:
    """The quadruple class sum shared by both X-type norm-bound variants."""
    if n % 2:
        raise ValueError("the X-type operator needs even n to be even-degree")
    if not 0 <= n <= m:
        raise ValueError(f"need 0 <= n <= m, got n={n}, m={m}")
    r = m - n
    n2 = n // 2
    total = Fraction(0)
    for a1 in range(n2 + 1):
        c1 = comb(n, 2 * a1)
        for k2 in range(r + 1):
            c2 = comb(r, k2)
            for a2 in range(k2 + 1):
                c3 = comb(k2, a2)
                for b2 in range(r - k2 + 1):
                    count = c1 * c2 * c3 * comb(r - k2, b2)
                    total += count * moment_weight(m, n2 + k2, n2 + a2 + b2, a1 + a2)
    return total


def xtype_norm_bound_exact(m: int, n: int) -> Fraction:
    """Exact class-summed bound on the squared shadow norm of
    (|0><1|)^n (|1><1|)^(m-n); agrees with the brute-force double sum over
    all Majorana coefficient pairs of the operator.
    """
    return _xtype_class_sum_exact(m, n) * Fraction(2**n, 4**m)


def xtype_norm_bound(m: int, n: int) -> float:
    if m <= 12:
        return float(xtype_norm_bound_exact(m, n))
    return 2.0 * _xtype_norm_scan_value(m, n)


def xtype_norm_bound_halved(m: int, n: int) -> float:
    """Variant with the halved leading pair count (prefactor 2^(n-2m-1)).

    Exactly half of :func:`xtype_norm_bound`; this is the f(m, n) whose scan
    is compared against the conjectured envelopes F0 and F1.
    """
    if m <= 12:
        return float(xtype_norm_bound_exact(m, n)) / 2.0
    return _xtype_norm_scan_value(m, n)


def F0_bound(m: int) -> float:
    """Conjectured envelope for f(m, 0): m^(1/sqrt(2)) / 2."""
    return 0.5 * m ** (1.0 / np.sqrt(2.0))


def F1_bound(m: int) -> float:
    """Conjectured envelope for f(m, m): sqrt(m) / 2."""
    return 0.5 * np.sqrt(m)


# ---------------------------------------------------------------------------
# Vectorized float path for the m <= ~100 scans.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4)
def _weight_table(m: int) -> np.ndarray:
    """moment_weight(m, k, kp, a) as a float array over the full index cube.

    Built from log-factorials; relative accuracy ~1e-12, plenty for the scan
    inequalities (cross-checked against the exact rationals in tests).
    """
    lgf = np.array([lgamma(x + 1) for x in range(2 * m + 1)])
    k = np.arange(m + 1)
    kk, kkp, aa = np.meshgrid(k, k, k, indexing="ij")
    r = m - kk - kkp + aa
    valid = (aa <= np.minimum(kk, kkp)) & (r >= 0)
    kk_ = np.where(valid, kk, 0)
    kkp_ = np.where(valid, kkp, 0)
    aa_ = np.where(valid, aa, 0)
    r_ = np.where(valid, r, 0)
    log_w = (
        lgf[m]
        - lgf[aa_]
        - lgf[kk_ - aa_]
        - lgf[kkp_ - aa_]
        - lgf[r_]
        + lgf[2 * aa_]
        + lgf[2 * (kk_ - aa_)]
        + lgf[2 * (kkp_ - aa_)]
        + lgf[2 * r_]
        + lgf[2 * m]
        - 2 * lgf[m]
        + lgf[kk_]
        + lgf[m - kk_]
        + lgf[kkp_]
        + lgf[m - kkp_]
        - lgf[2 * kk_]
        - lgf[2 * (m - kk_)]
        - lgf[2 * kkp_]
        - lgf[2 * (m - kkp_)]
    )
    return np.where(valid, np.exp(log_w), 0.0)


def _xtype_norm_scan_value(m: int, n: int) -> float:
    """Halved-pair-count f(m, n) via the vectorized weight table."""
    if n % 2:
        raise ValueError("the X-type operator needs even n to be even-degree")
    r = m - n
    n2 = n // 2
    w = _weight_table(m)
    k2 = np.arange(r + 1)
    a2 = np.arange(r + 1)
    b2 = np.arange(r + 1)
    k2g, a2g, b2g = np.meshgrid(k2, a2, b2, indexing="ij")
    valid = (a2g <= k2g) & (b2g <= r - k2g)
    cr = np.array([comb(r, x) for x in range(r + 1)], dtype=float)
    combk = np.zeros((r + 1, r + 1))
    for i in range(r + 1):
        for j in range(i + 1):
            combk[i, j] = comb(i, j)
    counts = np.where(valid, cr[k2g] * combk[k2g, a2g] * combk[r - k2g, b2g], 0.0)
    kk = n2 + k2g
    kkp = n2 + a2g + b2g
    total = 0.0
    for a1 in range(n2 + 1):
        gathered = w[kk, np.minimum(kkp, m), np.minimum(a1 + a2g, m)]
        gathered = np.where(valid & (kkp <= m), gathered, 0.0)
        total += comb(n, 2 * a1) * float(np.sum(counts * gathered))
    # Prefactor 2^(n-2m-1); keep the power split to avoid underflow at m ~ 100.
    return total * 2.0 ** (n - m) * 2.0 ** (-m - 1)


def xtype_norm_scan(m_max: int, exact_below: int = 9) -> list[dict]:
    """Rows (m, n, f, F0, F1, monotone_ok) for 1 <= m <= m_max, even n.

    f is the halved-pair-count bound (the quantity the conjectured envelopes
    F0/F1 refer to); monotone_ok records whether f(m, n) <= f(m, n-2) + tol
    along the scan.  Small m use the exact rationals.
    """
    if m_max > 100:
        raise ValueError("norm scan is limited to m <= 100")
    rows: list[dict] = []
    tol = 1e-9
    for m in range(1, m_max + 1):
        prev = None
        for n in range(0, m + 1, 2):
            if m <= exact_below:
                f = float(xtype_norm_bound_exact(m, n)) / 2.0
            else:
                f = _xtype_norm_scan_value(m, n)
            monotone_ok = prev is None or f <= prev + tol
            rows.append(
                {
                    "m": m,
                    "n": n,
                    "f": f,
                    "F0": F0_bound(m),
                    "F1": F1_bound(m),
                    "monotone_ok": monotone_ok,
                }
            )
            prev = f
    return rows

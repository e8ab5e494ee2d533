"""The measurement channel, shadow collection, single-shot estimators,
aggregation, and the exact second-moment predictor.

A classical shadow is the pair (p, b): the sampled Majorana permutation and
the measured bitstring.  Estimators consume shadows lazily and delegate all
heavy numerics to the Pfaffian routines; no 2^m-dimensional object is ever
materialized outside the dense oracle.

Basis convention (fixed package-wide): the measurement basis labelled by a
permutation tuple p is the one whose measured commuting cliques are the
adjacent pairs of p, i.e. the Gamma's supported on the perfect matching
{{p_1, p_2}, {p_3, p_4}, ...}.  Concretely the basis rotation is W(p) =
U(p)^{-1} with U(p) gamma_j U(p)^dag = gamma_{p(j)}: the state is rotated to
W rho W^dag (covariance gather M[p, p]), the snapshot is W^dag |b><b| W, and
Gamma_mu is estimable iff p^{-1}(mu) is diagonal.  This is the convention
under which one representative permutation per matching reproduces the full
channel exactly.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .coefficients import (
    channel_eigenvalue,
    channel_eigenvalue_of_degree,
    inverse_diag_decomposition,
    moment_weight,
    xtype_decomposition,
)
from .ensembles import sample_matching_representative, sample_uniform_permutation
from .gaussian import (
    CovarianceState,
    SlaterDescriptor,
    _expect_diag_matrix,
    _expect_xtype_matrix,
    _measure_all_modes,
    basis_state,
    slater_inverse_preparation,
)
from .majorana import (
    CoefficientMap,
    coefficient_at_product,
    diag_matrix_element,
    invert_permutation,
    is_diagonal,
    permute,
    validate_permutation,
    validate_sequence,
)

__all__ = [
    "ShadowSample",
    "EstimatorConfig",
    "DataFormatError",
    "ChannelInversionError",
    "apply_channel",
    "apply_inverse",
    "collect_shadows",
    "snapshot_covariance",
    "estimate_gamma",
    "estimate_fidelity",
    "estimate_xtype",
    "aggregate",
    "standard_error",
    "predicted_second_moment",
    "shadow_norm_bound",
    "shadow_to_json",
    "shadow_from_json",
    "write_shadows",
    "read_shadows",
]

_CHUNK = 4096
_MOMENT_GUARD_M = 6
_IMAG_TOL = 1e-9


class DataFormatError(ValueError):
    """Malformed shadow records or state files."""


class ChannelInversionError(ValueError):
    """The channel is invertible only on the even-degree subspace."""


@dataclass(frozen=True)
class ShadowSample:
    """One classical shadow: permutation p (1-based, length 2m) and outcome bits."""

    m: int
    perm: tuple[int, ...]
    bits: str

    def __post_init__(self) -> None:
        if len(self.perm) != 2 * self.m or len(self.bits) != self.m:
            raise DataFormatError(f"inconsistent shadow record for m={self.m}")
        validate_permutation(self.perm)
        if any(ch not in "01" for ch in self.bits):
            raise DataFormatError(f"invalid bits {self.bits!r}")


@dataclass(frozen=True)
class EstimatorConfig:
    """Aggregation policy: sample mean, or median of `batches` batch means."""

    aggregation: str = "mean"
    batches: int = 1

    def __post_init__(self) -> None:
        if self.aggregation not in ("mean", "median_of_means"):
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if self.batches < 1:
            raise ValueError("batches must be >= 1")
        if self.aggregation == "median_of_means" and self.batches % 2 == 0:
            raise ValueError("median-of-means needs an odd batch count")


# ---------------------------------------------------------------------------
# The channel on coefficient maps.
# ---------------------------------------------------------------------------


def apply_channel(a: CoefficientMap) -> CoefficientMap:
    """Scale each degree-2k coefficient by the channel eigenvalue; odd degrees vanish."""
    entries = {}
    for seq, coeff in a.entries.items():
        lam = channel_eigenvalue_of_degree(a.m, len(seq))
        if lam != 0:
            entries[seq] = coeff * float(lam)
    return CoefficientMap(m=a.m, entries=entries)


def apply_inverse(a: CoefficientMap) -> CoefficientMap:
    """Inverse channel on even-supported maps."""
    entries = {}
    for seq, coeff in a.entries.items():
        if len(seq) % 2:
            raise ChannelInversionError(f"non-invertible on odd-degree key {seq}")
        entries[seq] = coeff / float(channel_eigenvalue(a.m, len(seq) // 2))
    return CoefficientMap(m=a.m, entries=entries)


# ---------------------------------------------------------------------------
# Shadow collection.
# ---------------------------------------------------------------------------


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(chunk,)))


def _collect_chunk(
    matrix: np.ndarray, m: int, count: int, ensemble: str, seed: int, chunk: int
) -> list[ShadowSample]:
    rng = _chunk_rng(seed, chunk)
    out = []
    for _ in range(count):
        if ensemble == "full":
            p = sample_uniform_permutation(m, rng)
        else:
            p = sample_matching_representative(m, rng)
        p0 = np.asarray(p) - 1
        # cov(W rho W^dag) with W = U(p)^{-1}: entry [j, k] = M[p(j), p(k)].
        rotated = matrix[np.ix_(p0, p0)].copy()
        bits = _measure_all_modes(rotated, rng)
        out.append(ShadowSample(m=m, perm=p, bits=bits))
    return out


def collect_shadows(
    state: CovarianceState,
    count: int,
    ensemble: str = "full",
    seed: int = 0,
    threads: int = 1,
) -> list[ShadowSample]:
    """Measure `count` shadows of the state in random bases.

    Deterministic given the seed: samples are generated in fixed chunks with
    per-chunk derived RNG streams, so the output is identical for any thread
    count.
    """
    if ensemble not in ("full", "matchings"):
        raise ValueError(f"unknown ensemble {ensemble!r}")
    if count < 0:
        raise ValueError("count must be >= 0")
    chunks = [
        (ci, min(_CHUNK, count - ci * _CHUNK)) for ci in range((count + _CHUNK - 1) // _CHUNK)
    ]
    args = [(state.matrix, state.m, c, ensemble, seed, ci) for ci, c in chunks]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda a: _collect_chunk(*a), args))
    else:
        parts = [_collect_chunk(*a) for a in args]
    return [s for part in parts for s in part]


def snapshot_covariance(sample: ShadowSample) -> np.ndarray:
    """Covariance of the snapshot W(p)^dag |b><b| W(p) = U(p)|b><b|U(p)^dag.

    Entry [j, k] = M_b[p^{-1}(j), p^{-1}(k)].
    """
    inv = np.argsort(np.asarray(sample.perm) - 1)
    return basis_state(sample.bits).matrix[np.ix_(inv, inv)]


# ---------------------------------------------------------------------------
# Single-shot estimators.
# ---------------------------------------------------------------------------


def estimate_gamma(sample: ShadowSample, mu: Sequence[int]) -> float:
    """Single-shot estimate of <Gamma_mu>.

    Zero unless the basis image p^{-1}(mu) is diagonal (mu supported on the
    measured matching), else eigenvalue^-1 * sign * (-1)^{b . bin(image)}.
    """
    mu = validate_sequence(sample.m, tuple(mu))
    if len(mu) % 2:
        raise ValueError("Gamma estimator requires an even-degree sequence")
    image, sign = permute(invert_permutation(sample.perm), mu)
    if not is_diagonal(image):
        return 0.0
    lam = channel_eigenvalue(sample.m, len(mu) // 2)
    return sign * diag_matrix_element(sample.m, image, sample.bits) / float(lam)


def _real_or_raise(value: complex, context: str) -> float:
    if abs(value.imag) > _IMAG_TOL * max(1.0, abs(value.real)):
        raise ArithmeticError(
            f"{context}: imaginary residue {value.imag} exceeds tolerance; "
            "phase-convention fault"
        )
    return value.real


def estimate_fidelity(sample: ShadowSample, target: SlaterDescriptor) -> float:
    """Single-shot estimate of Tr[|psi><psi| rho] for a pure Gaussian target.

    Sum of m+1 diagonal-kernel Gaussian traces against the V^dag-rotated
    snapshot, with the inverse-channel DFT coefficients.
    """
    if sample.m != target.m:
        raise ValueError("sample and target mode counts differ")
    deco = inverse_diag_decomposition(sample.m)
    rt = slater_inverse_preparation(target)
    rotated = rt @ snapshot_covariance(sample) @ rt.T
    total = 0.0 + 0.0j
    for j, cj in enumerate(deco.c):
        z = np.full(sample.m, deco.omega ** (-j), dtype=complex)
        total += cj * _expect_diag_matrix(rotated, z)
    return _real_or_raise(total, "fidelity estimator")


def estimate_xtype(sample: ShadowSample, target: SlaterDescriptor) -> complex:
    """Single-shot estimate of Tr[|0><psi| rho] for an even-n Slater target."""
    if sample.m != target.m:
        raise ValueError("sample and target mode counts differ")
    if target.n % 2:
        raise ValueError("X-type estimation requires a fixed, even particle number")
    deco = xtype_decomposition(target.m, target.n)
    rt = slater_inverse_preparation(target, number_preserving=True)
    rotated = rt @ snapshot_covariance(sample) @ rt.T
    total = 0.0 + 0.0j
    for j, cj in enumerate(deco.c):
        z = np.full(target.m - target.n, deco.omega ** (-j), dtype=complex)
        total += cj * _expect_xtype_matrix(rotated, target.n, z)
    return complex(total)


# ---------------------------------------------------------------------------
# Aggregation.
# ---------------------------------------------------------------------------


def aggregate(values: Iterable[float], config: EstimatorConfig = EstimatorConfig()) -> float:
    """Sample mean, or median of batch means over equal splits."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("cannot aggregate an empty stream")
    if config.batches > arr.size:
        raise ValueError("more batches than values")
    if config.aggregation == "mean":
        return float(np.mean(arr))
    splits = np.array_split(arr, config.batches)
    return float(np.median([np.mean(s) for s in splits]))


def standard_error(values: Iterable[float]) -> float:
    arr = np.asarray(list(values), dtype=float)
    if arr.size < 2:
        return float("inf")
    return float(np.std(arr, ddof=1) / np.sqrt(arr.size))


# ---------------------------------------------------------------------------
# Exact second-moment prediction (Theorem-2 style double sum).
# ---------------------------------------------------------------------------


def predicted_second_moment(h: CoefficientMap, rho: CoefficientMap) -> float:
    """E[hhat^2] = 2^m sum over even-intersection pairs of
    weight * h_mu h_mu' * (coefficient of rho against Gamma_mu Gamma_mu').
    """
    if h.m != rho.m:
        raise ValueError("mode counts differ")
    m = h.m
    if m > _MOMENT_GUARD_M:
        raise ValueError(f"dense moment prediction is limited to m <= {_MOMENT_GUARD_M}")
    if not h.is_even():
        raise ValueError("observable must be supported on even degrees")
    items = list(h.entries.items())
    total = 0.0
    for mu, hval in items:
        mu_set = set(mu)
        for mup, hpval in items:
            overlap = len(mu_set.intersection(mup))
            if overlap % 2:
                continue
            w = moment_weight(m, len(mu) // 2, len(mup) // 2, overlap // 2)
            if w == 0:
                continue
            total += float(w) * hval * hpval * coefficient_at_product(rho, mu, mup)
    return 2**m * total


def shadow_norm_bound(h: CoefficientMap) -> float:
    """Upper bound on the squared shadow norm: the same double sum with
    |h_mu| |h_mu'| and the worst-case coefficient 2^-m in place of rho's.
    """
    m = h.m
    if m > _MOMENT_GUARD_M:
        raise ValueError(f"dense norm bound is limited to m <= {_MOMENT_GUARD_M}")
    if not h.is_even():
        raise ValueError("observable must be supported on even degrees")
    items = list(h.entries.items())
    total = 0.0
    for mu, hval in items:
        mu_set = set(mu)
        for mup, hpval in items:
            overlap = len(mu_set.intersection(mup))
            if overlap % 2:
                continue
            w = moment_weight(m, len(mu) // 2, len(mup) // 2, overlap // 2)
            total += float(w) * abs(hval) * abs(hpval)
    return total


# ---------------------------------------------------------------------------
# JSONL shadow records.
# ---------------------------------------------------------------------------


def shadow_to_json(sample: ShadowSample) -> str:
    return json.dumps(
        {"bits": sample.bits, "m": sample.m, "perm": list(sample.perm)},
        sort_keys=True,
        separators=(",", ":"),
    )


def shadow_from_json(text: str) -> ShadowSample:
    try:
        data = json.loads(text)
        return ShadowSample(m=int(data["m"]), perm=tuple(data["perm"]), bits=str(data["bits"]))
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"malformed shadow record: {exc}") from exc


def write_shadows(stream: IO[str], samples: Iterable[ShadowSample]) -> int:
    count = 0
    for s in samples:
        stream.write(shadow_to_json(s) + "\n")
        count += 1
    return count


def read_shadows(stream: IO[str]) -> Iterator[ShadowSample]:
    """Parse a JSONL shadow stream, rejecting malformed lines with their number."""
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            yield shadow_from_json(line)
        except DataFormatError as exc:
            raise DataFormatError(f"line {lineno}: {exc}") from exc

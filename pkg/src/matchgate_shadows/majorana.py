"""Exact index algebra for Majorana monomials.

Conventions used throughout the package:

* Majorana indices are 1-based: an m-mode system carries gamma_1, ..., gamma_2m
  with gamma_{2i-1} = a_i + a_i^dag and gamma_{2i} = -i(a_i - a_i^dag).
* A strictly increasing index sequence mu = (mu_1 < ... < mu_k) labels the
  normalized monomial Gamma_mu = (-i)^{k(k-1)/2} gamma_{mu_1} ... gamma_{mu_k},
  which is Hermitian and unitary.  The empty sequence is the identity.
* The single-mode number operator satisfies Gamma_{(2i-1, 2i)} = Z_i, i.e.
  <Gamma_{(2i-1,2i)}> = 1 - 2<n_i>.
* Phases are tracked exactly as integer powers of i (exponent mod 4), never as
  accumulated floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Sequence

__all__ = [
    "InvalidSequenceError",
    "PHASES",
    "normalize",
    "validate_sequence",
    "is_diagonal",
    "bin_of",
    "seq_of",
    "seqx_of",
    "diag_matrix_element",
    "gamma_product",
    "gamma_product_exponent",
    "permute",
    "identity_permutation",
    "invert_permutation",
    "compose_permutations",
    "validate_permutation",
    "all_sequences",
    "even_sequences",
    "CoefficientMap",
    "coefficient_at_product",
]

# i**e for e = 0, 1, 2, 3; these complex values are exact in IEEE arithmetic.
PHASES = (1 + 0j, 1j, -1 + 0j, -1j)

_DENSE_ENUMERATION_LIMIT = 8


class InvalidSequenceError(ValueError):
    """Raised for index sequences that violate the Majorana conventions."""


def normalize(indices: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Sort a sequence of distinct Majorana indices, tracking the sign.

    Distinct Majorana operators anticommute, so gamma_{raw} equals
    sign * gamma_{sorted} with sign the parity of the sorting permutation.

    Returns (sorted_indices, sign).
    """
    seq = tuple(indices)
    if len(set(seq)) != len(seq):
        raise InvalidSequenceError(f"duplicate indices in {seq}")
    inversions = 0
    for i, j in combinations(range(len(seq)), 2):
        if seq[i] > seq[j]:
            inversions += 1
    return tuple(sorted(seq)), (-1) ** (inversions % 2)


def validate_sequence(m: int, seq: Sequence[int]) -> tuple[int, ...]:
    """Check that seq is strictly increasing with entries in [1, 2m]."""
    seq = tuple(seq)
    if any(seq[i] >= seq[i + 1] for i in range(len(seq) - 1)):
        raise InvalidSequenceError(f"{seq} is not strictly increasing")
    if seq and (seq[0] < 1 or seq[-1] > 2 * m):
        raise InvalidSequenceError(f"{seq} has entries outside [1, {2 * m}]")
    return seq


def is_diagonal(seq: Sequence[int]) -> bool:
    """True iff seq is a union of adjacent pairs (2i-1, 2i).

    Such sequences label the Majorana monomials that are diagonal in the
    computational basis (products of Z_i).  The empty sequence qualifies.
    """
    seq = tuple(seq)
    if len(seq) % 2:
        return False
    return all(seq[i] % 2 == 1 and seq[i + 1] == seq[i] + 1 for i in range(0, len(seq), 2))


def bin_of(m: int, seq: Sequence[int]) -> str:
    """Bitstring of a diagonal sequence: x_i = 1 iff the pair (2i-1, 2i) occurs."""
    seq = tuple(seq)
    if not is_diagonal(seq):
        raise InvalidSequenceError(f"{seq} is not diagonal")
    validate_sequence(m, seq)
    modes = {(seq[i] + 1) // 2 for i in range(0, len(seq), 2)}
    return "".join("1" if i + 1 in modes else "0" for i in range(m))


def seq_of(bits: str) -> tuple[int, ...]:
    """Inverse of :func:`bin_of`: the diagonal sequence of a bitstring."""
    out: list[int] = []
    for i, ch in enumerate(bits):
        if ch == "1":
            out.extend((2 * i + 1, 2 * i + 2))
        elif ch != "0":
            raise InvalidSequenceError(f"invalid bitstring {bits!r}")
    return tuple(out)


def seqx_of(bits: str) -> tuple[int, ...]:
    """One index per mode: mode i contributes gamma_{2i-1+x_i}."""
    out: list[int] = []
    for i, ch in enumerate(bits):
        if ch not in "01":
            raise InvalidSequenceError(f"invalid bitstring {bits!r}")
        out.append(2 * i + 1 + int(ch))
    return tuple(out)


def diag_matrix_element(m: int, seq: Sequence[int], bits: str) -> int:
    """<b|Gamma_seq|b> = (-1)^{b . bin(seq)} for diagonal seq."""
    if len(bits) != m:
        raise InvalidSequenceError(f"bitstring {bits!r} has length != {m}")
    pattern = bin_of(m, seq)
    overlap = sum(1 for x, y in zip(pattern, bits) if x == "1" and y == "1")
    return (-1) ** (overlap % 2)


def gamma_product_exponent(a: Sequence[int], b: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Gamma_a Gamma_b = i**e * Gamma_c with c the symmetric difference.

    Returns (c, e) with e in {0, 1, 2, 3}.  Exact: the exponent combines the
    anticommutation swaps needed to interleave-sort the concatenation with the
    (-i)^{k(k-1)/2} normalizations of the three monomials involved.
    """
    a = tuple(a)
    b = tuple(b)
    merged = list(a) + list(b)
    inversions = 0
    for i, j in combinations(range(len(merged)), 2):
        if merged[i] > merged[j]:
            inversions += 1
    merged.sort()
    out: list[int] = []
    i = 0
    while i < len(merged):
        if i + 1 < len(merged) and merged[i] == merged[i + 1]:
            i += 2  # gamma^2 = identity, no sign
        else:
            out.append(merged[i])
            i += 1
    k, l, r = len(a), len(b), len(out)
    exponent = (-(k * (k - 1) // 2) - (l * (l - 1) // 2) + r * (r - 1) // 2 + 2 * inversions) % 4
    return tuple(out), exponent


def gamma_product(a: Sequence[int], b: Sequence[int]) -> tuple[tuple[int, ...], complex]:
    """Product of two Majorana monomials: Gamma_a Gamma_b = phase * Gamma_c.

    The phase is a unit in {1, -1, 1j, -1j}, exact.
    """
    seq, exponent = gamma_product_exponent(a, b)
    return seq, PHASES[exponent]


def identity_permutation(m: int) -> tuple[int, ...]:
    return tuple(range(1, 2 * m + 1))


def validate_permutation(p: Sequence[int]) -> tuple[int, ...]:
    p = tuple(p)
    if len(p) % 2 or sorted(p) != list(range(1, len(p) + 1)):
        raise InvalidSequenceError(f"{p} is not a permutation of [2m]")
    return p


def invert_permutation(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, v in enumerate(p):
        inv[v - 1] = i + 1
    return tuple(inv)


def compose_permutations(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """(p . q)(x) = p(q(x))."""
    return tuple(p[q[i] - 1] for i in range(len(p)))


def permute(p: Sequence[int], seq: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Image of Gamma_seq under the mode permutation p.

    U(p) Gamma_seq U(p)^dag = sign * Gamma_out with out sorted ascending.
    """
    raw = tuple(p[i - 1] for i in seq)
    return normalize(raw)


def all_sequences(m: int, degrees: Iterable[int] | None = None) -> Iterator[tuple[int, ...]]:
    """All strictly increasing index sequences over [2m], optionally by degree.

    Dense enumeration; guarded to m <= 8 (4^m sequences).
    """
    if m > _DENSE_ENUMERATION_LIMIT:
        raise ValueError(f"dense sequence enumeration is limited to m <= {_DENSE_ENUMERATION_LIMIT}")
    if degrees is None:
        degrees = range(2 * m + 1)
    for k in degrees:
        yield from combinations(range(1, 2 * m + 1), k)


def even_sequences(m: int) -> Iterator[tuple[int, ...]]:
    return all_sequences(m, degrees=range(0, 2 * m + 1, 2))


@dataclass(frozen=True)
class CoefficientMap:
    """Sparse operator in the orthonormal Majorana basis: A = sum_mu coeff * Gamma_mu.

    A normalized density operator has entries[()] == 2**-m.  Hermitian
    operators have real coefficients, which is all this package needs.
    """

    m: int
    entries: dict[tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for seq in self.entries:
            validate_sequence(self.m, seq)

    def coefficient(self, seq: Sequence[int]) -> float:
        return self.entries.get(tuple(seq), 0.0)

    def degrees(self) -> set[int]:
        return {len(seq) for seq in self.entries}

    def is_even(self) -> bool:
        return all(len(seq) % 2 == 0 for seq in self.entries)


def coefficient_at_product(rho: CoefficientMap, a: Sequence[int], b: Sequence[int]) -> float:
    """Coefficient of rho against Gamma_a Gamma_b, i.e. 2^-m Tr[Gamma_a Gamma_b rho].

    Requires the product phase to be real (guaranteed when a, b are even with
    even intersection); a +/-i phase raises, since the would-be coefficient of
    a Hermitian rho against a non-Hermitian product is not a real number.
    """
    seq, exponent = gamma_product_exponent(a, b)
    if exponent % 2:
        raise InvalidSequenceError(
            f"Gamma_{tuple(a)} Gamma_{tuple(b)} has imaginary phase; "
            "need even sequences with even intersection"
        )
    sign = 1 if exponent == 0 else -1
    return sign * rho.coefficient(seq)

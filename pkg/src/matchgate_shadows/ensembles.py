"""Measurement-basis sampling: uniform permutations of [2m] and the reduced
ensemble of one representative permutation per perfect matching.

Both ensembles induce the exact same measurement channel; estimators never
need to know which one produced a sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .majorana import validate_permutation

__all__ = [
    "PerfectMatching",
    "matching_of",
    "representative_permutation",
    "sample_uniform_permutation",
    "sample_matching_representative",
    "enumerate_matchings",
    "matching_count",
    "ENSEMBLES",
]

_ENUMERATION_LIMIT = 8

ENSEMBLES = ("full", "matchings")


@dataclass(frozen=True)
class PerfectMatching:
    """Partition of [2m] into m unordered pairs, stored canonically:
    each pair sorted, pairs sorted by smallest element."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        flat = [x for pair in self.pairs for x in pair]
        if sorted(flat) != list(range(1, len(flat) + 1)):
            raise ValueError(f"{self.pairs} is not a perfect matching of [2m]")
        canonical = tuple(sorted(tuple(sorted(p)) for p in self.pairs))
        object.__setattr__(self, "pairs", canonical)

    @property
    def m(self) -> int:
        return len(self.pairs)


def matching_of(p: Sequence[int]) -> PerfectMatching:
    """PM(p) = {{p_{2i-1}, p_{2i}} : i in [m]}, adjacent elements paired up."""
    p = validate_permutation(p)
    return PerfectMatching(tuple((p[2 * i], p[2 * i + 1]) for i in range(len(p) // 2)))


def representative_permutation(matching: PerfectMatching) -> tuple[int, ...]:
    """Canonical representative: pairs in increasing order, each sorted."""
    return tuple(x for pair in matching.pairs for x in pair)


def sample_uniform_permutation(m: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform over all (2m)! permutations (Fisher-Yates via the generator)."""
    return tuple(int(x) + 1 for x in rng.permutation(2 * m))


def sample_matching_representative(m: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform over the (2m-1)!! perfect matchings, returned canonically.

    Repeatedly pairs the smallest unmatched element with a uniformly random
    other unmatched element, which is exactly uniform over matchings.
    """
    unmatched = list(range(1, 2 * m + 1))
    pairs = []
    while unmatched:
        first = unmatched.pop(0)
        partner = unmatched.pop(int(rng.integers(len(unmatched))))
        pairs.append((first, partner))
    return representative_permutation(PerfectMatching(tuple(pairs)))


def enumerate_matchings(m: int) -> list[PerfectMatching]:
    """All (2m-1)!! perfect matchings of [2m]; guarded against blowup."""
    if m > _ENUMERATION_LIMIT:
        raise ValueError(f"matching enumeration is limited to m <= {_ENUMERATION_LIMIT}")

    def rec(remaining: tuple[int, ...]) -> Iterator[tuple[tuple[int, int], ...]]:
        if not remaining:
            yield ()
            return
        first = remaining[0]
        for idx in range(1, len(remaining)):
            partner = remaining[idx]
            rest = remaining[1:idx] + remaining[idx + 1 :]
            for tail in rec(rest):
                yield ((first, partner),) + tail

    return [PerfectMatching(pairs) for pairs in rec(tuple(range(1, 2 * m + 1)))]


def matching_count(m: int) -> int:
    """(2m-1)!! = (2m)! / (2^m m!)."""
    out = 1
    for x in range(2 * m - 1, 0, -2):
        out *= x
    return out

"""Multiindex helpers shared by the jet, polynomial and interpolation code."""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Sequence

MultiIndex = tuple


def grlex_key(alpha: Sequence[int]):
    # Larger total degree first breaks ties; among equal sums a larger
    # leftmost differing entry wins, which is plain tuple order.
    return (sum(alpha), tuple(alpha))


def box(bound: Sequence[int]) -> list[tuple[int, ...]]:
    """All multiindices ``gamma <= bound`` in ascending grlex order."""
    ranges = [range(b + 1) for b in bound]
    return sorted(itertools.product(*ranges), key=grlex_key)


def simplex(n: int, degree: int) -> list[tuple[int, ...]]:
    """All multiindices of length ``n`` with total degree ``<= degree``, grlex order."""
    return [g for g in box((degree,) * n) if sum(g) <= degree]


def leq(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def factorial(alpha: Iterable[int]) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def binom(alpha: Sequence[int], beta: Sequence[int]) -> int:
    out = 1
    for a, b in zip(alpha, beta):
        out *= math.comb(a, b)
    return out


def sub(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


def unit(n: int, i: int, k: int = 1) -> tuple[int, ...]:
    return tuple(k if j == i else 0 for j in range(n))

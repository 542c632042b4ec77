"""Multi-index arithmetic and decomposition into parts with multiplicities.

A multi-index is a plain tuple of naturals.  A decomposition of alpha is a
representation alpha = sum_k m_k * p_k into distinct nonzero parts p_k
(strictly increasing in the lexicographic order) with positive
multiplicities m_k.  For d = 1 the decompositions of (n) are exactly the
integer partitions of n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .numerics import BigNat

MultiIndex = tuple[int, ...]


def mi_order(alpha: MultiIndex) -> int:
    """|alpha| = sum of components."""
    return sum(alpha)


def mi_add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def mi_sub(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    out = tuple(x - y for x, y in zip(a, b, strict=True))
    if any(x < 0 for x in out):
        raise ValueError(f"{b} exceeds {a} componentwise")
    return out


def mi_leq(a: MultiIndex, b: MultiIndex) -> bool:
    """Componentwise partial order a <= b."""
    return all(x <= y for x, y in zip(a, b, strict=True))


def mi_scale(m: int, a: MultiIndex) -> MultiIndex:
    return tuple(m * x for x in a)


def mi_factorial(alpha: MultiIndex) -> BigNat:
    """alpha! = prod alpha_i!"""
    out = 1
    for x in alpha:
        out *= math.factorial(x)
    return out


def mi_binomial(alpha: MultiIndex, beta: MultiIndex) -> BigNat:
    """binom(alpha, beta) = prod binom(alpha_i, beta_i); 0 unless beta <= alpha."""
    if not mi_leq(beta, alpha):
        return 0
    out = 1
    for a, b in zip(alpha, beta):
        out *= math.comb(a, b)
    return out


def mi_range(bound: MultiIndex) -> Iterator[MultiIndex]:
    """All multi-indices beta with beta <= bound componentwise."""
    if len(bound) == 0:
        yield ()
        return
    head, rest = bound[0], bound[1:]
    for h in range(head + 1):
        for tail in mi_range(rest):
            yield (h,) + tail


def mi_of_order(d: int, n: int) -> Iterator[MultiIndex]:
    """All multi-indices in N^d with |alpha| = n, lexicographically."""
    if d == 1:
        yield (n,)
        return
    for h in range(n, -1, -1):
        for tail in mi_of_order(d - 1, n - h):
            yield (h,) + tail


@dataclass(frozen=True)
class Decomposition:
    """alpha = sum_k multiplicities[k] * parts[k], parts strictly increasing."""

    parts: tuple[MultiIndex, ...]
    multiplicities: tuple[int, ...]
    target: MultiIndex

    def __post_init__(self) -> None:
        if len(self.parts) != len(self.multiplicities):
            raise ValueError("parts and multiplicities must have equal length")
        if any(m < 1 for m in self.multiplicities):
            raise ValueError("multiplicities must be positive")
        if any(self.parts[i] >= self.parts[i + 1] for i in range(len(self.parts) - 1)):
            raise ValueError("parts must be strictly increasing lexicographically")
        total = tuple(
            sum(m * p[i] for p, m in zip(self.parts, self.multiplicities))
            for i in range(len(self.target))
        )
        if total != self.target:
            raise ValueError(f"decomposition sums to {total}, not {self.target}")

    @property
    def total_multiplicity(self) -> int:
        """m = m_1 + ... + m_s."""
        return sum(self.multiplicities)

    @property
    def num_parts(self) -> int:
        return len(self.parts)


def enumerate_decompositions(alpha: MultiIndex) -> Iterator[Decomposition]:
    """Stream every decomposition of alpha exactly once.

    Recursive descent over candidate parts in decreasing lexicographic
    order with remaining-budget pruning; each emitted decomposition has
    its parts sorted increasingly, and the overall emission order is
    deterministic.
    """
    if mi_order(alpha) < 1:
        raise ValueError("enumerate_decompositions requires |alpha| >= 1")
    candidates = sorted(
        (p for p in mi_range(alpha) if mi_order(p) > 0), reverse=True
    )

    def descend(
        remaining: MultiIndex, start: int, acc: list[tuple[MultiIndex, int]]
    ) -> Iterator[Decomposition]:
        if mi_order(remaining) == 0:
            chosen = list(reversed(acc))
            yield Decomposition(
                parts=tuple(p for p, _ in chosen),
                multiplicities=tuple(m for _, m in chosen),
                target=alpha,
            )
            return
        for idx in range(start, len(candidates)):
            part = candidates[idx]
            if not mi_leq(part, remaining):
                continue
            mult = 1
            left = mi_sub(remaining, part)
            while True:
                acc.append((part, mult))
                yield from descend(left, idx + 1, acc)
                acc.pop()
                if not mi_leq(part, left):
                    break
                left = mi_sub(left, part)
                mult += 1

    yield from descend(alpha, 0, [])


def composition_multinomial_sum(n: int) -> BigNat:
    """Sum of m!/(m_1! ... m_n!) over all (m_1..m_n) with sum k*m_k = n.

    Here m = m_1 + ... + m_n.  The value equals 2^(n-1) exactly; the sum
    is evaluated by exhaustive enumeration, not from the closed form.
    """
    if n < 1:
        raise ValueError("composition_multinomial_sum requires n >= 1")
    total = 0

    def descend(k: int, remaining: int, mults: list[int]) -> None:
        nonlocal total
        if k == 0:
            if remaining == 0:
                m = sum(mults)
                term = math.factorial(m)
                for mk in mults:
                    term //= math.factorial(mk)
                total += term
            return
        for mk in range(remaining // k + 1):
            mults.append(mk)
            descend(k - 1, remaining - k * mk, mults)
            mults.pop()

    descend(n, n, [])
    return total


def decomposition_census(alpha: MultiIndex) -> tuple[BigNat, BigNat, bool]:
    """(count of decompositions, bound (1+|alpha|)^(d+2), count <= bound)."""
    if mi_order(alpha) < 1:
        raise ValueError("decomposition_census requires |alpha| >= 1")
    count = sum(1 for _ in enumerate_decompositions(alpha))
    bound = (1 + mi_order(alpha)) ** (len(alpha) + 2)
    return count, bound, count <= bound

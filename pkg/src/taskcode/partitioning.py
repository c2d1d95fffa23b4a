"""Budgeted set partitions.

Two exact combinatorial facts drive the encoder constructions: the reciprocal
block-cardinality sum of any partition equals its block count, and any family
of per-element cardinality caps lambda(x) admits a partition whose block sizes
respect the caps while the block count stays within an explicit bound.  Both
are kept in exact rational arithmetic so downstream checks are float-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .probability import Alphabet


@dataclass(frozen=True)
class Budget:
    """Per-symbol block-size caps; math.inf means "no cap".

    `mu` is the exact rational sum of reciprocal caps (1/inf counted as 0).
    """

    alphabet: Alphabet
    caps: tuple[int | float, ...]

    def __post_init__(self) -> None:
        if len(self.caps) != len(self.alphabet):
            raise ValueError("one cap per symbol required")
        for c in self.caps:
            if c == math.inf:
                continue
            if not isinstance(c, int) or c < 1:
                raise ValueError(f"caps must be integers >= 1 or inf, got {c!r}")

    @property
    def mu(self) -> Fraction:
        return sum((Fraction(1, c) for c in self.caps if c != math.inf), Fraction(0))


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks covering an alphabet, in a fixed block order."""

    alphabet: Alphabet
    blocks: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        seen: dict[str, int] = {}
        for bi, block in enumerate(self.blocks):
            if not block:
                raise ValueError("blocks must be nonempty")
            for s in block:
                if s in seen:
                    raise ValueError(f"symbol {s!r} appears in two blocks")
                seen[s] = bi
        if set(seen) != set(self.alphabet.symbols):
            raise ValueError("blocks must cover the alphabet exactly")
        object.__setattr__(self, "_block_of", seen)

    @property
    def block_of(self) -> tuple[int, ...]:
        lookup = self._block_of  # type: ignore[attr-defined]
        return tuple(lookup[s] for s in self.alphabet.symbols)

    def block_index(self, symbol: str) -> int:
        return self._block_of[symbol]  # type: ignore[attr-defined]

    def L(self, symbol: str) -> int:
        """Cardinality of the block containing `symbol`."""
        return len(self.blocks[self.block_index(symbol)])

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def to_json(self) -> dict:
        return {"blocks": [list(b) for b in self.blocks]}


def partition_identity(part: Partition) -> Fraction:
    """Exact value of sum_x 1/L(x); always equals the number of blocks."""
    return sum(
        (Fraction(1, part.L(s)) for s in part.alphabet.symbols), Fraction(0)
    )


def build_budget_partition(b: Budget) -> Partition:
    """Partition the alphabet so that every block size respects the caps.

    Symbols are processed in nondecreasing cap order (ties broken by alphabet
    index).  Symbols whose cap is at least the alphabet size form one initial
    block (kept in alphabet order); the rest are peeled off greedily, each new
    block taking cap-of-its-smallest-member symbols, or everything left when
    that already fits.  The result satisfies L(x) <= min(cap(x), |alphabet|)
    and uses at most subset_count_bound(mu, |alphabet|) blocks.
    """
    k = len(b.alphabet)
    order = sorted(range(k), key=lambda i: (b.caps[i], i))
    uncapped = [i for i in range(k) if b.caps[i] >= k]
    rest = [i for i in order if b.caps[i] < k]

    blocks: list[tuple[str, ...]] = []
    if uncapped:
        blocks.append(tuple(b.alphabet[i] for i in uncapped))
    pos = 0
    while pos < len(rest):
        head_cap = int(b.caps[rest[pos]])
        remaining = len(rest) - pos
        take = remaining if remaining <= head_cap else head_cap
        blocks.append(tuple(b.alphabet[i] for i in rest[pos : pos + take]))
        pos += take
    return Partition(b.alphabet, tuple(blocks))


def subset_count_bound(mu: Fraction | float, alphabet_size: int) -> int:
    """min over alpha>1 of floor(alpha*mu + log_alpha(size) + 2).

    Minimized by golden section over t = log2(alpha) in [1e-9, 64], with the
    endpoints and alpha = 2 evaluated explicitly; the floor of the best value
    found is returned.
    """
    if mu < 0 or alphabet_size < 1:
        raise ValueError("requires mu >= 0 and alphabet_size >= 1")
    m = float(mu)
    logk = math.log2(alphabet_size)

    def g(t: float) -> float:
        penalty = logk / t if logk > 0 else 0.0
        return m * 2.0**t + penalty + 2.0

    lo, hi = 1e-9, 64.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, bnd = lo, hi
    c = bnd - invphi * (bnd - a)
    d = a + invphi * (bnd - a)
    for _ in range(120):
        if g(c) < g(d):
            bnd = d
        else:
            a = c
        c = bnd - invphi * (bnd - a)
        d = a + invphi * (bnd - a)
    best = min(g((a + bnd) / 2.0), g(1.0), g(lo), g(hi))
    return math.floor(best)

"""Distribution-oblivious block encoders built from the method of types.

The block alphabet X^n splits into type classes (tuples sharing an empirical
histogram); each class is cut into contiguous lexicographic-rank chunks whose
size shrinks exponentially with the rate.  Nothing here depends on the source
law, yet the fiber-size moment under any IID law stays within an explicit
penalty of the matched construction.  Sequences inside a type class are
addressed by exact big-integer ranking so fibers never require materializing
the full tuple space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .encoders import TaskEncoder
from .measures import renyi_entropy
from .probability import (
    Alphabet,
    EnumerationCapError,
    InfeasibleError,
    JointPmf,
    Pmf,
    max_tuples,
    tuple_alphabet,
)


def floor_pow2(exponent: float) -> int:
    """floor(2**exponent) with a tiny relative nudge against float fuzz."""
    value = 2.0**exponent
    return max(1, int(value * (1.0 + 1e-12)))


@dataclass(frozen=True)
class TypeDescriptor:
    """Empirical histogram of an n-tuple over an alphabet."""

    alphabet: Alphabet
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.counts) != len(self.alphabet):
            raise ValueError("one count per symbol required")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative")

    @property
    def n(self) -> int:
        return sum(self.counts)

    def class_size(self) -> int:
        return multinomial(self.counts)


@dataclass(frozen=True)
class BlockCodeParams:
    """Block length and rate; the description budget is floor(2**(n*rate))."""

    n: int
    rate: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("block length must be >= 1")
        if self.rate < 0:
            raise ValueError("rate must be nonnegative")

    @property
    def M(self) -> int:
        return floor_pow2(self.n * self.rate)


def multinomial(counts: Sequence[int]) -> int:
    """Exact multinomial coefficient (sum counts)! / prod counts_i!."""
    total = sum(counts)
    out = 1
    for c in counts:
        out *= math.comb(total, c)
        total -= c
    return out


def enumerate_types(n: int, alphabet: Alphabet) -> list[TypeDescriptor]:
    """All compositions of n into |alphabet| parts, lexicographic order."""
    k = len(alphabet)
    count = math.comb(n + k - 1, k - 1)
    if count > max_tuples():
        raise EnumerationCapError(f"{count} types exceeds cap {max_tuples()}")
    out: list[TypeDescriptor] = []

    def rec(prefix: list[int], remaining: int, slots: int) -> None:
        if slots == 1:
            out.append(TypeDescriptor(alphabet, tuple(prefix + [remaining])))
            return
        for c in range(remaining + 1):
            rec(prefix + [c], remaining - c, slots - 1)

    rec([], n, k)
    return out


def rank_in_class(seq: Sequence[int], counts: Sequence[int]) -> int:
    """Lexicographic rank of `seq` among the tuples with histogram `counts`."""
    rem = list(counts)
    rank = 0
    for sym in seq:
        for t in range(sym):
            if rem[t] > 0:
                rem[t] -= 1
                rank += multinomial(rem)
                rem[t] += 1
        if rem[sym] <= 0:
            raise ValueError("sequence does not match the histogram")
        rem[sym] -= 1
    return rank


def unrank_in_class(counts: Sequence[int], rank: int) -> tuple[int, ...]:
    """Inverse of rank_in_class."""
    rem = list(counts)
    n = sum(counts)
    out: list[int] = []
    for _ in range(n):
        for t in range(len(rem)):
            if rem[t] == 0:
                continue
            rem[t] -= 1
            below = multinomial(rem)
            if rank < below:
                out.append(t)
                break
            rank -= below
            rem[t] += 1
        else:
            raise ValueError("rank out of range for this histogram")
    return tuple(out)


def universal_penalty(n: int, alphabet_size: int, rho: float) -> float:
    """Rate penalty (1 + (1 + 1/rho) |X| log2(n+1)) / n of the universal encoder."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (1.0 + (1.0 + 1.0 / rho) * alphabet_size * math.log2(n + 1)) / n


def universal_moment_bound(n: int, rate: float, rho: float, p: Pmf) -> float:
    """1 + 2**(-n rho (rate - H - penalty)): the moment guarantee under law p."""
    gap = rate - renyi_entropy(p, rho) - universal_penalty(n, len(p.alphabet), rho)
    return 1.0 + 2.0 ** (-n * rho * gap)


def _chunking(sizes: list[int], n: int, rate: float, delta: float) -> tuple[list[int], list[int]]:
    """Per-class chunk caps and counts for the given construction slack delta."""
    scale = 2.0 ** (-n * (rate - delta))
    caps = [max(1, math.ceil(s * scale)) for s in sizes]
    counts = [-(-s // c) for s, c in zip(sizes, caps)]
    return caps, counts


@dataclass(frozen=True, eq=False)
class UniversalEncoder:
    """Source-oblivious block encoder over n-tuples.

    Descriptions are numbered 1..total_descriptions, type classes in
    lexicographic type order, chunks in lexicographic rank order within each
    class.
    """

    alphabet: Alphabet
    n: int
    rate: float
    M: int
    types: tuple[TypeDescriptor, ...]
    chunk_caps: tuple[int, ...]
    chunk_counts: tuple[int, ...]

    def __post_init__(self) -> None:
        offsets = [0]
        for c in self.chunk_counts:
            offsets.append(offsets[-1] + c)
        object.__setattr__(self, "_offsets", tuple(offsets))
        object.__setattr__(
            self, "_type_index", {t.counts: i for i, t in enumerate(self.types)}
        )

    @property
    def total_descriptions(self) -> int:
        return self._offsets[-1]  # type: ignore[attr-defined]

    def type_of(self, seq: Sequence[int]) -> int:
        counts = [0] * len(self.alphabet)
        for s in seq:
            counts[s] += 1
        return self._type_index[tuple(counts)]  # type: ignore[attr-defined]

    def assign_index(self, seq: Sequence[int]) -> int:
        """1-based description index of a tuple of symbol indices."""
        ti = self.type_of(seq)
        r = rank_in_class(seq, self.types[ti].counts)
        return self._offsets[ti] + r // self.chunk_caps[ti] + 1  # type: ignore[attr-defined]

    def assign_symbols(self, symbols: Sequence[str]) -> int:
        return self.assign_index([self.alphabet.index(s) for s in symbols])

    def fiber_size(self, m: int) -> int:
        """Cardinality of description m's fiber (1-based m)."""
        offsets = self._offsets  # type: ignore[attr-defined]
        if not 1 <= m <= self.total_descriptions:
            return 0
        ti = int(np.searchsorted(offsets, m - 1, side="right")) - 1
        chunk = (m - 1) - offsets[ti]
        size = self.types[ti].class_size()
        cap = self.chunk_caps[ti]
        if chunk < size // cap:
            return cap
        return size - (size // cap) * cap

    def fiber(self, m: int) -> list[tuple[int, ...]]:
        """Members of description m's fiber, as tuples of symbol indices."""
        offsets = self._offsets  # type: ignore[attr-defined]
        ti = int(np.searchsorted(offsets, m - 1, side="right")) - 1
        chunk = (m - 1) - offsets[ti]
        counts = self.types[ti].counts
        cap = self.chunk_caps[ti]
        size = self.types[ti].class_size()
        return [
            unrank_in_class(counts, r)
            for r in range(chunk * cap, min((chunk + 1) * cap, size))
        ]

    def fiber_sizes_by_type(self) -> list[tuple[int, int, int]]:
        """(full chunk count, cap, remainder size) per type class."""
        out = []
        for t, cap in zip(self.types, self.chunk_caps):
            size = t.class_size()
            out.append((size // cap, cap, size % cap))
        return out

    def moment(self, p: Pmf, rho: float) -> float:
        """Fiber-size moment under the IID law p, via type arithmetic only."""
        if p.alphabet.symbols != self.alphabet.symbols:
            raise ValueError("law must live on the encoder's alphabet")
        total = 0.0
        for t, cap in zip(self.types, self.chunk_caps):
            prob_one = 1.0
            for pr, c in zip(p.probs, t.counts):
                if c:
                    if pr == 0:
                        prob_one = 0.0
                        break
                    prob_one *= float(pr) ** c
            if prob_one == 0.0:
                continue
            size = t.class_size()
            full, rem = divmod(size, cap)
            total += prob_one * (full * float(cap) ** (1 + rho) + float(rem) ** (1 + rho))
        return total

    def as_task_encoder(self) -> TaskEncoder:
        """Materialized per-tuple description table (subject to the tuple cap)."""
        alph = tuple_alphabet(self.alphabet, self.n)
        assign = tuple(
            self.assign_index(seq)
            for seq in product(range(len(self.alphabet)), repeat=self.n)
        )
        return TaskEncoder(alph, self.M, assign)


def build_universal_encoder(params: BlockCodeParams, alphabet: Alphabet) -> UniversalEncoder:
    """Split every type class of X^n into rank-order chunks of bounded size.

    Chunk sizes respect ceil(|class| * 2**(-n (R - delta))) with construction
    slack delta = |X| log2(n+1) / n; the total description count must fit in
    floor(2**(nR)) or the construction is infeasible at these parameters.
    """
    n, rate = params.n, params.rate
    types = enumerate_types(n, alphabet)
    delta = len(alphabet) * math.log2(n + 1) / n
    sizes = [t.class_size() for t in types]
    caps, counts = _chunking(sizes, n, rate, delta)
    total = sum(counts)
    if total > params.M:
        raise InfeasibleError(
            f"universal encoder needs {total} descriptions but only "
            f"floor(2^(n R)) = {params.M} fit; raise the rate or the block length"
        )
    return UniversalEncoder(
        alphabet, n, rate, params.M, tuple(types), tuple(caps), tuple(counts)
    )


@dataclass(frozen=True, eq=False)
class UniversalSideInfoEncoder:
    """Source-oblivious block encoder that may also see a side tuple y^n.

    assign[y_rank, x_rank] is the 1-based description index; x^n ranks are
    lexicographic over X^n and likewise for y^n.
    """

    x_alphabet: Alphabet
    y_alphabet: Alphabet
    n: int
    rate: float
    M: int
    assign: np.ndarray

    def __post_init__(self) -> None:
        assign = np.array(self.assign, dtype=int)
        assign.setflags(write=False)
        object.__setattr__(self, "assign", assign)

    def descriptions_used(self, y_rank: int) -> int:
        return int(self.assign[y_rank].max())

    def fiber_size_multiset(self, y_rank: int) -> tuple[int, ...]:
        sizes = np.bincount(self.assign[y_rank])[1:]
        return tuple(sorted(int(s) for s in sizes if s > 0))

    def moment(self, j: JointPmf, rho: float) -> float:
        """Fiber-size moment under the IID pair law, by full enumeration."""
        jt = j.probs.T  # [y, x]
        pair = np.array([[1.0]])
        for _ in range(self.n):
            pair = np.kron(pair, jt)
        sizes = np.zeros_like(self.assign, dtype=float)
        for yr in range(self.assign.shape[0]):
            counts = np.bincount(self.assign[yr])
            sizes[yr] = counts[self.assign[yr]]
        return float((pair * sizes**rho).sum())


def build_universal_side_info_encoder(
    params: BlockCodeParams, x_alphabet: Alphabet, y_alphabet: Alphabet
) -> UniversalSideInfoEncoder:
    """For each side tuple y^n, chunk the conditional-histogram shells of X^n.

    Shells group x^n by the joint empirical histogram of (x^n, y^n); the
    chunking slack is |X||Y| log2(n+1) / n.  The shell structure, and hence
    the fiber-size multiset, depends on y^n only through its type.
    """
    n, rate = params.n, params.rate
    kx, ky = len(x_alphabet), len(y_alphabet)
    if kx**n > max_tuples() or ky**n > max_tuples():
        raise EnumerationCapError("tuple space exceeds the enumeration cap")
    delta = kx * ky * math.log2(n + 1) / n
    scale = 2.0 ** (-n * (rate - delta))
    xtuples = list(product(range(kx), repeat=n))
    ytuples = list(product(range(ky), repeat=n))
    assign = np.zeros((len(ytuples), len(xtuples)), dtype=int)
    for yr, yt in enumerate(ytuples):
        shells: dict[tuple[int, ...], list[int]] = {}
        order: list[tuple[int, ...]] = []
        for xr, xt in enumerate(xtuples):
            key_counts = [0] * (kx * ky)
            for xi, yi in zip(xt, yt):
                key_counts[xi * ky + yi] += 1
            key = tuple(key_counts)
            if key not in shells:
                shells[key] = []
                order.append(key)
            shells[key].append(xr)
        next_index = 1
        for key in order:
            members = shells[key]
            cap = max(1, math.ceil(len(members) * scale))
            for i, xr in enumerate(members):
                assign[yr, xr] = next_index + i // cap
            next_index += -(-len(members) // cap)
        if next_index - 1 > params.M:
            raise InfeasibleError(
                f"side-information encoder needs {next_index - 1} descriptions "
                f"for one side tuple but only {params.M} fit"
            )
    return UniversalSideInfoEncoder(x_alphabet, y_alphabet, n, rate, params.M, assign)

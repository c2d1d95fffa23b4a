"""Lossy task coding: distortion-ball covers of type classes plus chunking.

Each type class gets a greedy cover by reproduction tuples; the covers are
chunked like the universal encoder's type classes, the decoder maps an index
to its chunk, and the encoder sends any tuple to the lowest chunk holding a
within-distortion codeword.  Decoder sets are kept globally disjoint by
letting the first chunk that claims a codeword keep it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .measures import Distortion
from .probability import (
    Alphabet,
    EnumerationCapError,
    InfeasibleError,
    Pmf,
    max_tuples,
)
from .universal import TypeDescriptor, enumerate_types, floor_pow2, unrank_in_class

#: Slack when comparing averaged distortions against the level (float safety).
DIST_TOL = 1e-9


def _check_tuple_cap(size: int, what: str) -> None:
    if size > max_tuples():
        raise EnumerationCapError(f"{what} needs {size} tuples, over cap {max_tuples()}")


def _distortion_matrix(
    dist: Distortion, sources: np.ndarray, cands: np.ndarray
) -> np.ndarray:
    """Average per-letter distortion between every source and candidate tuple."""
    return dist.d[sources[:, None, :], cands[None, :, :]].mean(axis=2)


def type_class_tuples(q: TypeDescriptor) -> np.ndarray:
    """Members of the type class in lexicographic order, as an (size, n) array."""
    size = q.class_size()
    _check_tuple_cap(size, "type class")
    return np.array([unrank_in_class(q.counts, r) for r in range(size)], dtype=int)


def greedy_type_cover(
    q: TypeDescriptor, dist: Distortion, level: float
) -> tuple[tuple[int, ...], ...]:
    """Reproduction tuples covering every class member within the level.

    Greedy max-coverage: repeatedly take the candidate covering the most
    still-uncovered members, ties to the lexicographically smallest codeword.
    Returned lexicographically sorted.
    """
    n = q.n
    members = type_class_tuples(q)
    ncand = len(dist.xhat_alphabet) ** n
    _check_tuple_cap(ncand, "reproduction space")
    cands = np.array(list(product(range(len(dist.xhat_alphabet)), repeat=n)), dtype=int)
    covers = _distortion_matrix(dist, members, cands) <= level + DIST_TOL  # [member, cand]
    uncovered = np.ones(len(members), dtype=bool)
    chosen: list[int] = []
    while uncovered.any():
        gains = (covers & uncovered[:, None]).sum(axis=0)
        best = int(np.argmax(gains))
        if gains[best] == 0:
            raise AssertionError("cover stalled; distortion rows must attain zero")
        chosen.append(best)
        uncovered &= ~covers[:, best]
    return tuple(sorted(tuple(int(v) for v in cands[c]) for c in chosen))


@dataclass(frozen=True, eq=False)
class LossyCodec:
    """Encoder/decoder-set pair meeting a per-tuple fidelity constraint.

    `assign[x_rank]` is the 1-based description of each source tuple (ranks
    lexicographic over X^n); `decode_sets[m-1]` lists the reproduction tuples
    of description m.  Decoder sets are pairwise disjoint and every source
    tuple has a within-level reproduction inside its description's set.
    """

    dist: Distortion
    n: int
    M: int
    level: float
    assign: np.ndarray
    decode_sets: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self) -> None:
        assign = np.array(self.assign, dtype=int)
        assign.setflags(write=False)
        object.__setattr__(self, "assign", assign)
        if len(self.decode_sets) > self.M:
            raise ValueError("more decoder sets than descriptions")

    def decode(self, m: int) -> tuple[tuple[str, ...], ...]:
        """Reproduction tuples of description m, as label tuples."""
        labels = self.dist.xhat_alphabet.symbols
        return tuple(tuple(labels[i] for i in w) for w in self.decode_sets[m - 1])

    def fiber_sizes(self) -> np.ndarray:
        sizes = np.array([len(s) for s in self.decode_sets])
        return sizes[self.assign - 1]

    def descriptions_used(self) -> int:
        return len(self.decode_sets)


def build_lossy_codec(n: int, rate: float, dist: Distortion, level: float) -> LossyCodec:
    """Cover each type class, chunk the covers, and wire encoder to decoder.

    Chunk sizes respect ceil(|cover| * 2**(-n (R - delta))) with
    delta = |X| log2(n+1) / n; infeasible when the chunks cannot fit into
    floor(2**(nR)) descriptions.  Codewords already claimed by an earlier
    chunk are dropped from later covers, which keeps decoder sets disjoint
    without breaking fidelity.
    """
    if level < 0:
        raise ValueError("level must be nonnegative")
    kx = len(dist.x_alphabet)
    _check_tuple_cap(kx**n, "source space")
    M = floor_pow2(n * rate)
    delta = kx * math.log2(n + 1) / n
    scale = 2.0 ** (-n * (rate - delta))

    claimed: set[tuple[int, ...]] = set()
    chunks: list[tuple[tuple[int, ...], ...]] = []
    for q in enumerate_types(n, dist.x_alphabet):
        cover = [w for w in greedy_type_cover(q, dist, level) if w not in claimed]
        if not cover:
            continue
        cap = max(1, math.ceil(len(cover) * scale))
        for i in range(0, len(cover), cap):
            chunk = tuple(cover[i : i + cap])
            chunks.append(chunk)
            claimed.update(chunk)
    if len(chunks) > M:
        raise InfeasibleError(
            f"lossy construction needs {len(chunks)} descriptions but only "
            f"floor(2^(n R)) = {M} fit; raise the rate or the level"
        )

    sources = np.array(list(product(range(kx), repeat=n)), dtype=int)
    cands = np.array([w for chunk in chunks for w in chunk], dtype=int)
    chunk_ids = np.array([ci for ci, chunk in enumerate(chunks) for _ in chunk])
    ok = _distortion_matrix(dist, sources, cands) <= level + DIST_TOL
    sentinel = len(chunks)
    first = np.where(ok, chunk_ids[None, :], sentinel).min(axis=1)
    if np.any(first == sentinel):
        raise AssertionError("some source tuple lost all within-level codewords")
    return LossyCodec(dist, n, M, level, first + 1, tuple(chunks))


def lossy_moment(codec: LossyCodec, p: Pmf, rho: float) -> float:
    """sum over source tuples of P^n(x^n) |decode_set(f(x^n))|^rho."""
    if p.alphabet.symbols != codec.dist.x_alphabet.symbols:
        raise ValueError("law must live on the codec's source alphabet")
    kx = len(p.alphabet)
    sources = np.array(list(product(range(kx), repeat=codec.n)), dtype=int)
    probs = p.probs[sources].prod(axis=1)
    return float((probs * codec.fiber_sizes().astype(float) ** rho).sum())


def max_fidelity_gap(codec: LossyCodec) -> float:
    """max over source tuples of (closest in-set reproduction distortion - level).

    Nonpositive (up to float slack) exactly when the codec meets its fidelity
    constraint; exposed for exhaustive verification.
    """
    kx = len(codec.dist.x_alphabet)
    sources = np.array(list(product(range(kx), repeat=codec.n)), dtype=int)
    worst = -math.inf
    for m, chunk in enumerate(codec.decode_sets, start=1):
        rows = codec.assign == m
        if not rows.any() or not chunk:
            continue
        dmat = _distortion_matrix(codec.dist, sources[rows], np.array(chunk, dtype=int))
        worst = max(worst, float(dmat.min(axis=1).max()) - codec.level)
    return worst

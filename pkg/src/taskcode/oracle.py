"""Ground truth by exhaustion.

Enumerates every set partition of the alphabet into at most M blocks (via
restricted-growth strings in lexicographic order) and reports the exact
minimum of the fiber-size moment.  Small alphabets only; the Bell numbers do
the capping for us in spirit, and a hard cap of 12 symbols does it in code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .partitioning import Partition
from .probability import Alphabet, EnumerationCapError, JointPmf, Pmf, condition_joint

MAX_SYMBOLS = 12
_TABLE_MAX = 10


def rgs_strings(k: int, max_values: int) -> Iterator[tuple[int, ...]]:
    """Restricted-growth strings of length k using at most max_values labels, lex order."""
    a = [0] * k

    def rec(i: int, mx: int) -> Iterator[tuple[int, ...]]:
        if i == k:
            yield tuple(a)
            return
        top = min(mx + 1, max_values - 1)
        for v in range(top + 1):
            a[i] = v
            yield from rec(i + 1, max(mx, v))

    yield from rec(1, 0)


@lru_cache(maxsize=None)
def _partition_tables(k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rgs rows, per-symbol block sizes, block counts) over all partitions of k items."""
    rows = np.array(list(rgs_strings(k, k)), dtype=np.uint8)
    sizes = (rows[:, :, None] == rows[:, None, :]).sum(axis=2).astype(np.uint8)
    nblocks = rows.max(axis=1).astype(np.int64) + 1
    return rows, sizes, nblocks


def partition_from_rgs(alphabet: Alphabet, rgs: tuple[int, ...]) -> Partition:
    blocks: dict[int, list[str]] = {}
    for sym, v in zip(alphabet.symbols, rgs):
        blocks.setdefault(int(v), []).append(sym)
    return Partition(alphabet, tuple(tuple(blocks[v]) for v in sorted(blocks)))


@dataclass(frozen=True)
class OracleResult:
    min_moment: float
    argmin: Partition
    blocks_used: int
    exact_moment: Fraction | None = None


@dataclass(frozen=True)
class SideInfoOracleResult:
    min_moment: float
    per_y: tuple[OracleResult | None, ...]


def _search_tabulated(p: Pmf, rho: float, max_blocks: int) -> tuple[float, tuple[int, ...]]:
    rows, sizes, nblocks = _partition_tables(len(p.alphabet))
    mask = nblocks <= max_blocks
    moments = (sizes[mask].astype(float) ** rho) @ p.probs
    i = int(np.argmin(moments))
    row = rows[mask][i]
    return float(moments[i]), tuple(int(v) for v in row)


def _search_dfs(p: Pmf, rho: float, max_blocks: int) -> tuple[float, tuple[int, ...]]:
    """Depth-first search with a partial-moment pruning bound (for k > 10)."""
    k = len(p.alphabet)
    probs = p.probs
    best_val = math.inf
    best_row: tuple[int, ...] | None = None
    a = [0] * k
    block_mass = [0.0] * k
    block_size = [0] * k
    suffix_mass = np.concatenate([np.cumsum(probs[::-1])[::-1], [0.0]])

    def rec(i: int, used: int, partial: float) -> None:
        nonlocal best_val, best_row
        # Every assigned term can only grow and every unassigned symbol
        # contributes at least its own mass.
        if partial + suffix_mass[i] >= best_val:
            return
        if i == k:
            if partial < best_val:
                best_val = partial
                best_row = tuple(a)
            return
        top = min(used, max_blocks - 1)
        for v in range(top + 1):
            old_mass, old_size = block_mass[v], block_size[v]
            delta = (old_mass + probs[i]) * (old_size + 1) ** rho - old_mass * old_size**rho
            a[i] = v
            block_mass[v], block_size[v] = old_mass + probs[i], old_size + 1
            rec(i + 1, max(used, v + 1), partial + delta)
            block_mass[v], block_size[v] = old_mass, old_size

    rec(0, 0, 0.0)
    assert best_row is not None
    return best_val, best_row


def _search_exact(p: Pmf, rho: float, max_blocks: int) -> tuple[Fraction, tuple[int, ...]]:
    if p.exact is None:
        raise ValueError("exact search needs a Pmf with exact rational probabilities")
    if not float(rho).is_integer() or rho < 1:
        raise ValueError("exact search needs a positive integer rho")
    k = len(p.alphabet)
    power = int(rho)
    best_val: Fraction | None = None
    best_row: tuple[int, ...] | None = None
    for row in rgs_strings(k, max_blocks):
        sizes: dict[int, int] = {}
        masses: dict[int, Fraction] = {}
        for sym_i, v in enumerate(row):
            sizes[v] = sizes.get(v, 0) + 1
            masses[v] = masses.get(v, Fraction(0)) + p.exact[sym_i]
        val = sum((masses[v] * sizes[v] ** power for v in sizes), Fraction(0))
        if best_val is None or val < best_val:
            best_val, best_row = val, row
    assert best_val is not None and best_row is not None
    return best_val, best_row


def exact_min_moment(p: Pmf, rho: float, M: int, exact: bool = False) -> OracleResult:
    """Exact minimum fiber-size moment over all encoders into at most M descriptions.

    Ties resolve to the lexicographically smallest restricted-growth string.
    With exact=True (integer rho, rational pmf) the comparison runs in exact
    rational arithmetic.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    if M < 1:
        raise ValueError("M must be a positive integer")
    k = len(p.alphabet)
    if k > MAX_SYMBOLS:
        raise EnumerationCapError(f"oracle capped at {MAX_SYMBOLS} symbols, got {k}")
    max_blocks = min(M, k)
    exact_val: Fraction | None = None
    if exact:
        exact_val, row = _search_exact(p, rho, max_blocks)
        val = float(exact_val)
    elif k <= _TABLE_MAX:
        val, row = _search_tabulated(p, rho, max_blocks)
    else:
        val, row = _search_dfs(p, rho, max_blocks)
    part = partition_from_rgs(p.alphabet, row)
    return OracleResult(val, part, len(part.blocks), exact_val)


def exact_min_moment_side_info(j: JointPmf, rho: float, M: int) -> SideInfoOracleResult:
    """Per-side-letter exact minimization, aggregated by the Y marginal.

    The objective separates over y, so the joint optimum is the P_Y-weighted
    sum of the per-y optima.
    """
    if len(j.x_alphabet) > 10 or len(j.y_alphabet) > 6:
        raise EnumerationCapError("side-information oracle capped at |X| <= 10, |Y| <= 6")
    py, kernel = condition_joint(j)
    per_y: list[OracleResult | None] = []
    total = 0.0
    for yi in range(len(j.y_alphabet)):
        if py.probs[yi] == 0:
            per_y.append(None)
            continue
        res = exact_min_moment(Pmf(j.x_alphabet, kernel.rows[yi]), rho, M)
        per_y.append(res)
        total += float(py.probs[yi]) * res.min_moment
    return SideInfoOracleResult(total, tuple(per_y))

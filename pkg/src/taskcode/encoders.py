"""Single-shot task encoders.

A task encoder maps every symbol to one of M description indices; describing a
symbol causes the whole fiber (all symbols sharing its description) to be
performed.  The constructions here size fibers roughly proportionally to
P(x)^(-1/(1+rho)) via a budgeted partition, which keeps the rho-th moment of
the fiber size within an explicit factor of the best achievable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .measures import renyi_entropy, sundaresan_divergence
from .partitioning import Budget, Partition, build_budget_partition
from .probability import Alphabet, JointPmf, Pmf, condition_joint


@dataclass(frozen=True, eq=False)
class TaskEncoder:
    """Total map from an alphabet into description indices {1..M}."""

    alphabet: Alphabet
    M: int
    assign: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.M < 1:
            raise ValueError("M must be a positive integer")
        if len(self.assign) != len(self.alphabet):
            raise ValueError("one description index per symbol required")
        if any(not 1 <= m <= self.M for m in self.assign):
            raise ValueError("description indices must lie in 1..M")

    @classmethod
    def from_partition(cls, part: Partition, M: int) -> "TaskEncoder":
        if len(part.blocks) > M:
            raise ValueError(f"partition has {len(part.blocks)} blocks > M = {M}")
        assign = tuple(part.block_index(s) + 1 for s in part.alphabet.symbols)
        return cls(part.alphabet, M, assign)

    def fibers(self) -> dict[int, tuple[str, ...]]:
        """Nonempty fibers keyed by description index, symbols in alphabet order."""
        out: dict[int, list[str]] = {}
        for s, m in zip(self.alphabet.symbols, self.assign):
            out.setdefault(m, []).append(s)
        return {m: tuple(v) for m, v in sorted(out.items())}

    def fiber_sizes(self) -> np.ndarray:
        """|f^{-1}(f(x))| for every symbol x, in alphabet order."""
        counts = np.bincount(np.array(self.assign), minlength=self.M + 1)
        return counts[np.array(self.assign)]

    def induced_partition(self) -> Partition:
        return Partition(self.alphabet, tuple(self.fibers().values()))

    def to_dict(self) -> dict:
        return {"M": self.M, "assign": {s: m for s, m in zip(self.alphabet.symbols, self.assign)}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "TaskEncoder":
        assign_map = d["assign"]
        alphabet = Alphabet.of(assign_map.keys())
        return cls(alphabet, int(d["M"]), tuple(int(assign_map[s]) for s in alphabet))


class MomentBounds(NamedTuple):
    lower: float
    upper: float | None


def moment(enc: TaskEncoder, p: Pmf, rho: float) -> float:
    """rho-th moment of the fiber size, sum_m P(f^{-1}(m)) |f^{-1}(m)|^rho."""
    if enc.alphabet.symbols != p.alphabet.symbols:
        raise ValueError("encoder and law must share an alphabet")
    total = 0.0
    for m, fiber in enc.fibers().items():
        mass = sum(p.p(s) for s in fiber)
        total += mass * len(fiber) ** rho
    return total


def optimal_moment_bounds(p: Pmf, rho: float, M: int) -> MomentBounds:
    """Bounds on the least achievable fiber-size moment with M descriptions.

    lower = 2**(rho (H - log2 M)) holds for every encoder; the upper bound
    1 + 2**(rho (H - log2 Mtilde)) with Mtilde = (M - log2|X| - 2)/4 is met
    strictly by build_encoder and exists only for M > log2|X| + 2.
    """
    if M < 1:
        raise ValueError("M must be a positive integer")
    h = renyi_entropy(p, rho)
    lower = 2.0 ** (rho * (h - math.log2(M)))
    k = len(p.alphabet)
    if M > math.log2(k) + 2:
        mtilde = (M - math.log2(k) - 2.0) / 4.0
        return MomentBounds(lower, 1.0 + 2.0 ** (rho * (h - math.log2(mtilde))))
    return MomentBounds(lower, None)


def _caps_from_design(design: Pmf, rho: float, M: int) -> Budget:
    k = len(design.alphabet)
    if int(M) != M or not M > math.log2(k) + 2:
        raise ValueError(f"M must be an integer above log2(|X|) + 2 = {math.log2(k) + 2:.4g}")
    ab = 1.0 / (1.0 + rho)
    scale = 2.0 * float((design.probs[design.probs > 0] ** ab).sum())
    beta = scale / (M - math.log2(k) - 2.0)
    caps: list[int | float] = []
    for pr in design.probs:
        caps.append(math.inf if pr == 0 else max(1, math.ceil(beta * pr ** (-ab))))
    return Budget(design.alphabet, tuple(caps))


def build_encoder(p: Pmf, rho: float, M: int) -> TaskEncoder:
    """Encoder with fiber sizes capped at ceil(beta P(x)^(-1/(1+rho))).

    beta is chosen just large enough that the budgeted partition fits into M
    blocks; zero-probability symbols are uncapped and pool into the initial
    block.  Requires integer M > log2(|X|) + 2.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    part = build_budget_partition(_caps_from_design(p, rho, int(M)))
    return TaskEncoder.from_partition(part, int(M))


def build_mismatched_encoder(
    p_true: Pmf, q_design: Pmf, rho: float, M: int
) -> tuple[TaskEncoder, float]:
    """Encoder built from a design law Q, with its moment bound under the true P.

    Returns (encoder, bound) where bound = 1 + 2**(rho (H(P) + Delta(P||Q) -
    log2 Mtilde)); the bound is +inf when the mismatch divergence diverges,
    but the encoder is still valid.
    """
    if p_true.alphabet.symbols != q_design.alphabet.symbols:
        raise ValueError("laws must share an alphabet")
    enc = build_encoder(q_design, rho, M)
    delta = sundaresan_divergence(p_true, q_design, 1.0 / (1.0 + rho))
    if math.isinf(delta):
        return enc, math.inf
    k = len(p_true.alphabet)
    mtilde = (M - math.log2(k) - 2.0) / 4.0
    h = renyi_entropy(p_true, rho)
    return enc, 1.0 + 2.0 ** (rho * (h + delta - math.log2(mtilde)))


@dataclass(frozen=True, eq=False)
class SideInfoEncoder:
    """Description map on X that may depend on an observed side letter y.

    assign[x, y] holds the description index; for each fixed y the column is
    a valid task encoder on X.
    """

    x_alphabet: Alphabet
    y_alphabet: Alphabet
    M: int
    assign: np.ndarray

    def __post_init__(self) -> None:
        assign = np.array(self.assign, dtype=int)
        assign.setflags(write=False)
        object.__setattr__(self, "assign", assign)
        if assign.shape != (len(self.x_alphabet), len(self.y_alphabet)):
            raise ValueError("assign shape must be (|X|, |Y|)")
        if assign.min() < 1 or assign.max() > self.M:
            raise ValueError("description indices must lie in 1..M")

    def encoder_for(self, yi: int) -> TaskEncoder:
        return TaskEncoder(self.x_alphabet, self.M, tuple(int(m) for m in self.assign[:, yi]))

    def fiber_sizes(self) -> np.ndarray:
        """|f^{-1}(f(x,y), y)| for every (x, y)."""
        sizes = np.empty_like(self.assign)
        for yi in range(self.assign.shape[1]):
            col = self.assign[:, yi]
            counts = np.bincount(col, minlength=self.M + 1)
            sizes[:, yi] = counts[col]
        return sizes


def build_side_info_encoder(j: JointPmf, rho: float, M: int) -> SideInfoEncoder:
    """Run build_encoder on the conditional law P_{X|Y}(.|y) for every y.

    Side letters of zero mass get the constant encoder; they never contribute
    to the moment.
    """
    py, kernel = condition_joint(j)
    nx, ny = len(j.x_alphabet), len(j.y_alphabet)
    assign = np.ones((nx, ny), dtype=int)
    for yi in range(ny):
        if py.probs[yi] == 0:
            continue
        enc = build_encoder(Pmf(j.x_alphabet, kernel.rows[yi]), rho, M)
        assign[:, yi] = enc.assign
    return SideInfoEncoder(j.x_alphabet, j.y_alphabet, int(M), assign)


def side_info_moment(enc: SideInfoEncoder, j: JointPmf, rho: float) -> float:
    """sum_y P_Y(y) sum_m P_{X|Y}(f^{-1}(m,y)|y) |f^{-1}(m,y)|^rho."""
    if enc.x_alphabet.symbols != j.x_alphabet.symbols or enc.y_alphabet.symbols != j.y_alphabet.symbols:
        raise ValueError("encoder and joint law must share alphabets")
    sizes = enc.fiber_sizes().astype(float)
    return float((j.probs * sizes**rho).sum())

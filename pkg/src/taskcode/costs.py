"""Task coding when tasks carry nonnegative costs (moment order fixed at 1).

The figure of merit is the expected total cost of a described fiber, where an
n-tuple's cost is the average of its letter costs and describing x^n incurs
the summed tuple costs of every n-tuple sharing its description.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .encoders import TaskEncoder
from .probability import Alphabet, EnumerationCapError, Pmf, max_tuples, tuple_alphabet


@dataclass(frozen=True)
class CostFn:
    """Nonnegative finite per-task costs over an alphabet."""

    alphabet: Alphabet
    costs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.costs) != len(self.alphabet):
            raise ValueError("one cost per symbol required")
        if any(c < 0 or not math.isfinite(c) for c in self.costs):
            raise ValueError("costs must be nonnegative and finite")

    @property
    def c_max(self) -> float:
        return max(self.costs)

    @property
    def c_min(self) -> float:
        return min(self.costs)

    def expected(self, p: Pmf) -> float:
        if p.alphabet.symbols != self.alphabet.symbols:
            raise ValueError("cost function and law must share an alphabet")
        return float(np.dot(p.probs, np.array(self.costs)))

    def to_dict(self) -> dict:
        return {"alphabet": list(self.alphabet.symbols), "costs": list(self.costs)}


def costs_from_dict(d: dict) -> CostFn:
    """Parse {"alphabet": [...], "costs": [...]}."""
    try:
        alphabet = Alphabet.of(d["alphabet"])
        costs = tuple(float(c) for c in d["costs"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed cost object: {exc}") from exc
    return CostFn(alphabet, costs)


def load_costs(path: str) -> CostFn:
    with open(path, "r", encoding="utf-8") as fh:
        return costs_from_dict(json.load(fh))


def _enumerate_block(p: Pmf, cost: CostFn, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(tuples, per-tuple product probabilities, per-tuple average costs)."""
    k = len(p.alphabet)
    if k**n > max_tuples():
        raise EnumerationCapError(f"{k}^{n} tuples exceeds cap {max_tuples()}")
    tuples = np.array(list(product(range(k), repeat=n)), dtype=int)
    probs = p.probs[tuples].prod(axis=1)
    tcosts = np.array(cost.costs)[tuples].mean(axis=1)
    return tuples, probs, tcosts


def _assignments(enc, tuples: np.ndarray, n: int, base: Alphabet) -> np.ndarray:
    if hasattr(enc, "assign_index"):
        return np.array([enc.assign_index(tuple(t)) for t in tuples])
    if isinstance(enc, TaskEncoder):
        expected = tuple_alphabet(base, n)
        if enc.alphabet.symbols != expected.symbols:
            raise ValueError("encoder alphabet must be the lexicographic n-tuple alphabet")
        return np.array(enc.assign)
    raise TypeError(f"unsupported encoder type {type(enc)!r}")


def cost_moment(enc, p: Pmf, cost: CostFn, n: int) -> float:
    """Expected fiber cost sum_{x^n} P^n(x^n) sum_{u in fiber(x^n)} c(u).

    `enc` may be a TaskEncoder over the lexicographic n-tuple alphabet or any
    block encoder exposing assign_index (e.g. the universal one).
    """
    if cost.alphabet.symbols != p.alphabet.symbols:
        raise ValueError("cost function and law must share an alphabet")
    tuples, probs, tcosts = _enumerate_block(p, cost, n)
    assign = _assignments(enc, tuples, n, p.alphabet)
    fiber_cost = np.bincount(assign, weights=tcosts)
    return float(np.dot(probs, fiber_cost[assign]))


def cost_converse_bound(p: Pmf, cost: CostFn, rate: float, n: int) -> float:
    """Lower bound 2**(-nR) (sum_{x^n: c>0} sqrt(c(x^n) P^n(x^n)))**2.

    Holds for every encoder into floor(2**(nR)) descriptions; requires a
    source with positive expected cost.
    """
    if cost.expected(p) <= 0:
        raise ValueError("requires E[c(X)] > 0")
    _, probs, tcosts = _enumerate_block(p, cost, n)
    mask = tcosts > 0
    root_sum = float(np.sqrt(tcosts[mask] * probs[mask]).sum())
    return 2.0 ** (-n * rate) * root_sum**2


def cost_decomposition(enc, p: Pmf, cost: CostFn, n: int) -> tuple[float, float]:
    """(E[c(X_1)], cross-fiber cost term); the two sum to cost_moment.

    The cross term collects the costs of fiber members other than the
    described tuple itself and never exceeds c_max * (task moment - 1).
    """
    total = cost_moment(enc, p, cost, n)
    own = cost.expected(p)
    return own, total - own

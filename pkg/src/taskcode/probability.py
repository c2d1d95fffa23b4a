"""Finite-alphabet probability primitives shared by every other module.

All values are immutable after construction and every operation is a pure
function, so everything here is safe to use from concurrent sweeps.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

#: Default ceiling on the number of n-tuples any operation may materialize.
DEFAULT_MAX_TUPLES = 1 << 20

#: Tolerance on total mass for constructed distributions.
MASS_TOL = 1e-12

#: Tolerance applied when parsing external JSON distributions.
JSON_MASS_TOL = 1e-9


class EnumerationCapError(RuntimeError):
    """An operation would enumerate more tuples than the configured cap."""


class InfeasibleError(RuntimeError):
    """A construction cannot respect its description budget at these parameters."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its iteration budget."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


def max_tuples() -> int:
    """Enumeration cap; override via the TASKCODE_MAX_TUPLES environment variable."""
    raw = os.environ.get("TASKCODE_MAX_TUPLES")
    return int(raw) if raw else DEFAULT_MAX_TUPLES


@dataclass(frozen=True)
class Alphabet:
    """Ordered collection of distinct opaque labels.

    The order is fixed for the lifetime of the value; all indices elsewhere in
    the package refer to this order.
    """

    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError("alphabet must be nonempty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet labels must be unique")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @classmethod
    def of(cls, symbols: Iterable[str]) -> "Alphabet":
        return cls(tuple(str(s) for s in symbols))

    def index(self, symbol: str) -> int:
        return self._index[symbol]  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self._index  # type: ignore[attr-defined]

    def __getitem__(self, i: int) -> str:
        return self.symbols[i]


def tuple_alphabet(alphabet: Alphabet, n: int) -> Alphabet:
    """Alphabet of n-tuples over `alphabet` in lexicographic order.

    Labels are the joined base labels (comma-separated when base labels are
    not all single characters).
    """
    if n < 1:
        raise ValueError("tuple length must be >= 1")
    if n == 1:
        return alphabet
    count = len(alphabet) ** n
    if count > max_tuples():
        raise EnumerationCapError(
            f"{len(alphabet)}^{n} = {count} tuples exceeds cap {max_tuples()}"
        )
    sep = "" if all(len(s) == 1 for s in alphabet.symbols) else ","
    return Alphabet(tuple(sep.join(t) for t in product(alphabet.symbols, repeat=n)))


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over an Alphabet.

    `probs` is a read-only float64 vector summing to one within MASS_TOL.
    `exact` optionally carries the same distribution as exact rationals; it is
    populated by make_pmf whenever the input weights are integers/Fractions
    and is consumed by the exact-arithmetic paths.
    """

    alphabet: Alphabet
    probs: np.ndarray
    exact: tuple[Fraction, ...] | None = None

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (len(self.alphabet),):
            raise ValueError("probs length must match alphabet size")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(probs.sum()) - 1.0) > MASS_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        if self.exact is not None:
            if len(self.exact) != len(self.alphabet):
                raise ValueError("exact probs length mismatch")
            if any(e < 0 for e in self.exact) or sum(self.exact) != 1:
                raise ValueError("exact probs must be nonnegative and sum to 1")

    def __len__(self) -> int:
        return len(self.alphabet)

    def p(self, symbol: str) -> float:
        return float(self.probs[self.alphabet.index(symbol)])

    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)

    def support(self) -> tuple[str, ...]:
        return tuple(self.alphabet[i] for i in self.support_indices())

    def to_dict(self) -> dict:
        return {"alphabet": list(self.alphabet.symbols), "probs": [float(x) for x in self.probs]}


def make_pmf(alphabet: Alphabet | Sequence[str], weights: Sequence) -> Pmf:
    """Normalize nonnegative weights into a Pmf, preserving zeros exactly.

    Integer/Fraction weights additionally populate the exact-rational view.
    """
    if not isinstance(alphabet, Alphabet):
        alphabet = Alphabet.of(alphabet)
    if len(weights) != len(alphabet):
        raise ValueError(f"{len(weights)} weights for {len(alphabet)} symbols")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be nonnegative")
    exact: tuple[Fraction, ...] | None = None
    if all(isinstance(w, (int, Fraction)) and not isinstance(w, bool) for w in weights):
        total_f = sum(Fraction(w) for w in weights)
        if total_f == 0:
            raise ValueError("weights must not all be zero")
        exact = tuple(Fraction(w) / total_f for w in weights)
        probs = np.array([float(e) for e in exact])
    else:
        arr = np.array([float(w) for w in weights])
        total = float(arr.sum())
        if total <= 0:
            raise ValueError("weights must not all be zero")
        probs = arr / total
    return Pmf(alphabet, probs, exact)


def product_pmf(p: Pmf, n: int) -> Pmf:
    """IID product distribution over n-tuples, in lexicographic tuple order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return p
    alph = tuple_alphabet(p.alphabet, n)
    probs = np.array([1.0])
    for _ in range(n):
        probs = np.multiply.outer(probs, p.probs).reshape(-1)
    return Pmf(alph, probs)


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint distribution over X x Y; probs is indexed [x, y]."""

    x_alphabet: Alphabet
    y_alphabet: Alphabet
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (len(self.x_alphabet), len(self.y_alphabet)):
            raise ValueError("joint probs shape must be (|X|, |Y|)")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(probs.sum()) - 1.0) > MASS_TOL:
            raise ValueError(f"joint mass is {probs.sum()!r}, not 1")

    def x_marginal(self) -> Pmf:
        return Pmf(self.x_alphabet, self.probs.sum(axis=1))

    def y_marginal(self) -> Pmf:
        return Pmf(self.y_alphabet, self.probs.sum(axis=0))


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic kernel from `x_alphabet` (input) to `y_alphabet` (output).

    Rows may be flagged undefined (NaN) where no conditional exists; `defined`
    reports which inputs carry a valid row.
    """

    x_alphabet: Alphabet
    y_alphabet: Alphabet
    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=float)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        if rows.shape != (len(self.x_alphabet), len(self.y_alphabet)):
            raise ValueError("channel shape must be (|input|, |output|)")
        for i, row in enumerate(rows):
            if np.isnan(row).any():
                if not np.isnan(row).all():
                    raise ValueError(f"row {i} mixes defined and undefined entries")
                continue
            if np.any(row < 0) or abs(float(row.sum()) - 1.0) > MASS_TOL:
                raise ValueError(f"row {i} is not a distribution")

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.rows).any(axis=1)

    def row_pmf(self, i: int) -> Pmf:
        if not self.defined[i]:
            raise ValueError(f"conditional row {i} is undefined")
        return Pmf(self.y_alphabet, self.rows[i])


def condition_joint(j: JointPmf) -> tuple[Pmf, Channel]:
    """Split a joint law into its Y-marginal and the conditional kernel X-given-Y.

    Rows of the returned channel are indexed by Y; rows for zero-mass y are
    flagged undefined (NaN).
    """
    py = j.probs.sum(axis=0)
    rows = np.full((len(j.y_alphabet), len(j.x_alphabet)), np.nan)
    for yi in np.flatnonzero(py > 0):
        rows[yi] = j.probs[:, yi] / py[yi]
    return Pmf(j.y_alphabet, py), Channel(j.y_alphabet, j.x_alphabet, rows)


def compose_joint(py: Pmf, channel: Channel) -> JointPmf:
    """Rebuild the joint law P(x, y) = P_Y(y) * P_{X|Y}(x|y) from its pieces."""
    if channel.x_alphabet is not py.alphabet and channel.x_alphabet.symbols != py.alphabet.symbols:
        raise ValueError("channel input must match the marginal's alphabet")
    probs = np.zeros((len(channel.y_alphabet), len(py.alphabet)))
    for yi, mass in enumerate(py.probs):
        if mass > 0:
            if not channel.defined[yi]:
                raise ValueError(f"row {yi} undefined but carries mass")
            probs[:, yi] = mass * channel.rows[yi]
    return JointPmf(channel.y_alphabet, py.alphabet, probs)


def ceiling_power_bound(xi: float, rho: float) -> float:
    """Upper bound 1 + 2**rho * xi**rho, valid for ceil(xi)**rho when xi >= 0, rho > 0."""
    if xi < 0 or rho <= 0:
        raise ValueError("requires xi >= 0 and rho > 0")
    return 1.0 + 2.0**rho * xi**rho


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def _check_mass(total: float, normalize: bool, what: str) -> None:
    if not normalize and abs(total - 1.0) > JSON_MASS_TOL:
        raise ValueError(
            f"{what} mass {total!r} deviates from 1 by more than {JSON_MASS_TOL}; "
            "pass --normalize to accept"
        )


def pmf_from_dict(d: dict, normalize: bool = False) -> Pmf:
    """Parse {"alphabet": [...], "probs": [...]} into a Pmf."""
    try:
        alphabet = Alphabet.of(d["alphabet"])
        raw = [float(x) for x in d["probs"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed PMF object: {exc}") from exc
    _check_mass(sum(raw), normalize, "PMF")
    return make_pmf(alphabet, raw)


def joint_from_dict(d: dict, normalize: bool = False) -> JointPmf:
    """Parse {"x_alphabet": [...], "y_alphabet": [...], "probs": [[...], ...]}."""
    try:
        xa = Alphabet.of(d["x_alphabet"])
        ya = Alphabet.of(d["y_alphabet"])
        probs = np.array(d["probs"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed joint PMF object: {exc}") from exc
    total = float(probs.sum())
    _check_mass(total, normalize, "joint PMF")
    if np.any(probs < 0):
        raise ValueError("joint probabilities must be nonnegative")
    if total <= 0:
        raise ValueError("joint mass must be positive")
    return JointPmf(xa, ya, probs / total)


def load_pmf(path: str, normalize: bool = False) -> Pmf:
    with open(path, "r", encoding="utf-8") as fh:
        return pmf_from_dict(json.load(fh), normalize)


def load_joint(path: str, normalize: bool = False) -> JointPmf:
    with open(path, "r", encoding="utf-8") as fh:
        return joint_from_dict(json.load(fh), normalize)

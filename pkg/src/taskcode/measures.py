"""Scalar information measures and their variational cross-checks.

Everything is in bits (base-2 logs).  Conventions throughout: zero-probability
symbols contribute nothing to any sum (0 * log 0 = 0), 0/0 = 0, and a/0 with
a > 0 is +infinity, returned as math.inf rather than raised.

The variational routines deliberately maximize with a generic mirror-ascent
iteration instead of jumping to the known closed-form maximizers, so that the
numeric value is an independent check of the closed forms; the closed-form
maximizers are still what gets returned as the argmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .probability import (
    Alphabet,
    Channel,
    ConvergenceError,
    JointPmf,
    Pmf,
    condition_joint,
)

LN2 = math.log(2.0)


@dataclass(frozen=True)
class OrderParam:
    """Moment order rho > 0 together with the entropy order alpha = 1/(1+rho)."""

    rho: float

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise ValueError("rho must be positive")

    @property
    def alpha(self) -> float:
        return 1.0 / (1.0 + self.rho)

    @classmethod
    def from_alpha(cls, alpha: float) -> "OrderParam":
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1) for a positive rho")
        return cls(rho=1.0 / alpha - 1.0)


@dataclass(frozen=True, eq=False)
class Distortion:
    """Single-letter distortion matrix d[x, xhat] plus a fidelity level.

    Every row must attain zero (each source letter has a perfect reproduction).
    """

    x_alphabet: Alphabet
    xhat_alphabet: Alphabet
    d: np.ndarray
    level: float

    def __post_init__(self) -> None:
        d = np.array(self.d, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        if d.shape != (len(self.x_alphabet), len(self.xhat_alphabet)):
            raise ValueError("distortion shape must be (|X|, |Xhat|)")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError("distortions must be nonnegative and finite")
        if np.any(d.min(axis=1) != 0):
            raise ValueError("every source letter needs a zero-distortion reproduction")
        if self.level < 0:
            raise ValueError("distortion level must be nonnegative")

    @classmethod
    def hamming(cls, alphabet: Alphabet, level: float) -> "Distortion":
        k = len(alphabet)
        return cls(alphabet, alphabet, np.ones((k, k)) - np.eye(k), level)


# ---------------------------------------------------------------------------
# Entropies and divergences
# ---------------------------------------------------------------------------

def renyi_entropy(p: Pmf, rho: float) -> float:
    """Renyi entropy of order 1/(1+rho): (1+rho)/rho * log2 sum_x P(x)^(1/(1+rho))."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    ps = p.probs[p.probs > 0]
    return (1.0 + rho) / rho * math.log2(float((ps ** (1.0 / (1.0 + rho))).sum()))


def shannon_entropy(p: Pmf) -> float:
    ps = p.probs[p.probs > 0]
    return float(-(ps * np.log2(ps)).sum())


def kl_divergence(p: Pmf, q: Pmf) -> float:
    """D(P||Q) in bits; +inf when P puts mass outside the support of Q."""
    if p.alphabet.symbols != q.alphabet.symbols:
        raise ValueError("distributions must share an alphabet")
    mask = p.probs > 0
    if np.any(q.probs[mask] == 0):
        return math.inf
    return float((p.probs[mask] * np.log2(p.probs[mask] / q.probs[mask])).sum())


def conditional_renyi_entropy(j: JointPmf, rho: float) -> float:
    """Conditional Renyi entropy (1/rho) log2 sum_y (sum_x P(x,y)^(1/(1+rho)))^(1+rho)."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    ab = 1.0 / (1.0 + rho)
    inner = (j.probs**ab).sum(axis=0) ** (1.0 + rho)
    return math.log2(float(inner.sum())) / rho


def _log2_power_sum(v: np.ndarray, alpha: float) -> float:
    """log2 sum_i v_i**alpha over positive entries, stable for extreme alpha."""
    v = v[v > 0]
    m = float(v.max())
    return alpha * math.log2(m) + math.log2(float(((v / m) ** alpha).sum()))


def _log2_weighted_power_sum(w: np.ndarray, r: np.ndarray, expo: float) -> float:
    """log2 sum_i w_i r_i**expo, with the extreme ratio factored out."""
    m = float(r.max() if expo > 0 else r.min())
    return expo * math.log2(m) + math.log2(float((w * (r / m) ** expo).sum()))


def renyi_divergence(p: Pmf, q: Pmf, alpha: float) -> float:
    """Renyi divergence (1/(alpha-1)) log2 sum_x P(x)^alpha Q(x)^(1-alpha)."""
    if p.alphabet.symbols != q.alphabet.symbols:
        raise ValueError("distributions must share an alphabet")
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and != 1")
    P, Q = p.probs, q.probs
    if alpha > 1:
        if np.any((P > 0) & (Q == 0)):
            return math.inf
        mask = P > 0
        # sum P^a Q^(1-a) = sum P (P/Q)^(a-1)
        log_s = _log2_weighted_power_sum(P[mask], P[mask] / Q[mask], alpha - 1.0)
    else:
        mask = (P > 0) & (Q > 0)
        if not mask.any():
            return math.inf
        # sum P^a Q^(1-a) = sum Q (P/Q)^a
        log_s = _log2_weighted_power_sum(Q[mask], P[mask] / Q[mask], alpha)
    return log_s / (alpha - 1.0)


def sundaresan_divergence(p: Pmf, q: Pmf, alpha: float) -> float:
    """Mismatch divergence of order alpha between same-alphabet laws, in bits.

    log2 of  (sum_x Q^alpha) * (sum_x P / Q^(1-alpha))^(alpha/(1-alpha))
             / (sum_x P^alpha)^(1/(1-alpha)).

    Infinite exactly when the middle sum degenerates: for alpha < 1 when P puts
    mass outside supp(Q), and for alpha > 1 when the supports are disjoint.
    All three factors are evaluated in the log domain so extreme orders do not
    underflow.
    """
    if p.alphabet.symbols != q.alphabet.symbols:
        raise ValueError("distributions must share an alphabet")
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and != 1")
    P, Q = p.probs, q.probs
    if alpha < 1 and np.any((P > 0) & (Q == 0)):
        return math.inf
    both = (P > 0) & (Q > 0)
    if not both.any():
        return math.inf
    log_mid = _log2_weighted_power_sum(P[both], Q[both], alpha - 1.0)
    log_num = _log2_power_sum(Q, alpha)
    log_den = _log2_power_sum(P, alpha)
    return log_num + alpha / (1.0 - alpha) * log_mid - 1.0 / (1.0 - alpha) * log_den


# ---------------------------------------------------------------------------
# Variational identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VariationalEntropy:
    value: float
    argmax: Pmf


@dataclass(frozen=True)
class VariationalConditional:
    value: float
    q_star: Pmf
    v_star: Channel


def variational_objective(q: Pmf, p: Pmf, rho: float) -> float:
    """H(Q) - (1/rho) D(Q||P) in bits."""
    return shannon_entropy(q) - kl_divergence(q, p) / rho


def _mirror_max_tilted(pv: np.ndarray, rho: float, max_iter: int, tol: float) -> float:
    """max_Q H(Q) - (1/rho) D(Q||pv) by mirror ascent over the simplex on supp(pv).

    Uses a deliberately conservative step (0.6 of the one-shot step) so the
    optimum is reached iteratively rather than by the closed-form tilt.
    """
    if pv.size == 1:
        return 0.0
    q = np.full(pv.size, 1.0 / pv.size)
    eta = 0.6 / (1.0 + 1.0 / rho)
    prev = -math.inf
    val = prev
    for _ in range(max_iter):
        grad = -(np.log(q) + 1.0) - (np.log(q / pv) + 1.0) / rho
        q = q * np.exp(eta * (grad - grad.max()))
        q = np.maximum(q, 1e-300)
        q /= q.sum()
        val = float((-(q * np.log(q)).sum() - (q * np.log(q / pv)).sum() / rho) / LN2)
        if abs(val - prev) < tol:
            break
        prev = val
    return val


def variational_entropy(
    p: Pmf, rho: float, *, max_iter: int = 2000, tol: float = 1e-14
) -> VariationalEntropy:
    """Numerically maximize H(Q) - (1/rho) D(Q||P) over the simplex.

    The returned value comes from the iterative ascent (matching the Renyi
    entropy within solver tolerance); the returned argmax is the exact tilt
    Q*(x) proportional to P(x)^(1/(1+rho)).
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    supp = p.support_indices()
    value = _mirror_max_tilted(p.probs[supp], rho, max_iter, tol)
    tilt = np.zeros(len(p.alphabet))
    w = p.probs[supp] ** (1.0 / (1.0 + rho))
    tilt[supp] = w / w.sum()
    return VariationalEntropy(value, Pmf(p.alphabet, tilt))


def conditional_variational_objective(
    q: Pmf, v: Channel, j: JointPmf, rho: float
) -> float:
    """H(V|Q) - (1/rho) D(Q o V || P_{X,Y}) in bits.

    Q is a law on Y, V a channel from Y to X; rows of V at zero-mass y are
    ignored.  Returns -inf when the pair puts mass where the joint has none.
    """
    value = 0.0
    for yi, qy in enumerate(q.probs):
        if qy == 0:
            continue
        row = v.rows[yi]
        for xi, vx in enumerate(row):
            if vx == 0:
                continue
            pxy = j.probs[xi, yi]
            if pxy == 0:
                return -math.inf
            value += qy * vx * (-math.log2(vx) - math.log2(qy * vx / pxy) / rho)
    return value


def variational_conditional_entropy(
    j: JointPmf, rho: float, *, max_iter: int = 2000, tol: float = 1e-14
) -> VariationalConditional:
    """Numerically maximize H(V|Q) - (1/rho) D(QoV||P_XY) over laws Q and kernels V.

    The objective separates: for fixed y the inner problem over V(.|y) is the
    unconditional variational problem against P_{X|Y}(.|y), and the outer
    problem over Q is a tilted-linear maximization against P_Y.  Both stages
    run the generic mirror ascent; the returned maximizers are the closed
    forms (per-y tilts of P_{X|Y}, and P_Y exponentially tilted by the inner
    values).
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    py, kernel = condition_joint(j)
    ys = py.support_indices()
    inner_bits = np.array(
        [
            _mirror_max_tilted(
                kernel.rows[yi][kernel.rows[yi] > 0], rho, max_iter, tol
            )
            for yi in ys
        ]
    )

    # Outer ascent for max_Q sum_y Q(y) a(y) - (1/rho) D(Q||P_Y) on supp(P_Y).
    pyv = py.probs[ys]
    value = float(inner_bits[0])
    if ys.size > 1:
        a_nats = inner_bits * LN2
        qv = np.full(ys.size, 1.0 / ys.size)
        eta = min(0.6 * rho, 50.0)
        prev = -math.inf
        for _ in range(max_iter):
            grad = a_nats - (np.log(qv / pyv) + 1.0) / rho
            qv = qv * np.exp(eta * (grad - grad.max()))
            qv = np.maximum(qv, 1e-300)
            qv /= qv.sum()
            value = float(
                (qv * a_nats).sum() / LN2
                - float((qv * np.log(qv / pyv)).sum()) / (rho * LN2)
            )
            if abs(value - prev) < tol:
                break
            prev = value

    ab = 1.0 / (1.0 + rho)
    vrows = np.full_like(kernel.rows, np.nan)
    weights = np.zeros(len(py.alphabet))
    for yi in ys:
        row = kernel.rows[yi]
        tilted = np.zeros_like(row)
        tilted[row > 0] = row[row > 0] ** ab
        weights[yi] = py.probs[yi] * float(tilted.sum()) ** (1.0 + rho)
        vrows[yi] = tilted / tilted.sum()
    q_star = Pmf(py.alphabet, weights / weights.sum())
    v_star = Channel(j.y_alphabet, j.x_alphabet, vrows)
    return VariationalConditional(value, q_star, v_star)


# ---------------------------------------------------------------------------
# Rate-distortion
# ---------------------------------------------------------------------------

#: Residual below which a stalled alternating minimization is still accepted
#: (fixed-point iterations plateau at float noise well above 1e-12).
_SOFT_RESIDUAL = 1e-9


def _alternating_min(
    qx: np.ndarray,
    weights: np.ndarray,
    q0: np.ndarray,
    max_iter: int,
    tol: float,
    strict: bool = True,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Minimize I(qx, W) + implicit slope term for fixed per-pair weights.

    `weights[x, xhat]` is 2**(-s*d) (or a 0/1 mask for the zero-distortion
    problem).  Returns the reproduction marginal, the channel, and the final
    residual.  Raises ConvergenceError at the iteration cap unless the
    residual already sits at the float-noise floor (or strict is off).
    """
    q = q0.copy()
    res = math.inf
    w = weights * q[None, :]
    for _ in range(max_iter):
        w = weights * q[None, :]
        c = np.maximum(w.sum(axis=1), 1e-300)
        w = w / c[:, None]
        qn = qx @ w
        res = float(np.abs(qn - q).sum())
        q = qn
        if res < tol:
            return q, w, res
    if strict and res > _SOFT_RESIDUAL:
        raise ConvergenceError(
            f"alternating minimization did not converge in {max_iter} iterations "
            f"(residual {res:.3e})",
            residual=res,
        )
    return q, w, res


def _mutual_information(qx: np.ndarray, w: np.ndarray, q: np.ndarray) -> float:
    mask = w > 0
    qb = np.broadcast_to(np.maximum(q, 1e-300), w.shape)
    ratio = np.zeros_like(w)
    ratio[mask] = np.log2(w[mask] / qb[mask])
    return float((qx[:, None] * w * ratio).sum())


def _rd_solve(
    qx: np.ndarray,
    dmat: np.ndarray,
    level: float,
    max_iter: int,
    tol: float,
    s_hint: float | None = None,
    strict: bool = True,
    bracket_tol: float = 1e-13,
    q_hint: np.ndarray | None = None,
) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Rate R(qx, level), its envelope gradient, the slope, and the output law.

    The gradient component for letter x is -log2 sum_xhat q*(xhat) 2**(-s* d),
    evaluated at the optimal slope s* and reproduction marginal q*.
    """
    nx, nh = dmat.shape
    start = q_hint if q_hint is not None else np.full(nh, 1.0 / nh)
    dmax = float((qx @ dmat).min())
    if level >= dmax - 1e-15:
        return 0.0, np.zeros(nx), 0.0, start
    if level <= 0.0:
        mask = (dmat == 0).astype(float)
        q, w, _ = _alternating_min(qx, mask, start, max_iter, tol, strict)
        rate = _mutual_information(qx, w, q)
        c = np.maximum((mask * q[None, :]).sum(axis=1), 1e-300)
        return rate, -np.log2(c), math.inf, q

    def solve_at(s: float, q0: np.ndarray) -> tuple[np.ndarray, float]:
        q, w, _ = _alternating_min(qx, np.exp2(-s * dmat), q0, max_iter, tol, strict)
        return q, float((qx[:, None] * w * dmat).sum())

    # Bracket the slope so that distortion(s_lo) > level >= distortion(s_hi).
    s_hi = s_hint if s_hint else 1.0
    s_lo = 0.0
    q = start
    for _ in range(120):
        q, d_hi = solve_at(s_hi, q)
        if d_hi <= level:
            break
        s_lo = s_hi
        s_hi *= 2.0
    else:
        raise ConvergenceError("could not bracket the rate-distortion slope")

    for _ in range(200):
        s_mid = 0.5 * (s_lo + s_hi)
        if s_hi - s_lo <= bracket_tol * max(1.0, s_hi) or (s_lo == 0.0 and s_mid < 1e-12):
            break
        q, d_mid = solve_at(s_mid, q)
        if abs(d_mid - level) < 1e-14:
            s_hi = s_mid
            break
        if d_mid <= level:
            s_hi = s_mid
        else:
            s_lo = s_mid

    weights = np.exp2(-s_hi * dmat)
    q, w, _ = _alternating_min(qx, weights, q, max_iter, tol, strict)
    dist = float((qx[:, None] * w * dmat).sum())
    rate = _mutual_information(qx, w, q)
    value = max(0.0, rate + s_hi * (dist - level))
    c = np.maximum((weights * q[None, :]).sum(axis=1), 1e-300)
    return value, -np.log2(c), s_hi, q


def rate_distortion(
    q: Pmf, dist: Distortion, *, max_iter: int = 100_000, tol: float = 1e-13
) -> float:
    """Classical rate-distortion function R(Q, D) at D = dist.level, in bits.

    Solved by alternating minimization over reproduction channels combined
    with bisection on the Lagrangian slope; exactly zero when the level is
    achievable with a single reproduction letter.
    """
    if q.alphabet.symbols != dist.x_alphabet.symbols:
        raise ValueError("source alphabet must match the distortion's x alphabet")
    supp = q.support_indices()
    rate, _, _, _ = _rd_solve(q.probs[supp], dist.d[supp], dist.level, max_iter, tol)
    return rate


def _simplex_starts(pv: np.ndarray, restarts: int, rng: np.random.Generator) -> list[np.ndarray]:
    starts = [pv.copy(), np.full(pv.size, 1.0 / pv.size)]
    while len(starts) < restarts:
        starts.append(rng.dirichlet(np.ones(pv.size)))
    return starts[:max(restarts, 1)]


def _rd_quick(
    qx: np.ndarray,
    dmat: np.ndarray,
    level: float,
    s: float,
    q: np.ndarray,
) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Cheap inexact R(qx, level) evaluation for the outer ascent.

    Tracks the Lagrangian slope with a few secant steps instead of a full
    bisection; the returned value rate + s (dist - level) is a valid lower
    bound at any slope, so the ascent never overshoots the true objective.
    Returns (value, gradient, slope, output law).
    """
    dmax = float((qx @ dmat).min())
    if level >= dmax - 1e-15:
        return 0.0, np.zeros(dmat.shape[0]), 1.0, q
    if level <= 0.0:
        mask = (dmat == 0).astype(float)
        q, w, _ = _alternating_min(qx, mask, q, 600, 1e-10, strict=False)
        c = np.maximum((mask * q[None, :]).sum(axis=1), 1e-300)
        return _mutual_information(qx, w, q), -np.log2(c), 1.0, q

    prev: tuple[float, float] | None = None
    w = None
    dist = level
    target = max(1e-7, 1e-6 * level)
    for _ in range(12):
        q, w, _ = _alternating_min(qx, np.exp2(-s * dmat), q, 400, 1e-10, strict=False)
        dist = float((qx[:, None] * w * dmat).sum())
        if abs(dist - level) < target:
            break
        if prev is not None and prev[1] != dist:
            s_new = s - (dist - level) * (s - prev[0]) / (dist - prev[1])
        else:
            s_new = s * 1.5 if dist > level else s / 1.5
        prev = (s, dist)
        if not (s / 8.0 <= s_new <= s * 8.0) or not math.isfinite(s_new) or s_new <= 0:
            s_new = s * 2.0 if dist > level else s / 2.0
        s = s_new
    value = max(0.0, _mutual_information(qx, w, q) + s * (dist - level))
    c = np.maximum((np.exp2(-s * dmat) * q[None, :]).sum(axis=1), 1e-300)
    return value, -np.log2(c), s, q


def renyi_rate_distortion(
    p: Pmf,
    dist: Distortion,
    rho: float,
    *,
    restarts: int = 20,
    seed: int = 0,
    max_iter: int = 250,
    inner_tol: float = 1e-12,
) -> float:
    """max over laws Q of R(Q, D) - (1/rho) D(Q||P), at D = dist.level, in bits.

    Multiplicative-weights (exponentiated-gradient) ascent over the simplex
    with random restarts and step decay; the inner R(Q, D) is re-solved for
    every iterate.  Raises ConvergenceError if every restart degenerates.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    if p.alphabet.symbols != dist.x_alphabet.symbols:
        raise ValueError("source alphabet must match the distortion's x alphabet")
    supp = p.support_indices()
    pv = p.probs[supp]
    dsub = dist.d[supp]
    rng = np.random.default_rng(seed)

    def tight_value(qv: np.ndarray) -> float:
        rate, _, _, _ = _rd_solve(
            qv, dsub, dist.level, 20_000, inner_tol, strict=False, bracket_tol=1e-11
        )
        return rate - float((qv * np.log2(qv / pv)).sum()) / rho

    best = -math.inf
    eta0 = min(1.0, rho)
    for qv in _simplex_starts(pv, restarts, rng):
        qv = np.maximum(qv, 1e-12)
        qv = qv / qv.sum()
        settled = 0
        slope = 1.0
        est = -math.inf
        prev_est = math.inf
        q_out = np.full(dsub.shape[1], 1.0 / dsub.shape[1])
        for t in range(max_iter):
            rate, grad_rate, slope, q_out = _rd_quick(qv, dsub, dist.level, slope, q_out)
            est = rate - float((qv * np.log2(qv / pv)).sum()) / rho
            if math.isnan(est):
                break
            settled = settled + 1 if abs(est - prev_est) < 1e-8 else 0
            prev_est = est
            # The per-iterate value is only an estimate (inexact inner
            # solves), so it drives stopping, never the choice of argmax.
            if settled >= 6 and t >= 10:
                break
            if t >= 25 and est < best - 1e-5:
                break
            grad = grad_rate - (np.log2(qv / pv) + 1.0 / LN2) / rho
            eta = eta0 / math.sqrt(1.0 + t / 20.0)
            qv = qv * np.exp2(eta * (grad - grad.max()))
            qv = np.maximum(qv, 1e-300)
            qv /= qv.sum()
        if math.isnan(est) or est < best - 1e-6:
            continue
        best = max(best, tight_value(qv))
    if best == -math.inf or math.isnan(best):
        raise ConvergenceError(f"simplex ascent stagnated (best value {best!r})")
    return best


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2(1-x) on [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("argument must lie in [0, 1]")
    if x in (0.0, 1.0):
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x))


def binary_entropy_inv(y: float, *, tol: float = 1e-12) -> float:
    """Inverse of the binary entropy function on [0, 1/2], by bisection."""
    if not 0.0 <= y <= 1.0:
        raise ValueError("argument must lie in [0, 1]")
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binary_hamming_renyi_rd(p: float, level: float, rho: float) -> float:
    """Closed form of the Renyi rate-distortion for a Bernoulli(p) source, Hamming distortion.

    H_{1/(1+rho)}(p) - h(D) below the entropy-matching level, zero beyond it.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    if level < 0:
        raise ValueError("level must be nonnegative")
    if not rho > 0:
        raise ValueError("rho must be positive")
    h_renyi = renyi_entropy(Pmf(Alphabet(("0", "1")), np.array([p, 1.0 - p])), rho)
    if level >= binary_entropy_inv(h_renyi):
        return 0.0
    return max(0.0, h_renyi - binary_entropy(level))

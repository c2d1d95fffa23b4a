"""Deterministic invariant suite behind ``taskcode selftest``.

Each check exercises one documented invariant on seeded random instances and
either passes silently or reports the first violation.  Runs are single
threaded and fully determined by the seed, so repeated invocations produce
byte-identical output.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product
from typing import Callable

import numpy as np

from .costs import CostFn, cost_converse_bound, cost_decomposition, cost_moment
from .encoders import (
    TaskEncoder,
    build_encoder,
    build_mismatched_encoder,
    build_side_info_encoder,
    moment,
    optimal_moment_bounds,
    side_info_moment,
)
from .lossy import build_lossy_codec, lossy_moment, max_fidelity_gap
from .measures import (
    Distortion,
    binary_hamming_renyi_rd,
    conditional_renyi_entropy,
    conditional_variational_objective,
    kl_divergence,
    rate_distortion,
    renyi_entropy,
    renyi_rate_distortion,
    shannon_entropy,
    sundaresan_divergence,
    variational_conditional_entropy,
    variational_entropy,
    variational_objective,
)
from .oracle import exact_min_moment, exact_min_moment_side_info
from .partitioning import Budget, Partition, build_budget_partition, partition_identity, subset_count_bound
from .probability import (
    Alphabet,
    JointPmf,
    Pmf,
    ceiling_power_bound,
    compose_joint,
    condition_joint,
    make_pmf,
    product_pmf,
)
from .universal import (
    BlockCodeParams,
    build_universal_encoder,
    build_universal_side_info_encoder,
    enumerate_types,
    multinomial,
    universal_moment_bound,
)

_ALPHA = "abcdefghijklmnopqrst"


def _alphabet(k: int) -> Alphabet:
    return Alphabet(tuple(_ALPHA[:k]))


def _random_pmf(rng: np.random.Generator, k: int, zeros: bool = False) -> Pmf:
    w = rng.dirichlet(np.ones(k))
    if zeros and k > 2 and rng.random() < 0.3:
        w[rng.integers(k)] = 0.0
        w /= w.sum()
    return Pmf(_alphabet(k), w)


def _random_joint(rng: np.random.Generator, kx: int, ky: int) -> JointPmf:
    w = rng.dirichlet(np.ones(kx * ky)).reshape(kx, ky)
    return JointPmf(_alphabet(kx), Alphabet(tuple("uvwxyz"[:ky])), w)


def check_pmf_construction(rng: np.random.Generator) -> None:
    for _ in range(200):
        k = int(rng.integers(2, 9))
        w = rng.random(k) * 10
        if rng.random() < 0.4:
            w[rng.integers(k)] = 0.0
        if not w.sum():
            continue
        p = make_pmf(_alphabet(k), list(w))
        assert abs(float(p.probs.sum()) - 1.0) < 1e-12
        assert np.all(p.probs >= 0)
        assert np.all((p.probs == 0) == (w == 0)), "zeros must be preserved exactly"


def check_product_marginals(rng: np.random.Generator) -> None:
    for _ in range(40):
        k = int(rng.integers(2, 5))
        n = int(rng.integers(1, 4))
        p = _random_pmf(rng, k)
        pn = product_pmf(p, n)
        assert abs(float(pn.probs.sum()) - 1.0) < 1e-9
        grid = pn.probs.reshape((k,) * n)
        for axis in range(n):
            other = tuple(a for a in range(n) if a != axis)
            marg = grid.sum(axis=other)
            assert np.allclose(marg, p.probs, atol=1e-12)


def check_condition_recombine(rng: np.random.Generator) -> None:
    for _ in range(60):
        j = _random_joint(rng, int(rng.integers(2, 5)), int(rng.integers(2, 4)))
        py, kernel = condition_joint(j)
        back = compose_joint(py, kernel)
        assert np.allclose(back.probs, j.probs, atol=1e-12)


def check_ceiling_inequality(rng: np.random.Generator) -> None:
    for _ in range(2000):
        xi = float(rng.random() * 10.0 ** float(rng.integers(-3, 4)))
        rho = float(rng.random() * 10.0 ** float(rng.integers(-2, 2))) + 1e-9
        lhs = math.ceil(xi) ** rho
        assert lhs <= ceiling_power_bound(xi, rho)
        # strict form, rearranged so adding 1 cannot round the margin away
        assert lhs - 1.0 < 2.0**rho * xi**rho


def check_entropy_orders(rng: np.random.Generator) -> None:
    rhos = [1e-3, 0.1, 0.5, 1.0, 2.0, 10.0, 1e3]
    for _ in range(50):
        p = _random_pmf(rng, int(rng.integers(2, 8)), zeros=True)
        vals = [renyi_entropy(p, r) for r in rhos]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:])), "nondecreasing in rho"
        hs = shannon_entropy(p)
        top = math.log2(len(p.support()))
        assert all(hs - 1e-9 <= v <= top + 1e-9 for v in vals)
        assert abs(vals[0] - hs) < 1e-2 and abs(vals[-1] - top) < 1e-2


def check_entropy_identity(rng: np.random.Generator) -> None:
    for _ in range(100):
        p = _random_pmf(rng, int(rng.integers(2, 8)))
        rho = float(rng.choice([0.25, 0.5, 1.0, 2.0, 5.0]))
        h = renyi_entropy(p, rho)
        res = variational_entropy(p, rho)
        assert abs(res.value - h) < 1e-9
        assert abs(variational_objective(res.argmax, p, rho) - h) < 1e-12


def check_conditional_identity(rng: np.random.Generator) -> None:
    for _ in range(40):
        j = _random_joint(rng, int(rng.integers(2, 5)), int(rng.integers(2, 4)))
        rho = float(rng.choice([0.5, 1.0, 2.0]))
        h = conditional_renyi_entropy(j, rho)
        res = variational_conditional_entropy(j, rho)
        assert abs(res.value - h) < 1e-9
        plug = conditional_variational_objective(res.q_star, res.v_star, j, rho)
        assert abs(plug - h) < 1e-12


def check_mismatch_divergence(rng: np.random.Generator) -> None:
    for _ in range(200):
        k = int(rng.integers(2, 7))
        p, q = _random_pmf(rng, k), _random_pmf(rng, k)
        alpha = float(rng.choice([0.3, 0.5, 0.8, 1.5, 3.0]))
        d = sundaresan_divergence(p, q, alpha)
        assert d >= -1e-12
        assert sundaresan_divergence(p, p, alpha) < 1e-12
        d2 = sundaresan_divergence(product_pmf(p, 2), product_pmf(q, 2), alpha)
        assert abs(d2 - 2 * d) < 1e-9
    p = make_pmf(_alphabet(3), [1, 1, 0])
    q = make_pmf(_alphabet(3), [0, 1, 1])
    assert math.isinf(sundaresan_divergence(p, q, 0.5))
    for _ in range(50):
        k = int(rng.integers(2, 6))
        p = _random_pmf(rng, k)
        q = _random_pmf(rng, k)
        kl = kl_divergence(p, q)
        assert abs(sundaresan_divergence(p, q, 1.0 + 1e-4) - kl) < 1e-3
        assert abs(sundaresan_divergence(p, q, 1.0 - 1e-4) - kl) < 1e-3
        assert abs(sundaresan_divergence(p, q, 1e-4) - 0.0) < 1e-3  # equal supports
        largest = math.log2(p.probs.max() / np.mean(p.probs[q.probs == q.probs.max()]))
        assert abs(sundaresan_divergence(p, q, 1e3) - largest) < 1e-2


def check_rate_distortion(rng: np.random.Generator) -> None:
    alph = _alphabet(2)
    for _ in range(20):
        q = float(rng.uniform(0.05, 0.5))
        d = float(rng.uniform(0.0, 0.6))
        pmf = make_pmf(alph, [q, 1 - q])
        got = rate_distortion(pmf, Distortion.hamming(alph, d))
        want = (shannon_entropy(pmf) - (0.0 if d == 0 else -d * math.log2(d) - (1 - d) * math.log2(1 - d))) if d < min(q, 1 - q) else 0.0
        assert abs(got - want) < 1e-9, (q, d, got, want)


def check_renyi_rd(rng: np.random.Generator) -> None:
    alph = _alphabet(2)
    p = make_pmf(alph, [Fraction(1, 4), Fraction(3, 4)])
    for rho, level in ((0.5, 0.0), (1.0, 0.1), (2.0, 0.2), (1.0, 0.4)):
        got = renyi_rate_distortion(p, Distortion.hamming(alph, level), rho, restarts=6)
        want = binary_hamming_renyi_rd(0.25, level, rho)
        assert abs(got - want) < 1e-4, (rho, level, got, want)


def check_partition_identity(rng: np.random.Generator) -> None:
    for _ in range(300):
        k = int(rng.integers(1, 13))
        labels = _alphabet(k)
        assign = rng.integers(0, rng.integers(1, k + 1), size=k)
        blocks: dict[int, list[str]] = {}
        for s, b in zip(labels.symbols, assign):
            blocks.setdefault(int(b), []).append(s)
        part = Partition(labels, tuple(tuple(v) for v in blocks.values()))
        assert partition_identity(part) == Fraction(len(part.blocks))


def check_budget_partition(rng: np.random.Generator) -> None:
    for _ in range(500):
        k = int(rng.integers(1, 17))
        caps = tuple(
            math.inf if rng.random() < 0.2 else int(rng.integers(1, k + 1))
            for _ in range(k)
        )
        b = Budget(_alphabet(k), caps)
        part = build_budget_partition(b)
        for i, s in enumerate(b.alphabet.symbols):
            assert part.L(s) <= min(caps[i], k)
        assert len(part.blocks) <= subset_count_bound(b.mu, k)
        assert partition_identity(part) == Fraction(len(part.blocks))
    example = build_budget_partition(Budget(_alphabet(4), (1, 2, 4, 4)))
    assert len(example.blocks) == 3


def check_budget_relabeling(rng: np.random.Generator) -> None:
    for _ in range(100):
        k = int(rng.integers(2, 10))
        caps = [math.inf if rng.random() < 0.2 else int(rng.integers(1, k + 1)) for _ in range(k)]
        perm = rng.permutation(k)
        part_a = build_budget_partition(Budget(_alphabet(k), tuple(caps)))
        part_b = build_budget_partition(Budget(_alphabet(k), tuple(caps[i] for i in perm)))
        sig_a = sorted(sorted(caps[part_a.alphabet.index(s)] for s in blk) for blk in part_a.blocks)
        sig_b = sorted(sorted(caps[perm[part_b.alphabet.index(s)]] for s in blk) for blk in part_b.blocks)
        assert sig_a == sig_b


def check_moment_sandwich(rng: np.random.Generator) -> None:
    for _ in range(200):
        k = int(rng.integers(2, 7))
        p = _random_pmf(rng, k)
        rho = float(rng.choice([0.5, 1.0, 2.0]))
        m_low = int(math.floor(math.log2(k) + 2)) + 1
        big_m = int(rng.integers(m_low, 13))
        lower, upper = optimal_moment_bounds(p, rho, big_m)
        best = exact_min_moment(p, rho, big_m).min_moment
        built = moment(build_encoder(p, rho, big_m), p, rho)
        assert lower <= best + 1e-12
        assert best <= built + 1e-12
        assert built < upper


def check_moment_monotone(rng: np.random.Generator) -> None:
    for _ in range(40):
        k = int(rng.integers(2, 7))
        p = _random_pmf(rng, k)
        rho = float(rng.choice([0.5, 1.0, 2.0]))
        prev = math.inf
        for m in range(1, k + 2):
            cur = exact_min_moment(p, rho, m).min_moment
            assert cur <= prev + 1e-12
            prev = cur
        assert abs(prev - 1.0) < 1e-12, "singletons once M >= |X|"


def check_mismatch_bound(rng: np.random.Generator) -> None:
    for _ in range(200):
        k = int(rng.integers(2, 7))
        p, q = _random_pmf(rng, k), _random_pmf(rng, k)
        rho = float(rng.choice([0.5, 1.0, 2.0]))
        m = int(rng.integers(int(math.log2(k) + 2) + 1, 13))
        enc, bound = build_mismatched_encoder(p, q, rho, m)
        assert moment(enc, p, rho) < bound


def check_side_info(rng: np.random.Generator) -> None:
    for _ in range(30):
        j = _random_joint(rng, int(rng.integers(2, 5)), int(rng.integers(2, 4)))
        rho = float(rng.choice([0.5, 1.0, 2.0]))
        m_low = int(math.floor(math.log2(len(j.x_alphabet)) + 2)) + 1
        m = int(rng.integers(m_low, 10))
        enc = build_side_info_encoder(j, rho, m)
        got = side_info_moment(enc, j, rho)
        h = conditional_renyi_entropy(j, rho)
        mt = (m - math.log2(len(j.x_alphabet)) - 2) / 4
        assert 2.0 ** (rho * (h - math.log2(m))) <= got + 1e-12
        assert got < 1.0 + 2.0 ** (rho * (h - math.log2(mt)))
        best = exact_min_moment_side_info(j, rho, m).min_moment
        assert best <= got + 1e-12


def check_universal(rng: np.random.Generator) -> None:
    alph = _alphabet(2)
    enc = build_universal_encoder(BlockCodeParams(6, 1.0), alph)
    assert enc.total_descriptions <= enc.M
    assert sum(t.class_size() for t in enc.types) == 2**6
    assert all(t.class_size() == multinomial(t.counts) for t in enc.types)
    for _ in range(100):
        p = Pmf(alph, rng.dirichlet((1.0, 1.0)))
        for rho in (0.5, 1.0, 2.0):
            assert enc.moment(p, rho) <= universal_moment_bound(6, 1.0, rho, p)
    p = make_pmf(alph, [1, 3])
    prev = math.inf
    for n in range(2, 9):
        cur = build_universal_encoder(BlockCodeParams(n, 1.0), alph).moment(p, 1.0)
        assert cur <= prev + 1e-12
        prev = cur


def check_universal_side_info(rng: np.random.Generator) -> None:
    xa, ya = _alphabet(2), Alphabet(("u", "v"))
    enc = build_universal_side_info_encoder(BlockCodeParams(3, 1.5), xa, ya)
    by_type: dict[tuple[int, ...], tuple[int, ...]] = {}
    for yr, yt in enumerate(product(range(2), repeat=3)):
        key = tuple(sorted(yt))
        sizes = enc.fiber_size_multiset(yr)
        assert by_type.setdefault(key, sizes) == sizes, "must depend on y^n only via type"
    j = _random_joint(rng, 2, 2)
    j = JointPmf(xa, ya, j.probs)
    got = enc.moment(j, 1.0)
    assert got >= 2.0 ** (1.0 * (3 * conditional_renyi_entropy(j, 1.0) - math.log2(enc.M))) - 1e-9


def check_lossy(rng: np.random.Generator) -> None:
    alph = _alphabet(2)
    p = make_pmf(alph, [1, 3])
    for n in (2, 4, 6):
        codec = build_lossy_codec(n, 1.0, Distortion.hamming(alph, 0.25), 0.25)
        assert max_fidelity_gap(codec) <= 1e-9
        seen: set[tuple[int, ...]] = set()
        for chunk in codec.decode_sets:
            for w in chunk:
                assert w not in seen
                seen.add(w)
    # zero level reduces exactly to the universal construction
    n, rate = 4, 2.6
    codec0 = build_lossy_codec(n, rate, Distortion.hamming(alph, 0.0), 0.0)
    uni = build_universal_encoder(BlockCodeParams(n, rate), alph).as_task_encoder()
    assert tuple(int(m) for m in codec0.assign) == uni.assign
    assert abs(lossy_moment(codec0, p, 1.0) - moment(uni, product_pmf(p, n), 1.0)) < 1e-12
    prev = math.inf
    for level in (0.0, 0.125, 0.25, 0.375, 0.5):
        codec = build_lossy_codec(4, 1.2, Distortion.hamming(alph, level), level)
        cur = lossy_moment(codec, p, 1.0)
        assert cur <= prev + 1e-12
        prev = cur


def check_costs(rng: np.random.Generator) -> None:
    alph = _alphabet(2)
    p = make_pmf(alph, [1, 3])
    cost = CostFn(alph, (0.0, 1.0))
    # converse bound vs every encoder on exhaustive tiny instances
    from .oracle import rgs_strings
    from .probability import tuple_alphabet

    for n in (1, 2):
        tuples = tuple_alphabet(p.alphabet, n)
        rate = 0.5
        bound = cost_converse_bound(p, cost, rate, n)
        m_cap = max(1, int(2 ** (n * rate)))
        for row in rgs_strings(len(tuples), m_cap):
            enc = TaskEncoder(tuples, m_cap, tuple(v + 1 for v in row))
            assert cost_moment(enc, p, cost, n) >= bound - 1e-12
    # decomposition and the cross-term cap
    for _ in range(50):
        n = int(rng.integers(1, 4))
        tuples = tuple_alphabet(p.alphabet, n)
        m = int(rng.integers(1, 5))
        assign = tuple(int(v) for v in rng.integers(1, m + 1, size=len(tuples)))
        enc = TaskEncoder(tuples, m, assign)
        own, cross = cost_decomposition(enc, p, cost, n)
        assert abs(own + cross - cost_moment(enc, p, cost, n)) < 1e-12
        task_moment = moment(enc, product_pmf(p, n), 1.0)
        assert cross <= cost.c_max * (task_moment - 1.0) + 1e-12
    # universal encoders drive the cost moment to E[c]
    prev = math.inf
    for n in range(2, 9):
        enc = build_universal_encoder(BlockCodeParams(n, 1.0), alph)
        cur = cost_moment(enc, p, cost, n)
        assert cur <= prev + 1e-9
        prev = cur
    assert prev - cost.expected(p) < 0.05
    # zero expected cost: one bit suffices
    zero_cost = CostFn(alph, (0.0, 0.0))
    enc2 = TaskEncoder(alph, 2, (1, 2))
    assert cost_moment(enc2, p, zero_cost, 1) == 0.0


def check_oracle_bounds(rng: np.random.Generator) -> None:
    for _ in range(100):
        k = int(rng.integers(2, 7))
        p = _random_pmf(rng, k)
        rho = float(rng.choice([0.5, 1.0, 2.0]))
        m = int(rng.integers(1, k + 2))
        res = exact_min_moment(p, rho, m)
        lower, _ = optimal_moment_bounds(p, rho, m)
        assert lower <= res.min_moment + 1e-12
        assert res.blocks_used <= min(m, k)


def check_oracle_separability(rng: np.random.Generator) -> None:
    for _ in range(10):
        j = _random_joint(rng, 3, 2)
        rho, m = 1.0, 2
        per_y = exact_min_moment_side_info(j, rho, m).min_moment
        py, kernel = condition_joint(j)
        best = math.inf
        from .oracle import rgs_strings
        rows = list(rgs_strings(3, m))
        for r0 in rows:
            for r1 in rows:
                val = 0.0
                for yi, row in enumerate((r0, r1)):
                    sizes = np.bincount(np.array(row))
                    l = sizes[np.array(row)]
                    val += float(py.probs[yi]) * float(
                        (kernel.rows[yi] * l.astype(float) ** rho).sum()
                    )
                best = min(best, val)
        assert abs(best - per_y) < 1e-12


def check_atypical_grouping(rng: np.random.Generator) -> None:
    p = make_pmf(_alphabet(4), [Fraction(2, 5), Fraction(3, 10), Fraction(1, 5), Fraction(1, 10)])
    res = exact_min_moment(p, 1.0, 2, exact=True)
    assert res.exact_moment == Fraction(2)
    assert res.argmin.blocks == (("a", "b"), ("c", "d"))
    top_block = res.argmin.blocks[res.argmin.block_index("a")]
    assert len(top_block) > 1, "optimum need not isolate the most likely task"


CHECKS: list[tuple[str, Callable[[np.random.Generator], None]]] = [
    ("prob.pmf-construction", check_pmf_construction),
    ("prob.product-marginals", check_product_marginals),
    ("prob.condition-recombine", check_condition_recombine),
    ("prob.ceiling-inequality", check_ceiling_inequality),
    ("measures.entropy-orders", check_entropy_orders),
    ("measures.entropy-identity", check_entropy_identity),
    ("measures.conditional-identity", check_conditional_identity),
    ("measures.mismatch-divergence", check_mismatch_divergence),
    ("measures.rate-distortion", check_rate_distortion),
    ("measures.renyi-rd", check_renyi_rd),
    ("partition.identity", check_partition_identity),
    ("partition.budget", check_budget_partition),
    ("partition.relabeling", check_budget_relabeling),
    ("encoder.sandwich", check_moment_sandwich),
    ("encoder.monotone-in-m", check_moment_monotone),
    ("encoder.mismatch-bound", check_mismatch_bound),
    ("encoder.side-info", check_side_info),
    ("universal.bound", check_universal),
    ("universal.side-info", check_universal_side_info),
    ("lossy.fidelity", check_lossy),
    ("cost.bounds", check_costs),
    ("oracle.bounds", check_oracle_bounds),
    ("oracle.separability", check_oracle_separability),
    ("oracle.atypical-grouping", check_atypical_grouping),
]


def run(seed: int = 0) -> int:
    failures = 0
    for name, fn in CHECKS:
        rng = np.random.default_rng(seed)
        try:
            fn(rng)
        except AssertionError as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"ok {name}")
    if failures:
        print(f"selftest: FAIL ({failures} of {len(CHECKS)} checks)")
        return 1
    print(f"selftest: PASS ({len(CHECKS)} checks, seed {seed})")
    return 0

"""Command-line front end.

Numeric answers print with 6 significant digits; sweeps write RFC-4180 CSV
(UTF-8, ``\n`` line endings) with an explicit header row.  Exit codes: 0 on
success, 1 on usage errors (bad flags, malformed JSON), 2 on numeric failure
(non-convergence or infeasible parameters).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from . import selftest as selftest_mod
from .costs import cost_converse_bound, cost_moment, load_costs
from .encoders import build_encoder, moment, optimal_moment_bounds
from .lossy import build_lossy_codec, lossy_moment, max_fidelity_gap
from .measures import (
    Distortion,
    binary_hamming_renyi_rd,
    renyi_divergence,
    renyi_entropy,
    sundaresan_divergence,
)
from .oracle import exact_min_moment
from .probability import (
    ConvergenceError,
    EnumerationCapError,
    InfeasibleError,
    load_joint,
    load_pmf,
)
from .universal import (
    BlockCodeParams,
    build_universal_encoder,
    build_universal_side_info_encoder,
    universal_moment_bound,
)

USAGE_ERROR = 1
NUMERIC_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _parse_n_range(spec: str) -> list[int]:
    """Parse "4" or "2..12" into a list of block lengths."""
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(spec)]


def _write_csv(path: str | None, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    out = open(path, "w", encoding="utf-8", newline="") if path else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    finally:
        if path:
            out.close()


def _map_jobs(fn: Callable, cells: list, jobs: int) -> list:
    """Evaluate independent sweep cells, preserving input order."""
    if jobs <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, cells))


def _cmd_entropy(args: argparse.Namespace) -> int:
    p = load_pmf(args.pmf, args.normalize)
    print(_fmt(renyi_entropy(p, args.rho)))
    return 0


def _cmd_divergence(args: argparse.Namespace) -> int:
    p = load_pmf(args.p, args.normalize)
    q = load_pmf(args.q, args.normalize)
    fn = sundaresan_divergence if args.kind == "sundaresan" else renyi_divergence
    value = fn(p, q, args.alpha)
    print("inf" if math.isinf(value) else _fmt(value))
    return 0


def _cmd_encode(args: argparse.Namespace) -> int:
    p = load_pmf(args.pmf, args.normalize)
    enc = build_encoder(p, args.rho, args.descriptions)
    lower, upper = optimal_moment_bounds(p, args.rho, args.descriptions)
    print(f"moment {_fmt(moment(enc, p, args.rho))}")
    print(f"lower_bound {_fmt(lower)}")
    print(f"upper_bound {_fmt(upper) if upper is not None else 'none'}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(enc.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    p = load_pmf(args.pmf, args.normalize)
    res = exact_min_moment(p, args.rho, args.max_descriptions)
    print(f"min_moment {_fmt(res.min_moment)}")
    print(f"blocks_used {res.blocks_used}")
    print(f"argmin {json.dumps(res.argmin.to_json()['blocks'])}")
    return 0


def _sweep_cell(cell: tuple) -> tuple:
    n, rate, rho, pmf_path, normalize = cell
    p = load_pmf(pmf_path, normalize)
    enc = build_universal_encoder(BlockCodeParams(n, rate), p.alphabet)
    h = renyi_entropy(p, rho)
    lower = 2.0 ** (rho * (n * h - math.log2(enc.M)))
    return (n, enc.moment(p, rho), lower, universal_moment_bound(n, rate, rho, p))


def _cmd_sweep_rate(args: argparse.Namespace) -> int:
    cells = [(n, args.rate, args.rho, args.pmf, args.normalize) for n in _parse_n_range(args.n)]
    rows = _map_jobs(_sweep_cell, cells, args.jobs)
    _write_csv(args.csv, ["n", "moment", "lower_bound", "universal_bound"], rows)
    return 0


def _rd_cell(cell: tuple) -> tuple:
    p, rho, level = cell
    return (level, binary_hamming_renyi_rd(p, level, rho))


def _cmd_rd_curve(args: argparse.Namespace) -> int:
    rhos = args.rho or [1.0]
    levels = [args.dmax * i / args.steps for i in range(args.steps + 1)]
    columns = []
    for rho in rhos:
        cells = [(args.p, rho, lv) for lv in levels]
        columns.append([v for _, v in _map_jobs(_rd_cell, cells, args.jobs)])
    header = ["D"] + [f"R_rho={_fmt(r)}" for r in rhos]
    rows = [[lv] + [col[i] for col in columns] for i, lv in enumerate(levels)]
    _write_csv(args.csv, header, rows)
    return 0


def _universal_cell(cell: tuple) -> tuple:
    n, rate, rho, pmf_path, joint_path, normalize = cell
    if joint_path:
        j = load_joint(joint_path, normalize)
        enc = build_universal_side_info_encoder(BlockCodeParams(n, rate), j.x_alphabet, j.y_alphabet)
        return (n, enc.moment(j, rho), float("nan"))
    p = load_pmf(pmf_path, normalize)
    enc = build_universal_encoder(BlockCodeParams(n, rate), p.alphabet)
    return (n, enc.moment(p, rho), universal_moment_bound(n, rate, rho, p))


def _cmd_universal_sim(args: argparse.Namespace) -> int:
    cells = [
        (n, args.rate, args.rho, args.pmf, args.si, args.normalize)
        for n in _parse_n_range(args.n)
    ]
    rows = _map_jobs(_universal_cell, cells, args.jobs)
    _write_csv(args.csv, ["n", "moment", "bound"], rows)
    return 0


def _lossy_cell(cell: tuple) -> tuple:
    n, rate, level, rho, pmf_path, normalize = cell
    p = load_pmf(pmf_path, normalize)
    dist = Distortion.hamming(p.alphabet, level)
    codec = build_lossy_codec(n, rate, dist, level)
    return (n, lossy_moment(codec, p, rho), codec.descriptions_used(), max_fidelity_gap(codec))


def _cmd_lossy_sim(args: argparse.Namespace) -> int:
    cells = [
        (n, args.rate, args.distortion, args.rho, args.pmf, args.normalize)
        for n in _parse_n_range(args.n)
    ]
    rows = _map_jobs(_lossy_cell, cells, args.jobs)
    _write_csv(args.csv, ["n", "moment", "descriptions", "fidelity_gap"], rows)
    return 0


def _cost_cell(cell: tuple) -> tuple:
    n, rate, pmf_path, costs_path, normalize = cell
    p = load_pmf(pmf_path, normalize)
    cost = load_costs(costs_path)
    enc = build_universal_encoder(BlockCodeParams(n, rate), p.alphabet)
    return (
        n,
        cost_moment(enc, p, cost, n),
        cost.expected(p),
        cost_converse_bound(p, cost, rate, n),
    )


def _cmd_cost_sim(args: argparse.Namespace) -> int:
    cells = [
        (n, args.rate, args.pmf, args.costs, args.normalize)
        for n in range(1, args.nmax + 1)
    ]
    rows = _map_jobs(_cost_cell, cells, args.jobs)
    _write_csv(args.csv, ["n", "cost_moment", "expected_cost", "converse_bound"], rows)
    return 0


def _cmd_selftest(args: argparse.Namespace) -> int:
    return selftest_mod.run(seed=args.seed)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--normalize", action="store_true", help="accept unnormalized input laws")
    sub.add_argument("--seed", type=int, default=0, help="seed for randomized routines")
    sub.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                     help="worker pool size for sweep cells")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="taskcode", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("entropy", help="Renyi entropy of order 1/(1+rho), in bits")
    s.add_argument("--pmf", required=True)
    s.add_argument("--rho", type=float, required=True)
    _add_common(s)
    s.set_defaults(fn=_cmd_entropy)

    s = subs.add_parser("divergence", help="divergence between two laws on one alphabet")
    s.add_argument("--p", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--kind", choices=["sundaresan", "renyi"], default="sundaresan")
    _add_common(s)
    s.set_defaults(fn=_cmd_divergence)

    s = subs.add_parser("encode", help="build a matched encoder and report its moment")
    s.add_argument("--pmf", required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--descriptions", type=int, required=True, metavar="M")
    s.add_argument("--out", help="write the encoder table as JSON")
    _add_common(s)
    s.set_defaults(fn=_cmd_encode)

    s = subs.add_parser("oracle", help="exact minimum moment by exhaustive search")
    s.add_argument("--pmf", required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--max-descriptions", type=int, required=True, metavar="M")
    _add_common(s)
    s.set_defaults(fn=_cmd_oracle)

    s = subs.add_parser("sweep-rate", help="universal encoder moment vs bounds over block lengths")
    s.add_argument("--pmf", required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--n", required=True, help="block length or range, e.g. 2..12")
    s.add_argument("--rate", type=float, required=True)
    s.add_argument("--csv")
    _add_common(s)
    s.set_defaults(fn=_cmd_sweep_rate)

    s = subs.add_parser("rd-curve", help="binary Hamming Renyi rate-distortion curves")
    s.add_argument("--p", type=float, required=True, help="source P(0)")
    s.add_argument("--rho", type=float, action="append", help="repeatable")
    s.add_argument("--dmax", type=float, default=0.5)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--csv")
    _add_common(s)
    s.set_defaults(fn=_cmd_rd_curve)

    s = subs.add_parser("universal-sim", help="universal encoder moment vs bound per n")
    s.add_argument("--pmf")
    s.add_argument("--si", help="joint law JSON; enables the side-information variant")
    s.add_argument("--n", required=True)
    s.add_argument("--rate", type=float, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--csv")
    _add_common(s)
    s.set_defaults(fn=_cmd_universal_sim)

    s = subs.add_parser("lossy-sim", help="lossy codec moment and fidelity per n")
    s.add_argument("--pmf", required=True)
    s.add_argument("--n", required=True)
    s.add_argument("--rate", type=float, required=True)
    s.add_argument("--distortion", type=float, required=True, metavar="D")
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--csv")
    _add_common(s)
    s.set_defaults(fn=_cmd_lossy_sim)

    s = subs.add_parser("cost-sim", help="expected fiber cost of universal encoders per n")
    s.add_argument("--pmf", required=True)
    s.add_argument("--costs", required=True)
    s.add_argument("--rate", type=float, required=True)
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("--csv")
    _add_common(s)
    s.set_defaults(fn=_cmd_cost_sim)

    s = subs.add_parser("selftest", help="run the deterministic invariant suite")
    _add_common(s)
    s.set_defaults(fn=_cmd_selftest)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"taskcode: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ConvergenceError, InfeasibleError, EnumerationCapError) as exc:
        print(f"taskcode: numeric failure: {exc}", file=sys.stderr)
        return NUMERIC_ERROR


if __name__ == "__main__":
    sys.exit(main())

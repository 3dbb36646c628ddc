# cli.py - PA Forge
# Operator commands: compress, bench, keyrate, params, selftest.

from __future__ import annotations

import argparse
import logging
import math
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

import config
import ntt
import pa_core
import reference
from bignum import MersenneModulus
from errors import ConfigurationError, InsufficientMaterialError, SizeError
from exports import export_bench_csv, export_keyrate_csv, load_rate_curve
from params import DEFAULT_CATALOG, NTT_CAPACITY_BITS, select_parameters, tabulate_keyrate
from selftest import run_selftest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_MATERIAL = 3
EXIT_IO = 4


@dataclass
class BenchReport:
    gamma: int
    k: int
    radix: int
    threads: int
    input_bits: int
    wall_time: float
    throughput: float  # Mbps


# ---------- PRINT HELPERS ----------

def _print_compression(report: pa_core.CompressionReport, out_path: str):
    print("\nCompression")
    print("-" * 80)
    print(f"Final key bits: {report.key_bits.size} -> {out_path}")
    print(f"Blocks read: {report.blocks_read} ({report.input_bits} bits)")
    print(f"Rejected blocks: {report.rejected_blocks}")
    print("-" * 80)


def _print_keyrate(rows):
    if not rows:
        print("\nNo curve points.")
        return
    print("\nKey rate")
    print("-" * 80)
    for r in rows:
        note = "" if r.k else " | no PA block"
        print(f"{r.distance:>8g} km | k={r.k:<4} | N={r.n_bits:<10} | {r.final_rate:.6g} b/s{note}")
    print("-" * 80)


def _print_selftest(results):
    print("\nSelf-test")
    print("-" * 80)
    for c in results:
        print(f"{'PASS' if c.passed else 'FAIL'} | {c.name} | {c.detail or '-'}")
    print("-" * 80)


# ---------- ARGUMENT TYPES ----------

def _hex_bytes(text: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!a} is not a hex string") from exc


def _ratio(text: str) -> str:
    # Kept as text so params.choose_k can read it exactly.
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!a} is not a number") from exc
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text!a} is not finite")
    return text


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!a} is not an integer") from exc
    if v < 1:
        raise argparse.ArgumentTypeError(f"{v} must be >= 1")
    return v


def _add_radix(p: argparse.ArgumentParser, default: Optional[int] = config.DEFAULT_RADIX,
               help_text: str = "butterfly radix of the multiplier (default %(default)s)"):
    p.add_argument("--radix", type=int, choices=ntt.RADICES, default=default, help=help_text)


# ---------- COMMANDS ----------

def _load_params(args) -> pa_core.PaParams:
    if args.seed is not None:
        return pa_core.PaParams.from_seed(args.gamma, args.k, args.r, args.s, args.seed)
    return pa_core.load_seed_file(args.seed_file, args.gamma, args.k, args.r, args.s)


def cmd_compress(args) -> int:
    params = _load_params(args)
    data = Path(args.in_path).read_bytes()
    report = pa_core.run_compression(params, data, radix=args.radix)
    if args.verify:
        want = reference.compress_reference(params, data)
        if not np.array_equal(report.key_bits, want):
            logger.error("Final key differs from the big-integer reference.")
            return EXIT_FAILED
        logger.info("Final key verified against the big-integer reference.")
    Path(args.out_path).write_bytes(report.key_bytes)
    _print_compression(report, args.out_path)
    return EXIT_OK


def _bench_once(params: pa_core.PaParams, material: bytes, plan: ntt.NttPlan, threads: int) -> float:
    t0 = time.perf_counter()
    if threads == 1:
        pa_core.run_compression(params, material, plan)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda _: pa_core.run_compression(params, material, plan), range(threads)))
    return time.perf_counter() - t0


def bench(gamma: int, k: int, radix: int, trials: int, threads: int = 1, seed: int = 0,
          r: Optional[int] = None, s: int = 0) -> BenchReport:
    """Median-of-trials throughput of one compression on simulated random input."""
    rng = np.random.default_rng(seed)
    r = max(1, gamma // 2) if r is None else r
    params = pa_core.PaParams.from_seed(gamma, k, r, s, rng.bytes(32))
    # Spare blocks for all-ones rejections.
    material = rng.bytes(-(-(2 * k + 2) * gamma // 8))
    plan = pa_core.plan_for(params, radix)
    times = [_bench_once(params, material, plan, threads) for _ in range(trials)]
    wall = statistics.median(times)
    n = params.input_bits
    mbps = threads * n / wall / 1e6
    logger.info("bench gamma=%d k=%d radix=%d threads=%d: %.3f Mbps (median of %d)",
                gamma, k, radix, threads, mbps, trials)
    return BenchReport(gamma, k, radix, threads, n, wall, mbps)


def cmd_bench(args) -> int:
    ks = range(1, args.k + 1) if args.sweep else (args.k,)
    reports = [
        bench(args.gamma, k, args.radix, args.trials, args.threads, args.seed, args.r, args.s)
        for k in ks
    ]
    export_bench_csv(reports, args.out_path)
    return EXIT_OK


def _plan_summary(gamma: int, radix: int) -> str:
    try:
        plan = ntt.plan_for_limbs(MersenneModulus(gamma).n_limbs, radix)
    except SizeError as e:
        return f"no multiplier plan: {e}"
    stages = "x".join(str(r) for r in plan.stage_radices)
    return f"multiplier plan: {plan.size} points, radix {radix} stages {stages}"


def cmd_keyrate(args) -> int:
    rows = tabulate_keyrate(load_rate_curve(args.in_path), args.gamma)
    logger.info("keyrate gamma=%d: %s", args.gamma, _plan_summary(args.gamma, args.radix))
    if args.out_path is None:
        export_keyrate_csv(rows)
        return EXIT_OK
    _print_keyrate(rows)
    res = export_keyrate_csv(rows, args.out_path)
    print(f"Wrote {res['rows']} rows to {res['path']}")
    return EXIT_OK


def cmd_params(args) -> int:
    gamma, k, n = select_parameters(args.capacity, args.r_pa, DEFAULT_CATALOG)
    print(f"gamma={gamma} k={k} N={n}")
    print(_plan_summary(gamma, args.radix))
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = run_selftest(inject_fault=args.inject_fault, radix=args.radix)
    _print_selftest(results)
    return EXIT_OK if all(c.passed for c in results) else EXIT_FAILED


# ---------- PARSER ----------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pa-forge", description=f"{config.APP_NAME} {config.APP_VERSION}: "
                                     "MMH-MH privacy amplification over Mersenne primes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress a key file into an r-bit final key")
    p.add_argument("--gamma", type=int, required=True)
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--r", type=_positive, required=True)
    p.add_argument("--s", type=int, default=config.SECURITY_BITS)
    _add_radix(p)
    seeds = p.add_mutually_exclusive_group(required=True)
    seeds.add_argument("--seed-file", help="a_1..a_k, b, c as little-endian ceil(gamma/8)-byte fields")
    seeds.add_argument("--seed", type=_hex_bytes, help="hex seed expanded with SHAKE-256")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", dest="out_path", required=True)
    p.add_argument("--verify", action="store_true", help="cross-check against the big-integer reference")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("bench", help="throughput on simulated random key material")
    p.add_argument("--gamma", type=int, required=True)
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--r", type=_positive, default=None, help="final key bits (default gamma // 2)")
    p.add_argument("--s", type=int, default=0)
    _add_radix(p)
    p.add_argument("--trials", type=_positive, default=config.BENCH_TRIALS)
    p.add_argument("--threads", type=_positive, default=config.BENCH_THREADS)
    p.add_argument("--seed", type=int, default=0, help="seed of the simulated data source")
    p.add_argument("--sweep", action="store_true", help="one row per k' = 1..k")
    p.add_argument("--out", dest="out_path", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("keyrate", help="k, N and final key rate along a compression-ratio curve")
    p.add_argument("--in", dest="in_path", required=True, help="distance_km,r_pa,sifted_rate_bps CSV")
    p.add_argument("--gamma", type=int, default=756839)
    p.add_argument("--out", dest="out_path", default=None, help="CSV path (default stdout)")
    _add_radix(p)
    p.set_defaults(func=cmd_keyrate)

    p = sub.add_parser("params", help="gamma, k and N for a multiplier capacity and ratio")
    p.add_argument("--capacity", type=_positive, default=NTT_CAPACITY_BITS)
    p.add_argument("--r-pa", dest="r_pa", type=_ratio, required=True)
    _add_radix(p)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("selftest", help="root, transform, multiplier and pipeline checks")
    p.add_argument("--inject-fault", action="store_true", help="corrupt one twiddle (negative control)")
    _add_radix(p, default=None, help_text="check one radix (default: all)")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InsufficientMaterialError as e:
        logger.error("%s", e)
        return EXIT_MATERIAL
    except (ConfigurationError, SizeError) as e:
        logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        logger.error("%s", e)
        return EXIT_IO

# selftest.py - PA Forge
# Desk-scale correctness checks run by `main.py selftest`.

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

import field
import ntt
import pa_core
import reference
from bignum import LimbVec, mul_ntt, mul_schoolbook
from errors import ConfigurationError
from params import DEFAULT_CATALOG

logger = logging.getLogger(__name__)

SEED = 20240917


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _corrupt(plan: ntt.NttPlan) -> ntt.NttPlan:
    # One wrong inter-stage twiddle in the last stage.
    tables = [t.copy() for t in plan.stage_twiddles]
    bad = tables[-1]
    bad[1, 1] = np.uint64(field.add(int(bad[1, 1]), 1))
    return dataclasses.replace(plan, stage_twiddles=tuple(tables))


def _plans(radices: Tuple[int, ...], inject_fault: bool) -> Dict[Tuple[int, int], ntt.NttPlan]:
    # The fault goes into the largest radix under test.
    faulty = max(radices)
    plans = {}
    for size in (16, 64, 256):
        for radix in radices:
            plan = ntt.make_plan(size, radix)
            if inject_fault and radix == faulty and size > 16:
                plan = _corrupt(plan)
            plans[(size, radix)] = plan
    return plans


def _check_roots() -> str:
    w = field.ROOT_65536
    if field.pow(w, 1 << 16) != 1:
        raise AssertionError("W^65536 != 1")
    if field.pow(w, 1 << 15) != field.P - 1:
        raise AssertionError("W^32768 != p_G - 1")
    return "W_65536 has order 65536"


def _check_catalog() -> str:
    bad = DEFAULT_CATALOG.verify(127)
    if bad:
        raise AssertionError(f"Lucas-Lehmer rejects {bad}")
    return "exponents <= 127 pass Lucas-Lehmer"


def _check_dft(plans, rng) -> str:
    for (size, radix), plan in sorted(plans.items()):
        if size > 64:
            continue
        v = rng.integers(0, field.P, size=size, dtype=np.uint64)
        got = ntt.forward(plan, v).tolist()
        if got != reference.dft_reference(v.tolist()):
            raise AssertionError(f"forward mismatch at size={size} radix={radix}")
        if ntt.inverse(plan, np.asarray(got, dtype=np.uint64)).tolist() != v.tolist():
            raise AssertionError(f"roundtrip mismatch at size={size} radix={radix}")
    return "forward/inverse match the definitional transform"


def _check_mul(plans, radices, rng) -> str:
    for n_limbs, size in ((4, 16), (64, 256)):
        x = LimbVec(rng.integers(0, 1 << 24, size=n_limbs), 24 * n_limbs)
        y = LimbVec(rng.integers(0, 1 << 24, size=n_limbs), 24 * n_limbs)
        want = mul_schoolbook(x, y)
        for radix in radices:
            if mul_ntt(x, y, plans[(size, radix)]) != want:
                raise AssertionError(f"mul_ntt != schoolbook at {n_limbs} limbs radix={radix}")
    return "mul_ntt matches schoolbook at 4 and 64 limbs"


def _check_pipeline(radices, rng) -> str:
    for gamma, k, r, s in ((13, 4, 5, 2), (61, 8, 32, 8)):
        seed = rng.integers(0, 256, size=16, dtype=np.uint8).tobytes()
        params = pa_core.PaParams.from_seed(gamma, k, r, s, seed)
        material = rng.integers(0, 256, size=2 * gamma * k // 8 + 8, dtype=np.uint8).tobytes()
        want = reference.compress_reference(params, material)
        for radix in radices:
            got = pa_core.compress(params, material, pa_core.plan_for(params, radix))
            if not np.array_equal(got, want):
                raise AssertionError(f"pipeline mismatch at gamma={gamma} k={k} radix={radix}")
    return "compress matches the big-integer reference at gamma 13 and 61"


def _check_universality() -> str:
    # gamma = 5, k = 1: g_a(x) = a x mod 31 over all a and x in Z_31.
    gamma, p = 5, 31
    table = np.empty((p, p), dtype=np.int64)
    for a in range(p):
        params = pa_core.PaParams(gamma, 1, 1, 0, (a,), 1, 0)
        for x in range(p):
            table[a, x] = pa_core.mmh(params, [x]).to_int()
    worst = 0
    for x in range(p):
        collisions = (table == table[:, [x]]).sum(axis=0)
        collisions[x] = 0
        worst = max(worst, int(collisions.max()))
    if worst * p > p:
        raise AssertionError(f"collision fraction {worst}/{p} exceeds 1/{p}")
    return f"max collision fraction {worst}/{p}"


def run_selftest(inject_fault: bool = False, radix: Optional[int] = None) -> List[CheckResult]:
    """All checks at one radix, or at every supported radix when `radix` is None."""
    radices = ntt.RADICES if radix is None else (int(radix),)
    if any(r not in ntt.RADICES for r in radices):
        raise ConfigurationError(f"radix must be one of {ntt.RADICES}, got {radix}")
    rng = np.random.default_rng(SEED)
    plans = _plans(radices, inject_fault)
    checks: List[Tuple[str, Callable[[], str]]] = [
        ("root_of_unity", _check_roots),
        ("mersenne_catalog", _check_catalog),
        ("ntt_vs_dft", lambda: _check_dft(plans, rng)),
        ("mul_ntt_vs_schoolbook", lambda: _check_mul(plans, radices, rng)),
        ("pipeline_oracle", lambda: _check_pipeline(radices, rng)),
        ("universality_gamma5", _check_universality),
    ]
    results = []
    for name, fn in checks:
        try:
            results.append(CheckResult(name, True, fn()))
        except Exception as e:
            logger.error("Self-test %s failed: %s", name, e)
            results.append(CheckResult(name, False, str(e)))
    return results

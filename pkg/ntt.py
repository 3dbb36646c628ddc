# ntt.py - PA Forge
# Number-theoretic transforms over p_G with radix-2/4/16 butterflies.

"""
Forward and inverse NTT over the field in `field`.

Plans are decimation-in-time: the input is put into digit-reversed order once,
then each stage merges R sub-transforms of length L into one of length L*R.
A stage works on a (..., B, R, L) view of the data:

    1. multiply row n1 / column k1 by the inter-stage twiddle W_{LR}^(n1 k1)
    2. run an R-point kernel along the R axis

Kernels are R-point DFTs built from radix-2 layers. Their constants are roots of
order <= 16, which are powers of two in this field (W_16 = 2^12), so they are
applied with shifts instead of full products unless `shift_twiddles` is off.

All public transforms accept arrays of shape (..., N) and work on the last axis.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

import config
import field
from errors import ConfigurationError, SizeError


logger = logging.getLogger(__name__)

MAX_SIZE = 1 << field.MAX_LOG2_ORDER
RADICES = (2, 4, 16)


@dataclass(frozen=True, eq=False)
class NttPlan:
    size: int
    radix: int
    root: int
    n_inv: int
    twiddles: np.ndarray
    inv_twiddles: np.ndarray
    stage_radices: Tuple[int, ...]
    permutation: np.ndarray
    stage_twiddles: Tuple[np.ndarray, ...]
    stage_inv_twiddles: Tuple[np.ndarray, ...]
    shift_twiddles: bool = True

    @property
    def stages(self) -> int:
        return len(self.stage_radices)

    def stage_span(self, stage: int) -> Tuple[int, int]:
        """(L, R): sub-transform length before the stage and the stage radix."""
        span = 1
        for r in self.stage_radices[:stage]:
            span *= r
        return span, self.stage_radices[stage]


# -------------------------
# Plan construction
# -------------------------

def _stage_radices(size: int, radix: int) -> Tuple[int, ...]:
    log_n = size.bit_length() - 1
    q = radix.bit_length() - 1
    full, rem = divmod(log_n, q)
    out = [radix] * full
    # Leftover bits become radix-4 / radix-2 stages at the end.
    while rem >= 2:
        out.append(4)
        rem -= 2
    if rem:
        out.append(2)
    return tuple(out)


def _digit_reversal(size: int, radices: Tuple[int, ...]) -> np.ndarray:
    idx = np.arange(size, dtype=np.int64)
    pos = np.zeros(size, dtype=np.int64)
    rem = idx.copy()
    block = size
    for r in reversed(radices):
        block //= r
        pos += (rem % r) * block
        rem //= r
    perm = np.empty(size, dtype=np.int64)
    perm[pos] = idx
    return perm


def _stage_tables(size: int, radices: Tuple[int, ...], table: np.ndarray) -> Tuple[np.ndarray, ...]:
    out = []
    span = 1
    for r in radices:
        stride = size // (span * r)
        idx = (np.outer(np.arange(r, dtype=np.int64), np.arange(span, dtype=np.int64)) * stride) % size
        out.append(table[idx])
        span *= r
    return tuple(out)


def _check_size(size: int) -> None:
    if size < 2 or size & (size - 1):
        raise ConfigurationError(f"NTT size must be a power of two >= 2, got {size}")
    if size > MAX_SIZE:
        raise ConfigurationError(f"NTT size {size} exceeds {MAX_SIZE}: no root of that order")


def _twiddles_match(twiddles: np.ndarray, size: int, root: int) -> bool:
    if twiddles.shape != (size,) or twiddles.dtype != np.uint64:
        return False
    for j in {0, 1, size // 3, size // 2, size - 1}:
        if int(twiddles[j]) != field.pow(root, j):
            return False
    return True


def make_plan(
    size: int,
    radix: int = 16,
    shift_twiddles: bool = True,
    twiddles: Optional[np.ndarray] = None,
) -> NttPlan:
    """
    Build an immutable plan. Root invariants are checked here:
    W_N^N == 1, W_N^(N/2) == -1 and N * N^-1 == 1.
    `twiddles` lets a cached table be reused; it is spot-checked against W_N.
    """
    size = int(size)
    radix = int(radix)
    if radix not in RADICES:
        raise ConfigurationError(f"radix must be one of {RADICES}, got {radix}")
    _check_size(size)

    root = field.root_of_unity(size)
    n_inv = field.inv(size)
    if field.pow(root, size) != 1 or field.pow(root, size // 2) != field.P - 1:
        raise ConfigurationError(f"root table is not primitive for order {size}")
    if field.mul(n_inv, size) != 1:
        raise ConfigurationError("N^-1 check failed")

    if twiddles is None or not _twiddles_match(twiddles, size, root):
        if twiddles is not None:
            logger.warning("Discarding twiddle table that does not match W_%d.", size)
        twiddles = field.powers(root, size)
    inv_twiddles = twiddles[(-np.arange(size, dtype=np.int64)) % size]

    radices = _stage_radices(size, radix)
    plan = NttPlan(
        size=size,
        radix=radix,
        root=root,
        n_inv=n_inv,
        twiddles=twiddles,
        inv_twiddles=inv_twiddles,
        stage_radices=radices,
        permutation=_digit_reversal(size, radices),
        stage_twiddles=_stage_tables(size, radices, twiddles),
        stage_inv_twiddles=_stage_tables(size, radices, inv_twiddles),
        shift_twiddles=bool(shift_twiddles),
    )
    frozen = (plan.twiddles, plan.inv_twiddles, plan.permutation)
    for arr in frozen + plan.stage_twiddles + plan.stage_inv_twiddles:
        arr.setflags(write=False)
    logger.debug("Built NTT plan size=%d radix=%d stages=%s", size, radix, radices)
    return plan


def _cache_file(cache_dir: str, size: int) -> Path:
    return Path(cache_dir) / f"ntt_{size}.npz"


def _load_cached_twiddles(cache_dir: str, size: int) -> Optional[np.ndarray]:
    path = _cache_file(cache_dir, size)
    if not path.exists():
        return None
    try:
        with np.load(path) as data:
            return np.asarray(data["twiddles"], dtype=np.uint64)
    except Exception as e:
        logger.warning("Ignoring unreadable plan cache %s: %s", path, e)
        return None


def _store_twiddles(cache_dir: str, size: int, twiddles: np.ndarray) -> None:
    path = _cache_file(cache_dir, size)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "wb") as f:
            np.savez(f, twiddles=twiddles)
        os.replace(tmp, path)
    except OSError as e:
        logger.warning("Could not write plan cache %s: %s", path, e)


@lru_cache(maxsize=64)
def _cached_plan(size: int, radix: int, cache_dir: str) -> NttPlan:
    cached = _load_cached_twiddles(cache_dir, size) if cache_dir else None
    plan = make_plan(size, radix, twiddles=cached)
    if cache_dir and plan.twiddles is not cached:
        _store_twiddles(cache_dir, size, plan.twiddles)
    elif cached is not None:
        logger.debug("Loaded twiddles for size=%d from %s", size, cache_dir)
    return plan


def get_plan(size: int, radix: Optional[int] = None, cache_dir: Optional[str] = None) -> NttPlan:
    """Memoised plan lookup, backed by PA_FORGE_PLAN_CACHE when set."""
    radix = config.DEFAULT_RADIX if radix is None else radix
    cache_dir = config.PLAN_CACHE_DIR if cache_dir is None else cache_dir
    return _cached_plan(int(size), int(radix), cache_dir or "")


def plan_for_limbs(n_limbs: int, radix: Optional[int] = None) -> NttPlan:
    """Smallest plan whose half size holds an n_limbs operand (zero-padded product)."""
    size = 2
    while size < 2 * n_limbs:
        size <<= 1
    if size > MAX_SIZE:
        raise SizeError(f"{n_limbs} limbs exceed the largest plan ({MAX_SIZE // 2} limbs per operand)")
    return get_plan(size, radix)


# -------------------------
# Transforms
# -------------------------

@lru_cache(maxsize=None)
def _bit_reversal(r: int) -> np.ndarray:
    bits = r.bit_length() - 1
    return np.array([int(f"{i:0{bits}b}"[::-1], 2) if bits else 0 for i in range(r)], dtype=np.int64)


@lru_cache(maxsize=None)
def _kernel_layers(radix: int, inverse: bool, use_shift: bool):
    # Per layer h: (t, shift exponent or None, constant) for the twiddle W_{2h}^t, t >= 1.
    layers = []
    h = 1
    while h < radix:
        w = field.root_of_unity(2 * h)
        if inverse:
            w = field.inv(w)
        e = field.pow2_exponent(w) if use_shift else None
        row = []
        for t in range(1, h):
            row.append((t, None if e is None else (e * t) % 192, field.pow(w, t)))
        layers.append((h, tuple(row)))
        h *= 2
    return tuple(layers)


def _kernel(y: np.ndarray, radix: int, inverse: bool, use_shift: bool) -> np.ndarray:
    # R-point DFT along axis -2 of a (..., R, L) array.
    shape = y.shape
    y = np.ascontiguousarray(y[..., _bit_reversal(radix), :])
    for h, row in _kernel_layers(radix, inverse, use_shift):
        g = y.reshape(shape[:-2] + (radix // (2 * h), 2, h, shape[-1]))
        top = g[..., 0, :, :]
        bot = g[..., 1, :, :]
        for t, e, c in row:
            if e is not None:
                bot[..., t, :] = field.mul_pow2_vec(bot[..., t, :], e)
            else:
                bot[..., t, :] = field.mul_vec(bot[..., t, :], np.uint64(c))
        y = np.stack((field.add_vec(top, bot), field.sub_vec(top, bot)), axis=-3).reshape(shape)
    return y


def _apply_stage(plan: NttPlan, data: np.ndarray, stage: int, inverse: bool) -> np.ndarray:
    span, r = plan.stage_span(stage)
    lead = data.shape[:-1]
    y = data.reshape(lead + (plan.size // (span * r), r, span))
    if span > 1:
        table = plan.stage_inv_twiddles[stage] if inverse else plan.stage_twiddles[stage]
        # Row n1 = 0 has all-one twiddles.
        y[..., 1:, :] = field.mul_vec(y[..., 1:, :], table[1:, :])
    y = _kernel(y, r, inverse, plan.shift_twiddles)
    return y.reshape(lead + (plan.size,))


def _as_input(plan: NttPlan, v) -> np.ndarray:
    data = field.as_vec(v)
    if data.ndim == 0 or data.shape[-1] != plan.size:
        got = 0 if data.ndim == 0 else data.shape[-1]
        raise SizeError(f"vector length {got} does not match plan size {plan.size}")
    if not field.is_canonical_vec(data):
        raise ValueError("NTT input holds non-canonical field elements")
    return data


def digit_reverse(plan: NttPlan, v) -> np.ndarray:
    data = _as_input(plan, v)
    return data[..., plan.permutation]


def butterfly_stage(plan: NttPlan, v, stage: int, inverse: bool = False) -> np.ndarray:
    """
    One decimation stage on data already in that stage's layout
    (digit-reversed input for stage 0, previous stage output afterwards).
    """
    if not 0 <= stage < plan.stages:
        raise SizeError(f"stage {stage} out of range for a {plan.stages}-stage plan")
    data = np.array(_as_input(plan, v), copy=True, order="C")
    return _apply_stage(plan, data, stage, inverse)


def forward(plan: NttPlan, v) -> np.ndarray:
    data = digit_reverse(plan, v)
    for s in range(plan.stages):
        data = _apply_stage(plan, data, s, False)
    return data


def inverse(plan: NttPlan, v) -> np.ndarray:
    data = digit_reverse(plan, v)
    for s in range(plan.stages):
        data = _apply_stage(plan, data, s, True)
    return field.mul_vec(data, np.uint64(plan.n_inv))

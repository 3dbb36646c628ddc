# pa_core.py - PA Forge
# MMH-MH privacy amplification: block split/screening, MMH inner product, MH window, sessions.

"""
Compression of k * gamma bits of reconciled key into an r-bit final key:

    y = sum(a_i * x_i) mod (2^gamma - 1)          (MMH, one shared multiplier)
    z = ((b * y + c) mod 2^gamma) >> (gamma - r)  (MH, top r bits)

A block equal to 2^gamma - 1 is rejected and replaced by the next gamma bits of
the same stream; its a_i is kept. Bits are LSB-first throughout, in blocks, key
files and seed files alike.
"""

from __future__ import annotations

import enum
import hashlib
import io
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import BinaryIO, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

import ntt
from bignum import LIMB_BITS, LimbVec, ModAccumulator, MersenneModulus, add, mul_ntt
from errors import (
    ConfigurationError,
    InsufficientMaterialError,
    RejectedBlockError,
    SecurityConditionError,
    SessionStateError,
    SizeError,
)

logger = logging.getLogger(__name__)

Block = Union[LimbVec, int]


def _nbytes(bits: int) -> int:
    return -(-bits // 8)


# -------------------------
# Parameters and seeds
# -------------------------

@dataclass(frozen=True, eq=False)
class PaParams:
    gamma: int
    k: int
    r: int
    s: int
    a: Tuple[int, ...]
    b: int
    c: int

    def __post_init__(self):
        modulus = MersenneModulus(self.gamma)
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        if self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")
        if self.r < 1 or self.s < 0:
            raise ConfigurationError(f"need r >= 1 and s >= 0, got r={self.r} s={self.s}")
        if not self.r < self.gamma - self.s:
            raise SecurityConditionError(
                f"security condition r < gamma - s violated: {self.r} >= {self.gamma} - {self.s}"
            )
        if len(self.a) != self.k:
            raise ConfigurationError(f"expected {self.k} MMH seeds, got {len(self.a)}")
        if any(not 0 <= v < modulus.p for v in self.a):
            raise ConfigurationError("every a_i must lie in [0, 2^gamma - 1)")
        limit = 1 << self.gamma
        if not (0 <= self.b < limit and 0 <= self.c < limit):
            raise ConfigurationError("b and c must lie in [0, 2^gamma)")
        if not self.b & 1:
            raise ConfigurationError("b must be odd")

    @property
    def alpha(self) -> int:
        return self.gamma

    @property
    def beta(self) -> int:
        return self.r

    @property
    def modulus(self) -> MersenneModulus:
        return MersenneModulus(self.gamma)

    @property
    def input_bits(self) -> int:
        return self.k * self.gamma

    @cached_property
    def a_limbs(self) -> Tuple[LimbVec, ...]:
        return tuple(LimbVec.from_int(v, self.gamma) for v in self.a)

    @cached_property
    def b_limbs(self) -> LimbVec:
        return LimbVec.from_int(self.b, self.gamma)

    @cached_property
    def c_limbs(self) -> LimbVec:
        return LimbVec.from_int(self.c, self.gamma)

    @classmethod
    def from_seed(cls, gamma: int, k: int, r: int, s: int, seed: bytes) -> "PaParams":
        """Expand `seed` with SHAKE-256 into a_1..a_k, b, c (same layout as a seed file)."""
        nb = _nbytes(gamma)
        stream = hashlib.shake_256(b"pa-forge/seeds\x00" + bytes(seed)).digest(nb * (k + 2))
        mask = (1 << gamma) - 1
        vals = [int.from_bytes(stream[i * nb:(i + 1) * nb], "little") & mask for i in range(k + 2)]
        return cls(gamma, k, r, s, _reduce_mmh_seeds(vals[:k], gamma), vals[k] | 1, vals[k + 1])


def _reduce_mmh_seeds(a: Sequence[int], gamma: int) -> Tuple[int, ...]:
    # a_i == 2^gamma - 1 is the zero class mod p.
    p = (1 << gamma) - 1
    return tuple(0 if v == p else v for v in a)


def load_seed_file(path: Union[str, Path], gamma: int, k: int, r: int, s: int) -> PaParams:
    """a_1..a_k, b, c as ceil(gamma/8)-byte little-endian fields."""
    data = Path(path).read_bytes()
    nb = _nbytes(gamma)
    want = nb * (k + 2)
    if len(data) != want:
        raise SizeError(f"seed file {path} holds {len(data)} bytes, expected {want} for gamma={gamma} k={k}")
    vals = [int.from_bytes(data[i * nb:(i + 1) * nb], "little") for i in range(k + 2)]
    if any(v >> gamma for v in vals):
        raise ConfigurationError(f"seed file {path} has bits set above bit {gamma - 1}")
    a = _reduce_mmh_seeds(vals[:k], gamma)
    if a != tuple(vals[:k]):
        logger.warning("Seed a_i equals 2^gamma - 1; reading it as 0.")
    b = vals[k]
    if not b & 1:
        logger.warning("Seed b is even; setting its lowest bit.")
        b |= 1
    return PaParams(gamma, k, r, s, a, b, vals[k + 1])


def write_seed_file(params: PaParams, path: Union[str, Path]) -> Path:
    nb = _nbytes(params.gamma)
    out = Path(path)
    payload = b"".join(v.to_bytes(nb, "little") for v in (*params.a, params.b, params.c))
    out.write_bytes(payload)
    return out


# -------------------------
# Bits and blocks
# -------------------------

def pack_bits(bits) -> bytes:
    """LSB-first; the final byte is zero-padded."""
    arr = np.asarray(bits, dtype=np.uint8)
    return np.packbits(arr, bitorder="little").tobytes()


def unpack_bits(data: bytes, n_bits: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8), bitorder="little")
    if bits.size < n_bits:
        raise SizeError(f"{len(data)} bytes hold fewer than {n_bits} bits")
    return bits[:n_bits]


def bits_to_int(bits) -> int:
    return int.from_bytes(pack_bits(bits), "little")


class BitReader:
    """Sequential gamma-bit blocks from a byte stream, LSB-first across byte boundaries."""

    def __init__(self, source: Union[bytes, bytearray, BinaryIO], gamma: int):
        if isinstance(source, (bytes, bytearray, memoryview)):
            source = io.BytesIO(bytes(source))
        self._src = source
        self.gamma = gamma
        self._mask = (1 << gamma) - 1
        self._buf = 0
        self._nbits = 0
        self.blocks_read = 0

    def _fill(self, need: int) -> None:
        while self._nbits < need:
            chunk = self._src.read(_nbytes(need - self._nbits))
            if not chunk:
                return
            self._buf |= int.from_bytes(chunk, "little") << self._nbits
            self._nbits += 8 * len(chunk)

    def read_block(self) -> Optional[LimbVec]:
        """Next block, or None once fewer than gamma bits remain."""
        self._fill(self.gamma)
        if self._nbits < self.gamma:
            return None
        value = self._buf & self._mask
        self._buf >>= self.gamma
        self._nbits -= self.gamma
        self.blocks_read += 1
        return LimbVec.from_int(value, self.gamma)

    def remainder(self) -> Tuple[int, int]:
        """(value, bit count) of whatever is left after draining the source."""
        rest = self._src.read()
        if rest:
            self._buf |= int.from_bytes(rest, "little") << self._nbits
            self._nbits += 8 * len(rest)
        return self._buf, self._nbits


def split_blocks(key_material: bytes, gamma: int, k: int) -> List[LimbVec]:
    n_bits = gamma * k
    if len(key_material) != _nbytes(n_bits):
        raise SizeError(f"expected {_nbytes(n_bits)} bytes for {k} x {gamma} bits, got {len(key_material)}")
    reader = BitReader(key_material, gamma)
    blocks = [reader.read_block() for _ in range(k)]
    tail, _ = reader.remainder()
    if tail:
        raise SizeError("key material has bits set beyond k * gamma")
    return blocks


class BlockReason(enum.Enum):
    OK = "ok"
    ALL_ONES_REJECTED = "all_ones_rejected"


@dataclass(frozen=True)
class BlockVerdict:
    accepted: bool
    reason: BlockReason


_ACCEPTED = BlockVerdict(True, BlockReason.OK)
_REJECTED = BlockVerdict(False, BlockReason.ALL_ONES_REJECTED)


def _as_block(x: Block, gamma: int) -> LimbVec:
    if isinstance(x, LimbVec):
        if x.significant * LIMB_BITS > gamma and x.to_int() >> gamma:
            raise SizeError(f"block exceeds {gamma} bits")
        return x
    return LimbVec.from_int(int(x), gamma)


def screen_block(x_i: Block, gamma: int) -> BlockVerdict:
    x_i = _as_block(x_i, gamma)
    return _REJECTED if x_i.to_int() == (1 << gamma) - 1 else _ACCEPTED


# -------------------------
# MMH / MH
# -------------------------

def plan_for(params: PaParams, radix: Optional[int] = None) -> ntt.NttPlan:
    """Multiplier plan for gamma-bit operands."""
    return ntt.plan_for_limbs(params.modulus.n_limbs, radix)


def mmh(params: PaParams, x: Sequence[Block], plan: Optional[ntt.NttPlan] = None) -> LimbVec:
    if len(x) != params.k:
        raise SizeError(f"expected {params.k} blocks, got {len(x)}")
    plan = plan or plan_for(params)
    acc = ModAccumulator(params.modulus)
    for i, block in enumerate(x):
        block = _as_block(block, params.gamma)
        if not screen_block(block, params.gamma).accepted:
            raise RejectedBlockError(f"block {i} is all ones and must be reloaded before MMH")
        acc.accumulate(mul_ntt(params.a_limbs[i], block, plan))
    return acc.residue


def _limb_frame_bits(limbs: np.ndarray) -> np.ndarray:
    # (frames, 24) LSB-first bits of each limb.
    raw = np.empty((limbs.size, 3), dtype=np.uint8)
    raw[:, 0] = limbs & 0xFF
    raw[:, 1] = (limbs >> np.uint32(8)) & 0xFF
    raw[:, 2] = limbs >> np.uint32(16)
    return np.unpackbits(raw, axis=1, bitorder="little")


def _check_window(alpha: int, beta: int) -> None:
    if not 0 < beta < alpha:
        raise SizeError(f"window needs 0 < beta < alpha, got alpha={alpha} beta={beta}")


def iter_window(v: LimbVec, alpha: int, beta: int) -> Iterator[np.ndarray]:
    """
    Frame-by-frame window output: frames below (alpha - beta) // 24 are skipped,
    the first emitted frame drops its low (alpha - beta) % 24 bits and the last
    one stops at bit alpha - 1.
    """
    _check_window(alpha, beta)
    start, offset = divmod(alpha - beta, LIMB_BITS)
    last = (alpha - 1) // LIMB_BITS
    remaining = beta
    for idx in range(start, last + 1):
        limb = v.limbs[idx:idx + 1] if idx < len(v) else np.zeros(1, dtype=np.uint32)
        bits = _limb_frame_bits(limb)[0]
        if idx == start:
            bits = bits[offset:]
        bits = bits[:remaining]
        remaining -= bits.size
        yield bits


def extract_window(v: LimbVec, alpha: int, beta: int) -> np.ndarray:
    """Bits of (v mod 2^alpha) >> (alpha - beta), LSB-first, length beta."""
    _check_window(alpha, beta)
    start, offset = divmod(alpha - beta, LIMB_BITS)
    last = (alpha - 1) // LIMB_BITS
    frames = np.zeros(last - start + 1, dtype=np.uint32)
    avail = v.limbs[start:last + 1]
    frames[: avail.size] = avail
    return _limb_frame_bits(frames).reshape(-1)[offset:offset + beta]


def _mh_sum(params: PaParams, y: Block, plan: ntt.NttPlan) -> LimbVec:
    # b * y + c before the window; no reduction mod 2^gamma.
    return add(mul_ntt(params.b_limbs, _as_block(y, params.gamma), plan), params.c_limbs)


def mh(params: PaParams, y: Block, plan: Optional[ntt.NttPlan] = None) -> np.ndarray:
    t = _mh_sum(params, y, plan or plan_for(params))
    return extract_window(t, params.alpha, params.beta)


# -------------------------
# Streaming session
# -------------------------

class SessionState(enum.Enum):
    IDLE = "idle"
    MMH = "mmh"
    MMH_COUNT = "mmh_count"
    MH = "mh"
    OUTPUT = "output"


_TRANSITIONS = {
    SessionState.IDLE: {SessionState.MMH},
    SessionState.MMH: {SessionState.MMH_COUNT},
    SessionState.MMH_COUNT: {SessionState.MMH, SessionState.MH},
    SessionState.MH: {SessionState.OUTPUT},
    SessionState.OUTPUT: {SessionState.IDLE},
}


class PaSession:
    """
    One compression at a time through a shared multiplier:

        Idle -> Mmh -> MmhCount -> (Mmh | Mh) -> Output -> Idle

    `feed` multiplies and accumulates an accepted block; a rejected one leaves
    the session in Mmh waiting for its replacement.
    """

    def __init__(self, params: PaParams, plan: Optional[ntt.NttPlan] = None, radix: Optional[int] = None):
        self.params = params
        self.plan = plan or plan_for(params, radix)
        self.acc = ModAccumulator(params.modulus)
        self.state = SessionState.IDLE
        self.cnt = 0
        self.rejected = 0
        self.history: List[SessionState] = [SessionState.IDLE]
        self._window_src: Optional[LimbVec] = None

    def _move(self, to: SessionState) -> None:
        if to not in _TRANSITIONS[self.state]:
            raise SessionStateError(f"illegal transition {self.state.value} -> {to.value}")
        self.state = to
        self.history.append(to)

    def _require(self, state: SessionState, op: str) -> None:
        if self.state is not state:
            raise SessionStateError(f"{op} needs state {state.value}, session is {self.state.value}")

    @property
    def needs_block(self) -> bool:
        return self.state is SessionState.MMH

    def start(self) -> "PaSession":
        self._require(SessionState.IDLE, "start")
        self.acc.clear()
        self.cnt = 0
        self.rejected = 0
        self._window_src = None
        self._move(SessionState.MMH)
        return self

    def feed(self, block: Block) -> BlockVerdict:
        self._require(SessionState.MMH, "feed")
        block = _as_block(block, self.params.gamma)
        verdict = screen_block(block, self.params.gamma)
        if not verdict.accepted:
            self.rejected += 1
            logger.warning(
                "All-ones block rejected at position %d (gamma=%d); reloading.", self.cnt, self.params.gamma
            )
            return verdict
        self.acc.accumulate(mul_ntt(self.params.a_limbs[self.cnt], block, self.plan))
        self._move(SessionState.MMH_COUNT)
        self.cnt += 1
        self._move(SessionState.MMH if self.cnt < self.params.k else SessionState.MH)
        return verdict

    def finalize(self) -> np.ndarray:
        self._require(SessionState.MH, "finalize")
        self._window_src = _mh_sum(self.params, self.acc.residue, self.plan)
        key = extract_window(self._window_src, self.params.alpha, self.params.beta)
        self._move(SessionState.OUTPUT)
        logger.info(
            "PA session complete: gamma=%d k=%d r=%d rejected=%d",
            self.params.gamma, self.params.k, self.params.r, self.rejected,
        )
        return key

    def iter_output(self) -> Iterator[np.ndarray]:
        """
        Key bits streamed frame by frame from b * y + c, as `iter_window` emits them.
        The session returns to Idle once drained.
        """
        self._require(SessionState.OUTPUT, "iter_output")
        yield from iter_window(self._window_src, self.params.alpha, self.params.beta)
        self.reset()

    def reset(self) -> "PaSession":
        if self.state is not SessionState.IDLE:
            self._move(SessionState.IDLE)
        return self


@dataclass
class CompressionReport:
    key_bits: np.ndarray
    rejected_blocks: int
    blocks_read: int
    input_bits: int

    @property
    def key_bytes(self) -> bytes:
        return pack_bits(self.key_bits)


def run_compression(
    params: PaParams,
    key_material: Union[bytes, BinaryIO],
    plan: Optional[ntt.NttPlan] = None,
    radix: Optional[int] = None,
) -> CompressionReport:
    session = PaSession(params, plan, radix).start()
    reader = BitReader(key_material, params.gamma)
    while session.needs_block:
        block = reader.read_block()
        if block is None:
            raise InsufficientMaterialError(
                f"key material exhausted after {reader.blocks_read} blocks "
                f"({session.cnt}/{params.k} accepted, {session.rejected} rejected)"
            )
        session.feed(block)
    bits = session.finalize()
    session.reset()
    return CompressionReport(
        key_bits=bits,
        rejected_blocks=session.rejected,
        blocks_read=reader.blocks_read,
        input_bits=reader.blocks_read * params.gamma,
    )


def compress(params: PaParams, key_material: Union[bytes, BinaryIO], plan: Optional[ntt.NttPlan] = None) -> np.ndarray:
    return run_compression(params, key_material, plan).key_bits

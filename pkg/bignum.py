# bignum.py - PA Forge
# Large naturals in base 2^24: NTT multiplication, schoolbook oracle, Mersenne folding.

"""
Limb vectors are little-endian base-2^24 digit arrays (``uint32`` storage, every
limb < 2^24). The NTT product is exact for operands of up to 32768 limbs: each
pre-carry coefficient is at most 32768 (2^24 - 1)^2 < 2^63 < p_G.

Byte import/export is little-endian, bit 0 of byte 0 being the least significant
bit of the value.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Union

import numpy as np

import field
import ntt
from errors import ConfigurationError, SizeError
from params import MERSENNE_EXPONENTS

LIMB_BITS = 24
LIMB_BASE = 1 << LIMB_BITS
LIMB_MASK = LIMB_BASE - 1


def _n_limbs(bit_len: int) -> int:
    return max(1, -(-bit_len // LIMB_BITS))


# -------------------------
# LimbVec
# -------------------------

@dataclass(frozen=True, eq=False)
class LimbVec:
    limbs: np.ndarray
    bit_len: int

    def __post_init__(self):
        arr = np.array(self.limbs, dtype=np.uint32, copy=True).reshape(-1)
        if arr.size == 0:
            arr = np.zeros(1, dtype=np.uint32)
        if np.any(arr > LIMB_MASK):
            raise ValueError("limb out of range (must be < 2^24)")
        if self.bit_len < 0:
            raise ValueError("bit_len must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "limbs", arr)

    @classmethod
    def from_int(cls, value: int, bit_len: Optional[int] = None) -> "LimbVec":
        if value < 0:
            raise ValueError("LimbVec holds naturals only")
        if bit_len is None:
            bit_len = value.bit_length()
        elif value.bit_length() > bit_len:
            raise SizeError(f"value needs {value.bit_length()} bits, frame is {bit_len}")
        n = _n_limbs(bit_len)
        raw = np.frombuffer(value.to_bytes(3 * n, "little"), dtype=np.uint8).reshape(n, 3)
        raw = raw.astype(np.uint32)
        limbs = raw[:, 0] | (raw[:, 1] << np.uint32(8)) | (raw[:, 2] << np.uint32(16))
        return cls(limbs, bit_len)

    @classmethod
    def from_bytes(cls, data: bytes, bit_len: Optional[int] = None) -> "LimbVec":
        if bit_len is None:
            bit_len = 8 * len(data)
        return cls.from_int(int.from_bytes(bytes(data), "little"), bit_len)

    def to_int(self) -> int:
        raw = np.empty((self.limbs.size, 3), dtype=np.uint8)
        raw[:, 0] = self.limbs & 0xFF
        raw[:, 1] = (self.limbs >> np.uint32(8)) & 0xFF
        raw[:, 2] = self.limbs >> np.uint32(16)
        return int.from_bytes(raw.tobytes(), "little")

    def to_bytes(self) -> bytes:
        return self.to_int().to_bytes(-(-self.bit_len // 8), "little")

    def to_bits(self) -> np.ndarray:
        """LSB-first bit array of length bit_len (uint8 0/1)."""
        raw = self.to_int().to_bytes(-(-self.bit_len // 8), "little")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return bits[: self.bit_len]

    @property
    def significant(self) -> int:
        """Limb count without high zero limbs (at least 1)."""
        nz = np.flatnonzero(self.limbs)
        return int(nz[-1]) + 1 if nz.size else 1

    def __len__(self) -> int:
        return int(self.limbs.size)

    def __int__(self) -> int:
        return self.to_int()

    def __eq__(self, other) -> bool:
        if isinstance(other, LimbVec):
            n = self.significant
            return n == other.significant and bool(np.array_equal(self.limbs[:n], other.limbs[:n]))
        if isinstance(other, int):
            return self.to_int() == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.to_int())

    def __repr__(self) -> str:
        return f"LimbVec(limbs={len(self)}, bit_len={self.bit_len})"


# -------------------------
# Carries, addition, products
# -------------------------

def resolve_carries(coefficients) -> np.ndarray:
    """Z_{i+1} += Z_i div 2^24, Z_i <- Z_i mod 2^24, low limb to high."""
    out = []
    carry = 0
    for z in np.asarray(coefficients, dtype=np.uint64).tolist():
        t = z + carry
        out.append(t & LIMB_MASK)
        carry = t >> LIMB_BITS
    while carry:
        out.append(carry & LIMB_MASK)
        carry >>= LIMB_BITS
    return np.array(out or [0], dtype=np.uint32)


def add(x: LimbVec, y: LimbVec) -> LimbVec:
    n = max(len(x), len(y))
    acc = np.zeros(n, dtype=np.uint64)
    acc[: len(x)] += x.limbs
    acc[: len(y)] += y.limbs
    return LimbVec(resolve_carries(acc), max(x.bit_len, y.bit_len) + 1)


def mul_schoolbook(x: LimbVec, y: LimbVec) -> LimbVec:
    a = x.limbs[: x.significant].astype(np.uint64)
    b = y.limbs[: y.significant].astype(np.uint64)
    if a.size > b.size:
        a, b = b, a
    acc = np.zeros(a.size + b.size, dtype=np.uint64)
    # Column sums stay below a.size * 2^48, so uint64 holds them for a.size <= 65536.
    for i, digit in enumerate(a.tolist()):
        if digit:
            acc[i : i + b.size] += np.uint64(digit) * b
    return LimbVec(resolve_carries(acc), x.bit_len + y.bit_len)


def mul_ntt(x: LimbVec, y: LimbVec, plan: Optional[ntt.NttPlan] = None) -> LimbVec:
    nx, ny = x.significant, y.significant
    if plan is None:
        plan = ntt.plan_for_limbs(max(nx, ny))
    half = plan.size // 2
    if nx > half or ny > half:
        raise SizeError(
            f"operands of {nx} and {ny} limbs do not fit a {plan.size}-point plan (max {half} each)"
        )
    batch = np.zeros((2, plan.size), dtype=np.uint64)
    batch[0, :nx] = x.limbs[:nx]
    batch[1, :ny] = y.limbs[:ny]
    spectra = ntt.forward(plan, batch)
    coeffs = ntt.inverse(plan, field.mul_vec(spectra[0], spectra[1]))
    return LimbVec(resolve_carries(coeffs[: nx + ny]), x.bit_len + y.bit_len)


# -------------------------
# Mersenne arithmetic
# -------------------------

@dataclass(frozen=True)
class MersenneModulus:
    gamma: int
    p: int = dc_field(init=False, repr=False)

    def __post_init__(self):
        if self.gamma not in MERSENNE_EXPONENTS:
            raise ConfigurationError(f"2^{self.gamma} - 1 is not a catalogued Mersenne prime")
        object.__setattr__(self, "p", (1 << self.gamma) - 1)

    @property
    def n_limbs(self) -> int:
        return _n_limbs(self.gamma)


def fold(value: int, gamma: int) -> int:
    """(x mod 2^gamma) + (x >> gamma) until below 2^gamma; 2^gamma - 1 may remain."""
    mask = (1 << gamma) - 1
    while value >> gamma:
        value = (value & mask) + (value >> gamma)
    return value


def mersenne_reduce(x: Union[LimbVec, int], m: MersenneModulus) -> LimbVec:
    value = fold(int(x), m.gamma)
    if value == m.p:
        value = 0
    return LimbVec.from_int(value, m.gamma)


class ModAccumulator:
    """
    Running sum of products modulo 2^gamma - 1, kept below 2^gamma by folding.
    Single writer; 2^gamma - 1 is only canonicalized to 0 on read-out.
    """

    def __init__(self, modulus: MersenneModulus):
        self.modulus = modulus
        self._acc = 0
        self._count = 0

    def accumulate(self, y: Union[LimbVec, int]) -> "ModAccumulator":
        gamma = self.modulus.gamma
        y = int(y)
        if y >> (2 * gamma):
            raise SizeError(f"accumulator input exceeds {2 * gamma} bits")
        self._acc = fold(self._acc + fold(y, gamma), gamma)
        self._count += 1
        return self

    def clear(self) -> "ModAccumulator":
        self._acc = 0
        self._count = 0
        return self

    @property
    def count(self) -> int:
        return self._count

    @property
    def value(self) -> LimbVec:
        return LimbVec.from_int(self._acc, self.modulus.gamma)

    @property
    def residue(self) -> LimbVec:
        return LimbVec.from_int(self.residue_int, self.modulus.gamma)

    @property
    def residue_int(self) -> int:
        return 0 if self._acc == self.modulus.p else self._acc

# params.py - PA Forge
# Key parameters: gamma from the Mersenne catalog, k from the compression ratio, N = k * gamma.

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from errors import ConfigurationError


# Exponents of the first 33 Mersenne primes.
MERSENNE_EXPONENTS: Tuple[int, ...] = (
    2, 3, 5, 7, 13, 17, 19, 31, 61, 89, 107, 127, 521, 607, 1279, 2203, 2281,
    3217, 4253, 4423, 9689, 9941, 11213, 19937, 21701, 23209, 44497, 86243,
    110503, 132049, 216091, 756839, 859433,
)

# Multiplier width of the 65536-point plan: 32768 limbs of 24 bits.
NTT_CAPACITY_BITS = 786432


def lucas_lehmer(gamma: int) -> bool:
    """True iff 2^gamma - 1 is prime."""
    if gamma == 2:
        return True
    if gamma < 2 or any(gamma % d == 0 for d in range(2, math.isqrt(gamma) + 1)):
        return False
    m = (1 << gamma) - 1
    s = 4
    for _ in range(gamma - 2):
        s = s * s - 2
        s = (s & m) + (s >> gamma)
        s = (s & m) + (s >> gamma)
        if s >= m:
            s -= m
    return s == 0


@dataclass(frozen=True)
class MersenneCatalog:
    exponents: Tuple[int, ...] = MERSENNE_EXPONENTS

    def __post_init__(self):
        if not self.exponents or list(self.exponents) != sorted(set(self.exponents)):
            raise ConfigurationError("catalog exponents must be non-empty and strictly ascending")

    def __contains__(self, gamma: int) -> bool:
        return gamma in self.exponents

    def verify(self, limit: int = 127) -> List[int]:
        """Exponents <= limit whose Mersenne number fails Lucas-Lehmer."""
        return [g for g in self.exponents if g <= limit and not lucas_lehmer(g)]


DEFAULT_CATALOG = MersenneCatalog()


def choose_gamma(catalog: MersenneCatalog, n_mul_bits: int) -> int:
    fitting = [g for g in catalog.exponents if g <= n_mul_bits]
    if not fitting:
        raise ConfigurationError(
            f"capacity {n_mul_bits} bits is below the smallest exponent {catalog.exponents[0]}"
        )
    return fitting[-1]


def _as_fraction(r) -> Fraction:
    # str() keeps decimal literals exact: 0.1 -> 1/10.
    if isinstance(r, Fraction):
        return r
    try:
        return Fraction(str(r))
    except ValueError as exc:
        raise ConfigurationError(f"compression ratio must be a finite number, got {r}") from exc


def choose_k(r_pa_max) -> int:
    """Largest k with k < 1 / r_pa_max."""
    r = _as_fraction(r_pa_max)
    if not 0 < r < 1:
        raise ConfigurationError(f"compression ratio must lie in (0, 1), got {r_pa_max}")
    return math.ceil(1 / r) - 1


def block_size(gamma: int, k: int) -> int:
    return k * gamma


def select_parameters(capacity_bits: int, r_pa_max, catalog: MersenneCatalog = DEFAULT_CATALOG) -> Tuple[int, int, int]:
    gamma = choose_gamma(catalog, capacity_bits)
    k = choose_k(r_pa_max)
    return gamma, k, block_size(gamma, k)


# -------------------------
# Key-rate tabulation
# -------------------------

@dataclass(frozen=True)
class RateCurvePoint:
    distance: float
    r_pa: float
    sifted_rate: float

    def __post_init__(self):
        for name in ("distance", "r_pa", "sifted_rate"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite, got {getattr(self, name)}")
        if self.r_pa > 1:
            raise ConfigurationError(f"r_pa must be <= 1, got {self.r_pa} at {self.distance} km")
        if self.sifted_rate < 0:
            raise ConfigurationError(f"negative sifted rate at {self.distance} km")


@dataclass(frozen=True)
class KeyRateRow:
    distance: float
    k: int
    n_bits: int
    final_rate: float


def _k_for_ratio(r_pa) -> int:
    r = _as_fraction(r_pa)
    # k < 1/r_pa has no positive solution at r_pa = 1 either.
    if r <= 0 or r >= 1:
        return 0
    return choose_k(r)


def tabulate_keyrate(curve: Sequence[RateCurvePoint], gamma: int) -> List[KeyRateRow]:
    points = list(curve)
    if not points:
        raise ConfigurationError("rate curve is empty")
    if gamma not in MERSENNE_EXPONENTS:
        raise ConfigurationError(f"2^{gamma} - 1 is not a catalogued Mersenne prime")
    rows: List[KeyRateRow] = []
    last = None
    for pt in points:
        if not isinstance(pt, RateCurvePoint):
            raise ConfigurationError(f"malformed curve entry: {pt!r}")
        if last is not None and pt.distance <= last:
            raise ConfigurationError("curve distances must be strictly ascending")
        last = pt.distance
        k = _k_for_ratio(pt.r_pa)
        rate = pt.sifted_rate * pt.r_pa if pt.r_pa > 0 else 0.0
        rows.append(KeyRateRow(pt.distance, k, block_size(gamma, k), rate))
    return rows


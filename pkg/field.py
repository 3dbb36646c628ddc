# field.py - PA Forge
# Arithmetic modulo p_G = 2^64 - 2^32 + 1, the coefficient field of the NTT.

"""
Prime field of order p_G = 2^64 - 2^32 + 1.

Two flavours of every operation live here:

* scalar functions (`add`, `sub`, `mul`, `pow`, `inv`) on Python ints, used for
  constants, twiddle generation and root checks;
* vector functions (`add_vec`, `mul_vec`, ...) on numpy ``uint64`` arrays, used by
  the transforms. They broadcast like ordinary numpy operators.

Everything returned is canonical, i.e. in ``[0, p_G)``. Products are reduced with
the four-digit identity for a 128-bit value ``2^96 a + 2^64 b + 2^32 c + d``:

    2^96 a + 2^64 b + 2^32 c + d  ==  2^32 (b + c) - a - b + d   (mod p_G)

which follows from 2^64 == 2^32 - 1 and 2^96 == -1.
"""

from __future__ import annotations

from typing import List

import numpy as np

from errors import ConfigurationError


P = 0xFFFFFFFF00000001
EPSILON = 0xFFFFFFFF  # 2^64 mod P
MASK32 = 0xFFFFFFFF

# Primitive 65536-th root of unity.
ROOT_65536 = 0xED3365469864F124
MAX_LOG2_ORDER = 16

_P = np.uint64(P)
_EPS = np.uint64(EPSILON)
_M32 = np.uint64(MASK32)
_S32 = np.uint64(32)
_ZERO = np.uint64(0)


# -------------------------
# Scalar arithmetic
# -------------------------

def add(a: int, b: int) -> int:
    s = a + b
    return s - P if s >= P else s


def sub(a: int, b: int) -> int:
    d = a - b
    return d + P if d < 0 else d


def neg(a: int) -> int:
    return P - a if a else 0


def mul(a: int, b: int) -> int:
    prod = a * b
    d = prod & MASK32
    c = (prod >> 32) & MASK32
    b_ = (prod >> 64) & MASK32
    a_ = prod >> 96
    t = ((b_ + c) << 32) - a_ - b_ + d
    # t lies in (-2^33, 2^65 + 2^32): at most a couple of corrections.
    while t < 0:
        t += P
    while t >= P:
        t -= P
    return t


def pow(a: int, e: int) -> int:  # noqa: A001 - field exponentiation
    if e < 0:
        raise ValueError("exponent must be non-negative")
    result = 1
    base = a
    while e:
        if e & 1:
            result = mul(result, base)
        base = mul(base, base)
        e >>= 1
    return result


def inv(a: int) -> int:
    if a % P == 0:
        raise ZeroDivisionError("zero has no inverse in the field")
    return pow(a, P - 2)


def _root_chain() -> List[int]:
    chain = [0] * (MAX_LOG2_ORDER + 1)
    chain[MAX_LOG2_ORDER] = ROOT_65536
    for k in range(MAX_LOG2_ORDER, 0, -1):
        chain[k - 1] = mul(chain[k], chain[k])
    return chain


# ROOTS[k] is a primitive 2^k-th root of unity; ROOTS[0] == 1, ROOTS[1] == P - 1.
ROOTS = tuple(_root_chain())


def root_of_unity(order: int) -> int:
    if order < 1 or order & (order - 1):
        raise ConfigurationError(f"root order must be a power of two, got {order}")
    log2 = order.bit_length() - 1
    if log2 > MAX_LOG2_ORDER:
        raise ConfigurationError(
            f"no root of order {order} in the table (max {1 << MAX_LOG2_ORDER})"
        )
    return ROOTS[log2]


# -------------------------
# Vector arithmetic (uint64 arrays)
# -------------------------

def as_vec(x) -> np.ndarray:
    return np.asarray(x, dtype=np.uint64)


def is_canonical_vec(x) -> bool:
    return bool(np.all(as_vec(x) < _P))


def _reduce128(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    # hi = 2^32 a + b, lo = 2^32 c + d; computes lo - a + b (2^32 - 1).
    a = hi >> _S32
    b = hi & _M32
    t0 = lo - a
    t0 = np.where(lo < a, t0 - _EPS, t0)
    t1 = b * _EPS
    res = t0 + t1
    res = np.where(res < t1, res + _EPS, res)
    return np.where(res >= _P, res - _P, res)


def add_vec(a, b) -> np.ndarray:
    a = as_vec(a)
    b = as_vec(b)
    s = a + b
    s = np.where(s < a, s + _EPS, s)
    return np.where(s >= _P, s - _P, s)


def sub_vec(a, b) -> np.ndarray:
    a = as_vec(a)
    b = as_vec(b)
    d = a - b
    return np.where(a < b, d - _EPS, d)


def neg_vec(a) -> np.ndarray:
    a = as_vec(a)
    return np.where(a == _ZERO, _ZERO, _P - a)


def mul_vec(x, y) -> np.ndarray:
    x = as_vec(x)
    y = as_vec(y)
    x_lo = x & _M32
    x_hi = x >> _S32
    y_lo = y & _M32
    y_hi = y >> _S32

    ll = x_lo * y_lo
    lh = x_lo * y_hi
    hl = x_hi * y_lo
    hh = x_hi * y_hi

    mid = (ll >> _S32) + (lh & _M32) + (hl & _M32)
    lo = (ll & _M32) | (mid << _S32)
    hi = hh + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    return _reduce128(hi, lo)


def _shift_reduce(x: np.ndarray, e: int) -> np.ndarray:
    # x * 2^e for 0 <= e < 64: the 128-bit shift split into (hi, lo).
    if e == 0:
        return x.copy()
    lo = x << np.uint64(e)
    hi = x >> np.uint64(64 - e)
    return _reduce128(hi, lo)


def mul_pow2_vec(x, e: int) -> np.ndarray:
    """Multiply by 2^e using shifts only. 2 has order 192 and 2^96 == -1."""
    x = as_vec(x)
    e %= 192
    negate = e >= 96
    if negate:
        e -= 96
    if e < 64:
        res = _shift_reduce(x, e)
    else:
        # 2^e == 2^(e-64) (2^32 - 1) == 2^(e-32) - 2^(e-64)
        res = sub_vec(_shift_reduce(x, e - 32), _shift_reduce(x, e - 64))
    return neg_vec(res) if negate else res


def pow2_exponent(w: int) -> int | None:
    """Return e with 2^e == w in the field, or None when w is not a power of two."""
    acc = 1
    for e in range(192):
        if acc == w:
            return e
        acc = add(acc, acc)
    return None


def powers(w: int, n: int) -> np.ndarray:
    """[w^0, w^1, ..., w^(n-1)] as a uint64 array, built by repeated doubling."""
    out = np.ones(1, dtype=np.uint64)
    if n <= 0:
        return out[:0]
    while out.size < n:
        step = pow(w, int(out.size))
        out = np.concatenate((out, mul_vec(out, np.uint64(step))))
    return out[:n]

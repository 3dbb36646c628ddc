# reference.py - PA Forge
# Generic big-integer oracles. Only Python ints with % and //; no NTT, no folding.

from __future__ import annotations

from typing import List, Sequence

import numpy as np

from errors import InsufficientMaterialError
from field import P, ROOT_65536


def mmh_reference(a: Sequence[int], x: Sequence[int], gamma: int) -> int:
    p = (1 << gamma) - 1
    return sum(int(ai) * int(xi) for ai, xi in zip(a, x)) % p


def mh_reference(b: int, c: int, y: int, alpha: int, beta: int) -> int:
    return ((b * y + c) % (1 << alpha)) // (1 << (alpha - beta))


def window_reference(v: int, alpha: int, beta: int) -> int:
    return (v % (1 << alpha)) // (1 << (alpha - beta))


def int_to_bits(value: int, n_bits: int) -> np.ndarray:
    return np.array([(value >> i) & 1 for i in range(n_bits)], dtype=np.uint8)


def compress_reference(params, key_material: bytes) -> np.ndarray:
    """h_{b,c}(g_a(x)) with all-ones blocks replaced by the following gamma bits."""
    gamma = params.gamma
    p = (1 << gamma) - 1
    stream = int.from_bytes(bytes(key_material), "little")
    total = 8 * len(key_material)
    blocks: List[int] = []
    pos = 0
    while len(blocks) < params.k:
        if pos + gamma > total:
            raise InsufficientMaterialError("reference: key material exhausted")
        x = (stream // (1 << pos)) % (1 << gamma)
        pos += gamma
        if x != p:
            blocks.append(x)
    y = mmh_reference(params.a, blocks, gamma)
    z = mh_reference(params.b, params.c, y, gamma, params.r)
    return int_to_bits(z, params.r)


# -------------------------
# Transform oracles over p_G
# -------------------------

def root_reference(n: int) -> int:
    return pow(ROOT_65536, 65536 // n, P)


def dft_reference(v: Sequence[int], inverse: bool = False) -> List[int]:
    """O(N^2) definitional (I)NTT in natural order."""
    v = [int(t) for t in v]
    n = len(v)
    w = root_reference(n)
    if inverse:
        w = pow(w, P - 2, P)
    out = [sum(v[j] * pow(w, j * k, P) for j in range(n)) % P for k in range(n)]
    if inverse:
        n_inv = pow(n, P - 2, P)
        out = [t * n_inv % P for t in out]
    return out


def cyclic_convolution_reference(u: Sequence[int], v: Sequence[int]) -> List[int]:
    n = len(u)
    u = [int(t) for t in u]
    v = [int(t) for t in v]
    return [sum(u[j] * v[(i - j) % n] for j in range(n)) % P for i in range(n)]

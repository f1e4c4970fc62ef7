"""Self-maps of {0, ..., n-1} stored as integer index arrays (int32 when they fit).

``compose(a, b)`` is ``a o b`` (apply ``b`` first), i.e. ``a[b]``.
"""

from __future__ import annotations

import math

import numpy as np


def index_dtype(n: int):
    return np.int32 if n < 2**31 else np.int64


def as_index(a, n: int | None = None) -> np.ndarray:
    a = np.asarray(a)
    return a.astype(index_dtype(len(a) if n is None else n), copy=False)


def identity(n: int) -> np.ndarray:
    return np.arange(n, dtype=index_dtype(n))


def compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[b]


def map_power(f: np.ndarray, k: int) -> np.ndarray:
    """f^k by repeated squaring; k may be a huge integer."""
    if k < 0:
        raise ValueError("negative power of a self-map")
    result = None
    base = f
    while k:
        if k & 1:
            result = base.copy() if result is None else base[result]
        k >>= 1
        if k:
            base = base[base]
    return identity(len(f)) if result is None else result


def is_bijection(f: np.ndarray) -> bool:
    n = len(f)
    if n == 0:
        return True
    if f.min() < 0 or f.max() >= n:
        return False
    seen = np.zeros(n, dtype=bool)
    seen[f] = True
    return bool(seen.all())


def cycle_lengths(perm: np.ndarray) -> list[int]:
    n = len(perm)
    seen = np.zeros(n, dtype=bool)
    out = []
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = int(perm[x])
            length += 1
        out.append(length)
    return out


def perm_order(perm: np.ndarray) -> int:
    """Order of a permutation (lcm of its cycle lengths)."""
    n = len(perm)
    if n == 0:
        return 1
    # Orders divide lcm(1..n), but scanning powers is cheaper for the small
    # orders met in practice; fall back to the cycle walk otherwise.
    power = perm.copy()
    ident = identity(n)
    for k in range(1, 65):
        if np.array_equal(power, ident):
            return k
        power = perm[power]
    return math.lcm(*set(cycle_lengths(perm)))


def periodic_mask(f: np.ndarray) -> np.ndarray:
    """Points lying on a cycle of the functional graph of f.

    The images of g = f^(2^j) shrink to the set of cycle points, which f
    permutes.  Once squaring g no longer shrinks its image, g is injective on
    that image, so the image is the cyclic set.
    """
    n = len(f)
    mask = np.zeros(n, dtype=bool)
    if n == 0:
        return mask
    g = f
    mask[g] = True
    size = int(np.count_nonzero(mask))
    prev = n
    while size < prev:
        g = g[g]
        mask[:] = False
        mask[g] = True
        prev, size = size, int(np.count_nonzero(mask))
    return mask

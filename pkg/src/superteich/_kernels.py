"""Hot loops of the Grassmann product, with a numba path and a numpy path.

Terms are stored as two parallel arrays: ``masks`` (uint64 bitmask of the
generator subset, bit ``k`` is generator ``k + 1``) and ``coeffs`` (float64).
Both paths return masks sorted ascending with duplicates merged and terms
below ``eps`` in absolute value dropped.

Set ``SUPERTEICH_DISABLE_JIT=1`` to force the numpy path.  The numpy path is
also used when numba cannot be imported.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_JIT = os.environ.get("SUPERTEICH_DISABLE_JIT", "0").lower() not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

HAS_NUMBA = numba is not None
USE_NUMBA = HAS_NUMBA and not DISABLE_JIT


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def _reorder_parity_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Parity of the number of pairs (i in a, j in b) with i > j, elementwise."""
    count = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.uint64)
    present = int(np.bitwise_or.reduce(b.ravel())) if b.size else 0
    k = 0
    while present:
        if present & 1:
            has_bit = (b >> np.uint64(k)) & np.uint64(1)
            if k < 63:
                above = np.bitwise_count(a >> np.uint64(k + 1)).astype(np.uint64)
            else:
                above = np.zeros_like(count)
            count = count + has_bit * above
        present >>= 1
        k += 1
    return count & np.uint64(1)


def merge_terms_numpy(masks: np.ndarray, coeffs: np.ndarray, eps: float):
    if masks.size == 0:
        return masks.astype(np.uint64), coeffs.astype(np.float64)
    uniq, inv = np.unique(masks, return_inverse=True)
    summed = np.zeros(uniq.shape[0], dtype=np.float64)
    np.add.at(summed, inv, coeffs)
    keep = np.abs(summed) >= eps
    return uniq[keep], summed[keep]


def mul_terms_numpy(m1, c1, m2, c2, eps: float):
    if m1.size == 0 or m2.size == 0:
        return np.empty(0, np.uint64), np.empty(0, np.float64)
    a = m1[:, None]
    b = m2[None, :]
    ok = (a & b) == 0
    sign = 1.0 - 2.0 * _reorder_parity_numpy(a, b).astype(np.float64)
    prod = c1[:, None] * c2[None, :] * sign
    masks = (a | b)[ok]
    return merge_terms_numpy(masks, prod[ok], eps)


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if HAS_NUMBA:

    @numba.njit(cache=True)
    def _popcount64(x):
        x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
        x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
        x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)

    @numba.njit(cache=True)
    def _reorder_sign(a, b):
        # popcount-prefix: for every bit j of b, count bits of a strictly above j
        count = np.uint64(0)
        k = 0
        while b != np.uint64(0):
            if b & np.uint64(1):
                if k < 63:
                    count += _popcount64(a >> np.uint64(k + 1))
            b = b >> np.uint64(1)
            k += 1
        if count & np.uint64(1):
            return -1.0
        return 1.0

    @numba.njit(cache=True)
    def merge_terms_numba(masks, coeffs, eps):
        n = masks.shape[0]
        out_m = np.empty(n, dtype=np.uint64)
        out_c = np.empty(n, dtype=np.float64)
        if n == 0:
            return out_m, out_c
        order = np.argsort(masks, kind="mergesort")
        k = 0
        cur = masks[order[0]]
        acc = 0.0
        for idx in range(n):
            i = order[idx]
            if masks[i] != cur:
                if abs(acc) >= eps:
                    out_m[k] = cur
                    out_c[k] = acc
                    k += 1
                cur = masks[i]
                acc = 0.0
            acc += coeffs[i]
        if abs(acc) >= eps:
            out_m[k] = cur
            out_c[k] = acc
            k += 1
        return out_m[:k].copy(), out_c[:k].copy()

    @numba.njit(cache=True)
    def mul_terms_numba(m1, c1, m2, c2, eps):
        n1 = m1.shape[0]
        n2 = m2.shape[0]
        tm = np.empty(n1 * n2, dtype=np.uint64)
        tc = np.empty(n1 * n2, dtype=np.float64)
        k = 0
        for i in range(n1):
            a = m1[i]
            for j in range(n2):
                b = m2[j]
                if a & b:
                    continue
                tm[k] = a | b
                tc[k] = c1[i] * c2[j] * _reorder_sign(a, b)
                k += 1
        return merge_terms_numba(tm[:k], tc[:k], eps)

else:  # pragma: no cover
    merge_terms_numba = None
    mul_terms_numba = None


if USE_NUMBA:
    merge_terms = merge_terms_numba
    mul_terms = mul_terms_numba
else:
    merge_terms = merge_terms_numpy
    mul_terms = mul_terms_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"

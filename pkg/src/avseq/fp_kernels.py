"""Hot finite-field kernels: group-scale enumeration over F_p.

Each kernel exists twice: a numba @njit build and a pure-numpy build.
The active implementation is chosen at import time; set AVSEQ_PURE_NUMPY=1
to force the numpy path (numba also disables itself when unavailable).
Curves here are in completed-square form y^2 = x^3 + A x^2 + B x + C with
an odd prime modulus; callers keep p <= ~10^6 so every intermediate
product fits in int64.

benchmarks/bench_fp_kernels.py compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("AVSEQ_PURE_NUMPY", "").lower() in ("1", "true", "yes")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _FORCE_NUMPY


# ---------------------------------------------------------------------------
# pure numpy path
# ---------------------------------------------------------------------------

def _cubic_values_np(p, A, B, C):
    x = np.arange(p, dtype=np.int64)
    f = (x + A) % p
    f = (f * x + B) % p
    f = (f * x + C) % p
    return f


def order_count_np(p: int, A: int, B: int, C: int) -> int:
    """#E(F_p) = p + 1 + sum_x chi(f(x)) by quadratic-character summation."""
    f = _cubic_values_np(p, A, B, C)
    is_sq = np.zeros(p, dtype=bool)
    y = np.arange(p, dtype=np.int64)
    is_sq[(y * y) % p] = True
    chi = np.where(f == 0, 0, np.where(is_sq[f], 1, -1))
    return int(p + 1 + chi.sum())


def all_points_np(p: int, A: int, B: int, C: int):
    """All affine points, sorted by (x, y)."""
    f = _cubic_values_np(p, A, B, C)
    table = np.full(p, -1, dtype=np.int64)
    y = np.arange(p - 1, -1, -1, dtype=np.int64)  # descending: smallest root wins
    table[(y * y) % p] = y
    r = table[f]
    x = np.arange(p, dtype=np.int64)
    has = r >= 0
    xs0, rs0 = x[has], r[has]
    upper = rs0 > 0
    xs = np.concatenate([xs0, xs0[upper]])
    ys = np.concatenate([rs0, p - rs0[upper]])
    order = np.lexsort((ys, xs))
    return xs[order], ys[order]


def _powmod_np(base, exp, p):
    result = np.ones_like(base)
    b = base % p
    e = exp
    while e:
        if e & 1:
            result = result * b % p
        b = b * b % p
        e >>= 1
    return result


def _masked_add_np(p, A, B, x1, y1, i1, x2, y2, i2):
    """Componentwise group law on arrays of points (i* = infinity flags)."""
    active = ~i1 & ~i2
    same_x = active & (x1 == x2)
    opposite = same_x & ((y1 + y2) % p == 0)
    double = same_x & ~opposite
    generic = active & (x1 != x2)

    denom = np.ones_like(x1)
    numer = np.zeros_like(x1)
    np.copyto(denom, 2 * y1 % p, where=double)
    np.copyto(numer, (3 * x1 * x1 % p + 2 * A * x1 + B) % p, where=double)
    np.copyto(denom, (x2 - x1) % p, where=generic)
    np.copyto(numer, (y2 - y1) % p, where=generic)
    lam = numer * _powmod_np(denom, p - 2, p) % p

    x3 = (lam * lam - A - x1 - x2) % p
    y3 = (lam * ((x1 - x3) % p) - y1) % p

    ox = np.where(i1, x2, np.where(i2, x1, x3))
    oy = np.where(i1, y2, np.where(i2, y1, y3))
    oi = (i1 & i2) | opposite
    ox = np.where(oi, 0, ox)
    oy = np.where(oi, 0, oy)
    return ox, oy, oi


def killed_by_np(p, A, B, C, N, xs, ys):
    """Boolean mask of the points (xs, ys) with N * P = infinity."""
    n_pts = xs.shape[0]
    accx = np.zeros(n_pts, dtype=np.int64)
    accy = np.zeros(n_pts, dtype=np.int64)
    acci = np.ones(n_pts, dtype=bool)
    bx, by = xs.copy(), ys.copy()
    bi = np.zeros(n_pts, dtype=bool)
    n = N
    while n:
        if n & 1:
            accx, accy, acci = _masked_add_np(p, A, B, accx, accy, acci, bx, by, bi)
        n >>= 1
        if n:
            bx, by, bi = _masked_add_np(p, A, B, bx, by, bi, bx, by, bi)
    return acci


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _powmod_nb(base, exp, p):
        result = 1
        b = base % p
        e = exp
        while e:
            if e & 1:
                result = result * b % p
            b = b * b % p
            e >>= 1
        return result

    @njit(cache=True)
    def order_count_nb(p, A, B, C):
        table = np.zeros(p, dtype=np.uint8)
        for y in range(p):
            table[y * y % p] = 1
        total = p + 1
        for x in range(p):
            f = ((x + A) % p * x + B) % p
            f = (f * x + C) % p
            if f != 0:
                total += 1 if table[f] else -1
        return total

    @njit(cache=True)
    def all_points_nb(p, A, B, C):
        root = np.full(p, -1, dtype=np.int64)
        for y in range(p - 1, -1, -1):
            root[y * y % p] = y
        count = 0
        for x in range(p):
            f = ((x + A) % p * x + B) % p
            f = (f * x + C) % p
            r = root[f]
            if r >= 0:
                count += 1 if r == 0 else 2
        xs = np.empty(count, dtype=np.int64)
        ys = np.empty(count, dtype=np.int64)
        k = 0
        for x in range(p):
            f = ((x + A) % p * x + B) % p
            f = (f * x + C) % p
            r = root[f]
            if r >= 0:
                if r == 0:
                    xs[k] = x
                    ys[k] = 0
                    k += 1
                else:
                    lo, hi = (r, p - r) if r < p - r else (p - r, r)
                    xs[k] = x
                    ys[k] = lo
                    xs[k + 1] = x
                    ys[k + 1] = hi
                    k += 2
        return xs, ys

    @njit(cache=True)
    def killed_by_nb(p, A, B, C, N, xs, ys):
        n_pts = xs.shape[0]
        out = np.zeros(n_pts, dtype=np.bool_)
        for idx in range(n_pts):
            accx = 0
            accy = 0
            acci = True
            bx = xs[idx]
            by = ys[idx]
            bi = False
            n = N
            while n:
                if n & 1:
                    # acc += base
                    if acci:
                        accx, accy, acci = bx, by, bi
                    elif not bi:
                        if accx == bx and (accy + by) % p == 0:
                            acci = True
                        else:
                            if accx == bx:
                                lam = (3 * accx * accx % p + 2 * A * accx + B) % p \
                                    * _powmod_nb(2 * accy % p, p - 2, p) % p
                            else:
                                lam = (by - accy) % p * _powmod_nb((bx - accx) % p, p - 2, p) % p
                            x3 = (lam * lam - A - accx - bx) % p
                            accy = (lam * ((accx - x3) % p) - accy) % p
                            accx = x3
                n >>= 1
                if n and not bi:
                    # base = 2 * base
                    if (2 * by) % p == 0:
                        bi = True
                    else:
                        lam = (3 * bx * bx % p + 2 * A * bx + B) % p \
                            * _powmod_nb(2 * by % p, p - 2, p) % p
                        x3 = (lam * lam - A - 2 * bx) % p
                        by = (lam * ((bx - x3) % p) - by) % p
                        bx = x3
            out[idx] = acci
        return out


if USE_NUMBA:
    order_count = order_count_nb
    all_points = all_points_nb
    killed_by = killed_by_nb
    ACTIVE_PATH = "numba"
else:
    order_count = order_count_np
    all_points = all_points_np
    killed_by = killed_by_np
    ACTIVE_PATH = "numpy"

"""Exact integer arithmetic: primality, factorization, radicals.

Every sequence term in this package is ultimately a factored integer, so
this module is the single factor engine.  Factorization is trial division
up to a fixed bound followed by Brent-cycle Pollard rho with recursive
splitting, metered by an iteration budget.
"""

from __future__ import annotations

import json
import math
import random
import threading
from dataclasses import dataclass, field

from .errors import FactorBudgetExceeded, InputError

TRIAL_DIVISION_BOUND = 10_000
DEFAULT_RHO_BUDGET = 10 ** 8

# Deterministic Miller-Rabin witness set, valid for n < 3.4e14.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23)
_MR_DETERMINISTIC_LIMIT = 341_550_071_728_321
_MR_PROBABILISTIC_ROUNDS = 64  # error < 4**-64 = 2**-128

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _mr_witness(a: int, n: int, d: int, r: int) -> bool:
    """True if a proves n composite."""
    a %= n
    if a <= 1:
        return False
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(r - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def is_prime(n: int) -> bool:
    """Primality test.

    Deterministic (fixed witness set) below 3.4e14, Miller-Rabin with 64
    pseudo-random rounds beyond, so the composite error rate is below
    2**-128.  The pseudo-random witnesses are seeded from n, keeping the
    answer reproducible.
    """
    if n < 0:
        raise InputError("is_prime expects a non-negative integer")
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    if n < _MR_DETERMINISTIC_LIMIT:
        witnesses = _MR_WITNESSES
    else:
        rng = random.Random(n)
        witnesses = tuple(rng.randrange(2, n - 1) for _ in range(_MR_PROBABILISTIC_ROUNDS))
    return not any(_mr_witness(a, n, d, r) for a in witnesses)


@dataclass(frozen=True)
class Factorization:
    """A complete factorization ``value = prod(p**e)`` with primes increasing."""

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        prev = 1
        for p, e in self.factors:
            if p <= prev:
                raise InputError("factor primes must be strictly increasing")
            if e < 1:
                raise InputError("exponents must be positive")
            if not is_prime(p):
                raise InputError(f"{p} is not prime")
            prod *= p ** e
            prev = p
        if prod != self.value:
            raise InputError("factors do not reconstruct value")

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def radical(self) -> int:
        r = 1
        for p, _ in self.factors:
            r *= p
        return r

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return "*".join(str(p) if e == 1 else f"{p}^{e}" for p, e in self.factors)


class PrimeSet:
    """An immutable sorted set of distinct primes."""

    __slots__ = ("_primes",)

    def __init__(self, primes=()):
        ps = sorted(set(int(p) for p in primes))
        for p in ps:
            if not is_prime(p):
                raise InputError(f"{p} is not prime")
        self._primes = tuple(ps)

    def __contains__(self, p) -> bool:
        return p in set(self._primes)

    def __iter__(self):
        return iter(self._primes)

    def __len__(self) -> int:
        return len(self._primes)

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeSet) and self._primes == other._primes

    def __hash__(self) -> int:
        return hash(self._primes)

    def __repr__(self) -> str:
        return f"PrimeSet({list(self._primes)})"

    def union(self, other) -> "PrimeSet":
        return PrimeSet(tuple(self) + tuple(other))

    def product(self) -> int:
        out = 1
        for p in self._primes:
            out *= p
        return out


def _brent_rho(n: int, seed: int, budget: int) -> tuple[int | None, int]:
    """One Brent-rho attempt.  Returns (factor or None, iterations used)."""
    rng = random.Random(seed)
    y = rng.randrange(1, n)
    c = rng.randrange(1, n)
    m = 128
    g = r = q = 1
    used = 0
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            used += min(m, r - k)
            if used > budget:
                return None, used
            g = math.gcd(q, n)
            k += m
        r *= 2
    if g == n:
        # Backtrack one step at a time to recover the factor.
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
    if g == n:
        return None, used
    return g, used


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self, amount: int):
        self.used += amount

    @property
    def remaining(self) -> int:
        return max(0, self.limit - self.used)


def _iroot(n: int, k: int) -> int:
    """Floor of the k-th root of n, exact integer arithmetic."""
    if k == 2:
        return math.isqrt(n)
    hi = 1 << (n.bit_length() // k + 1)
    lo = 0
    while lo < hi - 1:
        mid = (lo + hi) // 2
        if mid ** k <= n:
            lo = mid
        else:
            hi = mid
    return lo


def _perfect_power(n: int) -> tuple[int, int] | None:
    """Return (root, k) with root**k == n and prime k >= 2, or None."""
    k = 2
    while (1 << k) <= n:
        if is_prime(k):
            root = _iroot(n, k)
            if root ** k == n:
                return root, k
        k += 1
    return None


def _factor_into(n: int, out: dict[int, int], mult: int, budget: _Budget) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + mult
        return
    # rho behaves badly on perfect powers; peel them off first
    power = _perfect_power(n)
    if power is not None:
        root, k = power
        _factor_into(root, out, mult * k, budget)
        return
    seed = 1
    while True:
        if budget.remaining == 0:
            raise FactorBudgetExceeded(n, sorted(out.items()), n, budget.limit)
        f, used = _brent_rho(n, seed, budget.remaining)
        budget.spend(used)
        if f is not None and 1 < f < n:
            _factor_into(f, out, mult, budget)
            _factor_into(n // f, out, mult, budget)
            return
        seed += 1


def factor(n: int, budget: int = DEFAULT_RHO_BUDGET, cache: "FactorCache | None" = None) -> Factorization:
    """Complete factorization of n >= 1.

    Trial division up to TRIAL_DIVISION_BOUND, then Brent-rho splitting.
    Raises FactorBudgetExceeded (with the partial result attached) if the
    rho iteration budget runs out.
    """
    if n < 1:
        raise InputError("factor expects n >= 1")
    if cache is not None:
        hit = cache.get(n)
        if hit is not None:
            return hit
    m = n
    out: dict[int, int] = {}
    d = 2
    while d <= TRIAL_DIVISION_BOUND and d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        tracker = _Budget(budget)
        try:
            _factor_into(m, out, 1, tracker)
        except FactorBudgetExceeded as exc:
            raise FactorBudgetExceeded(n, sorted(out.items()), exc.remaining, budget) from None
    result = Factorization(n, tuple(sorted(out.items())))
    if cache is not None:
        cache.put(result)
    return result


def radical(n: int, exclude: PrimeSet | None = None,
            budget: int = DEFAULT_RHO_BUDGET, cache: "FactorCache | None" = None) -> int:
    """Product of the distinct primes of n that are not in ``exclude``."""
    if n < 1:
        raise InputError("radical expects n >= 1")
    excl = exclude or PrimeSet()
    # Strip excluded primes first; keeps the residual factorization smaller.
    for p in excl:
        while n % p == 0:
            n //= p
    out = 1
    for p, _ in factor(n, budget=budget, cache=cache).factors:
        out *= p
    return out


def strip_support(n: int, junk: int) -> int:
    """Remove from n every prime that divides junk, without factoring."""
    if n == 0:
        return 0
    g = math.gcd(n, junk)
    while g > 1:
        while n % g == 0:
            n //= g
        g = math.gcd(n, g)
    return n


def same_support(a: int, b: int) -> bool:
    """True iff a and b have identical prime support (no factoring needed)."""
    return strip_support(a, b) == 1 and strip_support(b, a) == 1


class FactorCache:
    """Thread-safe factorization cache, optionally persisted as JSON.

    File format: {"version": 1, "entries": {"<n>": [[p, e], ...], ...}}.
    A corrupted file is ignored with a warning rather than trusted.
    """

    VERSION = 1

    def __init__(self, path: str | None = None):
        self.path = path
        self._lock = threading.Lock()
        self._entries: dict[int, tuple[tuple[int, int], ...]] = {}
        self.load_warning: str | None = None
        if path is not None:
            self._load(path)

    def _load(self, path: str) -> None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
            if doc.get("version") != self.VERSION:
                raise ValueError("unknown cache version")
            for key, factors in doc["entries"].items():
                n = int(key)
                fac = Factorization(n, tuple((int(p), int(e)) for p, e in factors))
                self._entries[n] = fac.factors
        except FileNotFoundError:
            pass
        except Exception as exc:  # malformed cache: start fresh
            self._entries.clear()
            self.load_warning = f"ignoring corrupted cache {path}: {exc}"

    def get(self, n: int) -> Factorization | None:
        with self._lock:
            factors = self._entries.get(n)
        if factors is None:
            return None
        return Factorization(n, factors)

    def put(self, fac: Factorization) -> None:
        with self._lock:
            self._entries[fac.value] = fac.factors

    def save(self, path: str | None = None) -> None:
        path = path or self.path
        if path is None:
            return
        with self._lock:
            doc = {
                "version": self.VERSION,
                "entries": {
                    str(n): [[p, e] for p, e in factors]
                    for n, factors in sorted(self._entries.items())
                },
            }
        with open(path, "w") as fh:
            json.dump(doc, fh)
            fh.write("\n")

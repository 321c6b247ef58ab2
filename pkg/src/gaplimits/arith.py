"""Segmented prime sieve and the arithmetic functions built on it.

Counting functions return exact Python integers; anything involving
logarithms is a double and is only ever compared with a tolerance.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, RangeError, ResourceError

DEFAULT_SEGMENT = 1 << 16
DEFAULT_MEMORY_BUDGET = 1 << 31  # bytes


def _small_primes(n: int) -> np.ndarray:
    """Plain Eratosthenes up to ``n`` inclusive."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _sieve_segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primality flags for ``[lo, hi)`` given all primes up to sqrt(hi)."""
    seg = np.ones(hi - lo, dtype=bool)
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        seg[start - lo :: p] = False
    if lo <= 1:
        seg[: 2 - lo] = False
    return seg


def estimate_bytes(limit: int) -> int:
    # one flag byte per integer plus the int64 prime list (pi(x) < 1.26 x / log x)
    n_primes = int(1.26 * limit / math.log(limit)) + 1 if limit > 2 else 1
    return (limit + 1) + 8 * n_primes


@dataclass(frozen=True, eq=False)
class PrimeStore:
    """Primes up to ``limit`` with O(1) primality lookup and rank/select."""

    limit: int
    segment_size: int
    primes: np.ndarray = field(repr=False)
    flags: np.ndarray = field(repr=False)

    def rank(self, x: int) -> int:
        """pi(x): the number of primes <= x."""
        if x > self.limit:
            raise RangeError(f"rank({x}) exceeds store limit {self.limit}")
        return int(np.searchsorted(self.primes, x, side="right"))

    def select(self, n: int) -> int:
        """p_n, the n-th smallest prime (1-based)."""
        if not 1 <= n <= len(self.primes):
            raise RangeError(f"select({n}) outside 1..{len(self.primes)}")
        return int(self.primes[n - 1])

    def is_prime(self, n: int) -> bool:
        if n > self.limit:
            raise RangeError(f"is_prime({n}) exceeds store limit {self.limit}")
        return n >= 0 and bool(self.flags[n])

    def primes_upto(self, x: int) -> np.ndarray:
        return self.primes[: self.rank(x)]

    def primes_between(self, lo: int, hi: int) -> np.ndarray:
        """Primes p with lo < p <= hi."""
        if hi > self.limit:
            raise RangeError(f"primes_between upper end {hi} exceeds limit {self.limit}")
        i = np.searchsorted(self.primes, lo, side="right")
        j = np.searchsorted(self.primes, hi, side="right")
        return self.primes[i:j]

    def check(self, n: int, what: str = "argument") -> None:
        if n > self.limit:
            raise RangeError(f"{what} {n} exceeds store limit {self.limit}")

    @lru_cache(maxsize=8)
    def prime_powers(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        """All prime powers p^a <= N (a >= 1), with log p alongside, sorted."""
        self.check(N, "N")
        ps = self.primes_upto(N)
        vals = [ps]
        logs = [np.log(ps.astype(float))]
        cur = ps.copy()
        base = ps
        while True:
            keep = cur <= N // base
            if not keep.any():
                break
            base = base[keep]
            cur = cur[keep] * base
            vals.append(cur)
            logs.append(np.log(base.astype(float)))
        v = np.concatenate(vals)
        lg = np.concatenate(logs)
        order = np.argsort(v, kind="stable")
        return v[order], lg[order]


def build_store(
    limit: int,
    segment_size: int = DEFAULT_SEGMENT,
    *,
    workers: int = 1,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> PrimeStore:
    """Sieve ``[0, limit]`` in blocks of ``segment_size``.

    Blocks may be sieved on a thread pool; results are concatenated in
    ascending block order, so the store is identical for any choice of
    ``segment_size`` or ``workers``.
    """
    if limit < 2:
        raise ArgumentError(f"limit must be >= 2, got {limit}")
    if segment_size < 64:
        raise ArgumentError(f"segment_size must be >= 64, got {segment_size}")
    need = estimate_bytes(limit)
    if need > memory_budget:
        raise ResourceError(
            f"store for limit {limit} needs ~{need} bytes, over memory budget {memory_budget}"
        )
    base = _small_primes(math.isqrt(limit) + 1)
    bounds = [(lo, min(lo + segment_size, limit + 1)) for lo in range(0, limit + 1, segment_size)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            segs = list(pool.map(lambda b: _sieve_segment(b[0], b[1], base), bounds))
    else:
        segs = [_sieve_segment(lo, hi, base) for lo, hi in bounds]
    flags = np.concatenate(segs)
    flags.setflags(write=False)
    primes = np.flatnonzero(flags).astype(np.int64)
    primes.setflags(write=False)
    return PrimeStore(limit=limit, segment_size=segment_size, primes=primes, flags=flags)


@dataclass(frozen=True, eq=False)
class ArithCache:
    """Tables of phi, mu and the greatest prime factor for 1..limit.

    Index 0 is unused padding. P+(1) = 1 by convention.
    """

    limit: int
    phi: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)
    gpf: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, limit: int) -> "ArithCache":
        if limit < 1:
            raise ArgumentError(f"limit must be >= 1, got {limit}")
        phi = np.arange(limit + 1, dtype=np.int64)
        mu = np.ones(limit + 1, dtype=np.int8)
        gpf = np.ones(limit + 1, dtype=np.int64)
        mu[0] = 0
        gpf[0] = 0
        for p in _small_primes(limit):
            p = int(p)
            phi[p::p] -= phi[p::p] // p
            mu[p::p] *= -1
            if p * p <= limit:
                mu[p * p :: p * p] = 0
            gpf[p::p] = p
        for a in (phi, mu, gpf):
            a.setflags(write=False)
        return cls(limit=limit, phi=phi, mu=mu, gpf=gpf)


# ---------------------------------------------------------------------------
# pointwise helpers on single integers (no table needed)


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization; fine for the small integers used here."""
    if n < 1:
        raise ArgumentError(f"cannot factor {n}")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    r = n
    for p in factorize(n):
        r -= r // p
    return r


def greatest_prime_factor(n: int) -> int:
    return max(factorize(n), default=1)


def is_squarefree(n: int) -> bool:
    return n >= 1 and all(e == 1 for e in factorize(n).values())


# ---------------------------------------------------------------------------


def chebyshev_psi(store: PrimeStore, N: int) -> float:
    """psi(N) = sum of log p over prime powers p^a <= N."""
    if N < 2:
        return 0.0
    _, logs = store.prime_powers(N)
    return math.fsum(logs)


def psi_progression(store: PrimeStore, N: int, q: int, a: int) -> float:
    """psi(N; q, a): the part of psi(N) coming from n = a (mod q)."""
    if q < 1:
        raise ArgumentError(f"modulus must be >= 1, got {q}")
    if N < 2:
        return 0.0
    vals, logs = store.prime_powers(N)
    return math.fsum(logs[vals % q == a % q])


def psi_residues(store: PrimeStore, N: int, q: int) -> np.ndarray:
    """Vector of psi(N; q, a) for a = 0..q-1, each class summed with fsum."""
    if q < 1:
        raise ArgumentError(f"modulus must be >= 1, got {q}")
    if N < 2:
        return np.zeros(q)
    vals, logs = store.prime_powers(N)
    res = vals % q
    order = np.argsort(res, kind="stable")
    cuts = np.searchsorted(res[order], np.arange(1, q))
    return np.array([math.fsum(g) for g in np.split(logs[order], cuts)])


_SMOOTH_TABLE_MAX = 1 << 22


def smooth_count(x: int, y: int) -> int:
    """Psi(x, y): number of n <= x whose prime factors are all <= y (1 counts)."""
    if x < 1 or y < 1:
        raise ArgumentError(f"smooth_count needs x, y >= 1, got ({x}, {y})")
    if y >= x:
        return x
    if x <= _SMOOTH_TABLE_MAX:
        gpf = ArithCache.build(x).gpf
        return int(np.count_nonzero(gpf[1:] <= y))
    ps = [int(p) for p in _small_primes(y)]
    return _psi_rec(x, len(ps), tuple(ps))


@lru_cache(maxsize=None)
def _psi_rec(x: int, i: int, ps: tuple) -> int:
    # smooth numbers <= x using only the first i primes
    if i == 0 or x < 2:
        return 1
    p = ps[i - 1]
    if p > x:
        j = i
        while j > 0 and ps[j - 1] > x:
            j -= 1
        return _psi_rec(x, j, ps)
    return _psi_rec(x, i - 1, ps) + _psi_rec(x // p, i, ps)


@dataclass(frozen=True)
class MertensReport:
    x: int
    sum_reciprocal: float
    product_form: float
    predicted: float

    @property
    def relative_error(self) -> float:
        return abs(self.product_form - self.predicted) / self.predicted


def mertens_report(store: PrimeStore, x: int) -> MertensReport:
    """Sum of 1/p, product of (1 - 1/p) over p <= x, and exp(-gamma)/log x."""
    if x < 2:
        raise ArgumentError(f"mertens_report needs x >= 2, got {x}")
    store.check(x, "x")
    ps = store.primes_upto(x).astype(float)
    s = math.fsum(1.0 / ps)
    prod = float(np.exp(np.sum(np.log1p(-1.0 / ps))))
    return MertensReport(x, s, prod, math.exp(-np.euler_gamma) / math.log(x))

"""Multidimensional sieve weights and the weighted prime-pattern sums S, S'.

The weights are

    lambda_d = prod mu(d_i) * Σ_j prod_l F_{l,j}(log d_l / log N)

(zero if prod d_i shares a factor with the excluded modulus Z, and
zero outside prod d_i <= N^delta).  The sums are evaluated two ways:
per-n divisor enumeration, and the expanded double sum over weight pairs
with the inner n-sum done by CRT.  The two must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from ..arith import PrimeStore, is_squarefree, mobius
from ..errors import ArgumentError
from ..tuples import KTuple, admissible_residue

DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class Piece:
    """A univariate weight function on [0, inf) vanishing beyond ``support_end``."""

    func: Callable[[float], float]
    support_end: float
    name: str = ""

    def __call__(self, t: float) -> float:
        if t < 0 or t > self.support_end:
            return 0.0
        return float(self.func(t))

    @classmethod
    def power(cls, support_end: float, exponent: int = 1) -> "Piece":
        """(1 - t/support_end)^exponent on [0, support_end]."""
        if support_end <= 0:
            raise ArgumentError("support_end must be positive for a power piece")
        return cls(lambda t: (1.0 - t / support_end) ** exponent, support_end, f"power{exponent}")

    @classmethod
    def at_zero(cls) -> "Piece":
        """1 at t = 0 only; makes lambda the indicator of d = 1."""
        return cls(lambda t: 1.0 if t == 0 else 0.0, 0.0, "at_zero")


@dataclass(frozen=True)
class SieveWeightSpec:
    pieces: tuple[tuple[Piece, ...], ...]  # pieces[j][l]
    delta: float = DEFAULT_DELTA
    excluded_modulus: int = 1

    def __post_init__(self):
        if not self.pieces or not self.pieces[0]:
            raise ArgumentError("need at least one product of pieces")
        k = len(self.pieces[0])
        for j, row in enumerate(self.pieces):
            if len(row) != k:
                raise ArgumentError(f"product {j} has {len(row)} pieces, expected {k}")
            reach = sum(p.support_end for p in row)
            if reach > self.delta + 1e-12:
                raise ArgumentError(
                    f"product {j} reaches Σ t = {reach:g}, beyond the support budget {self.delta:g}"
                )

    @property
    def k(self) -> int:
        return len(self.pieces[0])

    @property
    def J(self) -> int:
        return len(self.pieces)

    @classmethod
    def standard(cls, k: int, delta: float = DEFAULT_DELTA, exponent: int = 1, Z: int = 1):
        piece = Piece.power(delta / k, exponent)
        return cls(((piece,) * k,), delta, Z)

    @classmethod
    def trivial(cls, k: int, delta: float = DEFAULT_DELTA, Z: int = 1):
        return cls(((Piece.at_zero(),) * k,), delta, Z)


def sieve_weight(spec: SieveWeightSpec, d: Sequence[int], N: int, Z: int | None = None) -> float:
    if len(d) != spec.k:
        raise ArgumentError(f"weight vector has length {len(d)}, expected {spec.k}")
    if any(x < 1 for x in d):
        raise ArgumentError(f"divisors must be >= 1: {tuple(d)}")
    Z = spec.excluded_modulus if Z is None else Z
    prod = math.prod(d)
    if math.gcd(prod, Z) != 1:
        return 0.0
    sign = 1
    for x in d:
        mu = mobius(x)
        if mu == 0:
            return 0.0
        sign *= mu
    logN = math.log(N)
    if math.log(prod) > spec.delta * logN + 1e-12:
        return 0.0
    ts = [math.log(x) / logN for x in d]
    total = math.fsum(math.prod(p(t) for p, t in zip(row, ts)) for row in spec.pieces)
    return sign * total


def weight_support(spec: SieveWeightSpec, N: int, Z: int | None = None) -> dict[tuple[int, ...], float]:
    """All d with lambda_d != 0, mapped to lambda_d."""
    Z = spec.excluded_modulus if Z is None else Z
    X = int(math.floor(N**spec.delta * (1 + 1e-12)))
    sqf = [n for n in range(1, X + 1) if is_squarefree(n) and math.gcd(n, Z) == 1]
    out: dict[tuple[int, ...], float] = {}

    def rec(prefix: tuple[int, ...], budget: int):
        if len(prefix) == spec.k:
            w = sieve_weight(spec, prefix, N, Z)
            if w:
                out[prefix] = w
            return
        for n in sqf:
            if n > budget:
                break
            rec(prefix + (n,), budget // n)

    rec((), X)
    return out


def coprime_base(t: KTuple, W: int) -> int:
    """Smallest-residue b (mod W) with gcd(prod(b + h_i), W) = 1, via CRT."""
    from ..cover import crt

    res, mods = [], []
    for p in _prime_factors_squarefree(W):
        a = admissible_residue(t.offsets, p)
        if a is None:
            raise ArgumentError(f"tuple {t} covers every class mod {p}")
        res.append((-a) % p)
        mods.append(p)
    return crt(res, mods)[0] if mods else 0


def _prime_factors_squarefree(W: int) -> list[int]:
    from ..arith import factorize

    f = factorize(W) if W > 1 else {}
    if any(e > 1 for e in f.values()):
        raise ArgumentError(f"W = {W} must be squarefree")
    return sorted(f)


def _bracket(store: PrimeStore, t: KTuple, ns: np.ndarray, m: int, penalty: float) -> np.ndarray:
    flags = [store.flags[ns + h].astype(float) for h in t.offsets]
    total = np.sum(flags, axis=0) - m
    idx = {h: i for i, h in enumerate(t.offsets)}
    for part in t.parts:
        for h1, h2 in combinations(part, 2):
            total = total - penalty * flags[idx[h1]] * flags[idx[h2]]
    return total


@dataclass(frozen=True)
class WeightedSum:
    value: float
    variant: str
    path: str
    n_count: int
    support_size: int


def _setup(store, t, b, W, N, m, variant):
    if t.labels is None:
        raise ArgumentError("weighted sums need a partitioned tuple")
    store.check(2 * N + t.offsets[-1], "2N + max offset")
    if math.gcd(math.prod(b + h for h in t.offsets), W) != 1:
        raise ArgumentError(f"gcd(prod(b + h_i), W) != 1 for b = {b}, W = {W}")
    if variant not in ("S", "S_prime"):
        raise ArgumentError(f"unknown variant {variant!r}")
    penalty = 1.0 if variant == "S" else float(m + 1)
    first = N + 1 + ((b - (N + 1)) % W)
    ns = np.arange(first, 2 * N + 1, W, dtype=np.int64)
    return ns, penalty


def weighted_sum_S(
    store: PrimeStore,
    t: KTuple,
    b: int,
    W: int,
    N: int,
    m: int,
    spec: SieveWeightSpec,
    variant: str = "S",
    path: str = "direct",
) -> WeightedSum:
    """Σ_{N<n<=2N, n≡b (W)} bracket(n) * (Σ_{d_i | n+h_i} lambda_d)^2.

    bracket(n) = Σ_i 1_P(n+h_i) - m - c Σ_parts Σ_{pairs {h,h'}} 1_P(n+h) 1_P(n+h'),
    with c = 1 for ``S`` and c = m + 1 for ``S_prime``.
    """
    if spec.k != t.k:
        raise ArgumentError(f"weights are for k = {spec.k}, tuple has k = {t.k}")
    ns, penalty = _setup(store, t, b, W, N, m, variant)
    support = weight_support(spec, N)
    if len(ns) == 0:
        return WeightedSum(0.0, variant, path, 0, len(support))
    br = _bracket(store, t, ns, m, penalty)
    if path == "direct":
        inner = np.zeros(len(ns))
        for d, lam in support.items():
            mask = np.ones(len(ns), dtype=bool)
            for di, h in zip(d, t.offsets):
                if di > 1:
                    mask &= (ns + h) % di == 0
            inner[mask] += lam
        value = math.fsum(br * inner * inner)
    elif path == "swapped":
        value = _swapped(t, ns, br, b, W, support)
    else:
        raise ArgumentError(f"unknown evaluation path {path!r}")
    return WeightedSum(value, variant, path, len(ns), len(support))


def _reachable(t: KTuple, d: tuple[int, ...], b: int, W: int) -> bool:
    """Whether some n = b (mod W) has d_i | n + h_i for all i."""
    from ..cover import crt

    res, mods = [b % W], [W]
    for di, h in zip(d, t.offsets):
        if di > 1:
            res.append((-h) % di)
            mods.append(di)
    return crt(res, mods) is not None


def _swapped(t, ns, br, b, W, support) -> float:
    from ..cover import crt

    lo, hi = int(ns[0]), int(ns[-1])
    terms = []
    # vectors whose divisibility pattern no admissible n meets add nothing
    items = [(d, lam) for d, lam in support.items() if _reachable(t, d, b, W)]
    for d, lam in items:
        for e, lam2 in items:
            res, mods = [b % W], [W]
            for di, ei, h in zip(d, e, t.offsets):
                L = di * ei // math.gcd(di, ei)
                if L > 1:
                    res.append((-h) % L)
                    mods.append(L)
            sol = crt(res, mods)
            if sol is None:
                continue
            r, mod = sol
            start = lo + ((r - lo) % mod)
            if start > hi:
                continue
            # ns is the progression lo, lo+W, ...; mod is a multiple of W
            idx = (start - lo) // W
            step = mod // W
            s = math.fsum(br[idx::step])
            if s:
                terms.append(lam * lam2 * s)
    return math.fsum(terms)


def weighted_sum_check(store, t, b, W, N, m, spec, variant="S") -> tuple[WeightedSum, WeightedSum, float]:
    """Both evaluation paths and their relative disagreement."""
    a = weighted_sum_S(store, t, b, W, N, m, spec, variant, "direct")
    c = weighted_sum_S(store, t, b, W, N, m, spec, variant, "swapped")
    scale = max(abs(a.value), abs(c.value))
    rel = abs(a.value - c.value) / scale if scale else 0.0
    return a, c, rel


def find_witness(store, t: KTuple, b: int, W: int, N: int, m: int, variant: str = "S"):
    """First n (in the progression) with a positive bracket.

    Returns (n, per-part prime counts) or None.  A positive bracket forces
    primes in at least m + 1 distinct parts.
    """
    ns, penalty = _setup(store, t, b, W, N, m, variant)
    if len(ns) == 0:
        return None
    br = _bracket(store, t, ns, m, penalty)
    hits = np.flatnonzero(br > 0)
    if len(hits) == 0:
        return None
    n = int(ns[hits[0]])
    counts = [sum(store.is_prime(n + h) for h in part) for part in t.parts]
    return n, counts

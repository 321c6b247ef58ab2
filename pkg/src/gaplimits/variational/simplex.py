"""Exact rational integration of polynomials over scaled simplices.

Two representations are provided.

``SimplexPoly`` holds sums of terms ``(s - P1)^c * t^e`` in k variables,
where ``P1 = t_1 + ... + t_k`` and ``s`` is the support cap, and is
understood to vanish outside ``s * R_k``.  It handles arbitrary (not
necessarily symmetric) polynomials.

``SymPoly`` holds sums of ``(s - P1)^a * P2^b`` with ``P2 = sum t_i^2``.
It is closed under multiplication and under integrating out one
variable, and its integrals only need the number of variables, so it
scales to large k.

Both rest on the Dirichlet integral

    ∫_{s R_k} (s - P1)^c  prod t_i^{e_i} dt = s^(k+c+|e|) c! prod e_i! / (k+c+|e|)!

and on the beta integral ∫_0^r (r-t)^c t^e dt = c! e! r^(c+e+1) / (c+e+1)!.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Mapping

from ..errors import ArgumentError

Rational = Fraction


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


def _shifted_moment(cap: Fraction, shift: Fraction, c: int, kdeg: int, coef: int) -> Fraction:
    """Σ_i C(c,i) shift^(c-i) cap^(kdeg+i) i! / (kdeg+i)!, times coef.

    ``kdeg`` is k + (degree of the monomial part); ``coef`` its factorial weight.
    This integrates (cap + shift - P1)^c x monomial over cap * R_k.
    """
    total = Fraction(0)
    for i in range(c + 1):
        w = comb(c, i) * shift ** (c - i) if shift else (1 if i == c else 0)
        if not w:
            continue
        total += w * cap ** (kdeg + i) * Fraction(factorial(i), factorial(kdeg + i))
    return total * coef


@dataclass(frozen=True)
class SimplexPoly:
    k: int
    cap: Fraction
    terms: Mapping[tuple[int, tuple[int, ...]], Fraction] = field(default_factory=dict)

    @classmethod
    def from_monomials(cls, k: int, monomials: Mapping[tuple[int, ...], object], cap=1) -> "SimplexPoly":
        terms: dict = defaultdict(Fraction)
        for e, coef in monomials.items():
            e = tuple(int(v) for v in e)
            if len(e) != k or any(v < 0 for v in e):
                raise ArgumentError(f"exponent vector {e} does not fit k = {k}")
            terms[(0, e)] += as_fraction(coef)
        return cls(k, as_fraction(cap), {key: v for key, v in terms.items() if v})

    @classmethod
    def constant(cls, k: int, value=1, cap=1) -> "SimplexPoly":
        return cls.from_monomials(k, {(0,) * k: value}, cap)

    def scale(self, c) -> "SimplexPoly":
        c = as_fraction(c)
        return SimplexPoly(self.k, self.cap, {key: v * c for key, v in self.terms.items() if v * c})

    def __add__(self, other: "SimplexPoly") -> "SimplexPoly":
        self._compatible(other)
        out = defaultdict(Fraction, self.terms)
        for key, v in other.terms.items():
            out[key] += v
        return SimplexPoly(self.k, self.cap, {key: v for key, v in out.items() if v})

    def __mul__(self, other: "SimplexPoly") -> "SimplexPoly":
        self._compatible(other)
        out: dict = defaultdict(Fraction)
        for (c1, e1), v1 in self.terms.items():
            for (c2, e2), v2 in other.terms.items():
                out[(c1 + c2, tuple(a + b for a, b in zip(e1, e2)))] += v1 * v2
        return SimplexPoly(self.k, self.cap, {key: v for key, v in out.items() if v})

    def square(self) -> "SimplexPoly":
        return self * self

    def _compatible(self, other):
        if self.k != other.k or self.cap != other.cap:
            raise ArgumentError("polynomials live on different simplices")

    def integrate(self, region_cap=None) -> Fraction:
        """Integral over ``region_cap * R_k`` (default: the whole support)."""
        s = self.cap
        r = s if region_cap is None else as_fraction(region_cap)
        if r > s:
            raise ArgumentError(f"region cap {r} exceeds support cap {s}")
        shift = s - r
        total = Fraction(0)
        for (c, e), v in self.terms.items():
            w = 1
            for x in e:
                w *= factorial(x)
            total += v * _shifted_moment(r, shift, c, self.k + sum(e), w)
        return total

    def integrate_out(self, i: int) -> "SimplexPoly":
        """∫_0^∞ F dt_i as a polynomial in the remaining k-1 variables."""
        if not 0 <= i < self.k:
            raise ArgumentError(f"variable index {i} outside 0..{self.k - 1}")
        out: dict = defaultdict(Fraction)
        for (c, e), v in self.terms.items():
            ei = e[i]
            w = Fraction(factorial(c) * factorial(ei), factorial(c + ei + 1))
            out[(c + ei + 1, e[:i] + e[i + 1 :])] += v * w
        return SimplexPoly(self.k - 1, self.cap, {key: v for key, v in out.items() if v})

    def evaluate(self, t) -> float:
        s = float(self.cap)
        r = s - sum(t)
        if r < 0 or any(x < 0 for x in t):
            return 0.0
        total = 0.0
        for (c, e), v in self.terms.items():
            m = r**c
            for x, a in zip(t, e):
                m *= x**a
            total += float(v) * m
        return total


@lru_cache(maxsize=None)
def _dsum(k: int, b: int) -> int:
    """Σ over |e| = b (k parts) of multinomial(b; e) * prod (2 e_j)!.

    Equals b! [x^b] (Σ_j (2j)!/j! x^j)^k.
    """
    if k == 0:
        return 1 if b == 0 else 0
    base = [factorial(2 * j) // factorial(j) for j in range(b + 1)]
    poly = [1] + [0] * b
    for _ in range(k):
        new = [0] * (b + 1)
        for i, pi in enumerate(poly):
            if pi:
                for j in range(b + 1 - i):
                    new[i + j] += pi * base[j]
        poly = new
    return factorial(b) * poly[b]


@dataclass(frozen=True)
class SymPoly:
    k: int
    cap: Fraction
    terms: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)

    @classmethod
    def term(cls, k: int, a: int, b: int, coef=1, cap=1) -> "SymPoly":
        return cls(k, as_fraction(cap), {(a, b): as_fraction(coef)})

    def __add__(self, other: "SymPoly") -> "SymPoly":
        out = defaultdict(Fraction, self.terms)
        for key, v in other.terms.items():
            out[key] += v
        return SymPoly(self.k, self.cap, {key: v for key, v in out.items() if v})

    def scale(self, c) -> "SymPoly":
        c = as_fraction(c)
        return SymPoly(self.k, self.cap, {key: v * c for key, v in self.terms.items() if v * c})

    def __mul__(self, other: "SymPoly") -> "SymPoly":
        if self.k != other.k or self.cap != other.cap:
            raise ArgumentError("polynomials live on different simplices")
        out: dict = defaultdict(Fraction)
        for (a1, b1), v1 in self.terms.items():
            for (a2, b2), v2 in other.terms.items():
                out[(a1 + a2, b1 + b2)] += v1 * v2
        return SymPoly(self.k, self.cap, {key: v for key, v in out.items() if v})

    def integrate(self, region_cap=None) -> Fraction:
        s = self.cap
        r = s if region_cap is None else as_fraction(region_cap)
        if r > s:
            raise ArgumentError(f"region cap {r} exceeds support cap {s}")
        return sum(
            (v * _sym_moment(self.k, r, s - r, a, b) for (a, b), v in self.terms.items()),
            Fraction(0),
        )

    def integrate_out(self) -> "SymPoly":
        """Integrate out one variable (all are equivalent by symmetry)."""
        if self.k < 1:
            raise ArgumentError("no variable left to integrate out")
        out: dict = defaultdict(Fraction)
        for (a, b), v in self.terms.items():
            for j in range(b + 1):
                w = comb(b, j) * Fraction(factorial(a) * factorial(2 * j), factorial(a + 2 * j + 1))
                out[(a + 2 * j + 1, b - j)] += v * w
        return SymPoly(self.k - 1, self.cap, {key: v for key, v in out.items() if v})

    def to_simplex_poly(self) -> SimplexPoly:
        """Expand P2^b into monomials (only sensible for small k and b)."""
        from itertools import product as iproduct

        out: dict = defaultdict(Fraction)
        for (a, b), v in self.terms.items():
            for e in iproduct(range(b + 1), repeat=self.k):
                if sum(e) != b:
                    continue
                m = factorial(b)
                for x in e:
                    m //= factorial(x)
                out[(a, tuple(2 * x for x in e))] += v * m
        return SimplexPoly(self.k, self.cap, {key: v for key, v in out.items() if v})

    def evaluate(self, t) -> float:
        r = float(self.cap) - sum(t)
        if r < 0 or any(x < 0 for x in t):
            return 0.0
        p2 = sum(x * x for x in t)
        return sum(float(v) * r**a * p2**b for (a, b), v in self.terms.items())


@lru_cache(maxsize=None)
def _sym_moment(k: int, r: Fraction, shift: Fraction, a: int, b: int) -> Fraction:
    """∫_{r R_k} (r + shift - P1)^a P2^b dt."""
    return _shifted_moment(r, shift, a, k + 2 * b, _dsum(k, b))

"""Certified lower bounds for M_{k,eta} via a generalized Rayleigh quotient.

The test function ranges over the span of a finite basis of symmetric
polynomials ``(1 - P1)^a P2^b``.  Gram matrices for the numerator
(k * J) and the denominator (I) are assembled exactly; a floating
eigensolver proposes a coefficient vector, which is rationalized and
re-evaluated exactly.  That exact quotient is an honest lower bound for
M_{k,eta} since it is attained by an explicit F.  For small bases an
exact upper bracket on the best quotient within the basis is added by
checking negative definiteness of ``M2 - lam * M1`` in rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from ..errors import ArgumentError, DegenerateBasisError
from .simplex import SymPoly, as_fraction

EXACT_BRACKET_MAX = 16


def default_basis(degree: int) -> list[tuple[int, int]]:
    """Exponent pairs (a, b) of (1 - P1)^a P2^b with a + 2b <= degree."""
    if degree < 0:
        raise ArgumentError(f"degree must be >= 0, got {degree}")
    return [(a, b) for b in range(degree // 2 + 1) for a in range(degree - 2 * b + 1)]


def gram_matrices(k: int, eta, basis: Sequence[SymPoly]) -> tuple[list, list]:
    """Exact (M1, M2) with M1[i][j] = ∫ B_i B_j and M2[i][j] = k ∫_{(1-eta)R} (∫B_i)(∫B_j)."""
    eta = as_fraction(eta)
    inner = [b.integrate_out() for b in basis]
    n = len(basis)
    M1 = [[Fraction(0)] * n for _ in range(n)]
    M2 = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            M1[i][j] = M1[j][i] = (basis[i] * basis[j]).integrate()
            M2[i][j] = M2[j][i] = k * (inner[i] * inner[j]).integrate(1 - eta)
    return M1, M2


def ldl_pivots(M: list[list[Fraction]]) -> list[Fraction]:
    """Pivots of symmetric Gaussian elimination without pivoting (exact).

    Stops early at the first zero pivot; the returned list is then shorter
    than the matrix.
    """
    A = [row[:] for row in M]
    n = len(A)
    piv = []
    for i in range(n):
        d = A[i][i]
        piv.append(d)
        if d == 0:
            break
        for r in range(i + 1, n):
            f = A[r][i] / d
            if f:
                for c in range(i + 1, n):
                    A[r][c] -= f * A[i][c]
    return piv


def is_negative_definite(M) -> bool:
    piv = ldl_pivots(M)
    return len(piv) == len(M) and all(p < 0 for p in piv)


def _quad(M, v) -> Fraction:
    n = len(v)
    return sum((v[i] * M[i][j] * v[j] for i in range(n) for j in range(n)), Fraction(0))


@dataclass(frozen=True)
class MkBound:
    k: int
    eta: Fraction
    basis: tuple[tuple[int, int], ...]
    value: Fraction
    coefficients: tuple[Fraction, ...]
    float_estimate: float
    upper_bracket: Fraction | None = None
    gram_size: int = field(default=0)

    @property
    def degree(self) -> int:
        return max((a + 2 * b for a, b in self.basis), default=0)


def mk_lower_bound(
    k: int,
    eta=0,
    degree: int = 0,
    basis: Sequence[tuple[int, int]] | None = None,
    scales: Sequence | None = None,
) -> MkBound:
    """Best certified lower bound for M_{k,eta} over the given symmetric basis.

    ``scales`` optionally multiplies each basis element by a nonzero constant
    (the optimum is invariant under this; it is exposed for testing).
    """
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    eta = as_fraction(eta)
    if not 0 <= eta < 1:
        raise ArgumentError(f"eta must lie in [0, 1), got {eta}")
    pairs = tuple(tuple(p) for p in (basis if basis is not None else default_basis(degree)))
    if not pairs:
        raise ArgumentError("empty basis")
    if scales is None:
        scales = [1] * len(pairs)
    elems = [SymPoly.term(k, a, b, coef=s) for (a, b), s in zip(pairs, scales)]
    M1, M2 = gram_matrices(k, eta, elems)

    piv = ldl_pivots(M1)
    for i, p in enumerate(piv):
        if p <= 0:
            raise DegenerateBasisError(
                f"Gram matrix is singular at basis element {i} = (1-P1)^{pairs[i][0]} P2^{pairs[i][1]}",
                element=pairs[i],
            )

    n = len(pairs)
    if n == 1:
        vec = [Fraction(1)]
        lam_f = float(M2[0][0] / M1[0][0])
    else:
        A = np.array([[float(x) for x in row] for row in M1])
        B = np.array([[float(x) for x in row] for row in M2])
        d = 1.0 / np.sqrt(np.diag(A))
        A = A * d[:, None] * d[None, :]
        B = B * d[:, None] * d[None, :]
        w, V = scipy.linalg.eigh(B, A)
        lam_f = float(w[-1])
        v = V[:, -1] * d
        v = v / np.max(np.abs(v))
        vec = [Fraction(float(x)).limit_denominator(10**15) for x in v]

    num, den = _quad(M2, vec), _quad(M1, vec)
    value = num / den

    upper = None
    if n <= EXACT_BRACKET_MAX:
        margin = 1e-12
        for _ in range(40):
            hi = Fraction(max(lam_f, float(value)) * (1 + margin)).limit_denominator(10**18)
            if hi < value:
                hi = value
            shifted = [[M2[i][j] - hi * M1[i][j] for j in range(n)] for i in range(n)]
            if is_negative_definite(shifted):
                upper = hi
                break
            margin *= 10
    return MkBound(
        k=k,
        eta=eta,
        basis=pairs,
        value=value,
        coefficients=tuple(vec),
        float_estimate=lam_f,
        upper_bracket=upper,
        gram_size=n,
    )

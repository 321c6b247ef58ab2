"""The functionals I_k, J_{i,1-eta} and L_k on simplex-supported test functions.

For polynomial test functions everything is exact (``Fraction``).  For the
product family used in the large-k estimate the work is delegated to
:mod:`gaplimits.variational.product`, which returns estimates with an
error bar.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import ArgumentError
from .simplex import SimplexPoly, SymPoly, as_fraction


@dataclass(frozen=True)
class PolynomialTestFunction:
    """F = poly on cap * R_k, zero elsewhere.

    Exact evaluation needs 1 - eta <= cap <= 1: the cap must not exceed 1 so
    the box [0,1]^k never cuts the support, and the J outer simplex
    (1 - eta) R_{k-1} must sit inside the support.
    """

    poly: SimplexPoly | SymPoly
    eta: Fraction = Fraction(0)

    def __post_init__(self):
        eta = as_fraction(self.eta)
        object.__setattr__(self, "eta", eta)
        if not 0 <= eta < 1:
            raise ArgumentError(f"eta must lie in [0, 1), got {eta}")
        cap = self.poly.cap
        if cap > 1:
            raise ArgumentError(f"exact evaluation needs support cap <= 1, got {cap}")
        if cap < 1 - eta:
            raise ArgumentError(f"support cap {cap} is smaller than 1 - eta = {1 - eta}")

    @property
    def k(self) -> int:
        return self.poly.k

    @property
    def support_cap(self) -> Fraction:
        return self.poly.cap

    @property
    def symmetric(self) -> bool:
        return isinstance(self.poly, SymPoly)

    @classmethod
    def from_monomials(cls, k, monomials, eta=0, cap=1) -> "PolynomialTestFunction":
        return cls(SimplexPoly.from_monomials(k, monomials, cap), eta)


def _poly(F):
    if isinstance(F, PolynomialTestFunction):
        return F.poly
    raise ArgumentError(f"unsupported test function form {type(F).__name__}")


def integral_I(F):
    """∫ F^2 over the support."""
    if not isinstance(F, PolynomialTestFunction):
        from .product import ProductTestFunction, product_functionals

        if isinstance(F, ProductTestFunction):
            return product_functionals(F).I
    p = _poly(F)
    return (p * p).integrate()


def integral_J(F, i: int = None):
    """J_{i,1-eta}: square the t_i-integral and integrate over (1-eta) R_{k-1}.

    ``i`` is 1-based as in the usual notation; default is the last variable.
    """
    if not isinstance(F, PolynomialTestFunction):
        from .product import ProductTestFunction, product_functionals

        if isinstance(F, ProductTestFunction):
            return product_functionals(F).J
    p = _poly(F)
    i = p.k if i is None else i
    if not 1 <= i <= p.k:
        raise ArgumentError(f"index {i} outside 1..{p.k}")
    inner = p.integrate_out() if isinstance(p, SymPoly) else p.integrate_out(i - 1)
    return (inner * inner).integrate(1 - F.eta)


def integral_J_total(F) -> Fraction:
    """Σ_i J_{i,1-eta}(F)."""
    p = _poly(F)
    if isinstance(p, SymPoly):
        return p.k * integral_J(F)
    return sum((integral_J(F, i) for i in range(1, p.k + 1)), Fraction(0))


def integral_L(F):
    """Square the double integral over the last two variables, integrate the rest."""
    if not isinstance(F, PolynomialTestFunction):
        from .product import ProductTestFunction, product_functionals

        if isinstance(F, ProductTestFunction):
            return product_functionals(F).L
    p = _poly(F)
    if p.k < 2:
        raise ArgumentError(f"L_k needs k >= 2, got {p.k}")
    if isinstance(p, SymPoly):
        inner = p.integrate_out().integrate_out()
    else:
        inner = p.integrate_out(p.k - 1).integrate_out(p.k - 2)
    return (inner * inner).integrate()


def rayleigh_ratio(F) -> Fraction:
    """(Σ_i J_{i,1-eta}(F)) / I_k(F), exactly."""
    i_val = integral_I(F)
    if i_val == 0:
        raise ArgumentError("test function is identically zero")
    return integral_J_total(F) / i_val

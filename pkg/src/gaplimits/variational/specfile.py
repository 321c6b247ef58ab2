"""Declarative text format for test functions and bases.

One ``key = value`` per line; ``#`` starts a comment.  Recognized keys::

    operation = I | J | L | ratio | bound
    k         = 3
    eta       = 0            # rational, e.g. 1/25
    cap       = 1            # support cap s (F lives on s * R_k)
    index     = 2            # J only: which variable is integrated (1-based)
    degree    = 3            # bound only, when no basis lines are given
    monomial  = coef : e1,...,ek [: c]   # coef * (s - P1)^c * prod t_i^e_i
    sym       = coef : a,b               # coef * (s - P1)^a * P2^b
    basis     = a,b                      # bound only: (1 - P1)^a P2^b

``monomial``, ``sym`` and ``basis`` may repeat; every other key must
appear at most once.  ``monomial`` and ``sym`` terms may not be mixed.
Coefficients are exact rationals (``3``, ``-1/2``, ``0.25``).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import ArgumentError, DuplicateKeyError, MalformedValueError, UnknownKeyError
from .functionals import (
    PolynomialTestFunction,
    integral_I,
    integral_J,
    integral_L,
    rayleigh_ratio,
)
from .rayleigh import MkBound, mk_lower_bound
from .simplex import SimplexPoly, SymPoly

OPERATIONS = ("I", "J", "L", "ratio", "bound")
_SINGLE = {"operation", "k", "eta", "cap", "index", "degree"}
_REPEAT = {"monomial", "sym", "basis"}


@dataclass
class FunctionSpec:
    operation: str
    k: int
    eta: Fraction = Fraction(0)
    cap: Fraction = Fraction(1)
    index: int | None = None
    degree: int | None = None
    monomials: list = field(default_factory=list)  # (coef, e, c)
    sym: list = field(default_factory=list)  # (coef, a, b)
    basis: list = field(default_factory=list)  # (a, b)

    def test_function(self) -> PolynomialTestFunction:
        if self.monomials and self.sym:
            raise ArgumentError("monomial and sym terms cannot be mixed")
        if self.sym:
            poly = SymPoly(self.k, self.cap, {})
            for coef, a, b in self.sym:
                poly = poly + SymPoly.term(self.k, a, b, coef, self.cap)
        else:
            terms: dict = defaultdict(Fraction)
            for coef, e, c in self.monomials:
                if len(e) != self.k:
                    raise ArgumentError(f"exponent vector {e} does not fit k = {self.k}")
                terms[(c, e)] += coef
            poly = SimplexPoly(self.k, self.cap, {key: v for key, v in terms.items() if v})
        return PolynomialTestFunction(poly, self.eta)

    def evaluate(self) -> Fraction | MkBound:
        if self.operation == "bound":
            if self.basis:
                return mk_lower_bound(self.k, self.eta, basis=self.basis)
            return mk_lower_bound(self.k, self.eta, degree=self.degree or 0)
        F = self.test_function()
        if self.operation == "I":
            return integral_I(F)
        if self.operation == "J":
            return integral_J(F, self.index)
        if self.operation == "L":
            return integral_L(F)
        return rayleigh_ratio(F)


def _fraction(text: str, key: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedValueError(f"{key}: not a rational number: {text!r}") from exc


def _ints(text: str, key: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise MalformedValueError(f"{key}: malformed integer vector {text!r}") from exc


def parse_function_spec(text: str) -> FunctionSpec:
    seen: set[str] = set()
    vals: dict[str, str] = {}
    monos, syms, basis = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedValueError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in _SINGLE | _REPEAT:
            raise UnknownKeyError(f"line {lineno}: unknown key {key!r}")
        if key in _SINGLE:
            if key in seen:
                raise DuplicateKeyError(f"line {lineno}: duplicate key {key!r}")
            seen.add(key)
            vals[key] = value
        elif key == "basis":
            pair = _ints(value, key)
            if len(pair) != 2:
                raise MalformedValueError(f"line {lineno}: basis needs 'a,b', got {value!r}")
            basis.append(pair)
        else:
            parts = [p.strip() for p in value.split(":")]
            if key == "monomial" and len(parts) in (2, 3):
                c = int(parts[2]) if len(parts) == 3 and parts[2].isdigit() else 0
                if len(parts) == 3 and not parts[2].isdigit():
                    raise MalformedValueError(f"line {lineno}: bad (s - P1) power {parts[2]!r}")
                monos.append((_fraction(parts[0], key), _ints(parts[1], key), c))
            elif key == "sym" and len(parts) == 2:
                ab = _ints(parts[1], key)
                if len(ab) != 2:
                    raise MalformedValueError(f"line {lineno}: sym needs 'coef : a,b'")
                syms.append((_fraction(parts[0], key), ab[0], ab[1]))
            else:
                raise MalformedValueError(f"line {lineno}: malformed {key} term {value!r}")
    for need in ("operation", "k"):
        if need not in vals:
            raise MalformedValueError(f"missing required key {need!r}")
    op = vals["operation"]
    if op not in OPERATIONS:
        raise MalformedValueError(f"operation must be one of {', '.join(OPERATIONS)}; got {op!r}")
    try:
        k = int(vals["k"])
        index = int(vals["index"]) if "index" in vals else None
        degree = int(vals["degree"]) if "degree" in vals else None
    except ValueError as exc:
        raise MalformedValueError(f"malformed integer: {exc}") from exc
    spec = FunctionSpec(
        operation=op,
        k=k,
        eta=_fraction(vals.get("eta", "0"), "eta"),
        cap=_fraction(vals.get("cap", "1"), "cap"),
        index=index,
        degree=degree,
        monomials=monos,
        sym=syms,
        basis=basis,
    )
    if op != "bound" and not (monos or syms):
        raise MalformedValueError(f"operation {op} needs at least one monomial or sym term")
    return spec

"""Moyal star product on polynomial phase-space symbols in one degree of freedom.

Sign convention: ``{x, xi} = 1`` and ``x * xi - xi * x = i hbar``, so that
``(1/(i hbar)) [Op(a), Op(b)] = Op({a, b}) + O(hbar^2)`` with a plus sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import sympy as sp

from .symbolic import expr as E

x, xi, hbar = sp.symbols("x xi hbar")
GENS = (x, xi, hbar)
_DOMAIN = sp.QQ_I


@dataclass(frozen=True)
class PhaseSymbol:
    """Polynomial in ``x, xi`` with coefficients polynomial in ``hbar``.

    Coefficients are exact Gaussian rationals.
    """

    poly: sp.Poly

    def __init__(self, e):
        if isinstance(e, PhaseSymbol):
            p = e.poly
        elif isinstance(e, sp.Poly):
            p = e if e.gens == GENS and e.domain == _DOMAIN else sp.Poly(e.as_expr(), *GENS, domain=_DOMAIN)
        else:
            if isinstance(e, str):
                e = E.parse(e, allowed={"x", "xi", "hbar"})
            e = sp.sympify(e)
            extra = e.free_symbols - set(GENS)
            if extra:
                raise ValueError(f"symbol uses variables outside (x, xi, hbar): {sorted(map(str, extra))}")
            try:
                p = sp.Poly(e, *GENS, domain=_DOMAIN)
            except sp.PolynomialError as exc:
                raise ValueError(f"not a polynomial symbol: {e}") from exc
        object.__setattr__(self, "poly", p)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        return PhaseSymbol(self.poly + PhaseSymbol(other).poly)

    __radd__ = __add__

    def __sub__(self, other):
        return PhaseSymbol(self.poly - PhaseSymbol(other).poly)

    def __rsub__(self, other):
        return PhaseSymbol(PhaseSymbol(other).poly - self.poly)

    def __mul__(self, other):
        """Pointwise product."""
        return PhaseSymbol(self.poly * PhaseSymbol(other).poly)

    __rmul__ = __mul__

    def __neg__(self):
        return PhaseSymbol(-self.poly)

    def __eq__(self, other):
        try:
            return (self.poly - PhaseSymbol(other).poly).is_zero
        except ValueError:
            return NotImplemented

    def __hash__(self):
        return hash(self.poly)

    def __repr__(self):
        return f"PhaseSymbol({self.expr})"

    # queries --------------------------------------------------------------
    @property
    def expr(self) -> sp.Expr:
        return self.poly.as_expr()

    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero

    def diff(self, var: sp.Symbol, n: int = 1) -> "PhaseSymbol":
        p = self.poly
        for _ in range(n):
            p = p.diff(var)
        return PhaseSymbol(p)

    def degree(self) -> int:
        """Total degree in ``(x, xi)``."""
        if self.is_zero:
            return 0
        return max(i + j for (i, j, _) in self.poly.monoms())

    def hbar_degree(self) -> int:
        return 0 if self.is_zero else self.poly.degree(hbar)

    def hbar_coefficient(self, k: int) -> "PhaseSymbol":
        """Coefficient of ``hbar^k`` as a symbol in ``(x, xi)``."""
        terms = {(i, j, 0): c for (i, j, h), c in self.poly.terms() if h == k}
        if not terms:
            return PhaseSymbol(0)
        return PhaseSymbol(sp.Poly.from_dict(terms, *GENS, domain=_DOMAIN))

    def principal(self) -> "PhaseSymbol":
        return self.hbar_coefficient(0)

    def conjugate(self) -> "PhaseSymbol":
        return PhaseSymbol(sp.conjugate(self.expr).subs({sp.conjugate(v): v for v in GENS}))

    def is_real(self) -> bool:
        return self == self.conjugate()

    def at_hbar(self, value: float) -> dict[tuple[int, int], complex]:
        """Numeric coefficients of ``x^m xi^n`` with ``hbar`` set to ``value``."""
        out: dict[tuple[int, int], complex] = {}
        for (i, j, h), c in self.poly.terms():
            c = complex(sp.N(c))
            out[(i, j)] = out.get((i, j), 0) + c * value ** h
        return out


def as_symbol(a) -> PhaseSymbol:
    return a if isinstance(a, PhaseSymbol) else PhaseSymbol(a)


def poisson(a, b) -> PhaseSymbol:
    """``{a, b} = a_x b_xi - a_xi b_x``."""
    a, b = as_symbol(a), as_symbol(b)
    return a.diff(x) * b.diff(xi) - a.diff(xi) * b.diff(x)


def _bidiff(a: PhaseSymbol, b: PhaseSymbol, n: int) -> PhaseSymbol:
    # P^n(a, b) = sum_k C(n,k) (-1)^k d_x^{n-k} d_xi^k a * d_x^k d_xi^{n-k} b
    out = PhaseSymbol(0)
    for k in range(n + 1):
        da = a.diff(x, n - k).diff(xi, k)
        if da.is_zero:
            continue
        db = b.diff(x, k).diff(xi, n - k)
        if db.is_zero:
            continue
        out = out + (-1) ** k * comb(n, k) * (da * db)
    return out


def star_product(a, b) -> PhaseSymbol:
    """Terminating Moyal series ``sum_n (1/n!) (i hbar/2)^n P^n(a, b)``."""
    a, b = as_symbol(a), as_symbol(b)
    nmax = min(a.degree(), b.degree())
    out = PhaseSymbol(0)
    for n in range(nmax + 1):
        term = _bidiff(a, b, n)
        if term.is_zero:
            continue
        out = out + PhaseSymbol((sp.I * hbar / 2) ** n / factorial(n)) * term
    return out


def moyal_bracket(a, b) -> PhaseSymbol:
    """``(a*b - b*a) / (i hbar)``, exact: the commutator has only odd orders."""
    c = star_product(a, b) - star_product(b, a)
    if c.is_zero:
        return c
    q, r = sp.div(c.poly, sp.Poly(sp.I * hbar, *GENS, domain=_DOMAIN))
    if not r.is_zero:
        raise ArithmeticError("star commutator not divisible by i*hbar")
    return PhaseSymbol(q)


def dirac_residual(a, b) -> PhaseSymbol:
    """``moyal_bracket(a, b) - {a, b}``; divisible by ``hbar^2``."""
    return moyal_bracket(a, b) - poisson(a, b)


def dissipator_symbol(l, f) -> PhaseSymbol:
    """Full symbol of ``L^+ F L - 1/2 {L^+ L, F}`` for ``L = Op(l)``, ``F = Op(f)``.

    ``L^+ L`` is ``Op(conj(l) * l)`` with the star product, so the result is
    exactly the Weyl symbol of the Heisenberg dissipator applied to ``Op(f)``.
    """
    l, f = as_symbol(l), as_symbol(f)
    lb = l.conjugate()
    ll = star_product(lb, l)
    return star_product(star_product(lb, f), l) - PhaseSymbol(sp.Rational(1, 2)) * (
        star_product(ll, f) + star_product(f, ll))


def dissipator_symbol_residual(l, f) -> tuple[PhaseSymbol, PhaseSymbol]:
    """``(d0, d1)``: the hbar^0 and hbar^1 parts of ``dissipator_symbol(l, f)``."""
    d = dissipator_symbol(l, f)
    return d.hbar_coefficient(0), d.hbar_coefficient(1)

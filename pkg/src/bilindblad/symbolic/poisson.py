"""Poisson bivectors in a coordinate chart, pencils and bi-Hamiltonian checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import sympy as sp

from . import expr as E


class ChartError(ValueError):
    """Unknown coordinate or mismatched charts."""


class JacobiError(ValueError):
    """The bivector violates the Jacobi identity."""


@dataclass(frozen=True)
class PoissonStructure:
    """Antisymmetric bivector stored by its upper triangle.

    ``components`` maps an index pair ``(i, j)`` with ``i < j`` to the
    expression ``{x_i, x_j}``; missing pairs are zero.
    """

    coordinates: tuple[str, ...]
    components: Mapping[tuple[int, int], sp.Expr] = field(default_factory=dict)
    parameters: tuple[str, ...] = ()
    verified: bool = False

    @classmethod
    def from_brackets(cls, coordinates: Sequence[str], brackets: Mapping[tuple[str, str], sp.Expr | str],
                      parameters: Sequence[str] = ()) -> "PoissonStructure":
        """Build from ``{(a, b): {a, b}}``; either order of a pair is accepted."""
        coordinates = tuple(coordinates)
        allowed = set(coordinates) | set(parameters)
        comps: dict[tuple[int, int], sp.Expr] = {}
        for (a, b), value in brackets.items():
            if a not in coordinates or b not in coordinates:
                raise ChartError(f"bracket {{{a},{b}}} references a coordinate outside {coordinates}")
            if a == b:
                raise ChartError(f"diagonal bracket {{{a},{a}}} is identically zero and cannot be set")
            if isinstance(value, str):
                value = E.parse(value, allowed)
            i, j = coordinates.index(a), coordinates.index(b)
            value = sp.sympify(value)
            if i > j:
                i, j, value = j, i, -value
            comps[(i, j)] = comps.get((i, j), 0) + value
        return cls(coordinates, comps, tuple(parameters))

    def component(self, i: int, j: int) -> sp.Expr:
        if i == j:
            return sp.Integer(0)
        if i < j:
            return sp.sympify(self.components.get((i, j), 0))
        return -sp.sympify(self.components.get((j, i), 0))

    def matrix(self) -> sp.Matrix:
        n = len(self.coordinates)
        return sp.Matrix(n, n, lambda i, j: self.component(i, j))

    def brackets(self) -> dict[tuple[str, str], sp.Expr]:
        c = self.coordinates
        return {(c[i], c[j]): sp.sympify(v) for (i, j), v in sorted(self.components.items())
                if sp.sympify(v) != 0}

    def symbols(self) -> tuple[sp.Symbol, ...]:
        return E.symbols(self.coordinates)

    def check_expression(self, f: sp.Expr) -> None:
        allowed = set(self.coordinates) | set(self.parameters)
        extra = sorted(s.name for s in sp.sympify(f).free_symbols if s.name not in allowed)
        if extra:
            raise ChartError(f"expression uses {extra} outside chart {self.coordinates}")

    def subs(self, values: Mapping[str, sp.Expr | int]) -> "PoissonStructure":
        """Substitute formal parameters, e.g. ``lam -> 0``."""
        s = {sp.Symbol(k): v for k, v in values.items()}
        comps = {k: sp.expand(sp.sympify(v).subs(s)) for k, v in self.components.items()}
        params = tuple(p for p in self.parameters if p not in values)
        return PoissonStructure(self.coordinates, comps, params)

    def verify(self) -> "PoissonStructure":
        """Return a copy flagged ``verified``; raises if the Jacobiator is nonzero."""
        for triple in itertools.combinations(self.symbols(), 3):
            res = jacobiator(self, *triple)
            if not E.is_zero(res):
                raise JacobiError(f"Jacobi identity fails on {triple}: {res}")
        return replace(self, verified=True)


def poisson_bracket(P: PoissonStructure, f: sp.Expr, g: sp.Expr) -> sp.Expr:
    P.check_expression(f)
    P.check_expression(g)
    xs = P.symbols()
    df = [sp.diff(f, x) for x in xs]
    dg = [sp.diff(g, x) for x in xs]
    out = sp.Integer(0)
    for (i, j), pij in P.components.items():
        out += pij * (df[i] * dg[j] - df[j] * dg[i])
    return sp.expand(out)


def jacobiator(P: PoissonStructure, f: sp.Expr, g: sp.Expr, h: sp.Expr) -> sp.Expr:
    br = lambda a, b: poisson_bracket(P, a, b)
    return E.simplify(br(f, br(g, h)) + br(g, br(h, f)) + br(h, br(f, g)))


def jacobiator_on_coordinates(P: PoissonStructure) -> dict[tuple[str, str, str], sp.Expr]:
    """Jacobiator on every coordinate triple; zero on all of them iff P is Poisson."""
    out = {}
    for triple in itertools.combinations(P.coordinates, 3):
        out[triple] = jacobiator(P, *E.symbols(triple))
    return out


def build_pencil(P0: PoissonStructure, P1: PoissonStructure, mode: str = "convex",
                 parameter: str = "lam") -> PoissonStructure:
    """``difference``: P1 - lam*P0.  ``convex``: (1-lam)*P0 + lam*P1."""
    if P0.coordinates != P1.coordinates:
        raise ChartError(f"pencil legs live on different charts: {P0.coordinates} vs {P1.coordinates}")
    lam = sp.Symbol(parameter)
    if mode == "difference":
        a, b = -lam, sp.Integer(1)
    elif mode == "convex":
        a, b = 1 - lam, lam
    else:
        raise ValueError(f"unknown pencil mode {mode!r}")
    keys = set(P0.components) | set(P1.components)
    comps = {k: sp.expand(a * P0.component(*k) + b * P1.component(*k)) for k in sorted(keys)}
    params = tuple(dict.fromkeys(P0.parameters + P1.parameters + (parameter,)))
    return PoissonStructure(P0.coordinates, comps, params)


def hamiltonian_vector_field(P: PoissonStructure, H: sp.Expr) -> list[sp.Expr]:
    """Components ``X^i = {x^i, H}``."""
    return [poisson_bracket(P, x, H) for x in P.symbols()]


@dataclass(frozen=True)
class BiHamiltonianResult:
    ok: bool
    residual: list[sp.Expr]
    field: list[sp.Expr]


def bihamiltonian_check(P0: PoissonStructure, H0: sp.Expr, P1: PoissonStructure, H1: sp.Expr) -> BiHamiltonianResult:
    """Test ``P0^# dH0 == P1^# dH1`` componentwise.

    Each Hamiltonian is paired with the structure preceding it, so the Euler
    top reads ``bihamiltonian_check(pi0, C1, pi1, C0)``.
    """
    if P0.coordinates != P1.coordinates:
        raise ChartError("bi-Hamiltonian check needs a shared chart")
    X0 = hamiltonian_vector_field(P0, H0)
    X1 = hamiltonian_vector_field(P1, H1)
    residual = [E.simplify(a - b) for a, b in zip(X0, X1)]
    ok = all(E.is_zero(r) for r in residual)
    return BiHamiltonianResult(ok, residual, X0)


def apply_vector_field(delta: Sequence[sp.Expr], coordinates: Sequence[str], f: sp.Expr) -> sp.Expr:
    return sp.expand(sum(d * sp.diff(f, x) for d, x in zip(delta, E.symbols(coordinates))))


def homogeneity_degree(delta: Sequence[sp.Expr], coordinates: Sequence[str], f: sp.Expr) -> Fraction | None:
    """Rational ``w`` with ``delta(f) = w f``, or ``None``."""
    f = sp.sympify(f)
    if f == 0:
        return None
    df = apply_vector_field(delta, coordinates, f)
    ratio = sp.simplify(sp.cancel(sp.together(df / f)))
    if not ratio.is_Rational:
        ratio = _numeric_ratio(df, f, coordinates)
        if ratio is None:
            return None
    if not E.is_zero(df - ratio * f):
        return None
    return Fraction(int(ratio.p), int(ratio.q))


def _numeric_ratio(df: sp.Expr, f: sp.Expr, coordinates: Sequence[str]) -> sp.Rational | None:
    # Fallback when cancel() cannot see through sqrt/exp: sample one point and
    # rationalize the quotient; the caller confirms with the zero test.
    pt = {sp.Symbol(c): sp.Rational(3 + 2 * k, 7 + k) for k, c in enumerate(coordinates)}
    fv = complex(f.evalf(30, subs=pt))
    if abs(fv) < 1e-12:
        return None
    q = complex(df.evalf(30, subs=pt)) / fv
    if abs(q.imag) > 1e-12:
        return None
    return sp.nsimplify(q.real, rational=True, tolerance=1e-12)


def euler_vector(coordinates: Sequence[str]) -> list[sp.Expr]:
    """Liouville field sum x^i d/dx^i."""
    return list(E.symbols(coordinates))

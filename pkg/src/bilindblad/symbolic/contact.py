"""Contact charts, Jacobi brackets, dissipated quantities and homogeneous lifts."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import sympy as sp

from . import expr as E
from .poisson import ChartError, PoissonStructure, poisson_bracket


class UnsupportedChartError(ValueError):
    pass


@dataclass(frozen=True)
class ContactChart:
    """Contact form, Reeb field and Jacobi bivector in one coordinate chart.

    ``alpha`` and ``reeb`` are component lists in chart order; ``jacobi``
    maps ``(i, j)`` with ``i < j`` to ``Lambda^{ij}``.
    """

    coordinates: tuple[str, ...]
    alpha: tuple[sp.Expr, ...]
    reeb: tuple[sp.Expr, ...]
    jacobi: Mapping[tuple[int, int], sp.Expr]
    standard: bool = False

    def __post_init__(self):
        n = len(self.coordinates)
        if n % 2 != 1:
            raise ChartError(f"contact chart needs odd dimension, got {n}")
        if len(self.alpha) != n or len(self.reeb) != n:
            raise ChartError("alpha and reeb must have one component per coordinate")

    def symbols(self) -> tuple[sp.Symbol, ...]:
        return E.symbols(self.coordinates)

    def lam(self, i: int, j: int) -> sp.Expr:
        if i == j:
            return sp.Integer(0)
        if i < j:
            return sp.sympify(self.jacobi.get((i, j), 0))
        return -sp.sympify(self.jacobi.get((j, i), 0))

    def d_alpha(self) -> sp.Matrix:
        """Components ``(d alpha)_{ij} = d_i alpha_j - d_j alpha_i``."""
        xs = self.symbols()
        n = len(xs)
        return sp.Matrix(n, n, lambda i, j: sp.diff(self.alpha[j], xs[i]) - sp.diff(self.alpha[i], xs[j]))

    def reeb_residuals(self) -> tuple[sp.Expr, list[sp.Expr]]:
        """``alpha(R) - 1`` and the components of ``i_R d alpha``."""
        n = len(self.coordinates)
        da = self.d_alpha()
        ar = E.simplify(sum(a * r for a, r in zip(self.alpha, self.reeb)) - 1)
        contraction = [E.simplify(sum(self.reeb[i] * da[i, j] for i in range(n))) for j in range(n)]
        return ar, contraction

    def check_expression(self, f: sp.Expr) -> None:
        extra = sorted(s.name for s in sp.sympify(f).free_symbols if s.name not in self.coordinates
                       and s.name not in E.PARAMETERS)
        if extra:
            raise ChartError(f"expression uses {extra} outside contact chart {self.coordinates}")


def standard_chart(names: Sequence[str] = ("q", "p", "z")) -> ContactChart:
    """``alpha = dz - p dq`` on ``(q, p, z)``; Reeb field ``d/dz``."""
    q, p, z = E.symbols(names)
    return ContactChart(
        tuple(names),
        alpha=(-p, sp.Integer(0), sp.Integer(1)),
        reeb=(sp.Integer(0), sp.Integer(0), sp.Integer(1)),
        # Lambda = d_q ^ d_p + p d_z ^ d_p
        jacobi={(0, 1): sp.Integer(1), (1, 2): -p},
        standard=True,
    )


def chart_from_form(coordinates: Sequence[str], alpha: Sequence[sp.Expr | str]) -> ContactChart:
    """Reeb field and Jacobi bivector of an arbitrary contact form.

    Uses the isomorphism X -> i_X d alpha + alpha(X) alpha, whose matrix is
    K_{ij} = (d alpha)_{ij} + alpha_i alpha_j.  Then R = K^{-T} alpha and
    Lambda^{ij} = R^i R^j - (K^{-1})_{ij}, which reproduces
    X_f(g) = Lambda(df, dg) + f R(g).
    """
    coordinates = tuple(coordinates)
    alpha = tuple(E.parse(a) if isinstance(a, str) else sp.sympify(a) for a in alpha)
    n = len(coordinates)
    tmp = ContactChart(coordinates, alpha, (sp.Integer(0),) * n, {})
    da = tmp.d_alpha()
    K = sp.Matrix(n, n, lambda i, j: da[i, j] + alpha[i] * alpha[j])
    if sp.simplify(K.det()) == 0:
        raise ChartError("one-form is not contact (alpha ^ d alpha^n vanishes identically)")
    Kinv = sp.simplify(K.inv())
    R = [sp.simplify(v) for v in Kinv.T * sp.Matrix(alpha)]
    jac = {}
    for i in range(n):
        for j in range(i + 1, n):
            v = sp.simplify(R[i] * R[j] - Kinv[i, j])
            if v != 0:
                jac[(i, j)] = v
    std = alpha == standard_chart(coordinates).alpha if n == 3 else False
    return ContactChart(coordinates, alpha, tuple(R), jac, standard=std)


def reeb_apply(chart: ContactChart, f: sp.Expr) -> sp.Expr:
    return sp.expand(sum(r * sp.diff(f, x) for r, x in zip(chart.reeb, chart.symbols())))


def jacobi_bracket(chart: ContactChart, f: sp.Expr, g: sp.Expr) -> sp.Expr:
    """``Lambda(df, dg) + f R(g) - g R(f)``."""
    chart.check_expression(f)
    chart.check_expression(g)
    xs = chart.symbols()
    df = [sp.diff(f, x) for x in xs]
    dg = [sp.diff(g, x) for x in xs]
    lam = sum(v * (df[i] * dg[j] - df[j] * dg[i]) for (i, j), v in chart.jacobi.items())
    return E.simplify(lam + f * reeb_apply(chart, g) - g * reeb_apply(chart, f))


def contact_vector_field(chart: ContactChart, h: sp.Expr) -> list[sp.Expr]:
    """``(-h_p, h_q + p h_z, h - p h_p)`` on the standard chart."""
    if not chart.standard:
        raise UnsupportedChartError("contact vector fields are only built on the standard (q, p, z) chart")
    q, p, z = chart.symbols()
    hq, hp, hz = (sp.diff(h, v) for v in (q, p, z))
    return [E.simplify(-hp), E.simplify(hq + p * hz), E.simplify(h - p * hp)]


def apply_field(field: Sequence[sp.Expr], chart: ContactChart, f: sp.Expr) -> sp.Expr:
    return E.simplify(sum(c * sp.diff(f, x) for c, x in zip(field, chart.symbols())))


def dissipated_quantity_check(chart: ContactChart, h: sp.Expr, I: sp.Expr) -> bool:
    """``{I, h}_alpha == 0``."""
    return E.is_zero(jacobi_bracket(chart, I, h))


def homogeneous_lift(f: sp.Expr, radial: str = "r", sign: int = 1) -> sp.Expr:
    """``sign * r * f``.  ``sign=-1`` gives the ``-sigma f`` convention."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return sp.expand(sign * sp.Symbol(radial) * sp.sympify(f))


def symplectization(chart: ContactChart, radial: str = "r") -> PoissonStructure:
    """Poisson tensor of ``omega = -d(r alpha)`` on the chart extended by ``r``.

    With this sign the Poisson bracket of lifts ``r f`` restricted to
    ``r = 1`` reproduces ``{f, g}_alpha``.
    """
    coords = chart.coordinates + (radial,)
    xs = E.symbols(coords)
    r = xs[-1]
    theta = [r * a for a in chart.alpha] + [sp.Integer(0)]
    n = len(coords)
    omega = sp.Matrix(n, n, lambda i, j: -(sp.diff(theta[j], xs[i]) - sp.diff(theta[i], xs[j])))
    P = sp.simplify(omega.inv())
    comps = {(i, j): P[i, j] for i in range(n) for j in range(i + 1, n) if P[i, j] != 0}
    return PoissonStructure(coords, comps)


def correspondence_residual(chart: ContactChart, f: sp.Expr, g: sp.Expr, radial: str = "r") -> sp.Expr:
    """``{r f, r g}|_{r=1} - {f, g}_alpha``; identically zero."""
    P = symplectization(chart, radial)
    lifted = poisson_bracket(P, homogeneous_lift(f, radial), homogeneous_lift(g, radial))
    return E.simplify(lifted.subs(sp.Symbol(radial), 1) - jacobi_bracket(chart, f, g))


@dataclass(frozen=True)
class Nondegeneracy:
    ok: bool
    coefficient: sp.Expr
    constant: bool
    values: tuple[float, ...]


def contact_nondegeneracy(chart: ContactChart, samples: Sequence[Mapping[str, float]]) -> Nondegeneracy:
    """Coefficient of ``alpha ^ d alpha`` on ``dx0 ^ dx1 ^ dx2``; nonzero at every sample."""
    if len(chart.coordinates) != 3:
        raise UnsupportedChartError("nondegeneracy is only computed for 3-dimensional charts")
    a = chart.alpha
    da = chart.d_alpha()
    c = E.simplify(a[0] * da[1, 2] - a[1] * da[0, 2] + a[2] * da[0, 1])
    values = tuple(E.evaluate(c, pt) for pt in samples)
    ok = all(abs(v) > 1e-12 for v in values)
    return Nondegeneracy(ok, c, not c.free_symbols and c != 0, values)


def rank_of_differentials(fs: Sequence[sp.Expr], coordinates: Sequence[str],
                          samples: Sequence[Mapping[str, float]], tol: float = 1e-10) -> int:
    """Numerical rank of the Jacobian of ``fs``, maximized over samples."""
    xs = E.symbols(coordinates)
    jac = sp.Matrix([[sp.diff(f, x) for x in xs] for f in fs])
    fn = sp.lambdify(xs, jac, modules="numpy")
    best = 0
    for pt in samples:
        J = np.asarray(fn(*[pt[c] for c in coordinates]), dtype=complex)
        if not np.all(np.isfinite(J)):
            continue
        s = np.linalg.svd(J, compute_uv=False)
        best = max(best, int(np.sum(s > tol)))
    return best


def random_points(coordinates: Sequence[str], count: int, seed: int = 0,
                  low: float = -2.0, high: float = 2.0) -> list[dict[str, float]]:
    rng = random.Random(seed)
    return [{c: rng.uniform(low, high) for c in coordinates} for _ in range(count)]

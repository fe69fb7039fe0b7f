"""Weyl quantization of polynomial symbols on a truncated oscillator basis.

Operators are built on ``N + deg`` levels and cropped to ``N``: a product of
``deg`` band-1 factors only touches intermediate levels below ``N + deg``, so
every kept matrix element equals that of the untruncated operator.  Products
of two cropped operators are still wrong near the edge; callers mask the last
``margin`` rows and columns.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .gksl import GKSLGenerator, dissipator_adjoint, heisenberg_apply, opnorm
from .moyal import PhaseSymbol, as_symbol, poisson


class TruncationError(ValueError):
    pass


@dataclass(frozen=True)
class FockOperator:
    matrix: np.ndarray
    N: int
    hbar: float
    margin: int

    def interior(self) -> np.ndarray:
        return mask_interior(self.matrix, self.margin)


def ladder(n: int) -> np.ndarray:
    """Annihilation operator on ``n`` levels."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def position_momentum(n: int, h: float) -> tuple[np.ndarray, np.ndarray]:
    a = ladder(n)
    ad = a.conj().T
    X = np.sqrt(h / 2) * (a + ad)
    P = 1j * np.sqrt(h / 2) * (ad - a)
    return X, P


@lru_cache(maxsize=512)
def _weyl_monomial(m: int, n: int, size: int, h: float) -> np.ndarray:
    # Average over the C(m+n, m) distinct orderings of m X's and n P's.
    X, P = position_momentum(size, h)
    total = np.zeros((size, size), dtype=complex)
    count = 0
    for slots in itertools.combinations(range(m + n), m):
        prod = np.eye(size, dtype=complex)
        chosen = set(slots)
        for k in range(m + n):
            prod = prod @ (X if k in chosen else P)
        total += prod
        count += 1
    total /= count
    total.setflags(write=False)
    return total


def weyl_quantize(a, N: int, hbar: float, margin: int | None = None) -> FockOperator:
    a = as_symbol(a)
    deg = a.degree()
    if N < deg + 2:
        raise TruncationError(f"truncation N={N} too small for symbol degree {deg} (need N >= {deg + 2})")
    if margin is None:
        margin = deg + 2
    size = N + max(deg, 1)
    M = np.zeros((size, size), dtype=complex)
    for (m, n), c in a.at_hbar(hbar).items():
        if c != 0:
            M = M + c * _weyl_monomial(m, n, size, float(hbar))
    return FockOperator(M[:N, :N].copy(), N, float(hbar), margin)


def mask_interior(M: np.ndarray, margin: int) -> np.ndarray:
    n = M.shape[0] - margin
    return M[:n, :n]


def commutator_check(a, b, N: int, hbar: float, margin: int) -> float:
    """``|mask((1/(i hbar)) [Q(a), Q(b)] - Q({a, b}))|`` in operator norm."""
    A = weyl_quantize(a, N, hbar).matrix
    B = weyl_quantize(b, N, hbar).matrix
    C = weyl_quantize(poisson(a, b), N, hbar).matrix
    R = (A @ B - B @ A) / (1j * hbar) - C
    return opnorm(mask_interior(R, margin))


@dataclass(frozen=True)
class EgorovModel:
    """Symbols for the sweep: Hamiltonian, observable, Lindblad symbols and rates."""

    H: PhaseSymbol
    f: PhaseSymbol
    lindblads: tuple[tuple[PhaseSymbol, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "H", as_symbol(self.H))
        object.__setattr__(self, "f", as_symbol(self.f))
        object.__setattr__(self, "lindblads", tuple((as_symbol(l), float(g)) for l, g in self.lindblads))


def quantized_generator(model: EgorovModel, N: int, hbar: float) -> GKSLGenerator:
    H = weyl_quantize(model.H, N, hbar).matrix
    H = (H + H.conj().T) / 2
    Ls = tuple(np.sqrt(g) * weyl_quantize(l, N, hbar).matrix for l, g in model.lindblads)
    return GKSLGenerator(H, Ls, hbar)


@dataclass(frozen=True)
class SweepRow:
    hbar: float
    residual_norm: float
    f_norm: float
    ratio: float


@dataclass
class SweepResult:
    rows: list[SweepRow]
    slope: float | None
    slope_stderr: float | None

    def to_csv(self) -> str:
        lines = ["hbar,residual_norm,f_norm,ratio"]
        for r in self.rows:
            lines.append(f"{r.hbar:.12g},{r.residual_norm:.15e},{r.f_norm:.15e},{r.ratio:.15e}")
        lines.append(self.summary())
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        if self.slope is None:
            return "slope=undefined (residual vanishes)"
        return f"slope={self.slope:.2f}±{self.slope_stderr:.2f}"


def cc2_residual(model: EgorovModel, N: int, hbar: float, margin: int) -> SweepRow:
    """``|mask(L^+(Q f) - Q({f, H}))| / max(1, |mask Q f|)`` at one hbar."""
    G = quantized_generator(model, N, hbar)
    F = weyl_quantize(model.f, N, hbar).matrix
    target = weyl_quantize(poisson(model.f, model.H), N, hbar).matrix
    R = heisenberg_apply(G, F) - target
    res = opnorm(mask_interior(R, margin))
    fn = opnorm(mask_interior(F, margin))
    return SweepRow(float(hbar), res, fn, res / max(1.0, fn))


def dissipator_on_interior(model: EgorovModel, N: int, hbar: float, margin: int) -> np.ndarray:
    """Heisenberg dissipator applied to ``Q(f)``, masked."""
    G = quantized_generator(model, N, hbar)
    F = weyl_quantize(model.f, N, hbar).matrix
    return mask_interior(dissipator_adjoint(G, F), margin)


def fit_loglog(hs: Sequence[float], rs: Sequence[float]) -> tuple[float | None, float | None]:
    """Least-squares slope of log r against log hbar and its standard error."""
    if len(hs) < 2 or min(rs) <= 0:
        return None, None
    lx, ly = np.log(np.asarray(hs)), np.log(np.asarray(rs))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    n = len(hs)
    if n > 2:
        resid = ly - A @ coef
        s2 = float(resid @ resid) / (n - 2)
        stderr = float(np.sqrt(s2 / np.sum((lx - lx.mean()) ** 2)))
    else:
        stderr = 0.0
    return float(coef[0]), stderr


def egorov_sweep(model: EgorovModel, hbars: Sequence[float], N: int = 60, margin: int = 6,
                 floor: float = 1e-13) -> SweepResult:
    """CC2 residual over an hbar grid plus the fitted log-log slope.

    Residuals below ``floor`` count as exact; the slope is then undefined.
    """
    for s in (model.H, model.f) + tuple(l for l, _ in model.lindblads):
        as_symbol(s)
    rows = [cc2_residual(model, N, h, margin) for h in hbars]
    ratios = [r.ratio for r in rows]
    if min(ratios) <= floor:
        return SweepResult(rows, None, None)
    slope, err = fit_loglog([r.hbar for r in rows], ratios)
    return SweepResult(rows, slope, err)

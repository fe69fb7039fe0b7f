"""Finite-dimensional GKSL generators and their Heisenberg adjoints.

Superoperators act on column-stacked matrices, ``vec(X) = X.flatten('F')``,
so that ``vec(A X B) = (B^T kron A) vec(X)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

log = logging.getLogger(__name__)

MAX_DIM = 64


class DimensionError(ValueError):
    pass


def as_cmatrix(a, name: str = "matrix") -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise DimensionError(f"{name} has dimension {m.shape[0]} > {MAX_DIM}")
    m.setflags(write=False)
    return m


def dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def opnorm(a: np.ndarray) -> float:
    """Largest singular value."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def is_hermitian(a: np.ndarray, tol: float = 1e-10) -> bool:
    return opnorm(a - dag(a)) < tol


def is_unitary(a: np.ndarray, tol: float = 1e-10) -> bool:
    return opnorm(a @ dag(a) - np.eye(a.shape[0])) < tol


def is_positive(a: np.ndarray, tol: float = 1e-10) -> bool:
    return is_hermitian(a, tol) and float(np.linalg.eigvalsh((a + dag(a)) / 2).min()) >= -tol


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).flatten(order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


@dataclass(frozen=True)
class GKSLGenerator:
    H: np.ndarray
    lindblads: tuple[np.ndarray, ...] = ()
    hbar: float = 1.0

    def __post_init__(self):
        H = as_cmatrix(self.H, "H")
        d = H.shape[0]
        if not opnorm(H - dag(H)) < 1e-12 * max(1.0, opnorm(H)):
            raise ValueError("H is not Hermitian")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        Ls = tuple(as_cmatrix(L, f"lindblads[{k}]") for k, L in enumerate(self.lindblads))
        for k, L in enumerate(Ls):
            if L.shape != (d, d):
                raise DimensionError(f"lindblads[{k}] has shape {L.shape}, expected {(d, d)}")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "lindblads", Ls)
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def _check(self, x: np.ndarray, name: str) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim, self.dim):
            raise DimensionError(f"{name} has shape {x.shape}, generator dimension is {self.dim}")
        return x


def lindblad_apply(G: GKSLGenerator, rho: np.ndarray) -> np.ndarray:
    """Schrodinger picture: ``-(i/hbar)[H, rho] + sum L rho L^+ - 1/2 {L^+ L, rho}``."""
    rho = G._check(rho, "rho")
    out = (-1j / G.hbar) * comm(G.H, rho)
    for L in G.lindblads:
        LdL = dag(L) @ L
        out = out + L @ rho @ dag(L) - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def dissipator_adjoint(G: GKSLGenerator, A: np.ndarray) -> np.ndarray:
    """Heisenberg dissipator alone: ``sum L^+ A L - 1/2 {L^+ L, A}``."""
    A = G._check(A, "A")
    out = np.zeros_like(A)
    for L in G.lindblads:
        LdL = dag(L) @ L
        out = out + dag(L) @ A @ L - 0.5 * (LdL @ A + A @ LdL)
    return out


def heisenberg_apply(G: GKSLGenerator, A: np.ndarray) -> np.ndarray:
    """Heisenberg picture: ``(i/hbar)[H, A] + sum L^+ A L - 1/2 {L^+ L, A}``."""
    A = G._check(A, "A")
    return (1j / G.hbar) * comm(G.H, A) + dissipator_adjoint(G, A)


def adjoint_pairing_residual(G: GKSLGenerator, rho: np.ndarray, A: np.ndarray) -> float:
    lhs = np.trace(lindblad_apply(G, rho) @ A)
    rhs = np.trace(rho @ heisenberg_apply(G, A))
    return float(abs(lhs - rhs))


@dataclass(frozen=True)
class Superoperator:
    matrix: np.ndarray
    picture: str = "schrodinger"

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(x), self.dim)


def to_superoperator(G: GKSLGenerator, picture: str = "schrodinger") -> Superoperator:
    d = G.dim
    I = np.eye(d)
    Hc = np.kron(I, G.H) - np.kron(G.H.T, I)  # vec([H, X])
    if picture == "schrodinger":
        M = (-1j / G.hbar) * Hc
        for L in G.lindblads:
            LdL = dag(L) @ L
            M = M + np.kron(L.conj(), L) - 0.5 * (np.kron(I, LdL) + np.kron(LdL.T, I))
    elif picture == "heisenberg":
        M = (1j / G.hbar) * Hc
        for L in G.lindblads:
            LdL = dag(L) @ L
            M = M + np.kron(L.T, dag(L)) - 0.5 * (np.kron(I, LdL) + np.kron(LdL.T, I))
    else:
        raise ValueError(f"unknown picture {picture!r}")
    return Superoperator(M, picture)


def propagator(G: GKSLGenerator, t: float, picture: str = "schrodinger") -> Superoperator:
    """``exp(t L)`` as a superoperator (Pade-13 scaling and squaring)."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    S = to_superoperator(G, picture)
    return Superoperator(scipy.linalg.expm(t * S.matrix), picture)


def evolve(G: GKSLGenerator, x0: np.ndarray, t: float, picture: str = "schrodinger") -> np.ndarray:
    x0 = G._check(x0, "initial matrix")
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    if t == 0:
        return x0.copy()
    return propagator(G, t, picture).apply(x0)


def kernel_of_adjoint(G: GKSLGenerator, tol: float = 1e-9) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormal basis of ``ker L^+``."""
    M = to_superoperator(G, "heisenberg").matrix
    _, s, vh = np.linalg.svd(M)
    null = s < tol
    k = int(null.sum())
    if 0 < k < len(s):
        log.debug("kernel gap: smallest kept %.3e, largest dropped %.3e", s[~null].min(), s[null].max())
    return [unvec(v.conj(), G.dim) for v in vh[null]]


def commutant_membership(G: GKSLGenerator, O: np.ndarray, tol: float = 1e-10) -> bool:
    """``[H, O] = [L_k, O] = [L_k^+, O] = 0`` within ``tol``."""
    O = G._check(O, "O")
    norms = [opnorm(comm(G.H, O))]
    for L in G.lindblads:
        norms += [opnorm(comm(L, O)), opnorm(comm(dag(L), O))]
    member = max(norms) < tol
    if member:
        # Constants of motion follow; the scale absorbs 1/hbar and |L|^2 factors.
        scale = max(1.0, 1.0 / G.hbar, sum(opnorm(L) ** 2 for L in G.lindblads))
        residual = opnorm(heisenberg_apply(G, O))
        assert residual < 10 * tol * scale, f"commutant member with |L^+(O)| = {residual:.3e}"
    return member


def algebra_basis(generators: Sequence[np.ndarray], d: int, tol: float = 1e-9) -> list[np.ndarray]:
    """Orthonormal basis of the unital algebra generated by ``generators``.

    Grows the span by multiplying basis elements with generators until the
    dimension stops increasing.
    """
    gens = [np.asarray(g, dtype=complex) for g in generators]
    basis: list[np.ndarray] = []

    def absorb(candidates) -> bool:
        added = False
        for c in candidates:
            v = vec(c)
            for b in basis:
                v = v - np.vdot(vec(b), v) * vec(b)
            n = np.linalg.norm(v)
            if n > tol * max(1.0, np.linalg.norm(vec(c))):
                basis.append(unvec(v / n, d))
                added = True
        return added

    absorb([np.eye(d)] + gens)
    while absorb([b @ g for b in list(basis) for g in gens]):
        pass
    return basis


@dataclass
class AlgebraReport:
    commuting: bool
    members: list[bool]
    dimension: int
    max_residual: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.commuting and all(self.members) and self.max_residual < 1e-10


def invariant_algebra_check(G: GKSLGenerator, generators: Sequence[np.ndarray], tol: float = 1e-10) -> AlgebraReport:
    gens = [G._check(g, "generator") for g in generators]
    commuting = all(opnorm(comm(a, b)) < tol for i, a in enumerate(gens) for b in gens[i + 1:])
    members = [commutant_membership(G, g, tol) for g in gens]
    basis = algebra_basis(gens, G.dim)
    residual = max(opnorm(heisenberg_apply(G, b)) for b in basis)
    return AlgebraReport(commuting, members, len(basis), residual)


def convex_combine(G0: GKSLGenerator, G1: GKSLGenerator, lam: float) -> GKSLGenerator:
    """Generator of ``(1-lam) L0 + lam L1``; zero-weight Lindblads are dropped."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam must lie in [0, 1], got {lam}")
    if G0.dim != G1.dim:
        raise DimensionError(f"generator dimensions differ: {G0.dim} vs {G1.dim}")
    if G0.hbar != G1.hbar:
        raise ValueError(f"generators use different hbar: {G0.hbar} vs {G1.hbar}")
    H = (1 - lam) * G0.H + lam * G1.H
    Ls = []
    if lam < 1:
        Ls += [np.sqrt(1 - lam) * L for L in G0.lindblads]
    if lam > 0:
        Ls += [np.sqrt(lam) * L for L in G1.lindblads]
    return GKSLGenerator(H, tuple(Ls), G0.hbar)


def choi_matrix(S: Superoperator) -> np.ndarray:
    """Normalized Choi matrix ``(1/d) sum_ij |i><j| kron Phi(|i><j|)``."""
    if S.picture != "schrodinger":
        raise ValueError("Choi matrix is defined for Schrodinger-picture maps")
    d = S.dim
    C = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            Eij = np.zeros((d, d))
            Eij[i, j] = 1.0
            C[i * d:(i + 1) * d, j * d:(j + 1) * d] = S.apply(Eij)
    return C / d


def choi_min_eigenvalue(S: Superoperator) -> float:
    C = choi_matrix(S)
    return float(np.linalg.eigvalsh((C + dag(C)) / 2).min())


def cp_check(S: Superoperator, tol: float = 1e-10) -> bool:
    return choi_min_eigenvalue(S) >= -tol


@dataclass
class BiLindbladPoint:
    lam: float
    cp_min_eigenvalues: dict[float, float]
    trace_defect: float
    integral_residuals: list[float]
    passed: bool


@dataclass
class BiLindbladReport:
    points: list[BiLindbladPoint]

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.points)


def bilindblad_check(G0: GKSLGenerator, G1: GKSLGenerator, integrals: Sequence[np.ndarray],
                     lambdas: Sequence[float] = (0.0, 0.5, 1.0), times: Sequence[float] = (0.1, 1.0, 10.0),
                     tol: float = 1e-10) -> BiLindbladReport:
    points = []
    for lam in lambdas:
        G = convex_combine(G0, G1, lam)
        mins = {t: choi_min_eigenvalue(propagator(G, t)) for t in times}
        # trace preservation of the generator: vec(1)^T M = 0
        M = to_superoperator(G).matrix
        defect = float(np.abs(vec(np.eye(G.dim)) @ M).max())
        res = [opnorm(heisenberg_apply(G, I)) for I in integrals]
        ok = min(mins.values()) >= -tol and defect < 1e-10 and all(r < tol for r in res)
        points.append(BiLindbladPoint(lam, mins, defect, res, ok))
    return BiLindbladReport(points)


def random_generator(rng: np.random.Generator, d: int, n_lindblads: int = 2, hbar: float = 1.0) -> GKSLGenerator:
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = (A + dag(A)) / 2
    Ls = tuple((rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(d) for _ in range(n_lindblads))
    return GKSLGenerator(H, Ls, hbar)


def random_density(rng: np.random.Generator, d: int) -> np.ndarray:
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = A @ dag(A)
    return rho / np.trace(rho)


def random_matrix(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))

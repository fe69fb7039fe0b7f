"""Joint spectral sectors of commuting observables and dephasing between them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .gksl import GKSLGenerator, comm, dag, evolve, opnorm

GAP = 1e-8


class NonCommutingError(ValueError):
    def __init__(self, i: int, j: int, norm: float):
        super().__init__(f"observables {i} and {j} do not commute: |[A_{i}, A_{j}]| = {norm:.3e}")
        self.pair = (i, j)
        self.norm = norm


class SectorPreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Sector:
    values: tuple[float, ...]
    projector: np.ndarray
    multiplicity: int


@dataclass(frozen=True)
class SectorDecomposition:
    sectors: tuple[Sector, ...]

    def __len__(self) -> int:
        return len(self.sectors)

    def __iter__(self):
        return iter(self.sectors)

    @property
    def dim(self) -> int:
        return self.sectors[0].projector.shape[0]

    def labels(self) -> list[tuple[float, ...]]:
        return [s.values for s in self.sectors]


def _clusters(values: np.ndarray, gap: float) -> list[list[int]]:
    order = np.argsort(values)
    groups: list[list[int]] = []
    for idx in order:
        if groups and values[idx] - values[groups[-1][-1]] <= gap:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    return groups


def joint_sectors(observables: Sequence[np.ndarray], tol: float = 1e-9, gap: float = GAP) -> SectorDecomposition:
    """Simultaneous eigenspaces by iterated eigenspace refinement."""
    obs = [np.asarray(a, dtype=complex) for a in observables]
    if not obs:
        raise ValueError("need at least one observable")
    d = obs[0].shape[0]
    for i, a in enumerate(obs):
        if opnorm(a - dag(a)) > tol:
            raise ValueError(f"observable {i} is not Hermitian")
        for j in range(i + 1, len(obs)):
            n = opnorm(comm(a, obs[j]))
            if n >= tol:
                raise NonCommutingError(i, j, n)

    blocks: list[tuple[tuple[float, ...], np.ndarray]] = [((), np.eye(d, dtype=complex))]
    for a in obs:
        refined = []
        for label, V in blocks:
            sub = dag(V) @ a @ V
            w, U = np.linalg.eigh((sub + dag(sub)) / 2)
            for group in _clusters(w, gap):
                refined.append((label + (float(np.mean(w[group])),), V @ U[:, group]))
        blocks = refined
    blocks.sort(key=lambda b: b[0])
    sectors = tuple(Sector(label, V @ dag(V), V.shape[1]) for label, V in blocks)
    return SectorDecomposition(sectors)


def functional_calculus(sectors: SectorDecomposition, phi: Callable[[tuple[float, ...]], complex]) -> np.ndarray:
    """``sum_nu phi(nu) P_nu``."""
    return sum(complex(phi(s.values)) * s.projector for s in sectors)


def sector_scalars(L: np.ndarray, sectors: SectorDecomposition, tol: float = 1e-9, name: str = "L") -> list[complex]:
    """Values ``l_nu`` with ``L P_nu = l_nu P_nu``; raises when L is not sector-scalar."""
    out = []
    for n, s in enumerate(sectors):
        P = s.projector
        ell = np.trace(L @ P) / s.multiplicity
        if opnorm(L @ P - ell * P) >= tol:
            raise SectorPreconditionError(f"{name} does not act as a scalar on sector {n} {s.values}")
        out.append(complex(ell))
    return out


def dephasing_rates(G: GKSLGenerator, sectors: SectorDecomposition) -> np.ndarray:
    """``rate[nu, mu] = 1/2 sum_k |l_{k,nu} - l_{k,mu}|^2``; zero diagonal."""
    n = len(sectors)
    rates = np.zeros((n, n))
    for k, L in enumerate(G.lindblads):
        ell = np.array(sector_scalars(L, sectors, name=f"L_{k}"))
        rates += 0.5 * np.abs(ell[:, None] - ell[None, :]) ** 2
    np.fill_diagonal(rates, 0.0)
    return rates


@dataclass(frozen=True)
class CoherenceRow:
    t: float
    nu: int
    mu: int
    block_norm: float
    predicted_norm: float


@dataclass
class CoherenceTable:
    rows: list[CoherenceRow]
    predicted: bool

    def max_offdiag_rel_error(self) -> float:
        errs = [abs(r.block_norm - r.predicted_norm) / max(r.predicted_norm, 1e-300)
                for r in self.rows if r.nu != r.mu and r.predicted_norm > 1e-14]
        zeros = [r.block_norm for r in self.rows if r.nu != r.mu and r.predicted_norm <= 1e-14]
        return max(errs + zeros, default=0.0)

    def max_diagonal_drift(self) -> float:
        return max((abs(r.block_norm - r.predicted_norm) for r in self.rows if r.nu == r.mu), default=0.0)

    def to_csv(self, labels: Sequence[tuple[float, ...]] | None = None) -> str:
        fmt = (lambda i: "(" + ";".join(f"{v:.12g}" for v in labels[i]) + ")") if labels else str
        lines = ["t,sector_nu,sector_mu,block_norm,predicted_norm"]
        for r in self.rows:
            lines.append(f"{r.t:.12g},{fmt(r.nu)},{fmt(r.mu)},{r.block_norm:.15e},{r.predicted_norm:.15e}")
        return "\n".join(lines) + "\n"


def coherence_trajectory(G: GKSLGenerator, rho0: np.ndarray, sectors: SectorDecomposition,
                         times: Sequence[float]) -> CoherenceTable:
    """Hilbert-Schmidt norms of ``P_nu rho(t) P_mu``.

    Predictions ``exp(-rate t) |rho_{nu mu}(0)|`` are attached when H is
    block-diagonal in the sectors: the Hamiltonian then rotates each block
    unitarily and leaves its norm alone.  Otherwise the predicted column is NaN.
    """
    Ps = [s.projector for s in sectors]
    block_diag = all(opnorm(comm(G.H, P)) < 1e-9 for P in Ps)
    rates = dephasing_rates(G, sectors) if block_diag else None
    n = len(Ps)
    initial = [[np.linalg.norm(Ps[a] @ rho0 @ Ps[b]) for b in range(n)] for a in range(n)]
    rows = []
    for t in times:
        rho = evolve(G, rho0, t)
        for a in range(n):
            for b in range(n):
                norm = float(np.linalg.norm(Ps[a] @ rho @ Ps[b]))
                pred = float(np.exp(-rates[a, b] * t) * initial[a][b]) if rates is not None else float("nan")
                rows.append(CoherenceRow(float(t), a, b, norm, pred))
    return CoherenceTable(rows, rates is not None)


def diagonal_block_drift(G: GKSLGenerator, rho0: np.ndarray, sectors: SectorDecomposition,
                         times: Sequence[float]) -> float:
    """``max_t max_nu |rho_{nu nu}(t) - rho_{nu nu}(0)|`` for sector-scalar H."""
    worst = 0.0
    for t in times:
        rho = evolve(G, rho0, t)
        for s in sectors:
            P = s.projector
            worst = max(worst, float(np.linalg.norm(P @ rho @ P - P @ rho0 @ P)))
    return worst

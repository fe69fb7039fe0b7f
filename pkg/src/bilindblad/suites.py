"""Verification suites run over a model configuration."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import sympy as sp

from . import gksl as K
from .config import SUITES, ModelData
from .sectors import SectorPreconditionError, coherence_trajectory, joint_sectors
from .symbolic import expr as E
from .symbolic.contact import (apply_field, contact_nondegeneracy, contact_vector_field, correspondence_residual,
                               jacobi_bracket, random_points, rank_of_differentials)
from .symbolic.poisson import (PoissonStructure, bihamiltonian_check, build_pencil, homogeneity_degree,
                               jacobiator_on_coordinates, poisson_bracket)
from .weyl import EgorovModel, SweepResult, egorov_sweep

PASS, FAIL, PROB, SKIP = "pass", "fail", "probabilistic", "skip"


@dataclass(frozen=True)
class CheckRecord:
    name: str
    anchor: str
    status: str
    residual: float | None = None
    tolerance: float | None = None
    detail: str = ""

    def line(self) -> str:
        res = "-" if self.residual is None else f"{self.residual:.3e}"
        tol = "-" if self.tolerance is None else f"{self.tolerance:.1e}"
        s = f"{self.status.upper():<13} {self.name:<48} residual={res:<10} tol={tol:<8} [{self.anchor}]"
        if self.detail:
            s += f"  {self.detail}"
        return s


@dataclass
class SuiteReport:
    model: str
    seed: int
    records: list[CheckRecord] = field(default_factory=list)
    coherences: dict[str, str] = field(default_factory=dict)
    sweeps: dict[str, SweepResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.status != FAIL for r in self.records)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def sorted_records(self) -> list[CheckRecord]:
        return sorted(self.records, key=lambda r: r.name)

    def to_text(self) -> str:
        lines = [f"model: {self.model}", f"seed: {self.seed}"]
        lines += [r.line() for r in self.sorted_records()]
        counts = {s: sum(r.status == s for r in self.records) for s in (PASS, PROB, FAIL, SKIP)}
        lines.append("overall: " + ("PASS" if self.passed else "FAIL") + "  "
                     + " ".join(f"{k}={v}" for k, v in counts.items()))
        return "\n".join(lines) + "\n"


class _Recorder:
    def __init__(self, report: SuiteReport, seed: int):
        self.report = report
        self.seed = seed

    def add(self, name, anchor, status, residual=None, tol=None, detail=""):
        self.report.records.append(CheckRecord(name, anchor, status, residual, tol, detail))

    def exact(self, name, anchor, exprs, detail_ok=""):
        """Record a symbolic identity; probabilistic when only random evaluation decided."""
        methods = []
        bad = None
        for e in exprs:
            zt = E.zero_test(e, seed=self.seed)
            if not zt.is_zero:
                bad = e
                break
            methods.append(zt.method)
        if bad is not None:
            self.add(name, anchor, FAIL, 1.0, 0.0, f"nonzero: {_short(bad)}")
        elif "probabilistic" in methods:
            self.add(name, anchor, PROB, 0.0, 0.0, detail_ok)
        else:
            self.add(name, anchor, PASS, 0.0, 0.0, detail_ok)

    def numeric(self, name, anchor, residual, tol, detail=""):
        status = PASS if residual <= tol else FAIL
        self.add(name, anchor, status, float(residual), tol, detail)


def _short(e: sp.Expr, n: int = 60) -> str:
    s = E.to_text(E.simplify(e))
    return s if len(s) <= n else s[: n - 3] + "..."


# ---------------------------------------------------------------------------

def run_suite(data: ModelData, suites: list[str] | None = None, seed: int | None = None,
              tolerances: dict[str, float] | None = None, mode: str | None = None,
              samples: int | None = None) -> SuiteReport:
    st = data.settings
    suites = list(suites or st.suites or SUITES)
    seed = st.seed if seed is None else seed
    tol = dict(st.tolerances)
    tol.update(tolerances or {})
    samples = st.samples if samples is None else samples
    mode = mode or st.pencil_mode
    report = SuiteReport(data.name, seed)
    rec = _Recorder(report, seed)
    runners = {
        "pencil": lambda: _pencil(data, rec, mode),
        "contact": lambda: _contact(data, rec, seed),
        "gksl": lambda: _gksl(data, rec, seed, tol, samples),
        "pencil-quantum": lambda: _pencil_quantum(data, rec, tol),
        "dephasing": lambda: _dephasing(data, rec, tol),
        "egorov": lambda: _egorov(data, rec, tol),
    }
    for s in suites:
        if s not in runners:
            raise ValueError(f"unknown suite {s!r}")
        runners[s]()
    return report


def _pencil(d: ModelData, rec: _Recorder, mode: str | None) -> None:
    if not d.structures:
        rec.add("pencil", "Poisson pencil", SKIP, detail="model has no Poisson structures")
        return
    for name, P in sorted(d.structures.items()):
        rec.exact(f"pencil.jacobiator.{name}", "Jacobi identity", jacobiator_on_coordinates(P).values())
    pencil = None
    if d.pencil:
        m = mode or d.pencil[2]
        pencil = build_pencil(d.structures[d.pencil[0]], d.structures[d.pencil[1]], m)
        vars_ = ",".join(d.coordinates + ("lam",))
        rec.exact(f"pencil.jacobiator.pencil[{m}]", "compatible pencil", jacobiator_on_coordinates(pencil).values(),
                  detail_ok=f"Jacobiator = 0 in ({vars_})")

    def structure(ref: str) -> PoissonStructure:
        return pencil if ref == "pencil" else d.structures[ref]

    for sname, cas in sorted(d.casimirs.items()):
        P = d.structures[sname]
        for c in cas:
            rec.exact(f"pencil.casimir.{sname}.{c}", "Casimir functions",
                      [poisson_bracket(P, x, d.symbol(c)) for x in P.symbols()])
    if d.bihamiltonian:
        (s0, h0), (s1, h1) = d.bihamiltonian
        res = bihamiltonian_check(d.structures[s0], d.symbol(h0), d.structures[s1], d.symbol(h1))
        rec.exact("pencil.bihamiltonian", "bi-Hamiltonian vector field", res.residual)
        if d.expected_field is not None:
            rec.exact("pencil.field", "bi-Hamiltonian vector field",
                      [a - b for a, b in zip(res.field, d.expected_field)])
    for f, g, sref in d.involutions:
        if sref == "pencil" and pencil is None:
            rec.add(f"pencil.involution.{f}.{g}.pencil", "commuting integrals", SKIP, detail="no pencil declared")
            continue
        rec.exact(f"pencil.involution.{f}.{g}.{sref}", "commuting integrals",
                  [poisson_bracket(structure(sref), d.symbol(f), d.symbol(g))])
    for fname, deg in sorted(d.homogeneity.items()):
        got = homogeneity_degree(d.liouville, d.coordinates, d.symbol(fname)) if d.liouville else None
        ok = got == deg
        rec.add(f"pencil.homogeneity.{fname}", "homogeneous integrals", PASS if ok else FAIL,
                0.0 if ok else 1.0, 0.0, f"degree {got} (expected {deg})")
    for i, (fname, bindings, expected) in enumerate(d.restrictions):
        rec.exact(f"pencil.restriction.{i}.{fname}", "restriction to hypersurface",
                  [E.restrict(d.symbol(fname), bindings) - expected])


def _contact(d: ModelData, rec: _Recorder, seed: int) -> None:
    c = d.contact
    if c is None:
        rec.add("contact", "contact geometry", SKIP, detail="model has no contact data")
        return
    chart = c.chart
    a_r, iota = chart.reeb_residuals()
    rec.exact("contact.reeb", "Reeb vector field", [a_r] + list(iota))
    if len(chart.coordinates) == 3:
        nd = contact_nondegeneracy(chart, random_points(chart.coordinates, 10, seed))
        rec.add("contact.nondegeneracy", "contact form", PASS if nd.ok else FAIL, 0.0 if nd.ok else 1.0, 0.0,
                f"alpha^dalpha coefficient {E.to_text(nd.coefficient)}")
    h = d.symbol(c.hamiltonian)
    if chart.standard:
        X = contact_vector_field(chart, h)
        if c.expected_flow is not None:
            rec.exact("contact.flow", "contact dynamics", [a - b for a, b in zip(X, c.expected_flow)],
                      detail_ok="(" + ", ".join(E.to_text(x) for x in X) + ")")
        for name, want in sorted(c.expected_flow_action.items()):
            rec.exact(f"contact.flow_action.{name}", "contact dynamics",
                      [apply_field(X, chart, d.symbol(name)) - want])
    elif c.expected_flow is not None or c.expected_flow_action:
        rec.add("contact.flow", "contact dynamics", SKIP, detail="flow formula needs the standard chart")
    for name in c.integrals:
        rec.exact(f"contact.dissipated.{name}", "dissipated quantity", [jacobi_bracket(chart, d.symbol(name), h)])
    for f, g in combinations(c.integrals, 2):
        rec.exact(f"contact.involution.{f}.{g}", "Jacobi involution", [jacobi_bracket(chart, d.symbol(f), d.symbol(g))])
    if c.rank_at_least is not None:
        fs = [d.symbol(n) for n in (c.rank_functions or c.integrals)]
        pts = random_points(chart.coordinates, 10, seed)
        ranks = [rank_of_differentials(fs, chart.coordinates, [pt]) for pt in pts]
        ok = min(ranks) >= c.rank_at_least
        rec.add("contact.rank", "independent integrals", PASS if ok else FAIL, 0.0 if ok else 1.0, 0.0,
                f"min rank {min(ranks)} over 10 points (need {c.rank_at_least})")
    if c.correspondence_pairs:
        rng = random.Random(seed)
        res = [correspondence_residual(chart, E.random_polynomial(rng, chart.coordinates),
                                       E.random_polynomial(rng, chart.coordinates))
               for _ in range(c.correspondence_pairs)]
        rec.exact("contact.correspondence", "Jacobi-Poisson correspondence", res,
                  detail_ok=f"{c.correspondence_pairs} random pairs")


def _gksl(d: ModelData, rec: _Recorder, seed: int, tol: dict, samples: int) -> None:
    q = d.quantum
    if q is None or q.generator is None:
        rec.add("gksl", "GKSL generator", SKIP, detail="model has no quantum generator")
        return
    G = q.generator
    n = G.dim
    rng = np.random.default_rng(seed)
    worst = max(K.adjoint_pairing_residual(G, K.random_density(rng, n), K.random_matrix(rng, n))
                for _ in range(samples))
    rec.numeric("gksl.duality", "Heisenberg adjoint", worst, tol["zero"], f"{samples} random pairs")
    rho = K.random_density(rng, n)
    rec.numeric("gksl.trace", "trace preservation", abs(np.trace(K.lindblad_apply(G, rho))), tol["zero"])
    out = K.lindblad_apply(G, rho)
    rec.numeric("gksl.hermiticity", "Hermiticity preservation", K.opnorm(out - K.dag(out)), tol["zero"])
    rec.numeric("gksl.unitality", "unital adjoint", K.opnorm(K.heisenberg_apply(G, np.eye(n))), tol["zero"])
    P1, P2, P3 = K.propagator(G, 0.3), K.propagator(G, 0.7), K.propagator(G, 1.0)
    rec.numeric("gksl.semigroup", "semigroup law", K.opnorm(P2.matrix @ P1.matrix - P3.matrix), tol["semigroup"])
    cp = min(K.choi_min_eigenvalue(K.propagator(G, t)) for t in (0.1, 1.0, 10.0))
    rec.numeric("gksl.cp", "complete positivity", max(0.0, -cp), tol["cp"], f"min Choi eigenvalue {cp:.3e}")
    kdim = len(K.kernel_of_adjoint(G, tol["kernel"]))
    if q.kernel_dim is None:
        rec.add("gksl.kernel", "quantum constants of motion", PASS, detail=f"dim ker = {kdim}")
    else:
        ok = kdim == q.kernel_dim
        rec.add("gksl.kernel", "quantum constants of motion", PASS if ok else FAIL, 0.0 if ok else 1.0, 0.0,
                f"dim ker = {kdim} (expected {q.kernel_dim})")
    for j, I in enumerate(q.integrals):
        rec.numeric(f"gksl.integral.{j}", "quantum integral", K.opnorm(K.heisenberg_apply(G, I)), tol["integral"])
        ok = K.commutant_membership(G, I)
        rec.add(f"gksl.commutant.{j}", "commutant relations", PASS if ok else FAIL)
    if q.integrals:
        rep = K.invariant_algebra_check(G, q.integrals, tol["integral"])
        rec.add("gksl.invariant_algebra", "invariant algebra", PASS if rep.passed else FAIL, rep.max_residual,
                tol["integral"], f"dimension {rep.dimension}")
    for k, (A, want) in enumerate(q.adjoint_checks):
        rec.numeric(f"gksl.adjoint.{k}", "Heisenberg adjoint", K.opnorm(K.heisenberg_apply(G, A) - want), tol["zero"])


def _pencil_quantum(d: ModelData, rec: _Recorder, tol: dict) -> None:
    q = d.quantum
    if q is None or q.generator is None or q.partner is None:
        rec.add("pencil-quantum", "bi-Lindblad pencil", SKIP, detail="model has no generator pair")
        return
    G0, G1 = q.generator, q.partner
    rep = K.bilindblad_check(G0, G1, q.integrals, q.lambdas, tol=tol["cp"])
    for p in rep.points:
        res = max(p.integral_residuals, default=0.0)
        status = PASS if p.passed else FAIL
        rec.add(f"pencil-quantum.lambda={p.lam:.4f}", "common quantum integrals", status, res, tol["cp"],
                f"min Choi {min(p.cp_min_eigenvalues.values()):.3e}, trace defect {p.trace_defect:.1e}")
    # affinity of the superoperator in lambda
    M0, M1 = K.to_superoperator(G0).matrix, K.to_superoperator(G1).matrix
    worst = max(K.opnorm(K.to_superoperator(K.convex_combine(G0, G1, lam)).matrix - ((1 - lam) * M0 + lam * M1))
                for lam in q.lambdas)
    rec.numeric("pencil-quantum.affinity", "convex combination", worst, tol["zero"])


def _dephasing(d: ModelData, rec: _Recorder, tol: dict) -> None:
    q = d.quantum
    if q is None or q.generator is None or not q.integrals or q.initial_state is None:
        rec.add("dephasing", "pointer sectors", SKIP, detail="need generator, integrals and initial state")
        return
    S = joint_sectors(q.integrals)
    try:
        tab = coherence_trajectory(q.generator, q.initial_state, S, q.times)
    except SectorPreconditionError as exc:
        rec.add("dephasing.rates", "dephasing rate law", FAIL, detail=str(exc))
        return
    rec.add("dephasing.sectors", "pointer sectors", PASS, detail=f"{len(S)} sectors, dim {S.dim}")
    if not tab.predicted:
        rec.add("dephasing.rates", "dephasing rate law", SKIP, detail="H does not preserve the sectors")
    else:
        rec.numeric("dephasing.rates", "dephasing rate law", tab.max_offdiag_rel_error(), tol["dephasing"])
        rec.numeric("dephasing.diagonal", "populations invariant", tab.max_diagonal_drift(), tol["diagonal"])
    rec.report.coherences[d.name] = tab.to_csv(S.labels())


def _egorov(d: ModelData, rec: _Recorder, tol: dict) -> None:
    q = d.quantum
    if q is None or not q.egorov:
        rec.add("egorov", "Egorov property", SKIP, detail="model has no hbar-sweep cases")
        return
    for case in q.egorov:
        model = EgorovModel(case.H, case.f, tuple(case.lindblads))
        r = egorov_sweep(model, case.hbars, case.N, case.margin, floor=tol["cc1"])
        rec.report.sweeps[case.name] = r
        worst = max(row.ratio for row in r.rows)
        if case.expect == "exact":
            rec.numeric(f"egorov.{case.name}.exact", "exact transport", worst, tol["cc1"])
        else:
            lo, hi = case.slope_range
            ok = r.slope is not None and lo <= r.slope <= hi
            rec.add(f"egorov.{case.name}.slope", "Egorov property", PASS if ok else FAIL, worst, None,
                    f"{r.summary()} (need [{lo:g}, {hi:g}])")

"""Built-in worked examples with their expected values.

Each fixture carries its model data in the config representation plus a
ledger of expected values.  Every ledger entry records where the value comes
from (``published``: stated in the source text; ``derived``: computed here by
an independent route; ``trivial``: direct evaluation) and a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from . import config as C
from .gksl import (GKSLGenerator, commutant_membership, convex_combine, heisenberg_apply, kernel_of_adjoint,
                   opnorm)
from .sectors import coherence_trajectory, functional_calculus, joint_sectors
from .symbolic import expr as E
from .symbolic.contact import (contact_vector_field, dissipated_quantity_check, jacobi_bracket,
                               rank_of_differentials, standard_chart)
from .symbolic.poisson import (PoissonStructure, bihamiltonian_check, build_pencil, homogeneity_degree,
                               jacobiator_on_coordinates, poisson_bracket)
from .weyl import EgorovModel, egorov_sweep

ORIGINS = ("published", "derived", "trivial")

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

HBARS = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]


@dataclass(frozen=True)
class LedgerEntry:
    name: str
    expected: str
    origin: str
    tolerance: float
    check: Callable[[C.ModelData], tuple[bool, float]]

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")


@dataclass(frozen=True)
class LedgerResult:
    entry: LedgerEntry
    passed: bool
    residual: float


@dataclass
class ModelFixture:
    name: str
    anchor: str
    data: C.ModelData
    ledger: list[LedgerEntry] = field(default_factory=list)
    notes: str = ""

    def self_check(self) -> list[LedgerResult]:
        out = []
        for e in self.ledger:
            ok, res = e.check(self.data)
            out.append(LedgerResult(e, bool(ok and res <= e.tolerance), float(res)))
        return out

    def export(self) -> str:
        return C.dumps(self.data)


# small helpers for ledger checks ------------------------------------------

def _exact(e: sp.Expr) -> tuple[bool, float]:
    z = E.is_zero(e)
    return z, 0.0 if z else 1.0


def _all_exact(es: Sequence[sp.Expr]) -> tuple[bool, float]:
    z = all(E.is_zero(e) for e in es)
    return z, 0.0 if z else 1.0


def _close(a: np.ndarray, b: np.ndarray) -> tuple[bool, float]:
    r = opnorm(np.asarray(a) - np.asarray(b))
    return True, r


def _P(d: C.ModelData, name: str) -> PoissonStructure:
    return d.structures[name]


def _settings(suites: list[str]) -> C.SuiteSettings:
    s = C.SuiteSettings()
    s.suites = suites
    return s


# ---------------------------------------------------------------------------
# classical fixtures
# ---------------------------------------------------------------------------

def pn_r4() -> ModelFixture:
    """Poisson-Nijenhuis structure on the cotangent bundle of R^2 and its contact reduction."""
    coords = ("x1", "x2", "p1", "p2")
    L0 = PoissonStructure.from_brackets(coords, {("x1", "p1"): "1", ("x2", "p2"): "1"})
    L1 = PoissonStructure.from_brackets(coords, {("x1", "p1"): "p1", ("x2", "p2"): "p2*x2"})
    ident = set(coords) | {"q", "p", "z", "r"}
    sym = {k: E.parse(v, ident) for k, v in {
        "l1": "p1", "l2": "p2*x2", "H": "p1+p2*x2",
        "h": "z-p", "I1": "p", "I2": "z",
    }.items()}
    # x1 = q, x2 = z, p1 = -r p, p2 = r turns H into the lift r (z - p)
    change = {"x1": E.parse("q", ident), "x2": E.parse("z", ident),
              "p1": E.parse("-r*p", ident), "p2": E.parse("r", ident)}
    data = C.ModelData(
        "pn_r4", coords, (), sym,
        structures={"Lambda": L0, "Lambda1": L1},
        pencil=("Lambda", "Lambda1", "convex"),
        involutions=[("l1", "l2", "Lambda"), ("l1", "l2", "Lambda1")],
        liouville=[sp.Integer(0), sp.Integer(0), E.parse("p1", ident), E.parse("p2", ident)],
        homogeneity={"l1": Fraction(1), "l2": Fraction(1), "H": Fraction(1)},
        restrictions=[("H", change, E.parse("r*z-r*p", ident))],
        contact=C.ContactData(standard_chart(), "h", ["I1", "I2"], rank_at_least=2,
                              rank_functions=["I1", "I2"], correspondence_pairs=20),
        settings=_settings(["pencil", "contact"]),
    )
    delta = data.liouville

    def sum_jacobiator(d):
        P = PoissonStructure.from_brackets(coords, {k: v + _P(d, "Lambda1").brackets().get(k, 0)
                                                    for k, v in _P(d, "Lambda").brackets().items()})
        return _all_exact(jacobiator_on_coordinates(P).values())

    def rank_restricted(d):
        from .symbolic.contact import random_points
        pts = random_points(("q", "p", "z"), 10, seed=d.settings.seed)
        fs = [d.symbol("I1"), d.symbol("I2")]
        ranks = [rank_of_differentials(fs, ("q", "p", "z"), [pt]) for pt in pts]
        return min(ranks) == 2, 0.0 if min(ranks) == 2 else 1.0

    ledger = [
        LedgerEntry("jacobiator Lambda1 = 0", "0", "published", 0.0,
                    lambda d: _all_exact(jacobiator_on_coordinates(_P(d, "Lambda1")).values())),
        LedgerEntry("jacobiator Lambda+Lambda1 = 0", "0", "published", 0.0, sum_jacobiator),
        LedgerEntry("{l1,l2}_Lambda = 0", "0", "published", 0.0,
                    lambda d: _exact(poisson_bracket(_P(d, "Lambda"), d.symbol("l1"), d.symbol("l2")))),
        LedgerEntry("{l1,l2}_Lambda1 = 0", "0", "published", 0.0,
                    lambda d: _exact(poisson_bracket(_P(d, "Lambda1"), d.symbol("l1"), d.symbol("l2")))),
        LedgerEntry("deg l1 = 1", "1", "published", 0.0,
                    lambda d: (homogeneity_degree(delta, coords, d.symbol("l1")) == 1, 0.0)),
        LedgerEntry("deg l2 = 1", "1", "published", 0.0,
                    lambda d: (homogeneity_degree(delta, coords, d.symbol("l2")) == 1, 0.0)),
        LedgerEntry("deg H = 1", "1", "published", 0.0,
                    lambda d: (homogeneity_degree(delta, coords, d.symbol("H")) == 1, 0.0)),
        LedgerEntry("H in (q,p,z,r) = r(z-p)", "r*z - r*p", "derived", 0.0,
                    lambda d: _exact(E.restrict(d.symbol("H"), change) - E.parse("r*z-r*p", ident))),
        LedgerEntry("I1, I2 dissipated for h", "true", "published", 0.0,
                    lambda d: (all(dissipated_quantity_check(d.contact.chart, d.symbol("h"), d.symbol(n))
                                   for n in ("I1", "I2")), 0.0)),
        LedgerEntry("restricted rank 2 at 10 points", "2", "published", 0.0, rank_restricted),
    ]
    return ModelFixture("pn_r4", "PN structure on T*R^2: eigenvalue integrals and contact reduction", data, ledger,
                        notes="The second Hamiltonian log|l1 l2| is outside the expression grammar and is not modelled.")


def linear_contact() -> ModelFixture:
    """Linear contact Hamiltonian h = z - p on the standard chart."""
    chart = standard_chart()
    ident = {"q", "p", "z", "r"}
    sym = {k: E.parse(v, ident) for k, v in {"h": "z-p", "I0": "z-p", "I1": "exp(-z)"}.items()}
    flow = [E.parse(t, ident) for t in ("1", "p", "z")]
    data = C.ModelData(
        "linear_contact", (), (), sym,
        contact=C.ContactData(chart, "h", ["I0", "I1"], expected_flow=flow,
                              expected_flow_action={"I1": E.parse("exp(-z)", ident)},
                              rank_at_least=2, rank_functions=["h", "I1"], correspondence_pairs=20),
        settings=_settings(["contact"]),
    )

    def flow_check(d):
        X = contact_vector_field(d.contact.chart, d.symbol("h"))
        return _all_exact([a - b for a, b in zip(X, flow)])

    def flow_action(d):
        from .symbolic.contact import apply_field
        X = contact_vector_field(d.contact.chart, d.symbol("h"))
        return _exact(apply_field(X, d.contact.chart, d.symbol("I1")) - d.symbol("I1"))

    ledger = [
        LedgerEntry("contact flow = (1,p,z)", "(1, p, z)", "published", 0.0, flow_check),
        LedgerEntry("{exp(-z), h}_alpha = 0", "0", "published", 0.0,
                    lambda d: _exact(jacobi_bracket(d.contact.chart, d.symbol("I1"), d.symbol("h")))),
        LedgerEntry("X_h(exp(-z)) = exp(-z)", "exp(-z)", "published", 0.0, flow_action),
        LedgerEntry("rank d(h, exp(-z)) at origin = 2", "2", "published", 0.0,
                    lambda d: (rank_of_differentials([d.symbol("h"), d.symbol("I1")], chart.coordinates,
                                                     [{"q": 0.0, "p": 0.0, "z": 0.0}]) == 2, 0.0)),
    ]
    return ModelFixture("linear_contact", "Linear contact Hamiltonian h = z - p", data, ledger,
                        notes="Under the Jacobi bracket used here {exp(-z), z-p} = (1+z) exp(-z) and "
                              "X_h(exp(-z)) = -z exp(-z); the two published identities do not hold.")


def euler_pencil() -> ModelFixture:
    """Lie-Poisson pencil of the Euler-top-type system on so(3)*."""
    coords = ("m1", "m2", "m3")
    P0 = PoissonStructure.from_brackets(coords, {("m1", "m2"): "-m3", ("m1", "m3"): "m2", ("m2", "m3"): "-m1"})
    P1 = PoissonStructure.from_brackets(coords, {("m1", "m2"): "-m2", ("m1", "m3"): "m3", ("m2", "m3"): "-2*m1"})
    ident = set(coords) | {"r"}
    sym = {k: E.parse(v, ident) for k, v in {
        "C0": "-(m1^2+m2^2+m3^2)/2",
        "C1": "m1^2+m2*m3",
        "I0S": "sqrt(m1^2+m2^2+m3^2)",
        "I1S": "sqrt(m1^2+m2*m3)",
    }.items()}
    field_ = [E.parse(t, ident) for t in ("m2^2-m3^2", "2*m1*m3-m1*m2", "m1*m3-2*m1*m2")]
    data = C.ModelData(
        "euler_pencil", coords, (), sym,
        structures={"pi0": P0, "pi1": P1},
        pencil=("pi0", "pi1", "convex"),
        casimirs={"pi0": ["C0"], "pi1": ["C1"]},
        bihamiltonian=[("pi0", "C1"), ("pi1", "C0")],
        expected_field=field_,
        involutions=[("C0", "C1", "pencil"), ("I0S", "I1S", "pi0")],
        liouville=[E.parse(c, ident) for c in coords],
        homogeneity={"C0": Fraction(2), "C1": Fraction(2), "I0S": Fraction(1), "I1S": Fraction(1)},
        restrictions=[("I0S", {"m1": sp.Integer(1)}, E.parse("sqrt(1+m2^2+m3^2)", ident)),
                      ("I1S", {"m1": sp.Integer(1)}, E.parse("sqrt(1+m2*m3)", ident))],
        settings=_settings(["pencil"]),
    )
    delta = data.liouville

    def pencil_jac(mode):
        def check(d):
            P = build_pencil(_P(d, "pi0"), _P(d, "pi1"), mode)
            return _all_exact(jacobiator_on_coordinates(P).values())
        return check

    def casimir(sname, cname):
        def check(d):
            P = _P(d, sname)
            return _all_exact([poisson_bracket(P, x, d.symbol(cname)) for x in P.symbols()])
        return check

    def bih(d):
        res = bihamiltonian_check(_P(d, "pi0"), d.symbol("C1"), _P(d, "pi1"), d.symbol("C0"))
        ok = res.ok and all(E.is_zero(a - b) for a, b in zip(res.field, field_))
        return ok, 0.0 if ok else 1.0

    def involution(d):
        P = build_pencil(_P(d, "pi0"), _P(d, "pi1"), "convex")
        return _exact(poisson_bracket(P, d.symbol("C0"), d.symbol("C1")))

    ledger = [
        LedgerEntry("jacobiator of convex pencil = 0", "0", "published", 0.0, pencil_jac("convex")),
        LedgerEntry("jacobiator of difference pencil = 0", "0", "derived", 0.0, pencil_jac("difference")),
        LedgerEntry("C0 Casimir of pi0", "0", "published", 0.0, casimir("pi0", "C0")),
        LedgerEntry("C1 Casimir of pi1", "0", "published", 0.0, casimir("pi1", "C1")),
        LedgerEntry("pi0#dC1 = pi1#dC0 = X", "(m2^2-m3^2, 2m1m3-m1m2, m1m3-2m1m2)", "derived", 0.0, bih),
        LedgerEntry("{C0,C1}_lam = 0", "0", "derived", 0.0, involution),
        LedgerEntry("deg C1 = 2", "2", "published", 0.0,
                    lambda d: (homogeneity_degree(delta, coords, d.symbol("C1")) == 2, 0.0)),
        LedgerEntry("deg I0S = 1", "1", "published", 0.0,
                    lambda d: (homogeneity_degree(delta, coords, d.symbol("I0S")) == 1, 0.0)),
        LedgerEntry("I0S at m1=1", "sqrt(1+m2^2+m3^2)", "published", 0.0,
                    lambda d: _exact(E.restrict(d.symbol("I0S"), {"m1": 1}) - E.parse("sqrt(1+m2^2+m3^2)", ident))),
    ]
    return ModelFixture("euler_pencil", "Euler-top Lie-Poisson pencil on so(3)*", data, ledger)


# ---------------------------------------------------------------------------
# quantum fixtures
# ---------------------------------------------------------------------------

def qubit_dephasing(omega: float = 1.0, gamma: float = 0.5) -> ModelFixture:
    """Pure dephasing qubit: H = hbar omega/2 sigma_z, L = sqrt(gamma) sigma_z."""
    hb = 1.0
    G = GKSLGenerator(hb * omega / 2 * SZ, (np.sqrt(gamma) * SZ,), hb)
    plus = np.full((2, 2), 0.5, dtype=complex)
    q = C.QuantumData(G, integrals=[SZ.copy()], initial_state=plus, times=[0.1, 0.5, 1.0, 2.0], kernel_dim=2,
                      adjoint_checks=[(SZ.copy(), np.zeros((2, 2), dtype=complex)),
                                      (SX.copy(), -2 * gamma * SX - omega * SY)])
    data = C.ModelData("qubit_dephasing", quantum=q, settings=_settings(["gksl", "dephasing"]))

    def closed_form(d):
        from .gksl import evolve
        worst = 0.0
        for t in np.linspace(0.0, 5.0, 51):
            want = np.exp(-2 * gamma * t) * (np.cos(omega * t) * SX - np.sin(omega * t) * SY)
            worst = max(worst, opnorm(evolve(d.quantum.generator, SX, float(t), "heisenberg") - want))
        return True, worst

    ledger = [
        LedgerEntry("L+(sigma_z) = 0", "0", "published", 1e-12,
                    lambda d: _close(heisenberg_apply(d.quantum.generator, SZ), 0 * SZ)),
        LedgerEntry("L+(sigma_x) = -2 gamma sigma_x - omega sigma_y", "-2g sx - w sy", "derived", 1e-12,
                    lambda d: _close(heisenberg_apply(d.quantum.generator, SX), -2 * gamma * SX - omega * SY)),
        LedgerEntry("sigma_x(t) closed form on [0,5]", "e^{-2gt}(cos wt sx - sin wt sy)", "published", 1e-9,
                    closed_form),
        LedgerEntry("dim ker L+ = 2", "2", "published", 0.0,
                    lambda d: (len(kernel_of_adjoint(d.quantum.generator)) == 2, 0.0)),
    ]
    return ModelFixture("qubit_dephasing", "Pure dephasing qubit", data, ledger)


def qubit_pencil(omega0: float = 1.0, omega1: float = 2.0, gamma: float = 0.5) -> ModelFixture:
    """Bi-Lindblad pencil between a unitary qubit and a dephasing qubit."""
    hb = 1.0
    G0 = GKSLGenerator(hb * omega0 / 2 * SZ, (), hb)
    G1 = GKSLGenerator(hb * omega1 / 2 * SZ, (np.sqrt(gamma) * SZ,), hb)
    q = C.QuantumData(G0, G1, integrals=[SZ.copy()], lambdas=[0.0, 0.25, 0.5, 0.75, 1.0],
                      initial_state=np.full((2, 2), 0.5, dtype=complex), kernel_dim=2,
                      adjoint_checks=[(SX.copy(), -omega0 * SY)])
    data = C.ModelData("qubit_pencil", quantum=q, settings=_settings(["gksl", "pencil-quantum"]))

    def bl(d):
        from .gksl import bilindblad_check
        r = bilindblad_check(d.quantum.generator, d.quantum.partner, d.quantum.integrals, [0.0, 0.5, 1.0])
        return r.passed, max(max(p.integral_residuals) for p in r.points)

    def half(d):
        G = convex_combine(d.quantum.generator, d.quantum.partner, 0.5)
        if len(G.lindblads) != 1:
            return False, 1.0
        return _close(G.lindblads[0], np.sqrt(gamma / 2) * SZ)

    ledger = [
        LedgerEntry("bi-Lindblad at lam in {0, 1/2, 1}", "pass", "published", 1e-12, bl),
        LedgerEntry("lam=1/2 has one Lindblad sqrt(gamma/2) sigma_z", "sqrt(g/2) sz", "published", 1e-14, half),
        LedgerEntry("L0+(sigma_x) = -omega0 sigma_y", "-w0 sy", "derived", 1e-12,
                    lambda d: _close(heisenberg_apply(d.quantum.generator, SX), -omega0 * SY)),
    ]
    return ModelFixture("qubit_pencil", "Bi-Lindblad qubit pencil", data, ledger)


EULER_GRID = tuple((a, b) for a in (-1, 0, 1) for b in (-1, 0, 1))


def euler_quantum(grid: Sequence[tuple[int, int]] = EULER_GRID, gammas: Sequence[float] = (0.5, 0.25, 0.1),
                  phis: Sequence[Callable] | None = None) -> ModelFixture:
    """Diagonal quantum integrals sampling the Euler invariants on C = {m1 = 1}.

    The spectrum of (I0, I1) is (sqrt(1+m2^2+m3^2), sqrt(1+m2 m3)) over the grid;
    one basis vector per grid point.  The rates and channel functions are
    arbitrary illustrative choices.
    """
    if phis is None:
        phis = (lambda v: v[0], lambda v: v[1], lambda v: v[0] * v[1])
    if len(phis) != len(gammas):
        raise ValueError("need one channel function per rate")
    I0 = np.diag([np.sqrt(1 + a * a + b * b) for a, b in grid]).astype(complex)
    I1 = np.diag([np.sqrt(1 + a * b) for a, b in grid]).astype(complex)
    S = joint_sectors([I0, I1])
    Ls = tuple(np.sqrt(g) * functional_calculus(S, phi) for g, phi in zip(gammas, phis))
    G = GKSLGenerator(I0, Ls, 1.0)
    G1 = GKSLGenerator(I1, Ls, 1.0)
    d = len(grid)
    rho0 = np.full((d, d), 1.0 / d, dtype=complex)
    q = C.QuantumData(G, G1, integrals=[I0, I1], initial_state=rho0, times=[0.1, 0.5, 1.0, 2.0])
    data = C.ModelData("euler_quantum", quantum=q, settings=_settings(["gksl", "pencil-quantum", "dephasing"]))

    def commutant(d_):
        ok = all(commutant_membership(d_.quantum.generator, I) for I in d_.quantum.integrals)
        return ok, max(opnorm(heisenberg_apply(d_.quantum.generator, I)) for I in d_.quantum.integrals)

    def dephasing(d_):
        qd = d_.quantum
        tab = coherence_trajectory(qd.generator, qd.initial_state, joint_sectors(qd.integrals), qd.times)
        return tab.predicted, tab.max_offdiag_rel_error()

    def origin(d_):
        k = list(grid).index((0, 0))
        vals = (I0[k, k].real, I1[k, k].real)
        return True, abs(vals[0] - 1) + abs(vals[1] - 1)

    ledger = [
        LedgerEntry("I0, I1 in the commutant", "true", "published", 1e-10, commutant),
        LedgerEntry("coherence decay matches rate law", "relative 1e-8", "published", 1e-8, dephasing),
    ]
    if (0, 0) in grid:
        ledger.append(LedgerEntry("grid point (0,0) has value (1,1)", "(1, 1)", "trivial", 1e-15, origin))
    return ModelFixture("euler_quantum", "Euler-top dephasing model via joint functional calculus", data, ledger)


def oscillator(gamma: float = 0.5) -> ModelFixture:
    """Harmonic oscillator with L = sqrt(gamma) Op(H): the hbar-sweep model."""
    H = "(x^2+xi^2)/2"
    cases = [
        C.EgorovCase("f=x", H, "x", [(H, gamma)], list(HBARS), 60, 6, "slope", (1.8, 2.2)),
        C.EgorovCase("f=H", H, H, [(H, gamma)], list(HBARS), 60, 6, "exact"),
    ]
    data = C.ModelData("oscillator", quantum=C.QuantumData(egorov=cases), settings=_settings(["egorov"]))

    def dissipator_law(d):
        from .weyl import dissipator_on_interior, weyl_quantize, mask_interior
        model = EgorovModel(H, "x", ((H, gamma),))
        worst = 0.0
        for h in HBARS:
            X = mask_interior(weyl_quantize("x", 60, h).matrix, 6)
            worst = max(worst, opnorm(dissipator_on_interior(model, 60, h, 6) + gamma * h * h / 2 * X))
        return True, worst

    def slope(d):
        r = egorov_sweep(EgorovModel(H, "x", ((H, gamma),)), HBARS, 60, 6)
        return r.slope is not None and 1.8 <= r.slope <= 2.2, 0.0

    def exact(d):
        r = egorov_sweep(EgorovModel(H, H, ((H, gamma),)), HBARS, 60, 6)
        return True, max(row.ratio for row in r.rows)

    ledger = [
        LedgerEntry("D(X) = -(gamma hbar^2/2) X on the interior", "exact", "derived", 1e-10, dissipator_law),
        LedgerEntry("log-log slope in [1.8, 2.2]", "2", "derived", 0.0, slope),
        LedgerEntry("f = H residual below 1e-10", "0", "derived", 1e-10, exact),
    ]
    return ModelFixture("oscillator", "Egorov property for the damped harmonic oscillator", data, ledger)


REGISTRY: dict[str, Callable[[], ModelFixture]] = {
    "euler_pencil": euler_pencil,
    "euler_quantum": euler_quantum,
    "linear_contact": linear_contact,
    "oscillator": oscillator,
    "pn_r4": pn_r4,
    "qubit_dephasing": qubit_dephasing,
    "qubit_pencil": qubit_pencil,
}


def get(name: str) -> ModelFixture:
    try:
        return REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown model {name!r}; known: {', '.join(sorted(REGISTRY))}") from None

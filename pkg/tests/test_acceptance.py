"""The twelve acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are collected in the
"acceptance criteria" section of the pytest terminal summary.
"""

import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import sympy as sp

from bilindblad import gksl as K
from bilindblad import models
from bilindblad.moyal import PhaseSymbol, dirac_residual, hbar, moyal_bracket, star_product, x, xi
from bilindblad.sectors import coherence_trajectory, joint_sectors
from bilindblad.symbolic import expr as E
from bilindblad.symbolic.contact import (apply_field, contact_vector_field, correspondence_residual, jacobi_bracket,
                                         random_points, rank_of_differentials, standard_chart)
from bilindblad.symbolic.poisson import (PoissonStructure, bihamiltonian_check, build_pencil, homogeneity_degree,
                                         jacobiator_on_coordinates, poisson_bracket)
from bilindblad.weyl import EgorovModel, dissipator_on_interior, egorov_sweep, mask_interior, weyl_quantize

DATA = Path(__file__).parent / "data"
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
m1, m2, m3, lam = sp.symbols("m1 m2 m3 lam")


def expanded_zero(e) -> bool:
    """Exact polynomial zero: expansion alone, no sampling."""
    return sp.expand(e) == 0


def euler():
    d = models.euler_pencil().data
    return d.structures["pi0"], d.structures["pi1"], d.symbol("C0"), d.symbol("C1")


# 1 -------------------------------------------------------------------------

def test_c01_euler_pencil_compatibility(criterion):
    pi0, pi1, _, _ = euler()
    out = []
    for mode in ("convex", "difference"):
        t0 = time.perf_counter()
        P = build_pencil(pi0, pi1, mode)
        ok = all(expanded_zero(v) for v in jacobiator_on_coordinates(P).values())
        out.append((mode, ok, time.perf_counter() - t0))
    # the convex pencil is the printed one
    P = build_pencil(pi0, pi1, "convex")
    printed = {(0, 1): (lam - 1) * m3 - lam * m2, (0, 2): (1 - lam) * m2 + lam * m3, (1, 2): -(1 + lam) * m1}
    same = all(expanded_zero(P.component(i, j) - v) for (i, j), v in printed.items())
    ok = all(o and t < 1.0 for _, o, t in out) and same
    criterion("C1 Euler pencil compatibility", ok,
              ", ".join(f"{m}: jac=0 {o}, {t:.2f}s" for m, o, t in out) + f", matches printed pencil {same}")


# 2 -------------------------------------------------------------------------

def test_c02_casimirs_and_bihamiltonian_field(criterion):
    pi0, pi1, C0, C1 = euler()
    cas = all(expanded_zero(poisson_bracket(pi0, v, C0)) for v in (m1, m2, m3)) and \
        all(expanded_zero(poisson_bracket(pi1, v, C1)) for v in (m1, m2, m3))
    res = bihamiltonian_check(pi0, C1, pi1, C0)
    diff_zero = all(expanded_zero(r) for r in res.residual)
    # oracle: expand pi0^# dC1 by hand from the coordinate brackets
    X = [m2**2 - m3**2, 2 * m1 * m3 - m1 * m2, m1 * m3 - 2 * m1 * m2]
    dC1 = [2 * m1, m3, m2]
    br = pi0.matrix()
    hand = [sp.expand(sum(br[i, j] * dC1[j] for j in range(3))) for i in range(3)]
    field_ok = all(expanded_zero(a - b) for a, b in zip(res.field, X)) and all(
        expanded_zero(a - b) for a, b in zip(hand, X))
    criterion("C2 Casimirs and bi-Hamiltonian field", cas and diff_zero and field_ok,
              f"casimirs {cas}, pi0#dC1-pi1#dC0=0 {diff_zero}, X matches {field_ok}")


# 3 -------------------------------------------------------------------------

def test_c03_casimirs_commute_along_pencil(criterion):
    pi0, pi1, C0, C1 = euler()
    ok = all(expanded_zero(poisson_bracket(build_pencil(pi0, pi1, m), C0, C1)) for m in ("convex", "difference"))
    criterion("C3 {C0,C1}_lam = 0 identically in lam", ok)


# 4 -------------------------------------------------------------------------

def test_c04_pn_r4(criterion):
    fx = models.pn_r4()
    d = fx.data
    L0, L1 = d.structures["Lambda"], d.structures["Lambda1"]
    summed = PoissonStructure.from_brackets(
        d.coordinates, {k: v + L1.brackets().get(k, 0) for k, v in L0.brackets().items()})
    compat = all(expanded_zero(v) for v in jacobiator_on_coordinates(summed).values())
    l1, l2 = d.symbol("l1"), d.symbol("l2")
    inv = expanded_zero(poisson_bracket(L0, l1, l2)) and expanded_zero(poisson_bracket(L1, l1, l2))
    degs = (homogeneity_degree(d.liouville, d.coordinates, l1), homogeneity_degree(d.liouville, d.coordinates, l2))
    coords = d.contact.chart.coordinates
    ranks = [rank_of_differentials([d.symbol("I1"), d.symbol("I2")], coords, [pt])
             for pt in random_points(coords, 10, seed=0)]
    ok = compat and inv and degs == (1, 1) and min(ranks) == 2
    criterion("C4 PN structure on R^4", ok,
              f"jac(L+L1)=0 {compat}, involution {inv}, degrees {tuple(map(str, degs))}, ranks {set(ranks)}")


# 5 -------------------------------------------------------------------------
# Split in four.  5b and 5c are stated identities that are false under the
# Jacobi bracket {f,g} = Lambda(df,dg) + f R(g) - g R(f) and the flow
# (1, p, z); they are computed faithfully and reported as failures.

def test_c05a_linear_contact_flow(criterion):
    c = standard_chart()
    q, p, z = c.symbols()
    X = contact_vector_field(c, z - p)
    ok = all(expanded_zero(a - b) for a, b in zip(X, (1, p, z)))
    criterion("C5a contact flow of h = z - p is (1, p, z)", ok, str(tuple(X)))


def test_c05b_exp_z_in_involution(criterion):
    c = standard_chart()
    q, p, z = c.symbols()
    b = jacobi_bracket(c, sp.exp(-z), z - p)
    criterion("C5b {exp(-z), z - p}_alpha = 0", E.is_zero(b), f"bracket = {E.to_text(E.simplify(b))}")


def test_c05c_flow_action_on_exp_z(criterion):
    c = standard_chart()
    q, p, z = c.symbols()
    X = contact_vector_field(c, z - p)
    v = apply_field(X, c, sp.exp(-z))
    criterion("C5c X_h(exp(-z)) = exp(-z)", E.is_zero(v - sp.exp(-z)), f"X_h(exp(-z)) = {E.to_text(v)}")


def test_c05d_jacobi_poisson_correspondence(criterion):
    c = standard_chart()
    rng = random.Random(0)
    res = [correspondence_residual(c, E.random_polynomial(rng, c.coordinates), E.random_polynomial(rng, c.coordinates))
           for _ in range(20)]
    criterion("C5d correspondence residual = 0 on 20 random pairs", all(expanded_zero(r) for r in res))


# 6 -------------------------------------------------------------------------

def test_c06_qubit_dephasing(criterion):
    t0 = time.perf_counter()
    g, w = 0.5, 1.0
    G = models.qubit_dephasing(w, g).data.quantum.generator
    kdim = len(K.kernel_of_adjoint(G, 1e-9))
    err = 0.0
    for t in np.linspace(0.0, 5.0, 101):
        want = np.exp(-2 * g * t) * (np.cos(w * t) * SX - np.sin(w * t) * SY)
        err = max(err, K.opnorm(K.evolve(G, SX, float(t), "heisenberg") - want))
    choi = min(K.choi_min_eigenvalue(K.propagator(G, t)) for t in (0.1, 1.0, 10.0))
    dt = time.perf_counter() - t0
    ok = kdim == 2 and err < 1e-9 and choi >= -1e-10 and dt < 1.0
    criterion("C6 qubit dephasing", ok, f"ker dim {kdim}, sigma_x(t) err {err:.1e}, min Choi {choi:.1e}, {dt:.2f}s")


# 7 -------------------------------------------------------------------------

def test_c07_qubit_bilindblad_pencil(criterion):
    q = models.qubit_pencil().data.quantum
    lams = (0.0, 0.25, 0.5, 0.75, 1.0)
    rep = K.bilindblad_check(q.generator, q.partner, [SZ], lams, tol=1e-10)
    integral = max(K.opnorm(K.heisenberg_apply(K.convex_combine(q.generator, q.partner, l), SZ)) for l in lams)
    M0, M1 = K.to_superoperator(q.generator).matrix, K.to_superoperator(q.partner).matrix
    aff = max(K.opnorm(K.to_superoperator(K.convex_combine(q.generator, q.partner, l)).matrix
                       - ((1 - l) * M0 + l * M1)) for l in lams)
    ok = rep.passed and integral < 1e-12 and aff < 1e-12
    criterion("C7 bi-Lindblad qubit pencil", ok,
              f"CPTP all lam {rep.passed}, |L+(sz)| {integral:.1e}, affinity {aff:.1e}")


# 8 -------------------------------------------------------------------------

def test_c08_dephasing_rate_law(criterion):
    t0 = time.perf_counter()
    q = models.euler_quantum().data.quantum
    S = joint_sectors(q.integrals)
    tab = coherence_trajectory(q.generator, q.initial_state, S, [0.1, 0.5, 1.0, 2.0])
    rel, diag = tab.max_offdiag_rel_error(), tab.max_diagonal_drift()
    dt = time.perf_counter() - t0
    ok = (q.generator.dim == 9 and len(q.generator.lindblads) == 3 and tab.predicted
          and rel < 1e-8 and diag < 1e-10 and dt < 10.0)
    criterion("C8 dephasing rate law (Euler quantum fixture)", ok,
              f"dim 9, {len(S)} distinct sectors, rel err {rel:.1e}, diagonal drift {diag:.1e}, {dt:.2f}s")


# 9 -------------------------------------------------------------------------

def test_c09_moyal_dirac(criterion):
    monos = [x**i * xi**j for i in range(3) for j in range(3 - i)]
    dirac = all(dirac_residual(a, b).is_zero for a in monos for b in monos)
    cubic = moyal_bracket(x**3, xi**3) == PhaseSymbol(9 * x**2 * xi**2 - sp.Rational(3, 2) * hbar**2)
    rng = random.Random(0)

    def rand():
        e = 0
        for _ in range(3):
            i = rng.randint(0, 3)
            j = rng.randint(0, 3 - i)
            e += (sp.Rational(rng.randint(-5, 5), rng.randint(1, 4)) + sp.I * rng.randint(-2, 2)) * x**i * xi**j
        return PhaseSymbol(e)

    assoc = True
    for _ in range(20):
        a, b, c = rand(), rand(), rand()
        assoc &= star_product(star_product(a, b), c) == star_product(a, star_product(b, c))
    criterion("C9 Moyal bracket and Dirac residual", dirac and cubic and assoc,
              f"dirac deg<=2 {dirac}, x^3/xi^3 {cubic}, associativity x20 {assoc}")


# 10 ------------------------------------------------------------------------

def test_c10_egorov_oscillator(criterion):
    t0 = time.perf_counter()
    H, g = "(x^2+xi^2)/2", 0.5
    hbars = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]
    model = EgorovModel(H, "x", ((H, g),))
    dis = 0.0
    for h in hbars:
        X = mask_interior(weyl_quantize("x", 60, h).matrix, 6)
        dis = max(dis, K.opnorm(dissipator_on_interior(model, 60, h, 6) + g * h * h / 2 * X))
    sweep = egorov_sweep(model, hbars, 60, 6)
    exact = egorov_sweep(EgorovModel(H, H, ((H, g),)), hbars, 60, 6)
    cc1 = max(r.ratio for r in exact.rows)
    dt = time.perf_counter() - t0
    ok = dis < 1e-10 and sweep.slope is not None and 1.8 <= sweep.slope <= 2.2 and cc1 < 1e-10 and dt < 30
    criterion("C10 Egorov criterion on the oscillator", ok,
              f"D(X) err {dis:.1e}, {sweep.summary()}, f=H residual {cc1:.1e}, {dt:.2f}s")


# 11 ------------------------------------------------------------------------

def test_c11_duality_and_structure(criterion):
    rng = np.random.default_rng(2024)
    G = K.random_generator(rng, 6, n_lindblads=3)
    dual = max(K.adjoint_pairing_residual(G, K.random_density(rng, 6), K.random_matrix(rng, 6)) for _ in range(100))
    trace = herm = 0.0
    for _ in range(20):
        out = K.lindblad_apply(G, K.random_density(rng, 6))
        trace = max(trace, abs(np.trace(out)))
        herm = max(herm, K.opnorm(out - K.dag(out)))
    unital = K.opnorm(K.heisenberg_apply(G, np.eye(6)))
    P = K.propagator
    semi = max(K.opnorm(P(G, s).matrix @ P(G, t).matrix - P(G, s + t).matrix) for s, t in ((0.1, 0.2), (0.5, 1.5)))
    ok = dual < 1e-12 and trace < 1e-9 and herm < 1e-9 and unital < 1e-9 and semi < 1e-9
    criterion("C11 duality and structure properties", ok,
              f"pairing {dual:.1e}, trace {trace:.1e}, hermiticity {herm:.1e}, unit {unital:.1e}, semigroup {semi:.1e}")


# 12 ------------------------------------------------------------------------

def _cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "bilindblad.cli", *map(str, args)], capture_output=True, text=True,
                          cwd=cwd)


def test_c12_cli_determinism_and_exit_codes(criterion, tmp_path):
    a = _cli("verify", "--model", "euler_pencil", "--seed", 7, "--out", tmp_path / "a")
    b = _cli("verify", "--model", "euler_pencil", "--seed", 7, "--out", tmp_path / "b")
    same = (tmp_path / "a" / "report.txt").read_bytes() == (tmp_path / "b" / "report.txt").read_bytes()
    codes = {name: _cli("verify", "--config", DATA / name).returncode
             for name in ("euler_pass.json", "euler_fail.json", "bad_bracket.json")}
    ok = same and a.returncode == b.returncode == 0 and codes == {
        "euler_pass.json": 0, "euler_fail.json": 1, "bad_bracket.json": 2}
    criterion("C12 CLI determinism and exit codes", ok, f"identical reports {same}, exit codes {codes}")

import random

import pytest
import sympy as sp

from bilindblad.symbolic import expr as E
from bilindblad.symbolic.contact import (UnsupportedChartError, apply_field, chart_from_form, contact_nondegeneracy,
                                         contact_vector_field, correspondence_residual, dissipated_quantity_check,
                                         homogeneous_lift, jacobi_bracket, random_points, rank_of_differentials,
                                         reeb_apply, standard_chart, symplectization)
from bilindblad.symbolic.poisson import ChartError, jacobiator_on_coordinates

q, p, z, r = sp.symbols("q p z r")


@pytest.fixture
def chart():
    return standard_chart()


def test_standard_chart_reeb(chart):
    a_r, iota = chart.reeb_residuals()
    assert a_r == 0 and all(v == 0 for v in iota)
    assert reeb_apply(chart, z**2 + q) == 2 * z


def test_coordinate_jacobi_brackets(chart):
    # hand values: Lambda^{qp} = 1, Lambda^{pz} = -p, R = d/dz
    assert jacobi_bracket(chart, q, p) == 1
    assert E.is_zero(jacobi_bracket(chart, p, z))
    assert E.is_zero(jacobi_bracket(chart, q, z) - q)
    assert E.is_zero(jacobi_bracket(chart, sp.Integer(1), z * p) - p)


def test_form_derived_chart_matches_standard(chart):
    other = chart_from_form(("q", "p", "z"), ["-p", "0", "1"])
    assert other.standard  # recognized, so the explicit flow formula applies
    assert all(E.is_zero(a - b) for a, b in zip(other.reeb, chart.reeb))
    for i in range(3):
        for j in range(3):
            assert E.is_zero(other.lam(i, j) - chart.lam(i, j))


def test_nonstandard_form_reeb_and_nondegeneracy():
    c = chart_from_form(("x", "y", "z"), ["y", "0", "1"])  # dz + y dx
    a_r, iota = c.reeb_residuals()
    assert E.is_zero(a_r) and all(E.is_zero(v) for v in iota)
    nd = contact_nondegeneracy(c, random_points(c.coordinates, 5, seed=1))
    assert nd.ok and nd.coefficient == -1


def test_degenerate_form_is_not_contact():
    with pytest.raises(ChartError):
        chart_from_form(("x", "y", "z"), ["0", "0", "1"])


def test_contact_flow_of_linear_hamiltonian(chart):
    X = contact_vector_field(chart, z - p)
    assert [sp.expand(v) for v in X] == [1, p, z]


def test_flow_bracket_relation(chart):
    # X_h(f) = {h, f}_alpha + f R(h) for any f, h
    rng = random.Random(3)
    for _ in range(5):
        h = E.random_polynomial(rng, ["q", "p", "z"])
        f = E.random_polynomial(rng, ["q", "p", "z"])
        X = contact_vector_field(chart, h)
        lhs = apply_field(X, chart, f)
        assert E.is_zero(lhs - jacobi_bracket(chart, h, f) - f * reeb_apply(chart, h))


def test_dissipated_quantities_of_linear_hamiltonian(chart):
    h = z - p
    assert dissipated_quantity_check(chart, h, p)
    assert dissipated_quantity_check(chart, h, z)
    # exp(-z) is not in Jacobi involution with z - p: {exp(-z), z-p} = (1+z) exp(-z)
    b = jacobi_bracket(chart, sp.exp(-z), h)
    assert E.is_zero(b - (1 + z) * sp.exp(-z))
    assert not dissipated_quantity_check(chart, h, sp.exp(-z))


def test_flow_not_available_off_standard_chart():
    c = chart_from_form(("x", "y", "z"), ["y", "0", "1"])
    with pytest.raises(UnsupportedChartError):
        contact_vector_field(c, sp.Symbol("z"))


def test_symplectization_is_poisson(chart):
    P = symplectization(chart)
    assert P.coordinates == ("q", "p", "z", "r")
    assert all(E.is_zero(v) for v in jacobiator_on_coordinates(P).values())


@pytest.mark.parametrize("alpha", [["-p", "0", "1"], ["y", "0", "1"]])
def test_correspondence_on_random_pairs(alpha):
    coords = ("q", "p", "z") if alpha[0] == "-p" else ("x", "y", "z")
    c = chart_from_form(coords, alpha)
    rng = random.Random(11)
    for _ in range(5):
        f = E.random_polynomial(rng, coords)
        g = E.random_polynomial(rng, coords)
        assert E.is_zero(correspondence_residual(c, f, g))


def test_lift_sign():
    assert homogeneous_lift(q) == r * q
    assert homogeneous_lift(q, sign=-1) == -r * q
    with pytest.raises(ValueError):
        homogeneous_lift(q, sign=2)


def test_rank_of_differentials():
    coords = ("q", "p", "z")
    assert rank_of_differentials([z - p, sp.exp(-z)], coords, [{"q": 0.0, "p": 0.0, "z": 0.0}]) == 2
    assert rank_of_differentials([p, 2 * p], coords, random_points(coords, 3)) == 1

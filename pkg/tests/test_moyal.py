import random

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from bilindblad.moyal import (PhaseSymbol, dirac_residual, dissipator_symbol, dissipator_symbol_residual, hbar,
                              moyal_bracket, poisson, star_product, x, xi)


def S(e):
    return PhaseSymbol(e)


def random_symbol(rng: random.Random, degree: int = 3) -> PhaseSymbol:
    e = 0
    for _ in range(3):
        i = rng.randint(0, degree)
        j = rng.randint(0, degree - i)
        c = sp.Rational(rng.randint(-5, 5), rng.randint(1, 4)) + sp.I * rng.randint(-2, 2)
        e += c * x**i * xi**j
    return S(e)


def test_canonical_commutator():
    assert star_product(x, xi) - star_product(xi, x) == S(sp.I * hbar)
    assert poisson(x, xi) == S(1)
    assert moyal_bracket(x, xi) == S(1)


def test_star_product_low_order_terms():
    assert star_product(x, xi) == S(x * xi + sp.I * hbar / 2)
    assert star_product(x**2, xi**2) == S(x**2 * xi**2 + 2 * sp.I * hbar * x * xi - hbar**2 / 2)


def test_cubic_moyal_bracket():
    assert moyal_bracket(x**3, xi**3) == S(9 * x**2 * xi**2 - sp.Rational(3, 2) * hbar**2)


def test_dirac_residual_vanishes_up_to_quadratic():
    monos = [x**i * xi**j for i in range(3) for j in range(3 - i)]
    for a in monos:
        for b in monos:
            assert dirac_residual(a, b).is_zero


def test_dirac_residual_is_order_hbar_squared():
    r = dirac_residual(x**3, xi**3)
    assert r.hbar_coefficient(0).is_zero and r.hbar_coefficient(1).is_zero
    assert not r.hbar_coefficient(2).is_zero


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_associativity(seed):
    rng = random.Random(seed)
    a, b, c = (random_symbol(rng) for _ in range(3))
    assert star_product(star_product(a, b), c) == star_product(a, star_product(b, c))


def test_star_unit_and_conjugation():
    a = S(x**2 * xi + sp.I * x)
    assert star_product(1, a) == a == star_product(a, 1)
    # conj(a * b) = conj(b) * conj(a)
    b = S(xi**2 - 3 * x)
    assert star_product(a, b).conjugate() == star_product(b.conjugate(), a.conjugate())


def test_grammar_and_validation():
    assert S("x^2 + xi*hbar") == S(x**2 + xi * hbar)
    with pytest.raises(ValueError):
        S("exp(x)")
    with pytest.raises(ValueError):
        S("y + x")


def test_dissipator_symbol_real_lindblad_has_no_first_order_part():
    for l in (x, x**2 + xi, xi**2):
        for f in (x, xi, x * xi, x**3):
            d0, d1 = dissipator_symbol_residual(l, f)
            assert d0.is_zero and d1.is_zero


def test_dissipator_symbol_complex_lindblad():
    # l = x + i xi, f = x: the hbar^1 part is -x, so the first-order term does not vanish
    d0, d1 = dissipator_symbol_residual(x + sp.I * xi, x)
    assert d0.is_zero
    assert d1 == S(-x)
    # and the constant symbol is annihilated exactly (unitality)
    assert dissipator_symbol(x + sp.I * xi, 1).is_zero


def test_oscillator_dissipator_symbol():
    H = (x**2 + xi**2) / 2
    assert dissipator_symbol(H, x) == S(-hbar**2 / 2 * x)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cube, sin_product
from stratlab import functionals as fn
from stratlab.errors import ExcludedExponent, HypothesisViolation, InsufficientData, InvalidRadius
from stratlab.nonlinearity import Power


def test_poincare_constant():
    assert fn.poincare_constant(3, 2, np.sqrt(3)) == pytest.approx(1 / 12)
    assert fn.poincare_constant(2, 3, 1) == pytest.approx(1 / 27)
    with pytest.raises(ExcludedExponent):
        fn.poincare_constant(2, 2, 1)
    with pytest.raises(InvalidRadius):
        fn.poincare_constant(3, 2, 0)


@given(st.integers(1, 6), st.floats(0.1, 10), st.floats(1.01, 3))
def test_poincare_properties(n1, R, factor):
    if n1 == 2:
        return
    assert fn.poincare_constant(n1, 2, R) == pytest.approx((n1 - 2) ** 2 / (4 * R * R))
    assert fn.poincare_constant(n1, 2, R * factor) < fn.poincare_constant(n1, 2, R)


def test_sigma():
    assert fn.sigma_pme(2, 1, 4) == pytest.approx(np.sqrt(2) - 1)
    assert fn.sigma_pme(3, 2, 6) == pytest.approx(1)
    with pytest.raises(HypothesisViolation):
        fn.sigma_pme(2, 1, 2)
    assert fn.sigma_pp(8) == pytest.approx(1)
    assert fn.sigma_pp(4) == pytest.approx(np.sqrt(2) - 1)
    with pytest.raises(HypothesisViolation):
        fn.sigma_pp(2)


def test_functionals_of_zero():
    g = cube(nodes=9)
    z = np.zeros(g.shape)
    f = Power(1, 3)
    assert fn.j_functional(g, z, 2, 1, 0.0, f) == 0.0
    assert fn.j_functional(g, z, 2, 1, 0.1, f) == pytest.approx(-0.1)
    assert fn.f_functional_pp(g, z, 2, 0.0, f) == 0.0
    assert fn.f_functional_pp(g, z, 2, 1.0, f) == pytest.approx(-1.0)


@pytest.mark.parametrize("A", [15.0, 20.0])
def test_initial_functional_closed_form(A):
    g = cube(nodes=33)
    u = A * sin_product(g)
    exact = -0.5 * (3 * np.pi ** 2 / 8) * A ** 2 + 0.25 * (3 / 8) ** 3 * A ** 4 - 0.1
    J = fn.j_functional(g, u, 2, 1, 0.1, Power(1, 3))
    F = fn.f_functional_pp(g, u, 2, 0.1, Power(1, 3))
    assert J == pytest.approx(F)
    assert J == pytest.approx(exact, rel=0.02)
    if A == 15:
        assert exact == pytest.approx(250.8, rel=1e-3)
    else:
        assert J > 0


def test_j_homogeneity():
    g = cube(nodes=9)
    u = sin_product(g)
    f = Power(1, 3)
    grad = g.gradient_energy(u, 2)
    F = g.integrate(f.F_pme(u, 2, 1))
    for lam in (2.0, 3.0):
        J = fn.j_functional(g, lam * u, 2, 1, 0.0, f)
        assert J == pytest.approx(-0.5 * lam ** 2 * grad + lam ** 4 * F, rel=1e-12)


def test_big_m_and_tstar():
    s = np.sqrt(2) - 1
    M = fn.bigM_pme(1, s, 4, 1, 1)
    assert M == pytest.approx((1 + np.sqrt(2)) / 4, rel=1e-12)
    assert fn.tstar_pme(M, s, 1) == pytest.approx(1.457107, rel=1e-6)
    M2 = fn.bigM_pme(1, s, 4, 1, 2)
    assert M2 == pytest.approx(4 * M) and fn.tstar_pme(M2, s, 2) == pytest.approx(2 * fn.tstar_pme(M, s, 1))
    with pytest.raises(HypothesisViolation):
        fn.bigM_pme(0, s, 4, 1, 1)
    assert fn.bigM_pp(1, 1, 8, 1) == pytest.approx(0.25, rel=1e-12)
    assert fn.tstar_pp(0.25, 1, 1) == pytest.approx(0.25, rel=1e-12)
    assert fn.bigM_pp(2, 1, 8, 1) == pytest.approx(0.125)
    with pytest.raises(HypothesisViolation):
        fn.bigM_pp(-1, 1, 8, 1)


def test_concavity_examples():
    t = np.linspace(0, 1, 101)
    m = fn.concavity_margin(fn.TimeSeries(t, np.exp(2 * t)), 1)
    assert m == pytest.approx(-4 * np.exp(4), rel=0.01)
    t = np.linspace(0, 0.5, 501)
    E = 1 / (1 - t)
    margin, ee = fn.concavity_profile(fn.TimeSeries(t, E), 1)
    assert np.abs(margin).max() <= 1e-3 * np.abs(ee).max()
    assert fn.concavity_margin(fn.TimeSeries(t, np.full_like(t, 3.0)), 2) == 0
    with pytest.raises(InsufficientData):
        fn.concavity_margin(fn.TimeSeries(t[:4], t[:4]), 1)


def test_derivative_exact_on_quadratics():
    t = np.cumsum(np.random.default_rng(1).uniform(0.01, 0.1, 40))
    s = fn.TimeSeries(t, 3 * t ** 2 - 2 * t + 1)
    d1 = fn.derivative_series(s)
    d2 = fn.second_derivative_series(s)
    assert np.allclose(d1.values[1:-1], 6 * t[1:-1] - 2, atol=1e-8)
    assert np.allclose(d2.values, 6, atol=1e-8)


def test_time_series_validation():
    with pytest.raises(InsufficientData):
        fn.TimeSeries([0, 1], [1])
    with pytest.raises(InsufficientData):
        fn.TimeSeries([0, 0], [1, 2])
    s = fn.TimeSeries([0, 1, 2], [1, np.inf, 3]).finite_prefix()
    assert len(s) == 1


@settings(max_examples=30)
@given(st.floats(-5, 5), st.floats(0, 10), st.integers(2, 50))
def test_ledger_exact_on_constants(c, M, n):
    ledger = fn.EnergyLedger(M)
    t = np.linspace(0, 2, n)
    for ti in t:
        v = ledger.append(ti, c)
    assert v == pytest.approx(M + c * 2, rel=1e-12, abs=1e-12)

from fractions import Fraction
from math import comb

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from diracfact.multi_hermite import (
    HermiteArgs,
    addition_combine,
    cubic_args,
    derivative_exp_cubic,
    hermite_eval,
    hermite_on_grid,
    hermite_series_oracle,
    ordered_power,
)

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=20)


def sympy_hermite(n, xs):
    """Coefficient extraction from exp(sum x_k t^k), symbolically."""
    t = sp.Symbol("t")
    gen = sp.exp(sum(sp.Rational(x) * t ** (k + 1) for k, x in enumerate(xs)))
    return sp.factorial(n) * sp.series(gen, t, 0, n + 1).removeO().coeff(t, n)


def test_trivial_values():
    assert hermite_eval(0, (Fraction(3), Fraction(-2), Fraction(7))) == 1
    assert hermite_eval(1, (Fraction(3), Fraction(-2), Fraction(7))) == 3
    assert hermite_eval(3, (1, 1, 1)) == 13
    assert hermite_series_oracle(0, (5, 6, 7)) == [1]


def test_series_oracle_low_order_by_hand():
    x1, x2, x3 = Fraction(2, 3), Fraction(-5, 7), Fraction(1, 11)
    assert hermite_series_oracle(2, (x1, x2, x3)) == [1, x1, x1**2 + 2 * x2]


@pytest.mark.parametrize("xs", [(1, 1, 1), (2, -1, 0), (Fraction(1, 2), 3, Fraction(-2, 5)), (1, 2, 3, 4)])
def test_matches_symbolic_series(xs):
    xs = tuple(Fraction(x) for x in xs)
    for n in range(8):
        assert hermite_eval(n, xs) == sympy_hermite(n, xs)


@settings(max_examples=60, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=4))
def test_recursion_equals_series_exactly(xs):
    oracle = hermite_series_oracle(12, xs)
    for n in range(13):
        assert hermite_eval(n, xs) == oracle[n]


def test_m1_is_a_power():
    assert [hermite_eval(n, (Fraction(3, 2),)) for n in range(5)] == [Fraction(3, 2) ** n for n in range(5)]


def test_m2_is_the_two_variable_hermite():
    # H_n(2x, -1) is the physicists' Hermite polynomial
    x = sp.Rational(3, 7)
    for n in range(8):
        assert hermite_eval(n, (Fraction(6, 7), Fraction(-1))) == sp.hermite(n, x)


@settings(max_examples=200, deadline=None)
@given(rationals, rationals, rationals, st.integers(0, 10))
def test_parity(x, y, z, k):
    assert hermite_eval(k, (-x, y, -z)) == (-1) ** k * hermite_eval(k, (x, y, z))


@settings(max_examples=200, deadline=None)
@given(st.tuples(rationals, rationals, rationals), st.tuples(rationals, rationals, rationals), st.integers(0, 8))
def test_addition_theorem(x, y, n):
    lhs, rhs = addition_combine(n, x, y)
    assert lhs == rhs


def test_addition_examples():
    assert addition_combine(0, (1, 2, 3), (4, 5, 6)) == (1, 1)
    lhs, rhs = addition_combine(4, (0.3, -1.2, 0.5), (0.0, 0.0, 0.0))
    assert lhs == pytest.approx(hermite_eval(4, (0.3, -1.2, 0.5)), rel=1e-15) == rhs
    lhs, rhs = addition_combine(5, (1.0, 2.0, 3.0), (2.0, -1.0, 0.0))
    want = hermite_series_oracle(5, (3, 1, 3))[5]
    assert lhs == pytest.approx(float(want), rel=1e-12)
    assert rhs == pytest.approx(float(want), rel=1e-12)


def test_addition_needs_order_three():
    with pytest.raises(ValueError):
        addition_combine(2, (1, 2), (3, 4))


def test_errors():
    with pytest.raises(ValueError):
        hermite_eval(-1, (1, 2, 3))
    with pytest.raises(ValueError):
        HermiteArgs(())
    with pytest.raises(ValueError):
        HermiteArgs((1, 2)) + HermiteArgs((1, 2, 3))
    with pytest.raises(ValueError):
        ordered_power(-1, 1.0)
    with pytest.raises(ValueError):
        derivative_exp_cubic(-2, 1.0, 0.0)


def _direct_application(n, alpha, f, x):
    g = f
    for _ in range(n):
        g = sp.diff(g, x) + alpha * x**2 * g
    return g


@pytest.mark.parametrize("n", range(5))
@pytest.mark.parametrize("alpha", [sp.Rational(1), sp.Rational(-3, 2), sp.Rational(2, 5)])
def test_ordered_power_matches_direct_application(n, alpha):
    x = sp.Symbol("x")
    f = sp.sin(2 * x) * sp.exp(-x**2 / 3) + x**3
    direct = sp.lambdify(x, _direct_application(n, alpha, f, x))
    derivs = [sp.lambdify(x, sp.diff(f, x, k)) for k in range(n + 1)]
    exp = ordered_power(n, float(alpha))
    for xv in np.linspace(-2.0, 2.0, 9):
        got = exp.apply([d(xv) for d in derivs], xv)
        assert abs(got - direct(xv)) < 1e-8 * max(1.0, abs(direct(xv)))


def test_ordered_power_small_cases():
    alpha, x = Fraction(3, 4), Fraction(5, 3)
    assert ordered_power(0, alpha).derivative_weights(x) == [1]
    assert ordered_power(1, alpha).derivative_weights(x) == [alpha * x**2, 1]
    w = ordered_power(2, alpha).derivative_weights(x)
    assert w == [alpha**2 * x**4 + 2 * alpha * x, 2 * alpha * x**2, 1]
    assert len(ordered_power(3, alpha).coeffs) == 4


def test_ordered_power_on_spectral_grid():
    # independent numeric oracle: differentiate a Gaussian with FFT n times
    n_pts, L = 512, 24.0
    x = -L / 2 + L * np.arange(n_pts) / n_pts
    k = 2 * np.pi * np.fft.fftfreq(n_pts, d=L / n_pts)
    g = np.exp(-x**2)
    alpha = 0.4
    v = g.copy()
    for _ in range(4):
        v = np.fft.ifft(1j * k * np.fft.fft(v)).real + alpha * x**2 * v
    derivs = [np.fft.ifft((1j * k) ** j * np.fft.fft(g)).real for j in range(5)]
    got = ordered_power(4, alpha).apply(derivs, x)
    assert np.max(np.abs(got - v)) < 1e-8


def _richardson_derivative(k, a, x):
    mpmath.mp.dps = 50
    f = lambda t: mpmath.exp(-mpmath.mpf(a) * t**3 / 3)
    h = mpmath.mpf("1e-3") * (abs(mpmath.mpf(x)) + 1)
    est = [mpmath.diff(f, mpmath.mpf(x), k, h=h / 2**j, method="step") for j in range(4)]
    # central differences: error series in h^2
    for level in range(1, 4):
        est = [(4**level * est[j + 1] - est[j]) / (4**level - 1) for j in range(len(est) - 1)]
    return float(est[0] / f(mpmath.mpf(x)))


@pytest.mark.parametrize("k", range(6))
@pytest.mark.parametrize("a,x", [(3.0, 0.7), (1.0, -1.3), (0.5, 2.1)])
def test_derivative_exp_cubic_against_finite_differences(k, a, x):
    want = _richardson_derivative(k, a, x)
    got = derivative_exp_cubic(k, a, x)
    assert abs(got - want) <= 1e-6 * max(abs(want), 1e-12)


def test_derivative_exp_cubic_low_orders():
    assert derivative_exp_cubic(0, 2.0, 1.3) == 1
    assert derivative_exp_cubic(1, Fraction(2), Fraction(3)) == -2 * 9
    a, x = Fraction(5, 2), Fraction(-1, 3)
    assert derivative_exp_cubic(2, a, x) == a**2 * x**4 - 2 * a * x


def test_cubic_args_exact_third():
    assert cubic_args(Fraction(2), Fraction(3)).values == (12, 6, 1)


def test_hermite_on_grid_broadcasts():
    q = np.linspace(0, 1, 5)
    got = hermite_on_grid(3, (q, 1.0, 0.5))
    want = [float(hermite_eval(3, (Fraction(v).limit_denominator(), 1, Fraction(1, 2)))) for v in q]
    np.testing.assert_allclose(got, want, rtol=1e-14)
    assert hermite_on_grid(0, (q, 0.0, 0.0)).shape == q.shape


def test_weights_are_binomial_times_coefficients():
    e = ordered_power(5, 0.7)
    x = 0.9
    for k, w in enumerate(e.derivative_weights(x)):
        assert w == pytest.approx(comb(5, k) * e.coefficient(5 - k, x))

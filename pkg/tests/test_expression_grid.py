import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from diracfact.expression import Expression, ExpressionError, kinks, parse, to_text
from diracfact.grid import build_grid, parse_grid


@pytest.mark.parametrize(
    "text,fn,dfn",
    [
        ("q^2", lambda q: q**2, lambda q: 2 * q),
        ("q^2 + 1", lambda q: q**2 + 1, lambda q: 2 * q),
        ("2*q^4 - q/3", lambda q: 2 * q**4 - q / 3, lambda q: 8 * q**3 - 1 / 3),
        ("sqrt(1 + q^2)", lambda q: np.sqrt(1 + q**2), lambda q: q / np.sqrt(1 + q**2)),
        ("exp(0-q)*sin(2*q)", lambda q: np.exp(-q) * np.sin(2 * q),
         lambda q: np.exp(-q) * (2 * np.cos(2 * q) - np.sin(2 * q))),
        ("cos(q)^3", lambda q: np.cos(q) ** 3, lambda q: -3 * np.cos(q) ** 2 * np.sin(q)),
        ("(q+1)^0", lambda q: np.ones_like(q), lambda q: np.zeros_like(q)),
        ("  3.5e-1 *q ", lambda q: 0.35 * q, lambda q: 0.35 * np.ones_like(q)),
    ],
)
def test_values_and_derivatives(text, fn, dfn):
    q = np.linspace(0.3, 2.7, 11)
    e = Expression.parse(text)
    np.testing.assert_allclose(e(q), fn(q), rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(e.derivative(q), dfn(q), rtol=1e-13, atol=1e-14)


def test_precedence_and_associativity():
    q = np.array([2.0])
    assert Expression.parse("1 + 2*3 - 4/2")(q)[0] == 5.0
    assert Expression.parse("8/4/2")(q)[0] == 1.0
    assert Expression.parse("10-4-3")(q)[0] == 3.0
    assert Expression.parse("2*q^3")(q)[0] == 16.0


@pytest.mark.parametrize(
    "text,offset",
    [("q^", 2), ("q +* 2", 3), ("q^2.5", 2), ("foo(q)", 0), ("sqrt q", 5), ("(q + 1", 6),
     ("q q", 2), ("-q", 0), ("q $ 1", 2), ("", 0)],
)
def test_parse_errors_carry_offsets(text, offset):
    with pytest.raises(ExpressionError) as info:
        parse(text)
    assert info.value.offset == offset
    assert info.value.expected
    assert f"byte {offset}" in str(info.value)


def test_offset_counts_bytes():
    with pytest.raises(ExpressionError) as info:
        parse("q + é")
    assert info.value.offset == 4
    with pytest.raises(ExpressionError) as info:
        parse("sqrt(é) + $")
    assert info.value.offset == 5


def test_nested_power_text():
    tree = parse("((q)^2)^3")
    assert parse(to_text(tree)) == tree
    assert Expression.parse(to_text(tree))(np.array([2.0]))[0] == 64.0


def test_kink_detection():
    q = np.linspace(-1, 1, 65)
    assert kinks(parse("abs(q)"), q)
    assert not kinks(parse("abs(q + 2)"), q)
    assert not kinks(parse("q^2"), q)


exprs = st.recursive(
    st.one_of(st.just("q"), st.integers(0, 9).map(str)),
    lambda inner: st.one_of(
        st.tuples(inner, st.sampled_from("+-*"), inner).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(inner, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
        inner.map(lambda s: f"sin({s})"),
    ),
    max_leaves=8,
)


@settings(max_examples=100, deadline=None)
@given(exprs)
def test_canonical_text_round_trips(text):
    tree = parse(text)
    assert parse(to_text(tree)) == tree


@settings(max_examples=60, deadline=None)
@given(exprs)
def test_forward_derivative_matches_symbolic(text):
    e = Expression.parse(text)
    x = sp.Symbol("q")
    sym = sp.sympify(text.replace("^", "**"), locals={"q": x})
    q = np.array([0.37, 0.81, 1.3])
    f = sp.lambdify(x, sym)(q) * np.ones_like(q)
    df = sp.lambdify(x, sp.diff(sym, x))(q) * np.ones_like(q)
    np.testing.assert_allclose(e(q), f, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(e.derivative(q), df, rtol=1e-10, atol=1e-10)


# --- grids -------------------------------------------------------------------


def test_plane_wave_is_momentum_eigenvector():
    g = build_grid(-np.pi, np.pi, 128)
    k = 5.0
    v = np.exp(1j * k * g.q)
    pv = g.p_op.m @ v
    assert np.linalg.norm(pv - k * v) / np.linalg.norm(k * v) < 1e-12


def test_constant_has_zero_momentum():
    for scheme in ("spectral", "fd4"):
        g = build_grid(0, 3, 128, scheme)
        assert np.max(np.abs(g.p_op.m @ np.ones(128))) < 1e-12


def test_gaussian_momentum():
    g = build_grid(-12, 12, 1024)
    v = np.exp(-g.q**2 / 2)
    want = -1j * (-g.q) * v
    assert np.max(np.abs(g.p_op.m @ v - want)) < 1e-8


def test_fd4_is_fourth_order():
    errs = []
    for n in (128, 256, 512):
        g = build_grid(-3, 3, n, "fd4")
        v = np.sin(2 * g.q) * np.exp(-g.q**2 / 4)
        dv = (2 * np.cos(2 * g.q) - g.q / 2 * np.sin(2 * g.q)) * np.exp(-g.q**2 / 4)
        errs.append(np.max(np.abs(g.derivative(v) - dv)))
    for a, b in zip(errs, errs[1:]):
        assert 13 < a / b < 19


def test_spectral_momentum_is_hermitian():
    g = build_grid(0, 5, 64)
    assert g.p_op.is_hermitian(1e-13)
    assert g.q_op.is_hermitian()


def test_grid_validation():
    with pytest.raises(ValueError):
        build_grid(1, 1, 64)
    with pytest.raises(ValueError):
        build_grid(0, 1, 32)
    with pytest.raises(ValueError):
        build_grid(0, 1, 100)
    build_grid(0, 1, 100, "fd4")
    with pytest.raises(ValueError):
        build_grid(0, 1, 64, "chebyshev")


def test_parse_grid():
    g = parse_grid("-6:6:1024")
    assert (g.q_min, g.q_max, g.n_points) == (-6.0, 6.0, 1024)
    assert g.q[0] == -6.0 and g.q[-1] < 6.0
    f = parse_grid("1e-3:14:2048", "fd4")
    assert f.q[-1] == 14.0
    for bad in ("1:2", "a:b:c", "0:1:64.5"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_integration_and_masks():
    g = build_grid(-10, 10, 256)
    assert g.l2_norm(np.exp(-g.q**2 / 2)) ** 2 == pytest.approx(np.sqrt(np.pi), rel=1e-13)
    f = build_grid(-10, 10, 257, "fd4")
    assert f.l2_norm(np.exp(-f.q**2 / 2)) ** 2 == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    m = g.interior()
    assert m.sum() == 256 - 2 * 26 and not m[0] and not m[-1]
    assert g.refined().n_points == 512

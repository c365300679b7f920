from fractions import Fraction

import pytest
from hypothesis import given, settings

from kstar.exactmath import (
    CENTRED,
    EXACT,
    EXPONENTIAL,
    ORDINARY,
    ChartMismatchError,
    Poly,
    TSeries,
    cosh_series,
    exp_series,
    monomials_upto,
    render_poly,
    scalar_series_expand,
    series_substitute,
    sinh_series,
)

from .conftest import polys

a, b, c, d = (Poly.var(ORDINARY, v) for v in "abcd")
al, be, ga, de = (Poly.var(EXPONENTIAL, v) for v in EXPONENTIAL.variables)


@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p - p == 0


@given(polys(), polys())
def test_leibniz(p, q):
    for v in ORDINARY.variables:
        assert (p * q).diff(v) == p.diff(v) * q + p * q.diff(v)


@given(polys(max_degree=3))
def test_mixed_partials_commute(p):
    assert p.diff("a").diff("b") == p.diff("b").diff("a")
    assert p.diff_multi((1, 1, 0, 0)) == p.diff("a").diff("b")


def test_chart_mismatch_rejected():
    with pytest.raises(ChartMismatchError):
        a + al
    # constants travel freely between charts
    assert (a + Poly.const(2)).constant_term() == 2
    assert Poly.const(3, ORDINARY) == Poly.const(3, EXPONENTIAL)


def test_render_canonical():
    p = -Fraction(5, 3) * al**2 - Fraction(10, 3) * be * ga
    assert render_poly(p) == "-5/3*alpha^2 - 10/3*beta*gamma"
    assert render_poly(Poly.zero(ORDINARY)) == "0"
    assert render_poly(2 * a * d + 1) == "2*a*d + 1"


def test_degrees_and_truncation():
    p = 1 + a + b * c + a**3
    assert p.total_degree == 3
    assert p.min_degree == 0
    assert p.truncate(2) == 1 + a + b * c
    assert p.homogeneous(2) == b * c
    assert Poly.zero(ORDINARY).total_degree == float("-inf")


def test_evaluate():
    assert (a * d - b * c).evaluate({"a": 2, "b": 1, "c": 3, "d": 5}) == 7


def test_monomials_upto_count():
    # C(4 + 2, 2) monomials of degree <= 2 in four variables
    assert len(monomials_upto(ORDINARY, 2)) == 15
    assert len(monomials_upto(ORDINARY, 3)) == 35


def test_hyperbolic_identity():
    n = 6
    ch, sh = cosh_series(n), sinh_series(n)
    assert (ch * ch - sh * sh).scalars() == [1] + [0] * n


def test_exp_addition_rule():
    n = 5
    assert exp_series(2, n) == exp_series(1, n) * exp_series(1, n)


def test_named_series():
    n = 5
    tanh = scalar_series_expand("tanh", n)
    sech = scalar_series_expand("sech", n)
    assert (tanh * tanh + sech * sech).scalars() == [1] + [0] * n
    assert tanh.scalars()[:4] == [0, 1, 0, Fraction(-1, 3)]
    # sqrt(2 / (1 + e^{-2t})) squared times (1 + e^{-2t}) / 2 is 1
    root = scalar_series_expand("sqrt_ratio", n)
    half = (TSeries.const(1, n) + exp_series(-2, n)) / 2
    assert (root * root * half).scalars() == [1] + [0] * n
    with pytest.raises(ValueError):
        scalar_series_expand("cot", 3)


def test_reciprocal_requires_unit_constant():
    with pytest.raises(ValueError):
        scalar_series_expand("reciprocal", 3, sinh_series(3))


def test_trusted_degree_product_rule():
    # x known through degree 2 with min degree 1, times y exact of min degree 1
    x = TSeries.from_poly(al + be**2, 0, 2)
    y = TSeries.from_poly(ga)
    assert (x * y).trusted_degree == 3
    assert (x * x).trusted_degree == 3
    assert (x + y).trusted_degree == 2
    assert (y * y).trusted_degree == EXACT


def test_trusted_degree_derivative():
    x = TSeries.from_poly(al + be**2, 0, 2)
    assert x.diff("alpha").trusted_degree == 1
    with pytest.raises(ValueError, match="underflow"):
        TSeries.from_poly(Poly.const(1, EXPONENTIAL), 0, 0).diff("alpha")


def test_series_equality_respects_trust():
    x = TSeries.from_poly(al + be**2, 0, 1)
    assert x == TSeries.from_poly(al)


def test_series_substitute():
    images = {"a": TSeries.from_poly(1 + al), "b": TSeries.from_poly(be)}
    out = series_substitute(a * a + b, images)
    assert out[0] == 1 + 2 * al + al**2 + be
    with pytest.raises(KeyError, match="'c'"):
        series_substitute(c, images)


@settings(max_examples=30)
@given(polys(chart=CENTRED, max_degree=2))
def test_substitute_identity(p):
    images = {v: TSeries.from_poly(Poly.var(CENTRED, v)) for v in CENTRED.variables}
    assert series_substitute(p, images)[0] == p

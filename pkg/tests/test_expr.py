import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from growthlab import mixed
from growthlab.expr import (X, Const, ExpK, FracIter, LogK, ParseError, Xi, XiInv, differentiate,
                            eval_real, eval_tower, evaluate, parse, substitute, to_text)
from growthlab.towerreal import TowerOverflow, TowerReal

SOURCES = [
    "x+2", "x+x^(1/2)", "x+x/log(x)", "2*x", "x^2", "x^log(x)", "exp(x)",
    "FracIter(exp,1/2,x)", "ExpK(3,LogK(3,x)+1)", "Xi(3,x)+1/Xi(3,x)",
    "XiInv(4,Xi(4,x)-1/2)", "Chi(3,x)", "g(x)", "h(x)", "ell(x)", "fk(2,x)",
    "x - (x - 1)", "(x+1)^(x-1)", "e*x", "x/(2*x+1)",
]


@pytest.mark.parametrize("src", SOURCES)
def test_print_parse_round_trip(src):
    e = parse(src)
    assert parse(to_text(e)) == e


@pytest.mark.parametrize("src, offset", [
    ("log(x", 5), ("x +", 3), ("foo(x)", 0), ("ExpK(1.5,x)", 5), ("x ) ", 2),
    ("FracIter(log,1/2,x)", 9),
])
def test_parse_errors_carry_offsets(src, offset):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert info.value.diagnostic.offset == offset


def test_builders_in_python():
    e = X + 1 / Xi(3, X)
    assert e == parse("x + 1/Xi(3,x)")
    assert substitute(parse("x^2"), parse("x+1")) == parse("(x+1)^2")


@pytest.mark.parametrize("src, x", [
    ("x^2+3*x", 2.5), ("x^log(x)", 3.0), ("log(x)^2/2", 5.0), ("x+x/log(x)", 7.0),
    ("exp(x)*x", 1.3), ("x^(1/2)", 9.0), ("Xi(3,x)", 20.0), ("XiInv(3,x)", 1.7),
    ("FracIter(exp,1/2,x)", 2.0), ("g(x)", 30.0), ("Chi(3,x)", 20.0),
])
def test_derivative_matches_finite_difference(src, x):
    e = parse(src)
    d = eval_real(differentiate(e), x)
    h = 1e-6 * x
    fd = (eval_real(e, x + h) - eval_real(e, x - h)) / (2 * h)
    assert d == pytest.approx(fd, rel=1e-5)


def test_evaluate_floats_and_towers():
    assert eval_real(parse("x^2 + 1"), 3.0) == 10.0
    v = evaluate(ExpK(3, X), 3.0)
    assert isinstance(v, TowerReal)
    assert mixed.to_float(evaluate(LogK(3, X), v)) == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(TowerOverflow):
        eval_real(ExpK(3, X), 3.0)
    assert isinstance(eval_tower(parse("x+1"), TowerReal(0, 2.0)), TowerReal)


def test_domain_errors_raise():
    with pytest.raises(mixed.DomainError):
        eval_real(parse("log(x)"), -1.0)
    with pytest.raises(mixed.DomainError):
        eval_real(parse("Xi(3,x)"), 0.5)


def test_xi_rewrites_are_exact():
    # Xi_3(e_2(x)) - Xi_3(x) = 2 and Xi_3 of a half iterate adds 1/2, even far out
    x = XiInv(3, Const(Fraction(35)))
    e2 = evaluate(Xi(3, ExpK(2, x)), 0.0)
    assert e2 == 37.0
    half = evaluate(Xi(3, FracIter("exp", Fraction(1, 2), x)), 0.0)
    assert half == 35.5
    g = evaluate(Xi(3, parse("g(x)")), evaluate(x, 0.0))
    assert g == pytest.approx(35 + 1 / 35, rel=1e-15)


@given(st.floats(min_value=1.5, max_value=50.0))
def test_exp_log_inverse(x):
    assert eval_real(parse("log(exp(x))"), x) == pytest.approx(x, rel=1e-14)


def test_text_of_constants():
    assert to_text(X ** Const(Fraction(1, 2))) == "x^0.5"
    assert to_text(X ** Const(Fraction(1, 3))) == "x^(1/3)"
    assert to_text(parse("x/3")) == "x / 3"
    assert math.isclose(eval_real(parse("x*(1/3)"), 3.0), 1.0)

import math

import pytest

from growthlab.analysis import (Schedule, classify, compare, in_B, order, order_profile,
                                classify_table)
from growthlab.expr import parse
from growthlab.mixed import superexp
from growthlab.tower import builder_fk, builder_g, builder_h, default_tower

TW = default_tower()


@pytest.mark.parametrize("f, F, want, tol", [
    ("3*x", "log(x)", math.log(3.0), 1e-6),
    ("x^2", "LogK(2,x)", math.log(2.0), 1e-6),
    ("ExpK(2,x)", 3, 2.0, 1e-12),
    ("FracIter(exp,1/2,x)", 3, 0.5, 1e-12),
    ("exp(x)", 3, 1.0, 1e-12),
    ("x+2", "x", 2.0, 1e-9),
])
def test_order_values(f, F, want, tol):
    est = order(parse(f), F if isinstance(F, int) else parse(F))
    assert est.status == "converged"
    assert est.value == pytest.approx(want, abs=tol)


@pytest.mark.parametrize("pq", ["1/3", "1/2", "2/3"])
def test_fractional_iterate_order_scaling(pq):
    est = order(parse(f"FracIter(exp,{pq},x)"), 3)
    p, q = map(int, pq.split("/"))
    assert est.value == pytest.approx(p / q, abs=1e-6)


def test_order_statuses():
    assert order(parse("x"), 3).value == 0.0
    assert order(builder_g(), 3).status == "tending_to_zero"
    assert order(parse("x^2"), "log(x)").status == "diverged_to_infinity"


def test_order_profile_entries():
    prof = dict(order_profile(parse("ExpK(2,x)"), 4))
    assert prof[3].value == pytest.approx(2.0, abs=1e-12)
    assert dict(order_profile(builder_g(), 3))[3].status == "tending_to_zero"


def test_abel_consistency():
    from growthlab.abel import build_abel
    # short schedule: descents through x + sqrt(x) grow like sqrt(x)
    sched = Schedule(3, 1.5, 0.05, 2.6)
    for src, a in (("2*x", 1.0), ("x+x^(1/2)", 1.0), ("x^2", 2.0), ("exp(x)", 1.0),
                   ("x+x/log(x)", 2.0)):
        F = build_abel(src, a)
        est = order(parse(src), F, sched)
        assert est.value == pytest.approx(1.0, abs=1e-9)


def test_compare_verdicts():
    assert compare(builder_g(), builder_h())[0] == "f>g"
    assert compare(builder_h(), builder_g())[0] == "f<g"
    assert compare(builder_fk(3), builder_g())[0] == "f<g"
    for src in ("x+1", "2*x", "exp(x)", "x^2"):
        assert compare(parse(src), parse(src))[0] == "comparable-gap-vanishing"


@pytest.mark.parametrize("f, n, verdict", [
    ("x+2", 1, "accepted(1)"),
    ("exp(x)", 3, "accepted(3)"),
    ("exp(x)", 2, "rejected"),
    ("x^2", 1, "rejected"),
    ("x^2", 3, "accepted(3)"),
    ("FracIter(exp,1/2,x)", 3, "accepted(3)"),
])
def test_in_B(f, n, verdict):
    assert in_B(parse(f), n)[0] == verdict


def test_in_B_rejects_an_oscillating_derivative():
    # Xi_3(f(x)) = Xi_3(x) + 1 + sin(Xi_3(x))/2: the derivative ratio never settles
    def f(x):
        u = TW.xi(3, x)
        return superexp(u + 1.0 + 0.5 * math.sin(u))
    for n in (1, 2, 3, 4):
        assert in_B(f, n)[0] == "rejected"


@pytest.mark.parametrize("src, n, k", [
    ("x+x/log(x)", 1, 2),
    ("exp(x)", 2, 1),
    ("x^2", 1, 3),
    ("x+2", 0, 3),
    ("g(x)", 2, 2),
])
def test_classify(src, n, k):
    res = classify(parse(src))
    assert (res.n, res.k, res.status) == (n, k, "verified-at-depth")


def test_classify_chain_for_x_plus_x_over_log_x():
    res = classify(parse("x+x/log(x)"))
    assert [s.F for s in res.chain] == ["log(x)^2 / 2", "Xi(3, x)"]


def test_classify_reports_statuses():
    assert classify(parse("x")).status == "budget-exhausted"


def test_table_rejects_bad_constant():
    with pytest.raises(ValueError):
        classify_table(1.0)


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(4)
    with pytest.raises(ValueError):
        Schedule(3, 5.0, 1.0, 2.0)
    assert Schedule(3, 2.0, 1.0, 40.0).count == 39

import math

import pytest

from growthlab.ackermann import (GFamily, UnsupportedParameter, a_eval, ack_closed_form,
                                 ack_exact, ack_tower_estimate, g_eval)
from growthlab import mixed


@pytest.mark.parametrize("m, n, v", [(1, 5, 12), (2, 3, 30), (0, 7, 9), (3, 2, 65534),
                                     (3, 0, 2), (4, 1, 65534)])
def test_exact_values(m, n, v):
    assert ack_exact(m, n).value == v


def test_recursion_identity():
    for m in range(1, 4):
        for n in range(10):
            nxt, cur = ack_exact(m, n + 1), ack_exact(m, n)
            if nxt.kind != "exact" or cur.kind != "exact":
                continue
            inner = ack_exact(m - 1, cur.value)
            if inner.kind == "exact":
                assert nxt.value == inner.value


def test_closed_forms():
    for n in range(31):
        for m in range(3):
            assert ack_exact(m, n).value == ack_closed_form(m, n)


def test_budget():
    a = ack_exact(3, 3)
    assert a.value.bit_length() == 65536
    assert ack_exact(3, 4).kind == "too-large"
    assert ack_exact(3, 3, bit_budget=1000).kind == "too-large"
    d = a.to_dict()
    digits = a.to_dict(max_digits=30_000)["value"]
    assert d["digits"] == len(digits) and digits.startswith(d["leading_digits"])
    assert ack_exact(3, 2).to_dict()["value"] == "65534"


def test_tower_estimate():
    assert ack_tower_estimate(3, 0).value == 2
    assert ack_tower_estimate(3, 2).value == 65534
    est = ack_tower_estimate(3, 3)
    assert est.base2_height == 5
    # 2^65536 - 2: its log is 65536 log 2 to double precision
    assert mixed.to_float(mixed.log(est.tower)) == pytest.approx(65536 * math.log(2), rel=1e-12)


def test_unsupported_levels():
    with pytest.raises(UnsupportedParameter):
        ack_exact(1.5, 2)
    with pytest.raises(UnsupportedParameter):
        g_eval(2.5, 10.0)
    with pytest.raises(UnsupportedParameter):
        ack_tower_estimate(2, 3)


def test_g_closed_forms():
    assert g_eval(2, 30.0) == pytest.approx(3.0, abs=1e-15)
    assert g_eval(2, a_eval(2, 3.0)) == pytest.approx(3.0, abs=1e-9)
    for x in (10.0, 100.0, 1000.0):
        assert g_eval(2, x) - g_eval(2, g_eval(1, x)) - 1 == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_g_abel_relation(m):
    fam = GFamily(5)
    a, top = fam.domain(m)
    lo = mixed.to_float(fam.a_eval(m - 1, a))
    for x in [lo * 1.37 ** j for j in range(25)]:
        assert abs(fam.residual(m, x)) <= 1e-9


def test_g_is_increasing_and_contracting():
    fam = GFamily(5)
    xs = [3.0 * 1.6 ** j for j in range(40)]
    for m in range(5):
        vals = [mixed.to_float(fam.g_eval(m, x)) for x in xs]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert all(v <= x - 1.0 for v, x in zip(vals, xs))


def test_a_is_increasing_and_levels_dominate():
    fam = GFamily(5)
    ts = [1.0 + 0.25 * j for j in range(12)]
    for m in range(1, 4):
        vals = [fam.a_eval(m, t) for t in ts]
        assert all(mixed.cmp(b, a) > 0 for a, b in zip(vals, vals[1:]))
    for m in range(1, 3):
        assert all(mixed.cmp(fam.a_eval(m + 1, t), fam.a_eval(m, t)) >= 0 for t in ts[4:])
    # A_4 leaves every tower height soon after t = 1
    assert fam.a_eval(4, 1.0) > fam.a_eval(3, 1.0)

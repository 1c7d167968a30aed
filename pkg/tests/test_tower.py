import json
import math

import pytest

from growthlab import mixed
from growthlab.abel import PreconditionError
from growthlab.expr import X, Const, LogK, evaluate, parse
from growthlab.mixed import DomainError
from growthlab.tower import (ConfigError, Tower, TowerConfig, between_gadget, builder_fk,
                             default_tower, gadget_inverse_expr)
from growthlab.towerreal import TowerHeightError, TowerReal

E = math.e
TW = default_tower()


def test_low_levels_are_closed_forms():
    assert TW.xi(0, 5.0) == 5.0 - E
    assert TW.xi(1, 5.0) == 5.0 / E
    assert TW.xi(2, 5.0) == math.log(5.0)
    assert TW.chi(1, 3.0) == E and TW.chi(2, 3.0) == 3.0


def test_known_values():
    assert TW.xi(3, math.exp(E)) == pytest.approx(2.0, abs=1e-15)
    assert TW.xi(4, math.exp(E)) == pytest.approx(1.0 + math.log(2.0), abs=1e-15)
    assert TW.chi(3, E * E) == pytest.approx(2 * E * E, rel=1e-15)
    assert TW.xi_inv(3, 2.5) == pytest.approx(math.exp(math.exp(math.exp(0.5))), rel=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_abel_relation_per_level(n):
    for x in (1.2, 2.0, 5.0, 40.0, 1e4):
        lhs = TW.xi(n, x)
        rhs = TW.xi(n, TW.xi(n - 1, x)) + 1.0 if TW.xi(n - 1, x) >= 1 else None
        if rhs is not None:
            assert lhs == pytest.approx(rhs, abs=2e-15)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_inverse_round_trip(n):
    for t in (0.1, 1.0, 1.9, 2.7)[: 6 - n + 1]:
        assert TW.xi(n, TW.xi_inv(n, t)) == pytest.approx(t, abs=1e-12)


def test_towers_at_level_three_are_exact():
    t = TW.xi_inv(3, 40.25)
    assert isinstance(t, TowerReal) and t.height == 40
    assert TW.xi(3, t) == 40.25
    assert TW.xi(4, t) == pytest.approx(TW.xi(4, 40.25) + 1.0, abs=1e-14)
    with pytest.raises(TowerHeightError):
        TW.xi_inv(4, TowerReal(3, 2.0))


def test_chi_recursion_and_derivative():
    for x in (2.0, 20.0, 500.0):
        h = 1e-6 * x
        fd = (TW.xi(3, x + h) - TW.xi(3, x - h)) / (2 * h)
        assert TW.chi(3, x) * fd == pytest.approx(1.0, abs=1e-7)
        assert TW.chi(3, math.exp(x / 100)) > 0


def test_frac_iter_group_law():
    assert TW.frac_iter(-1, E) == pytest.approx(1.0, rel=1e-15)
    phi = TW.frac_iter(0.5, 2.0)
    assert TW.frac_iter(0.5, phi) == pytest.approx(math.exp(2.0), rel=1e-13)
    # extended below 1 through H(x) = H(e^x) - 1
    assert TW.frac_iter(1, 0.3) == pytest.approx(math.exp(0.3), rel=1e-13)


def test_domain_errors():
    with pytest.raises(DomainError):
        TW.xi(3, 0.5)
    with pytest.raises(DomainError):
        TW.xi(7, 2.0)
    with pytest.raises(DomainError):
        TW.xi_inv(3, -0.5)


def test_config_round_trip(tmp_path):
    cfg = TowerConfig(max_level=5, seeds=((3, "loglinear"), (4, "loglinear"), (5, "loglinear")))
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_dict()))
    back = TowerConfig.load(p)
    assert back == cfg and back.digest() == cfg.digest()
    assert cfg.digest() != TowerConfig().digest()


@pytest.mark.parametrize("data", [
    {"max_level": 2}, {"seeds": {"3": "cubic"}}, {"seeds": {"9": "reciprocal"}}, {"colour": 1},
])
def test_config_validation(data):
    with pytest.raises(ConfigError):
        TowerConfig.from_dict(data)


def test_loglinear_tower_still_satisfies_the_abel_relation():
    tw = Tower(TowerConfig(seeds=tuple((n, "loglinear") for n in range(3, 7))))
    for x in (3.0, 50.0, 1e5):
        assert tw.xi(3, mixed.exp(x)) == pytest.approx(tw.xi(3, x) + 1.0, abs=1e-12)
        assert tw.xi(4, x) == pytest.approx(tw.xi(4, tw.xi(3, x)) + 1.0, abs=1e-12)


def test_reciprocal_above_loglinear_is_rejected():
    with pytest.raises(PreconditionError):
        Tower(TowerConfig(seeds=((3, "loglinear"),)))


def test_fk_builder():
    assert builder_fk(0) == X + 1
    f2 = builder_fk(2)
    assert mixed.to_float(evaluate(f2, 100.0)) == pytest.approx(
        math.exp(math.exp(math.log(math.log(100.0)) + 1)), rel=1e-12)


def test_gadget_inverts_its_defining_map():
    F, delta = X, 1 / LogK(1, X)
    g = between_gadget(F, delta, 3)
    inv = gadget_inverse_expr(F, delta, 3)
    for x in (20.0, 300.0):
        y = mixed.to_float(evaluate(g, x))
        assert y > x
        assert mixed.to_float(evaluate(inv, y)) == pytest.approx(x, rel=1e-10)
    with pytest.raises(DomainError):
        between_gadget(F, Const(1) + X, 3)
    with pytest.raises(DomainError):
        between_gadget(F, delta, 2)


def test_parsed_gadget_matches_builder():
    assert parse("gadget(3, x, 1/log(x), x)") == between_gadget(X, 1 / LogK(1, X), 3, check=False)


def test_fk_increment_lies_between_chi_bounds():
    # Xi_3(f_k(x)) - Xi_3(x) = Xi_3(y + 1) - Xi_3(y) with y = log_k x
    for k in (1, 2, 3):
        for s in (6.0, 12.0, 25.0):
            x = TW.xi_inv(3, s)
            y = x
            for _ in range(k):
                y = mixed.log(y)
            inc = TW.xi(3, evaluate(builder_fk(k), x)) - s
            lo = mixed.to_float(mixed.div(1.0, TW.chi(3, mixed.add(y, 1.0))))
            hi = mixed.to_float(mixed.div(1.0, TW.chi(3, y)))
            assert lo - 1e-12 <= inc <= hi + 1e-12

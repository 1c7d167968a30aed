"""Arithmetic on values that are either native floats or ``TowerReal``.

Every result is brought back to a float whenever it fits, so small
magnitudes keep full double precision and only genuinely huge values travel
in level-index form.
"""

from __future__ import annotations

import math

from . import towerreal as tr
from .towerreal import TowerReal, TowerOverflow

_EXP_MAX = 709.0


class DomainError(ValueError):
    """Argument outside the domain of an operation."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


def is_tower(v) -> bool:
    return isinstance(v, TowerReal)


def canon(v):
    if isinstance(v, TowerReal):
        x = tr.try_real(v)
        return v if x is None else x
    return float(v)


def lift(v) -> TowerReal:
    if isinstance(v, TowerReal):
        return v
    if not v >= 1.0:
        raise DomainError(f"{v} cannot be lifted to a tower", v)
    return tr.from_real(v)


def to_float(v) -> float:
    if isinstance(v, TowerReal):
        return tr.to_real(v)
    return float(v)


def sign(v) -> int:
    if isinstance(v, TowerReal):
        return 1
    return (v > 0) - (v < 0)


def cmp(a, b) -> int:
    ta, tb = isinstance(a, TowerReal), isinstance(b, TowerReal)
    if not ta and not tb:
        return (a > b) - (a < b)
    if ta and tb:
        return tr.compare(a, b)
    if ta:
        return 1 if b < 1.0 else tr.compare(a, tr.from_real(b))
    return -1 if a < 1.0 else tr.compare(tr.from_real(a), b)


def lt(a, b) -> bool:
    return cmp(a, b) < 0


def exp(a):
    if isinstance(a, TowerReal):
        return tr.exp_t(a)
    if a < _EXP_MAX:
        return math.exp(a)
    return canon(tr.exp_t(tr.from_real(a)))


def log(a):
    if isinstance(a, TowerReal):
        if a.height == 0:
            return math.log(a.mantissa)
        return canon(tr.log_t(a))
    if not a > 0:
        raise DomainError(f"log of non-positive value {a}", a)
    return math.log(a)


def _sub_towers(a: TowerReal, b: TowerReal):
    c = tr.compare(a, b)
    if c == 0:
        return 0.0
    if c < 0:
        raise TowerOverflow("difference is a huge negative number")
    la, lb = log(a), log(b)
    if is_tower(la) or is_tower(lb):
        if is_tower(la) and is_tower(lb) and la == lb:
            # distinct mantissas at this scale: log-difference is astronomical
            return a.with_absorbed(True)
        d = sub(la, lb)
        if is_tower(d) or d > 40:
            return a.with_absorbed(True)
    else:
        d = la - lb
    # a - b = a * (1 - exp(-d)); d > 0
    return exp(add(la, math.log(-math.expm1(-d))))


def add(a, b):
    ta, tb = isinstance(a, TowerReal), isinstance(b, TowerReal)
    if not ta and not tb:
        s = a + b
        if math.isinf(s) and math.isfinite(a) and math.isfinite(b):
            return canon(tr.add(tr.from_real(a), tr.from_real(b)))
        return s
    if ta and tb:
        return canon(tr.add(a, b))
    t, y = (a, b) if ta else (b, a)
    if y >= 1.0:
        return canon(tr.add(t, tr.from_real(y)))
    return canon(tr.add_real(t, y))


def neg(a):
    if isinstance(a, TowerReal):
        raise TowerOverflow("negative tower values are not representable")
    return -a


def sub(a, b):
    ta, tb = isinstance(a, TowerReal), isinstance(b, TowerReal)
    if not ta and not tb:
        s = a - b
        if math.isinf(s) and math.isfinite(a) and math.isfinite(b):
            raise TowerOverflow("difference exceeds native range")
        return s
    if ta and tb:
        return canon(_sub_towers(a, b))
    if ta:
        if b <= 1.0:
            return canon(tr.add_real(a, -b))
        return canon(_sub_towers(a, tr.from_real(b)))
    raise TowerOverflow("difference is a huge negative number")


def mul(a, b):
    ta, tb = isinstance(a, TowerReal), isinstance(b, TowerReal)
    if not ta and not tb:
        p = a * b
        if math.isinf(p) and math.isfinite(a) and math.isfinite(b):
            if p < 0:
                raise TowerOverflow("product is a huge negative number")
            return canon(tr.mul(tr.from_real(abs(a)), tr.from_real(abs(b))))
        return p
    if ta and tb:
        return canon(tr.mul(a, b))
    t, y = (a, b) if ta else (b, a)
    if y == 0:
        return 0.0
    if y < 0:
        raise TowerOverflow("product is a huge negative number")
    if y >= 1.0:
        return canon(tr.mul(t, tr.from_real(y)))
    return exp(add(log(t), math.log(y)))


def div(a, b):
    ta, tb = isinstance(a, TowerReal), isinstance(b, TowerReal)
    if not ta and not tb:
        if b == 0:
            raise DomainError("division by zero", b)
        q = a / b
        if math.isinf(q):
            if q < 0:
                raise TowerOverflow("quotient is a huge negative number")
            return exp(log(abs(a)) - log(abs(b)))
        return q
    if tb and not ta:
        if a == 0:
            return 0.0
        s = 1.0 if a > 0 else -1.0
        try:
            d = sub(log(abs(a)), log(b))
        except TowerOverflow:
            return 0.0  # |a| / b underflows
        if isinstance(d, TowerReal):
            raise TowerOverflow("quotient exceeds range")
        return s * math.exp(d) if d > -745 else 0.0
    if ta and not tb:
        if b == 0:
            raise DomainError("division by zero", b)
        if b < 0:
            raise TowerOverflow("quotient is a huge negative number")
    if ta and tb and tr.compare(a, b) < 0:
        q = div(b, a)
        return 0.0 if isinstance(q, TowerReal) else 1.0 / q
    return exp(sub(log(a), log(b)))


def power(a, b):
    """a ** b over floats and towers; negative bases need integer exponents."""
    ta, tb = isinstance(a, TowerReal), isinstance(b, TowerReal)
    if not ta and not tb:
        if a < 0 and not float(b).is_integer():
            raise DomainError(f"negative base {a} with non-integer exponent {b}", a)
        if a == 0:
            if b < 0:
                raise DomainError("zero to a negative power", a)
            return 1.0 if b == 0 else 0.0
        try:
            return float(a) ** float(b)
        except OverflowError:
            pass
        if a < 0:
            if int(b) % 2:
                raise TowerOverflow("power is a huge negative number")
            a = -a
        return exp(mul(b, math.log(a)))
    if ta:
        if tb or b > 0:
            return exp(mul(b, log(a)))
        if b == 0:
            return 1.0
        return div(1.0, exp(mul(-b, log(a))))
    # float base, tower exponent
    if a <= 0:
        raise DomainError(f"base {a} with a huge exponent", a)
    if a == 1:
        return 1.0
    if a > 1:
        return exp(mul(b, math.log(a)))
    return 0.0


def superlog(v) -> float:
    """Number of logs taken to reach [1, e), plus log of what is left.

    Used as a coordinate in which towers of any height are ordinary reals.
    """
    if isinstance(v, TowerReal):
        return v.height + math.log(v.mantissa)
    if not v >= 1.0:
        raise DomainError(f"superlog of {v} < 1", v)
    k = 0
    while v >= math.e:
        v = math.log(v)
        k += 1
    return k + math.log(v)


def superexp(u: float):
    if not u >= 0:
        raise DomainError(f"superexp of negative {u}", u)
    k = math.floor(u)
    return canon(tr.normalize(k, math.exp(u - k)))

"""Exact Ackermann values and a continuous extension A_m = G_m^-1.

Conventions: A(m, 0) = 2, A(0, n) = n + 2, A(m, n+1) = A(m-1, A(m, n)).
Hence A(m, n) is the n-th iterate of A(m-1, .) started at 2.  The inverses
G_m of the continuous extensions satisfy G_m(x) = G_m(G_{m-1}(x)) + 1.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from numbers import Integral
from typing import Optional

from . import mixed
from .abel import AbelFunction, make_seed
from .towerreal import TowerReal, TowerOverflow

DEFAULT_BIT_BUDGET = 2 ** 20
DEFAULT_MAX_LEVEL = 5
LN2 = math.log(2.0)


class UnsupportedParameter(ValueError):
    """Non-integer level: nothing is constructed between integer levels."""


class _TooLarge(Exception):
    pass


@dataclass(frozen=True)
class AckValue:
    kind: str  # exact | approx | too-large
    value: Optional[int] = None
    tower: Optional[TowerReal] = None
    base2_height: Optional[int] = None
    bits: Optional[int] = None

    def to_dict(self, max_digits: int = 10_000) -> dict:
        out = {"kind": self.kind}
        if self.kind == "exact":
            bl = self.value.bit_length()
            out["bit_length"] = bl
            # cheap digit estimate avoids converting huge ints just to measure them
            if bl * 0.30103 < max_digits - 1:
                out["value"] = _decimal(self.value, max_digits)
            else:
                out["leading_digits"] = _leading_digits(self.value, 20)
                out["digits"] = _digit_count(self.value)
        elif self.kind == "approx":
            out["value"] = self.tower if self.tower is not None else str(self.value)
            out["base2_height"] = self.base2_height
        else:
            out["bit_budget"] = self.bits
        return out


def _decimal(v: int, max_digits: int) -> str:
    # newer interpreters cap int -> str conversions; lift the cap just for this call
    get = getattr(sys, "get_int_max_str_digits", None)
    if get is None or get() == 0 or get() > max_digits:
        return str(v)
    old = get()
    sys.set_int_max_str_digits(max_digits + 1)
    try:
        return str(v)
    finally:
        sys.set_int_max_str_digits(old)


def _digit_count(v: int) -> int:
    d = int(v.bit_length() * math.log10(2))
    return d + 1 if v >= 10 ** d else d


def _leading_digits(v: int, k: int) -> str:
    d = _digit_count(v)
    return str(v // 10 ** max(0, d - k))


def _check_level(m):
    if isinstance(m, bool) or not isinstance(m, Integral):
        if isinstance(m, float) and m.is_integer():
            return int(m)
        raise UnsupportedParameter(f"level m must be an integer, got {m!r}")
    if m < 0:
        raise ValueError("level m must be >= 0")
    return int(m)


# ---------------------------------------------------------------- exact


def _affine_power(a: int, b: int, count: int, budget: int):
    """Compose y -> a y + b with itself ``count`` times; returns (A, B)."""
    ra, rb = 1, 0
    pa, pb = a, b
    while count:
        if count & 1:
            ra, rb = pa * ra, pa * rb + pb
        count >>= 1
        if count:
            pa, pb = pa * pa, pa * pb + pb
        if ra.bit_length() > budget or pa.bit_length() > 2 * budget:
            raise _TooLarge
    return ra, rb


class _Exact:
    def __init__(self, budget: int):
        self.budget = budget
        self.memo: dict = {}

    def ack(self, m: int, n: int) -> int:
        key = (m, n)
        if key in self.memo:
            return self.memo[key]
        if n == 0:
            v = 2
        elif m == 0:
            v = n + 2
        else:
            v = self.iterate(m - 1, n, 2)
        if v.bit_length() > self.budget:
            raise _TooLarge
        self.memo[key] = v
        return v

    def iterate(self, level: int, count: int, y: int) -> int:
        """A(level, .) applied ``count`` times to y."""
        if level == 0:
            return y + 2 * count
        if level == 1:
            # A(1, z) = A(0,.)^z(2) = 2z + 2; iterate the affine map exactly
            if count + (y + 2).bit_length() > self.budget + 1:
                raise _TooLarge
            a, b = _affine_power(2, 2, count, self.budget)
            return a * y + b
        for _ in range(count):
            y = self.ack(level, y)
        return y


_EXACT_CACHE: dict = {}


def ack_exact(m: int, n: int, bit_budget: int = DEFAULT_BIT_BUDGET) -> AckValue:
    """Exact A(m, n), or a too-large marker beyond ``bit_budget`` bits."""
    m = _check_level(m)
    if n < 0:
        raise ValueError("n must be >= 0")
    solver = _EXACT_CACHE.setdefault(bit_budget, _Exact(bit_budget))
    try:
        return AckValue("exact", value=solver.ack(m, int(n)))
    except _TooLarge:
        return AckValue("too-large", bits=bit_budget)


def ack_closed_form(m: int, n: int) -> int:
    """Cross-check values for m <= 2."""
    if m == 0:
        return n + 2
    if m == 1:
        return 2 * n + 2
    if m == 2:
        return 2 ** (n + 2) - 2
    raise ValueError("closed forms exist only for m <= 2")


def ack_tower_estimate(m: int, n: int) -> AckValue:
    """A(3, n) = 2^2^...^2 (n+2 twos) - 2 as a float or TowerReal."""
    m = _check_level(m)
    if m != 3:
        raise UnsupportedParameter("tower estimate is implemented for m = 3 only")
    if n < 0:
        raise ValueError("n must be >= 0")
    v = 2.0
    for _ in range(n + 1):
        v = mixed.power(2.0, v)
    v = mixed.sub(v, 2.0)
    if isinstance(v, TowerReal):
        return AckValue("approx", tower=v, base2_height=n + 2)
    return AckValue("approx", tower=None, value=int(round(v)), base2_height=n + 2)


# ----------------------------------------------------------- continuous


class GFamily:
    """G_0, ..., G_max with G_m(x) = G_m(G_{m-1}(x)) + 1 and A_m = G_m^-1."""

    def __init__(self, max_level: int = DEFAULT_MAX_LEVEL, iteration_cap: int = 1_000_000):
        self.max_level = max_level
        self.abel: dict[int, AbelFunction] = {}
        for m in range(3, max_level + 1):
            a = self._base_point(m)
            fwd = (lambda t, j=m - 1: self.a_eval(j, t))
            back = (lambda x, j=m - 1: self.g_eval(j, x))
            der = (lambda t, j=m - 1: self.a_prime(j, t))
            top = mixed.to_float(fwd(a))
            seed = make_seed("loglinear", a, top, der(a))
            self.abel[m] = AbelFunction(fwd, back, der, a, seed, name=f"A_{m - 1}",
                                        iteration_cap=iteration_cap)

    def _base_point(self, m: int) -> float:
        # 2 when A_{m-1}(2) is still a native number, else 1
        try:
            mixed.to_float(self.a_eval(m - 1, 2.0))
            return 2.0
        except (TowerOverflow, OverflowError):
            return 1.0

    def _check(self, m):
        m = _check_level(m)
        if m > self.max_level:
            raise ValueError(f"level {m} above configured max {self.max_level}")
        return m

    def g_eval(self, m, x):
        m = self._check(m)
        if m == 0:
            return mixed.sub(x, 2.0)
        if m == 1:
            return mixed.sub(mixed.div(x, 2.0), 1.0)
        if m == 2:
            return mixed.sub(mixed.div(mixed.log(mixed.add(x, 2.0)), LN2), 2.0)
        return self.abel[m](x)

    def a_eval(self, m, t):
        m = self._check(m)
        if m == 0:
            return mixed.add(t, 2.0)
        if m == 1:
            return mixed.add(mixed.mul(t, 2.0), 2.0)
        if m == 2:
            return mixed.sub(mixed.power(2.0, mixed.add(t, 2.0)), 2.0)
        return self.abel[m].inverse(t)

    def a_prime(self, m, t) -> float:
        m = self._check(m)
        if m == 0:
            return 1.0
        if m == 1:
            return 2.0
        if m == 2:
            return LN2 * 2.0 ** (t + 2.0)
        return 1.0 / self.abel[m].derivative(self.a_eval(m, t))

    def residual(self, m, x) -> float:
        """G_m(x) - G_m(G_{m-1}(x)) - 1."""
        return self.g_eval(m, x) - self.g_eval(m, self.g_eval(m - 1, x)) - 1.0

    def domain(self, m) -> tuple:
        """Fundamental domain [a, A_{m-1}(a)) of G_m for m >= 3."""
        F = self.abel[self._check(m)]
        return F.a, F.top


_DEFAULT_FAMILY: Optional[GFamily] = None


def default_family() -> GFamily:
    global _DEFAULT_FAMILY
    if _DEFAULT_FAMILY is None:
        _DEFAULT_FAMILY = GFamily()
    return _DEFAULT_FAMILY


def g_eval(m, x):
    return default_family().g_eval(m, x)


def a_eval(m, t):
    return default_family().a_eval(m, t)

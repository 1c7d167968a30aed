"""Level-index numbers: values e_h(v) stored as (height, mantissa).

A ``TowerReal`` with height ``h`` and mantissa ``v`` represents the h-fold
exponential ``exp(exp(...exp(v)))``.  The mantissa is kept in ``[1, e)`` so
that comparison is lexicographic on ``(height, mantissa)`` and the Abel
function of ``exp`` based at 1 is simply ``height + log(mantissa)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

E = math.e
MAX_HEIGHT = 64
# largest value still handed back as a native float by to_real()
NATIVE_LIMIT = 1e300


class TowerDomainError(ValueError):
    """Value would fall below the representable range (< 1)."""


class TowerHeightError(OverflowError):
    """Height cap exceeded."""


class TowerOverflow(OverflowError):
    """Tower value does not fit in a native float."""


@dataclass(frozen=True)
class TowerReal:
    height: int
    mantissa: float
    absorbed: bool = field(default=False, compare=False)

    def __repr__(self):
        flag = ", absorbed" if self.absorbed else ""
        return f"TowerReal({self.height}, {self.mantissa!r}{flag})"

    def __str__(self):
        return format_tower(self)

    def _key(self):
        return (self.height, self.mantissa)

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def with_absorbed(self, flag=True):
        return TowerReal(self.height, self.mantissa, flag)


def normalize(h: int, v: float, max_height: int = MAX_HEIGHT) -> TowerReal:
    """Canonical form of e_h(v): mantissa pulled into [1, e)."""
    if math.isnan(v) or h < 0:
        raise TowerDomainError(f"invalid tower ({h}, {v})")
    if math.isinf(v):
        raise TowerOverflow("infinite mantissa")
    while v >= E:
        v = math.log(v)
        h += 1
    while v < 1.0 and h > 0:
        v = math.exp(v)
        h -= 1
    if v < 1.0:
        raise TowerDomainError(f"value {v} is below 1")
    if h > max_height:
        raise TowerHeightError(f"height {h} exceeds cap {max_height}")
    return TowerReal(h, v)


def compare(a: TowerReal, b: TowerReal) -> int:
    """-1, 0 or 1; exact because canonical forms order lexicographically."""
    ka, kb = a._key(), b._key()
    return (ka > kb) - (ka < kb)


def exp_t(a: TowerReal, max_height: int = MAX_HEIGHT) -> TowerReal:
    if a.height + 1 > max_height:
        raise TowerHeightError(f"height {a.height + 1} exceeds cap {max_height}")
    return TowerReal(a.height + 1, a.mantissa)


def log_t(a: TowerReal) -> TowerReal:
    if a.height >= 1:
        return TowerReal(a.height - 1, a.mantissa)
    # log of a mantissa in [1, e) lands in [0, 1)
    raise TowerDomainError(f"log of {a} is below 1")


def from_real(x: float, max_height: int = MAX_HEIGHT) -> TowerReal:
    if not x >= 1.0:
        raise TowerDomainError(f"{x} is below 1")
    return normalize(0, float(x), max_height)


def to_real(a: TowerReal) -> float:
    """Native value; raises TowerOverflow when it does not fit."""
    v = a.mantissa
    for _ in range(a.height):
        if v > 709.78:
            raise TowerOverflow(f"{a} exceeds native range")
        v = math.exp(v)
    if v > NATIVE_LIMIT:
        raise TowerOverflow(f"{a} exceeds native range")
    return v


def try_real(a: TowerReal):
    try:
        return to_real(a)
    except TowerOverflow:
        return None


def _log_real(a: TowerReal):
    """log of the value as a float, or None when that log is itself huge."""
    if a.height == 0:
        return math.log(a.mantissa)
    return try_real(log_t(a))


def _from_log(s: float, max_height: int = MAX_HEIGHT) -> TowerReal:
    """Tower for exp(s), s a native real with exp(s) >= 1."""
    if s >= 1.0:
        return exp_t(from_real(s, max_height), max_height)
    return from_real(math.exp(s), max_height)


def add_real(a: TowerReal, d: float) -> TowerReal:
    """a + d for a native real d; the dominant tower absorbs d when needed."""
    if d == 0:
        return a
    x = try_real(a)
    if x is None:
        return a.with_absorbed(True)
    s = x + d
    if s == x:
        return a.with_absorbed(True)
    return from_real(s)


def add(a: TowerReal, b: TowerReal) -> TowerReal:
    """Sum of two towers.

    Native arithmetic is used while both operands fit; otherwise the sum is
    formed as ``log(a + b) = log a + log1p(b / a)`` one level down.  When the
    smaller operand cannot change the result it is dropped and the returned
    value carries ``absorbed=True``.
    """
    hi, lo = (a, b) if compare(a, b) >= 0 else (b, a)
    x, y = try_real(hi), try_real(lo)
    if x is not None and y is not None:
        s = x + y
        if s == x:
            return hi.with_absorbed(True)
        if s <= NATIVE_LIMIT:
            return from_real(s)
    if hi.height - lo.height >= 2:
        return hi.with_absorbed(True)
    la, lb = log_t(hi), (log_t(lo) if lo.height >= 1 else None)
    ra = try_real(la)
    if lb is None:
        rb = math.log(lo.mantissa)
    else:
        rb = try_real(lb)
    if ra is not None and rb is not None:
        ratio = math.exp(rb - ra)
    else:
        ratio = 1.0 if lo == hi else 0.0
    d = math.log1p(ratio)
    if d == 0:
        return hi.with_absorbed(True)
    inner = add_real(la, d)
    return exp_t(inner).with_absorbed(inner.absorbed)


def mul(a: TowerReal, b: TowerReal) -> TowerReal:
    """Product, computed as exp(log a + log b)."""
    hi, lo = (a, b) if compare(a, b) >= 0 else (b, a)
    la, lb = _log_real(hi), _log_real(lo)
    if la is not None and lb is not None:
        s = la + lb
        if s == la and lb != 0:
            return hi.with_absorbed(True)
        return _from_log(s)
    if hi.height - lo.height >= 2 and lo.height >= 1:
        # log hi is a tower and log lo is negligible against it
        return hi.with_absorbed(True)
    tla = log_t(hi)
    if lo.height >= 1:
        inner = add(tla, log_t(lo))
    else:
        inner = add_real(tla, math.log(lo.mantissa))
    return exp_t(inner).with_absorbed(inner.absorbed)


_TEXT = re.compile(r"^T\[(\d+);([^\]]+)\]$")


def format_tower(a: TowerReal) -> str:
    return f"T[{a.height};{a.mantissa:.17g}]"


def parse_tower(text: str) -> TowerReal:
    m = _TEXT.match(text.strip())
    if not m:
        raise ValueError(f"not a tower literal: {text!r}")
    return TowerReal(int(m.group(1)), float(m.group(2)))

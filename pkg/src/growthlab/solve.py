"""Inversion of increasing functions over floats and towers."""

from __future__ import annotations

import math

from scipy.optimize import brentq

from . import mixed
from .towerreal import TowerReal, TowerOverflow, TowerHeightError


class BracketError(ValueError):
    """No sign change found; the function is not increasing as declared."""


def invert_increasing(fn, target, lo, hi=None, rtol=1e-12, max_grow=200):
    """Solve fn(y) = target for increasing ``fn`` with y >= lo.

    Floats are handled with Brent's method after growing ``hi``
    geometrically; anything involving towers is bisected in superlog
    coordinates, where every magnitude is an ordinary real.
    """
    if hi is None:
        hi = mixed.mul(mixed.canon(lo) if not isinstance(lo, TowerReal) else lo, 2.0)
        if not isinstance(hi, TowerReal) and hi <= lo:
            hi = lo + 1.0
    grow = 0
    while True:
        try:
            above = mixed.cmp(fn(hi), target) >= 0
        except (TowerOverflow, TowerHeightError):
            above = True
        if above:
            break
        grow += 1
        if grow > max_grow:
            raise BracketError(f"could not bracket target {target}")
        hi = mixed.mul(hi, 2.0) if isinstance(hi, TowerReal) else (hi * 2.0 if hi > 0 else hi + 1.0)
    if mixed.cmp(fn(lo), target) > 0:
        raise BracketError(f"f({lo}) already exceeds target {target}")

    native = not any(isinstance(v, TowerReal) for v in (lo, hi, target))
    if native:
        try:
            if math.isfinite(mixed.to_float(fn(hi))):
                def g(y):
                    return mixed.to_float(fn(y)) - target
                glo, ghi = g(lo), g(hi)
                if glo == 0:
                    return lo
                if ghi == 0:
                    return hi
                if glo < 0 < ghi:
                    return brentq(g, lo, hi, xtol=1e-300, rtol=max(rtol, 4.5e-16), maxiter=500)
        except (TowerOverflow, TowerHeightError):
            pass

    if mixed.cmp(lo, 1.0) < 0:
        # shift into superlog range for bisection
        if not native:
            raise BracketError("tower bisection needs lo >= 1")
    ulo, uhi = mixed.superlog(mixed.canon(max(lo, 1.0)) if not isinstance(lo, TowerReal) else lo), mixed.superlog(hi)
    for _ in range(200):
        mid = 0.5 * (ulo + uhi)
        if mid in (ulo, uhi):
            break
        try:
            ok = mixed.cmp(fn(mixed.superexp(mid)), target) >= 0
        except (TowerOverflow, TowerHeightError):
            ok = True
        if ok:
            uhi = mid
        else:
            ulo = mid
    return mixed.superexp(0.5 * (ulo + uhi))

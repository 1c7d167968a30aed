"""C^1 Abel functions: F(f(x)) = F(x) + 1.

A seed G is chosen on the fundamental domain [a, f(a)) subject to
G(f(a)) f'(a) = G(a), extended by G(f(x)) f'(x) = G(x), and integrated:
F(x) = c * int_a^x G with c normalising F(f(a)) = 1.  Outside the
fundamental domain F is evaluated by descending with f^-1 and counting
steps, so only the seed integral is ever computed numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from . import mixed, towerreal as tr
from .expr import Expr, differentiate, evaluate, parse
from .mixed import DomainError
from .solve import invert_increasing
from .towerreal import TowerReal

DEFAULT_ITERATION_CAP = 1_000_000
BOUNDARY_RTOL = 1e-12


class BudgetExceeded(RuntimeError):
    """Iteration cap hit while descending to the fundamental domain."""


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class SeedFunction:
    """Positive seed G on [a, top] with G(top) * f'(a) = G(a)."""

    kind: str  # "reciprocal", "loglinear" or "custom"
    a: float
    top: float
    g_a: float
    g_top: float
    beta: float = 0.0
    func: object = None

    def __call__(self, y: float) -> float:
        if self.kind == "reciprocal":
            return 1.0 / y
        if self.kind == "loglinear":
            return self.g_a * math.exp(self.beta * (y - self.a))
        return self.func(y)

    def integral(self, y: float) -> float:
        """int_a^y G."""
        a = self.a
        if self.kind == "reciprocal":
            return math.log(y / a)
        if self.kind == "loglinear":
            if self.beta == 0:
                return self.g_a * (y - a)
            return self.g_a * math.expm1(self.beta * (y - a)) / self.beta
        val, _ = quad(self.func, a, y, epsabs=1e-12, epsrel=1e-12, limit=200)
        return val

    def integral_inverse(self, s: float) -> float:
        """y with int_a^y G = s."""
        a = self.a
        if self.kind == "reciprocal":
            return a * math.exp(s)
        if self.kind == "loglinear":
            if self.beta == 0:
                return a + s / self.g_a
            return a + math.log1p(self.beta * s / self.g_a) / self.beta
        return invert_increasing(self.integral, s, a, self.top)


def make_seed(kind: str, a: float, top: float, fprime_a: float, func=None) -> SeedFunction:
    if kind == "reciprocal":
        if a <= 0:
            raise PreconditionError("reciprocal seed needs a > 0")
        # G(top) f'(a) = G(a)  <=>  top = a f'(a)
        if abs(top - a * fprime_a) > BOUNDARY_RTOL * abs(top):
            raise PreconditionError(
                f"reciprocal seed needs f(a) = a f'(a); got {top} vs {a * fprime_a}")
        return SeedFunction("reciprocal", a, top, 1.0 / a, 1.0 / top)
    if kind == "loglinear":
        beta = -math.log(fprime_a) / (top - a)
        return SeedFunction("loglinear", a, top, 1.0, 1.0 / fprime_a, beta)
    if kind == "custom":
        g_a, g_top = func(a), func(top)
        if not (g_a > 0 and g_top > 0):
            raise PreconditionError("seed must be positive")
        if abs(g_top * fprime_a - g_a) > BOUNDARY_RTOL * abs(g_a):
            raise PreconditionError("seed violates G(f(a)) f'(a) = G(a)")
        return SeedFunction("custom", a, top, g_a, g_top, func=func)
    raise PreconditionError(f"unknown seed kind {kind!r}")


class AbelFunction:
    """A constructed Abel function F of an increasing map f with f(x) > x.

    ``forward``/``backward`` are f and f^-1 on floats or towers;
    ``fprime`` is f' on floats.
    """

    def __init__(self, forward, backward, fprime, a, seed, *, name="f",
                 iteration_cap=DEFAULT_ITERATION_CAP, exp_map=False):
        self.forward = forward
        self.backward = backward
        self.fprime = fprime
        self.a = float(a)
        self.top = seed.top
        self.seed = seed
        self.c = 1.0 / seed.integral(seed.top)
        self.name = name
        self.iteration_cap = iteration_cap
        # f = exp with a = 1 and the reciprocal seed: towers evaluate in closed form
        self.exp_map = exp_map and seed.kind == "reciprocal" and self.a == 1.0

    def __repr__(self):
        return f"AbelFunction({self.name}, a={self.a}, seed={self.seed.kind})"

    def base(self, y: float) -> float:
        return self.c * self.seed.integral(y)

    def base_inverse(self, r: float) -> float:
        return self.seed.integral_inverse(r / self.c)

    def descend(self, x):
        """(k, y) with y = f^-k(x) in [a, f(a))."""
        if mixed.cmp(x, self.a) < 0:
            raise DomainError(f"{x} is below the base point {self.a}", x)
        k = 0
        while mixed.cmp(x, self.top) >= 0:
            x = self.backward(x)
            k += 1
            if k > self.iteration_cap:
                raise BudgetExceeded(f"more than {self.iteration_cap} descents")
        return k, mixed.to_float(x)

    def __call__(self, x) -> float:
        if self.exp_map and isinstance(x, TowerReal):
            return x.height + math.log(x.mantissa)
        k, y = self.descend(x)
        if y < self.a:
            y = self.a
        return k + self.base(y)

    def inverse(self, t):
        if isinstance(t, TowerReal) or t > self.iteration_cap:
            raise BudgetExceeded(f"Abel inverse at {t} needs more than {self.iteration_cap} ascents")
        if t < 0:
            raise DomainError(f"Abel inverse needs t >= 0, got {t}", t)
        k = math.floor(t)
        r = t - k
        y = self.base_inverse(r)
        if self.exp_map:
            return mixed.canon(tr.normalize(k, y))
        for _ in range(k):
            y = self.forward(y)
        return y

    def derivative(self, x: float) -> float:
        """F'(x) = c G(x), with G carried out of the fundamental domain."""
        k, y = self.descend(x)
        g = self.seed(y)
        for _ in range(k):
            g /= self.fprime(y)
            y = mixed.to_float(self.forward(y))
        return self.c * g

    def iterate(self, t, x):
        """t-th iterate of f at x: F^-1(F(x) + t)."""
        s = self(x) + float(t)
        if s < 0:
            raise DomainError(f"iterate {t} leaves the domain at {x}", x)
        return self.inverse(s)


def _sample_points(a, top, forward):
    pts = [a + (top - a) * q for q in (0.0, 0.25, 0.5, 0.75)]
    y = top
    for _ in range(3):
        pts.append(y)
        nxt = forward(y)
        if isinstance(nxt, TowerReal) or nxt > 1e12:
            break
        y = 0.5 * (y + nxt)
    return pts


def build_abel(f, a: float, seed_kind: str = "auto", f_inverse=None, *, ctx=None,
               seed_func=None, iteration_cap=DEFAULT_ITERATION_CAP) -> AbelFunction:
    """Abel function of the expression ``f`` based at ``a``.

    ``seed_kind`` is "reciprocal", "loglinear", "custom" (with ``seed_func``)
    or "auto" (reciprocal when its boundary condition holds).  ``f_inverse``
    may give f^-1 in closed form; otherwise f^-1 is found by bracketed root
    finding.
    """
    if isinstance(f, str):
        f = parse(f)
    if isinstance(f_inverse, str):
        f_inverse = parse(f_inverse)
    df = differentiate(f)

    def forward(v):
        return evaluate(f, v, ctx)

    def fprime(v):
        return mixed.to_float(evaluate(df, v, ctx))

    if f_inverse is not None:
        def backward(v):
            return evaluate(f_inverse, v, ctx)
    else:
        def backward(v):
            return invert_increasing(forward, v, a, v)

    a = float(a)
    top = mixed.to_float(forward(a))
    pts = _sample_points(a, top, forward)
    prev = None
    for p in pts:
        fp = forward(p)
        if mixed.cmp(fp, p) <= 0:
            raise PreconditionError(f"need f(x) > x; fails at x={p}")
        if prev is not None and mixed.cmp(fp, prev) <= 0:
            raise PreconditionError(f"f is not increasing near x={p}")
        if not isinstance(fp, TowerReal) and not fprime(p) > 0:
            raise PreconditionError(f"f' is not positive at x={p}")
        prev = fp
    fa = fprime(a)
    if seed_kind == "auto":
        ok = a > 0 and abs(top - a * fa) <= BOUNDARY_RTOL * abs(top)
        seed_kind = "reciprocal" if ok else "loglinear"
    seed = make_seed(seed_kind, a, top, fa, seed_func)
    exp_map = isinstance(f, Expr) and str(f) == "exp(x)"
    return AbelFunction(forward, backward, fprime, a, seed, name=str(f),
                        iteration_cap=iteration_cap, exp_map=exp_map)


def abel_eval(F: AbelFunction, x) -> float:
    return F(x)


def abel_inverse(F: AbelFunction, t: float):
    return F.inverse(t)


def abel_derivative(F: AbelFunction, x: float) -> float:
    return F.derivative(x)


def frac_iterate(F: AbelFunction, t, x):
    return F.iterate(t, x)

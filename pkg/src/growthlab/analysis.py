"""Orders of growth, comparisons in Abel coordinates and the class-chain search.

All limits are estimated by sampling far out along iterated-exponential
scales.  Orders are sampled in the coordinates of the reference function F
itself (points x_j with F(x_j) spread geometrically), which keeps F-values
moderate so that F(f(x)) - F(x) does not suffer catastrophic cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import mixed
from .abel import AbelFunction, build_abel
from .expr import (X, AbelApply, Const, Expr, ExpK, LogK, Pow, Xi, XiInv,
                   evaluate, parse, substitute, to_text)
from .mixed import DomainError
from .tower import Tower, default_tower
from .towerreal import TowerReal, TowerOverflow

EVAL_ERRORS = (ArithmeticError, ValueError, RuntimeError)
S_CAP = 1e6


class SampleError(RuntimeError):
    """Evaluation failed at a schedule point."""

    def __init__(self, x, cause):
        super().__init__(f"evaluation failed at x={x}: {cause}")
        self.x = x
        self.cause = cause


@dataclass(frozen=True)
class Schedule:
    """Sampling range in Xi_level coordinates: x_j = Xi_level^-1(j)."""

    level: int = 3
    start: float = 2.0
    step: float = 1.0
    stop: float = 40.0

    def __post_init__(self):
        if not self.start < self.stop:
            raise ValueError("schedule start must be below stop")
        if not self.step > 0:
            raise ValueError("schedule step must be positive")
        if not 1 <= self.level <= 3:
            raise ValueError("schedule level must be 1, 2 or 3")

    @property
    def count(self) -> int:
        return int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1

    def coords(self) -> list:
        return [self.start + i * self.step for i in range(self.count)]

    def points(self, tower: Tower) -> list:
        return [tower.xi_inv(self.level, j) for j in self.coords()]


DEFAULT_SCHEDULE = Schedule()


@dataclass
class OrderEstimate:
    status: str  # converged | diverged_to_infinity | tending_to_zero | inconclusive
    value: Optional[float]
    samples: list
    tolerance: float

    def to_dict(self) -> dict:
        return {"status": self.status, "value": self.value, "tolerance": self.tolerance,
                "samples": [[x, d] for x, d in self.samples]}


@dataclass
class ChainStep:
    r: int
    f: str
    F: str
    source: str  # xi | catalog | abel
    probe: Optional[float]
    evidence: OrderEstimate

    def to_dict(self) -> dict:
        return {"r": self.r, "f": self.f, "F": self.F, "source": self.source,
                "probe": self.probe, "evidence": self.evidence.to_dict()}


@dataclass
class ClassResult:
    n: Optional[int]
    k: Optional[int]
    chain: list
    status: str  # verified-at-depth | budget-exhausted | not-finite-class
    membership: Optional[str] = None
    note: str = ""

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "status": self.status,
                "membership": self.membership, "note": self.note,
                "chain": [s.to_dict() for s in self.chain]}


# ---------------------------------------------------------------- helpers


def _expr(f) -> Expr:
    if isinstance(f, str):
        return parse(f)
    if isinstance(f, int):
        return Xi(f, X)
    if isinstance(f, AbelFunction):
        return AbelApply(f, False, X, f.name)
    return f


def _as_float(v) -> float:
    return math.inf if isinstance(v, TowerReal) else float(v)


def _superlog(x) -> float:
    return mixed.superlog(x) if mixed.cmp(x, 1.0) >= 0 else 0.0


def _f_coordinate_points(F: Expr, sched: Schedule, tower: Tower) -> list:
    """Points x_j with F(x_j) spread geometrically over the schedule's range."""
    x_lo, x_hi = tower.xi_inv(sched.level, sched.start), tower.xi_inv(sched.level, sched.stop)
    u_lo, u_hi = _superlog(x_lo), _superlog(x_hi)

    def Fu(u):
        return evaluate(F, mixed.superexp(u), tower)

    s_lo = _as_float(Fu(u_lo))
    for _ in range(40):
        try:
            top = Fu(u_hi)
            break
        except EVAL_ERRORS:
            u_hi = 0.5 * (u_lo + u_hi)
    else:
        raise SampleError(x_hi, "F not evaluable on the schedule")
    s_hi = min(S_CAP, _as_float(top))
    if not s_hi > s_lo:
        raise DomainError("F is not increasing on the schedule", x_hi)
    count = sched.count
    span = s_hi - s_lo + 1.0
    targets = [s_lo - 1.0 + span ** (i / (count - 1)) for i in range(count)]
    targets[0], targets[-1] = s_lo, s_hi
    pts = []
    lo = u_lo
    for s in targets:
        a, b = lo, u_hi
        for _ in range(64):
            mid = 0.5 * (a + b)
            if mid in (a, b):
                break
            try:
                above = mixed.cmp(Fu(mid), s) >= 0
            except EVAL_ERRORS:
                above = True
            if above:
                b = mid
            else:
                a = mid
        pts.append(mixed.superexp(b))
        lo = a
    return pts


def _classify_samples(values: list, tol: float):
    d = [_as_float(v) for v in values]
    last = d[-3:]
    if all(math.isfinite(v) for v in last):
        if max(last) - min(last) < tol:
            return "converged", last[-1]
    tail = d[-5:]
    mags = [abs(v) for v in tail]
    if all(math.isfinite(v) for v in tail) and all(b < a for a, b in zip(mags, mags[1:])):
        if mags[-1] < tol:
            return "tending_to_zero", None
        if mags[-1] > 0 and mags[0] > 0:
            # power-law decay in the sample index signals a zero limit
            slope = math.log(mags[-1] / mags[0]) / math.log(len(d) / (len(d) - 4))
            if slope <= -0.5 and mags[-1] <= 0.25 * abs(d[0]):
                return "tending_to_zero", None
    if all(b > a for a, b in zip(tail, tail[1:])) and d[-1] > d[0] + 10 * tol:
        diffs = [b - a for a, b in zip(tail, tail[1:])]
        if d[-1] > S_CAP or not math.isfinite(d[-1]) or all(
                b >= 0.9 * a for a, b in zip(diffs, diffs[1:])):
            return "diverged_to_infinity", None
    return "inconclusive", None


# ------------------------------------------------------------- operations


def order(f, F, sched: Schedule = DEFAULT_SCHEDULE, tol: float = 1e-3,
          tower: Tower | None = None) -> OrderEstimate:
    """Estimate lim F(f(x)) - F(x)."""
    tw = tower or default_tower()
    f, F = _expr(f), _expr(F)
    FoF = substitute(F, f)
    samples = []
    for x in _f_coordinate_points(F, sched, tw):
        try:
            d = mixed.sub(evaluate(FoF, x, tw), evaluate(F, x, tw))
        except TowerOverflow:
            d = -math.inf  # huge negative difference
        except EVAL_ERRORS as exc:
            raise SampleError(x, exc) from exc
        samples.append((x, d))
    status, value = _classify_samples([d for _, d in samples], tol)
    return OrderEstimate(status, value, samples, tol)


def compare(f, g, sched: Schedule = DEFAULT_SCHEDULE, tol: float = 1e-3,
            tower: Tower | None = None) -> tuple:
    """Verdict on f versus g from the gap Xi_3(f) - Xi_3(g); returns (verdict, samples)."""
    tw = tower or default_tower()
    f, g = _expr(f), _expr(g)
    xf, xg = substitute(Xi(3, X), f), substitute(Xi(3, X), g)
    samples = []
    for x in sched.points(tw):
        try:
            gap = evaluate(xf, x, tw) - evaluate(xg, x, tw)
        except EVAL_ERRORS as exc:
            raise SampleError(x, exc) from exc
        samples.append((x, gap))
    tail = [s for _, s in samples[-5:]]
    if all(s >= tol for s in tail):
        verdict = "f>g"
    elif all(s <= -tol for s in tail):
        verdict = "f<g"
    elif all(abs(s) < tol for s in tail):
        verdict = "comparable-gap-vanishing"
    else:
        verdict = "inconclusive"
    return verdict, samples


U_NATIVE = mixed.superlog(1e300)
FD_STEP = 1e-7


def in_B(f, n: int, sched: Schedule = DEFAULT_SCHEDULE, tol: float = 1e-2,
         tower: Tower | None = None) -> tuple:
    """Test (Xi_n o f)' / Xi_n' -> 1; returns (verdict, samples).

    The ratio f'(x) chi_n(x) / chi_n(f(x)) is formed as a quotient of central
    differences in the coordinate u = Xi_3(x), where every level n >= 3 is a
    native real even when x is a tower.  Levels 1 and 2 are sampled only
    where x is native.  ``f`` may be an expression or a Python callable.
    """
    tw = tower or default_tower()
    if callable(f) and not isinstance(f, Expr):
        def P(x):
            return tw.xi(n, f(x))
    else:
        probe = substitute(Xi(n, X), _expr(f))

        def P(x):
            return evaluate(probe, x, tw)
    us = [_superlog(x) for x in sched.points(tw)]
    if n <= 2:
        lo, hi = us[0], min(us[-1], U_NATIVE)
        us = [lo + (hi - lo) * i / (len(us) - 1) for i in range(len(us))]
    samples = []
    for u in us:
        xp, xm = mixed.superexp(u + FD_STEP), mixed.superexp(u - FD_STEP)
        try:
            dp = mixed.sub(P(xp), P(xm))
            dq = tw.xi(n, xp) - tw.xi(n, xm)
        except TowerOverflow:
            dp, dq = math.inf, 1.0
        except EVAL_ERRORS:
            continue
        ratio = _as_float(dp) / dq
        samples.append((mixed.superexp(u), ratio))
    if len(samples) < 3:
        return "inconclusive", samples
    tail = [r for _, r in samples[-3:]]
    if all(abs(r - 1.0) <= tol for r in tail):
        return f"accepted({n})", samples
    return "rejected", samples


def order_profile(f, M: int, sched: Schedule = DEFAULT_SCHEDULE, tol: float = 1e-3,
                  tower: Tower | None = None) -> list:
    """[(m, OrderEstimate or SampleError)] for m = 1..M."""
    out = []
    for m in range(1, M + 1):
        try:
            out.append((m, order(f, m, sched, tol, tower)))
        except EVAL_ERRORS as exc:
            out.append((m, exc if isinstance(exc, SampleError) else SampleError(None, exc)))
    return out


# ------------------------------------------------------------- classifier

_LOG_NAMES = {k: math.log(k) for k in range(2, 11)}


def _snap(v: float, tol: float = 1e-6, coarse: float = 0.0) -> Expr:
    """A readable constant close to v: log(k), a small rational, or the float.

    ``coarse`` widens the rational match for slowly converging estimates.
    """
    scale = max(1.0, abs(v))
    for k, lk in _LOG_NAMES.items():
        for p in (1, 2, 3):
            if abs(p * lk - v) <= tol * scale:
                lg = LogK(1, Const(Fraction(k)))
                return lg if p == 1 else Const(Fraction(p)) * lg
    q = Fraction(v).limit_denominator(8)
    if abs(float(q) - v) <= max(tol, coarse) * scale:
        return Const(q)
    return Const(Fraction(v))


def _scaled(F: Expr, lam: Expr) -> Expr:
    if lam == Const(Fraction(1)):
        return F
    if isinstance(lam, Const) and lam.value.numerator == 1:
        return Const(Fraction(lam.value.denominator)) * F
    return F / lam


def _xi_probe(f, m, sched, tol, tw):
    try:
        est = order(f, m, sched, tol, tw)
    except EVAL_ERRORS:
        return None
    if est.status == "converged" and math.isfinite(est.value) and abs(est.value) > 10 * tol:
        return est
    return None


# (B, builder for B^-1 applied to an expression, two B-values for the slope estimate)
def _catalog():
    out = [(X, lambda z: z, (1e3, 1e4))]
    for j in (1, 2, 3):
        out.append((LogK(j, X), lambda z, j=j: ExpK(j, z), (1e3, 1e4)))
    out.append((Xi(3, X), lambda z: XiInv(3, z), (10.0, 30.0)))
    return out


ALPHA_MIN, ALPHA_MAX = 0.15, 8.0


def _catalog_probe(f, B, B_inv, bvals, sched, tol, tw):
    """Try F = B^alpha; returns (alpha, F, estimate) or None."""
    BoF = substitute(B, f)
    pts = []
    for b in bvals:
        x = evaluate(B_inv(Const(Fraction(b))), 0.0, tw)
        try:
            delta = _as_float(mixed.sub(evaluate(BoF, x, tw), b))
        except EVAL_ERRORS:
            return None
        if not (delta > 0 and math.isfinite(delta)):
            return None
        pts.append((b, delta))
    gamma = math.log(pts[1][1] / pts[0][1]) / math.log(pts[1][0] / pts[0][0])
    alpha = 1.0 - gamma
    if not ALPHA_MIN <= alpha <= ALPHA_MAX:
        return None
    q = Fraction(alpha).limit_denominator(8)
    alpha_e = Const(q) if abs(float(q) - alpha) <= 1e-2 else Const(Fraction(alpha))
    F = B if alpha_e == Const(Fraction(1)) else Pow(B, alpha_e)
    try:
        est = order(f, F, sched, tol, tw)
    except EVAL_ERRORS:
        return None
    if est.status == "converged" and abs(est.value) > 10 * tol:
        return alpha_e, F, est
    return None


def _coincides(f, m, sched, tw) -> bool:
    """Xi_m(f(x)) = x on the schedule, i.e. f = Xi_m^-1 there."""
    probe = substitute(Xi(m, X), f)
    try:
        for x in sched.points(tw):
            v = evaluate(probe, x, tw)
            if abs(_superlog(v) - _superlog(x)) > 1e-12 * max(1.0, _superlog(x)):
                return False
    except EVAL_ERRORS:
        return False
    return True


ABEL_CAP = 2000


def _native_schedule(sched: Schedule) -> Schedule:
    """Same number of points, restricted to native magnitudes."""
    if sched.level != 3:
        return sched
    stop = min(sched.stop, U_NATIVE)
    return Schedule(3, sched.start, (stop - sched.start) / (sched.count - 1), stop)


def classify(f, max_depth: int = 4, max_level: int = 5, sched: Schedule = DEFAULT_SCHEDULE,
             tol: float = 1e-3, tower: Tower | None = None, abel_base: float = 2.0) -> ClassResult:
    """Search for a chain F_1, ..., F_k ending at some Xi_m (see module docstring)."""
    tw = tower or default_tower()
    f = _expr(f)
    membership = "inconclusive"
    verdicts = []
    for n in range(1, max_level + 1):
        try:
            v, _ = in_B(f, n, sched, tower=tw)
        except EVAL_ERRORS:
            v = "inconclusive"
        verdicts.append(v)
        if v.startswith("accepted"):
            membership = v
            break
    if membership == "inconclusive" and verdicts and all(v == "rejected" for v in verdicts):
        return ClassResult(None, None, [], "not-finite-class", "rejected",
                           "derivative ratio test rejected every level")

    chain = []
    fr = f
    for r in range(max_depth):
        # 1. tower probes, smallest level first
        found = None
        for m in range(1, max_level + 1):
            est = _xi_probe(fr, m, sched, tol, tw)
            if est is not None:
                found = (m, est)
                break
        if found is not None:
            m, est = found
            if abs(est.value - 1.0) <= 1e-2:
                chain.append(ChainStep(r, to_text(fr), to_text(Xi(m, X)), "xi", est.value, est))
                return ClassResult(m - 1 - r, r + 1, chain, "verified-at-depth", membership)
            lam = _snap(est.value)
            if m == 1:
                c = _snap(est.value * math.e)
                F = X / c
                nxt = c * X
            else:
                F = _scaled(Xi(m, X), lam)
                nxt = XiInv(m, lam * X)
            ev = order(fr, F, sched, tol, tw)
            chain.append(ChainStep(r, to_text(fr), to_text(F), "xi", est.value, ev))
            fr = nxt
            continue
        # 2. exact tower inverse at the top level
        hit = [m for m in range(2, max_level + 1) if _coincides(fr, m, sched, tw)]
        if hit:
            return ClassResult(hit[0] - r, r, chain, "verified-at-depth", membership)
        # 3. power catalog: (log_j x)^alpha, then Xi_3^alpha
        cat = None
        for B, B_inv, bvals in _catalog():
            cat = _catalog_probe(fr, B, B_inv, bvals, sched, tol, tw)
            if cat is not None:
                break
        if cat is not None:
            alpha_e, Fb, est = cat
            lam = _snap(est.value, coarse=1e-2)
            F = _scaled(Fb, lam)
            inner = lam * X
            if alpha_e != Const(Fraction(1)):
                inner = Pow(inner, Const(1 / alpha_e.value))
            nxt = B_inv(inner)
            ev = order(fr, F, sched, tol, tw)
            chain.append(ChainStep(r, to_text(fr), to_text(F), "catalog", est.value, ev))
            fr = nxt
            continue
        # 4. constructed Abel function: order exactly 1 by construction
        try:
            A = build_abel(fr, abel_base, ctx=tw, iteration_cap=ABEL_CAP)
            F = AbelApply(A, False, X, f"abel[{to_text(fr)}]")
            ev = order(fr, F, _native_schedule(sched), tol, tw)
        except EVAL_ERRORS as exc:
            return ClassResult(None, None, chain, "budget-exhausted", membership,
                               f"abel fallback failed at depth {r}: {exc}")
        chain.append(ChainStep(r, to_text(fr), F.label, "abel", None, ev))
        fr = AbelApply(A, True, X, f"abel_inv[{to_text(fr)}]")
    return ClassResult(None, None, chain, "budget-exhausted", membership,
                       f"no terminating chain within depth {max_depth}")


# The eight example columns; "{a}" is replaced by the constant a.
TABLE_COLUMNS = (
    ("x+a", "x+{a}"),
    ("x+sqrt(x)", "x+x^(1/2)"),
    ("x+x/log(x)", "x+x/log(x)"),
    ("ax", "{a}*x"),
    ("x^a", "x^{a}"),
    ("x^log(x)", "x^log(x)"),
    ("phi", "FracIter(exp,1/2,x)"),
    ("e^x", "exp(x)"),
)


def _const_text(a: float) -> str:
    q = Fraction(a).limit_denominator(1000)
    return str(q) if q.denominator == 1 else f"({q})"


def classify_table(a: float = 2.0, max_depth: int = 4, max_level: int = 5,
                   tower: Tower | None = None) -> list:
    """[(label, expression text, ClassResult)] for the eight example columns."""
    if not a > 1:
        raise DomainError(f"the table constant must exceed 1, got {a}", a)
    out = []
    for label, template in TABLE_COLUMNS:
        src = template.format(a=_const_text(a))
        out.append((label, src, classify(parse(src), max_depth, max_level, tower=tower)))
    return out

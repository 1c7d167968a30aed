"""Invariant suite shared by ``growthlab selftest`` and the acceptance tests.

Each check returns ``(passed, detail)``; ``run_checks`` collects them as
``(name, passed, detail)`` triples.
"""

from __future__ import annotations

import math
import random

from scipy.integrate import quad

from . import mixed
from . import towerreal as tr
from .ackermann import GFamily, ack_closed_form, ack_exact
from .analysis import classify_table, order
from .expr import X, Xi, evaluate, parse, substitute
from .tower import Tower, builder_g, builder_h, default_tower

E = math.e


def _linspace(lo, hi, n):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _geomspace(lo, hi, n):
    return [lo * (hi / lo) ** (i / (n - 1)) for i in range(n)]


def _e_k(k: int) -> float:
    v = 1.0
    for _ in range(k):
        v = math.exp(v)
    return v


# 1 ---------------------------------------------------------------------


def check_abel_relation(tw: Tower, seed: int = 1):
    real = max(abs(tw.xi(3, math.exp(x)) - tw.xi(3, x) - 1.0) for x in _linspace(1.0, 20.0, 1000))
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(1000):
        t = tr.TowerReal(rng.randint(1, 39), rng.uniform(1.0, E))
        worst = max(worst, abs(tw.xi(3, tr.exp_t(t)) - tw.xi(3, t) - 1.0))
    ok = real <= 1e-9 and worst <= 1e-12
    return ok, f"real max {real:.3g} (<= 1e-9), tower max {worst:.3g} (<= 1e-12)"


# 2 ---------------------------------------------------------------------


def check_c1_glue(tw: Tower, h: float = 1e-7):
    left = (tw.xi(3, E) - tw.xi(3, E - h)) / h
    right = (tw.xi(3, E + h) - tw.xi(3, E)) / h
    rel = abs(left - right) / abs(right)
    return rel <= 1e-6, f"left {left:.12g}, right {right:.12g}, rel diff {rel:.3g} (<= 1e-6)"


# 3 ---------------------------------------------------------------------


def check_half_iterate(tw: Tower):
    half = max(abs(tw.frac_iter(0.5, tw.frac_iter(0.5, x)) - math.exp(x)) / math.exp(x)
               for x in _linspace(1.0, 3.0, 50))
    third = 0.0
    for x in _linspace(1.0, 3.0, 50):
        y = x
        for _ in range(3):
            y = tw.frac_iter(1.0 / 3.0, y)
        third = max(third, abs(y - math.exp(x)) / math.exp(x))
    ok = half <= 1e-6 and third <= 1e-5
    return ok, f"half-iterate rel err {half:.3g} (<= 1e-6), third {third:.3g} (<= 1e-5)"


# 4 ---------------------------------------------------------------------

ORDER_CASES = (
    ("3*x", "log(x)", math.log(3.0), 1e-6),
    ("x^2", "LogK(2,x)", math.log(2.0), 1e-3),
    ("ExpK(2,x)", 3, 2.0, 1e-12),
    ("FracIter(exp,1/2,x)", 3, 0.5, 1e-6),
)


def check_orders(tw: Tower):
    parts, ok = [], True
    for f, F, want, tol in ORDER_CASES:
        est = order(parse(f), F if isinstance(F, int) else parse(F), tower=tw)
        err = abs(est.value - want) if est.value is not None else math.inf
        good = est.status == "converged" and err <= tol
        ok &= good
        parts.append(f"{f}: {est.value!r} err {err:.2g} <= {tol:g}")
    return ok, "; ".join(parts)


# 5 ---------------------------------------------------------------------

TABLE_EXPECTED = {
    "x+a": 0, "x+sqrt(x)": 0,
    "x+x/log(x)": 1, "ax": 1, "x^a": 1, "x^log(x)": 1,
    "phi": 2, "e^x": 2,
}


def check_table(tw: Tower, a: float = 2.0):
    ok, parts = True, []
    for label, _, res in classify_table(a, tower=tw):
        good = res.n == TABLE_EXPECTED[label] and res.status == "verified-at-depth"
        if label == "x+x/log(x)":
            good &= res.k == 2
        for s in res.chain:
            ev = s.evidence
            good &= ev.status == "converged" and abs(ev.value - 1.0) <= 1e-2
        ok &= good
        parts.append(f"{label}: n={res.n} k={res.k}{'' if good else ' FAIL'}")
    return ok, ", ".join(parts)


# 6 ---------------------------------------------------------------------


def increment_table(tw: Tower, n: int = 20):
    """Rows (s, denominators) where each increment is 1/denominator.

    For x = Xi_3^-1(s) the increments Xi_3(f(x)) - Xi_3(x) are 1/s for g,
    1/Xi_3^-1(s/2) for h and 1/Xi_4^-1(Xi_4(x) - 1/2) for ell; the order 0
    log-exp bound for f_k is 1/chi_3(log_k x).
    """
    rows = []
    for s in _linspace(5.0, 30.0, n):
        x = tw.xi_inv(3, s)
        den = {"g": s, "h": tw.xi_inv(3, s / 2.0),
               "ell": tw.xi_inv(4, tw.xi(4, x) - 0.5)}
        for k in range(1, 5):
            y = x
            for _ in range(k):
                y = mixed.log(y)
            den[f"f{k}"] = tw.chi(3, y)
        rows.append((s, den))
    return rows


def check_example_ordering(tw: Tower):
    rows = increment_table(tw)
    bad = []
    for s, d in rows:
        # larger denominator means smaller increment
        if not mixed.cmp(d["h"], d["ell"]) > 0:
            bad.append(f"h<ell fails at s={s:.3f}")
        if not mixed.cmp(d["ell"], d["g"]) > 0:
            bad.append(f"ell<g fails at s={s:.3f}")
        for k in range(1, 5):
            if not mixed.cmp(d[f"f{k}"], d["g"]) > 0:
                bad.append(f"g > 1/chi_3(log_{k} x) fails at s={s:.3f} "
                           f"(1/s={1 / s:.4g}, bound={1 / mixed.to_float(d[f'f{k}']):.4g})")
    # the closed-form increments agree with evaluating the builders
    drift = 0.0
    for s, d in rows[:5]:
        x = tw.xi_inv(3, s)
        for fe, want in ((builder_g(), 1 / s), (builder_h(), mixed.to_float(mixed.div(1.0, d["h"])))):
            got = mixed.to_float(evaluate(substitute(Xi(3, X), fe), x, tw)) - s
            drift = max(drift, abs(got - want))
    if drift > 1e-12:
        bad.append(f"builder increments drift {drift:.3g}")
    return not bad, "; ".join(bad) if bad else f"{len(rows)} samples ordered, builder drift {drift:.2g}"


# 7 ---------------------------------------------------------------------


def _g_grid(fam: GFamily, m: int, n: int = 100):
    """Points x whose G_{m-1}(x) lies in the domain of G_m."""
    if m <= 2:
        a = 2.0
        lo = mixed.to_float(fam.a_eval(m - 1, a))
        hi = mixed.to_float(fam.a_eval(m - 1, lo))
    else:
        a, _ = fam.domain(m)
        lo = mixed.to_float(fam.a_eval(m - 1, 1.0 if m - 1 >= 3 else a))
        lo = max(lo, mixed.to_float(fam.a_eval(m - 1, a)))
        hi = 1e300 if lo > 1e3 else mixed.to_float(fam.a_eval(m - 1, lo))
    return _geomspace(lo, hi * (1 - 1e-12), n)


def check_ackermann():
    bad = []
    for m in (0, 1, 2):
        for n in range(31):
            if ack_exact(m, n).value != ack_closed_form(m, n):
                bad.append(f"A({m},{n})")
    if ack_exact(3, 2).value != 65534:
        bad.append("A(3,2)")
    a33 = ack_exact(3, 3)
    if a33.kind != "exact" or a33.value.bit_length() != 65536:
        bad.append("A(3,3) bit length")
    fam = GFamily(5)
    worst = 0.0
    for m in range(1, 6):
        for x in _g_grid(fam, m):
            worst = max(worst, abs(fam.residual(m, x)))
    if worst > 1e-9:
        bad.append(f"G residual {worst:.3g}")
    return not bad, "; ".join(bad) if bad else f"closed forms ok, A(3,3) has 65536 bits, G residual {worst:.2g}"


# 8 ---------------------------------------------------------------------


def check_chi(tw: Tower):
    kinks = [_e_k(k) for k in range(4)]
    pts = [x for x in _geomspace(1.05, 1e4, 110)
           if all(abs(x - c) >= 1e-3 for c in kinks)][:100]
    worst = 0.0
    for x in pts:
        h = 1e-5 * x
        fd = (tw.xi(3, x + h) - tw.xi(3, x - h)) / (2 * h)
        worst = max(worst, abs(tw.chi(3, x) * fd - 1.0))

    def inv_chi(x):
        return 1.0 / tw.chi(3, x)

    def inv_chi_log(y):
        # x = e^y: dx / chi_3(x) = e^y / chi_3(e^y) dy, both sides as towers
        ey = mixed.exp(y)
        return mixed.to_float(mixed.div(ey, tw.chi(3, ey)))

    total = 0.0
    e1, e2, e3 = _e_k(1), _e_k(2), _e_k(3)
    for fn, lo, hi in ((inv_chi, e1, e2), (inv_chi, e2, e3), (inv_chi_log, e2, e3)):
        edges = _geomspace(lo, hi, 41)
        for a, b in zip(edges, edges[1:]):
            total += quad(fn, a, b, epsabs=1e-10, epsrel=1e-10, limit=200)[0]
    qerr = abs(total - 3.0)
    ok = len(pts) == 100 and worst <= 1e-5 and qerr <= 1e-6
    return ok, f"max |chi*FD - 1| {worst:.3g} (<= 1e-5), integral {total!r} (err {qerr:.2g})"


# 9 ---------------------------------------------------------------------

ADDITIVITY_PAIRS = (
    ("2*x", "3*x", "log(x)"),
    ("3*x", "5*x", "log(x)"),
    ("2*x", "2*x", "log(x)"),
    ("7*x", "(3/2)*x", "log(x)"),
    ("x^2", "x^3", "LogK(2,x)"),
    ("x^3", "x^4", "LogK(2,x)"),
    ("exp(x)", "exp(x)", 3),
    ("ExpK(2,x)", "exp(x)", 3),
    ("FracIter(exp,1/2,x)", "FracIter(exp,1/2,x)", 3),
    ("FracIter(exp,1/3,x)", "ExpK(2,x)", 3),
)


def check_additivity(tw: Tower):
    worst, bad = 0.0, []
    for f, g, F in ADDITIVITY_PAIRS:
        Fe = F if isinstance(F, int) else parse(F)
        fe, ge = parse(f), parse(g)
        ests = [order(e, Fe, tower=tw) for e in (substitute(fe, ge), fe, ge)]
        if any(e.status != "converged" for e in ests):
            bad.append(f"{f} o {g}: not converged")
            continue
        gap = abs(ests[0].value - ests[1].value - ests[2].value)
        worst = max(worst, gap)
        if gap > 3e-3:
            bad.append(f"{f} o {g}: gap {gap:.3g}")
    return not bad, "; ".join(bad) if bad else f"{len(ADDITIVITY_PAIRS)} pairs, max gap {worst:.3g}"


# 10 --------------------------------------------------------------------


def random_tower(rng: random.Random) -> tr.TowerReal:
    return tr.normalize(rng.randint(0, 5), rng.uniform(1.0, E))


def check_towerreal(seed: int = 7, n: int = 10_000):
    rng = random.Random(seed)
    bad = 0
    native = 0
    for _ in range(n):
        a, b = random_tower(rng), random_tower(rng)
        ra, rb = tr.try_real(a), tr.try_real(b)
        if ra is not None and rb is not None:
            native += 1
            if tr.compare(a, b) != (ra > rb) - (ra < rb):
                bad += 1
        for t in (a, b):
            if tr.normalize(t.height, t.mantissa) != t:
                bad += 1
            if tr.log_t(tr.exp_t(t)) != t:
                bad += 1
            if t.height >= 1 and tr.exp_t(tr.log_t(t)) != t:
                bad += 1
    return bad == 0, f"{n} pairs ({native} native), {bad} mismatches"


CHECKS = (
    ("abel-relation", check_abel_relation),
    ("c1-glue", check_c1_glue),
    ("half-iterate", check_half_iterate),
    ("orders", check_orders),
    ("table", check_table),
    ("example-ordering", check_example_ordering),
    ("ackermann", lambda tw: check_ackermann()),
    ("chi-consistency", check_chi),
    ("order-additivity", check_additivity),
    ("towerreal", lambda tw: check_towerreal()),
)


def run_checks(tower: Tower | None = None) -> list:
    tw = tower or default_tower()
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(tw)
        except Exception as exc:  # a crash is a failed check, not a crashed suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out


"""Command-line front end.  Every subcommand prints one JSON report.

Exit codes: 0 ok, 2 parse/usage error, 3 domain or evaluation error,
4 budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from fractions import Fraction

from . import __version__, mixed
from .abel import BudgetExceeded, PreconditionError, build_abel
from .ackermann import UnsupportedParameter, ack_exact, ack_tower_estimate
from .analysis import Schedule, SampleError, classify, classify_table, compare, in_B, order
from .expr import ParseError, evaluate, parse, to_text
from .mixed import DomainError
from .solve import BracketError
from .tower import ConfigError, Tower, TowerConfig, tower_for
from .towerreal import (TowerDomainError, TowerHeightError, TowerOverflow, TowerReal,
                        parse_tower)

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_BUDGET = 0, 2, 3, 4

class ReportedFailure(Exception):
    """A complete report that still ends with a nonzero exit code."""

    def __init__(self, code: int, payload: dict, traces: dict):
        super().__init__(code)
        self.code, self.payload, self.traces = code, payload, traces


# ------------------------------------------------------------ serialization


def _num(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    text = format(v, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits and towers as T[h;v] strings."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, Fraction):
        return f'"{obj}"'
    if isinstance(obj, TowerReal):
        return _str(str(obj))
    if isinstance(obj, str):
        return _str(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_str(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, str, TowerReal)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _str(s: str) -> str:
    import json

    return json.dumps(s, ensure_ascii=False)


def _value(v):
    return v if isinstance(v, TowerReal) else float(v)


def _parse_point(text: str):
    text = text.strip()
    if text.startswith("T["):
        return mixed.canon(parse_tower(text))
    return float(text)


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _samples(rows):
    return [[_value(x), _value(d)] for x, d in rows]


# ------------------------------------------------------------- subcommands


def _schedule(args) -> Schedule:
    return Schedule(args.level, args.start, args.step, args.stop)


def _reference(text: str):
    t = text.strip()
    return int(t) if t.isdigit() else parse(t)


def cmd_eval(args, tw: Tower):
    e = parse(args.expr)
    x = _parse_point(args.at)
    v = evaluate(e, x, tw)
    if args.mode == "real" and isinstance(v, TowerReal):
        raise TowerOverflow(f"value {v} exceeds native range")
    if args.mode == "tower":
        v = mixed.lift(v)
    return {"expr": to_text(e), "at": _value(x), "value": _value(v)}, {}


def cmd_order(args, tw: Tower):
    est = order(parse(args.f), _reference(args.F), _schedule(args), args.tol, tw)
    payload = {"lambda": est.value, "status": est.status, "tolerance": est.tolerance}
    return payload, {"order": _samples(est.samples)}


def cmd_classify(args, tw: Tower):
    res = classify(parse(args.f), args.K, args.M, _schedule(args), tower=tw)
    payload = _class_payload(res)
    traces = {f"step{s.r}": _samples(s.evidence.samples) for s in res.chain}
    if res.status == "budget-exhausted":
        raise ReportedFailure(EXIT_BUDGET, payload, traces)
    return payload, traces


def _class_payload(res):
    return {
        "n": res.n, "k": res.k, "status": res.status, "membership": res.membership,
        "note": res.note,
        "chain": [{"r": s.r, "f": s.f, "F": s.F, "source": s.source, "probe": s.probe,
                   "evidence": {"status": s.evidence.status, "lambda": s.evidence.value}}
                  for s in res.chain],
    }


def cmd_iterate(args, tw: Tower):
    t = args.t
    x = _parse_point(args.at)
    if args.f.strip() in ("exp", "exp(x)"):
        step = lambda v: tw.frac_iter(t, v)  # noqa: E731
        name = "exp(x)"
    else:
        F = build_abel(args.f, args.base, ctx=tw)
        step = lambda v: F.iterate(t, v)  # noqa: E731
        name = F.name
    v = step(x)
    payload = {"f": name, "t": str(t), "at": _value(x), "value": _value(v)}
    if args.twice:
        payload["twice"] = _value(step(v))
    return payload, {}


def cmd_compare(args, tw: Tower):
    verdict, rows = compare(parse(args.f), parse(args.g), _schedule(args), args.tol, tw)
    return {"verdict": verdict}, {"gap": _samples(rows)}


def cmd_in_b(args, tw: Tower):
    verdict, rows = in_B(parse(args.f), args.n, _schedule(args), tower=tw)
    return {"verdict": verdict}, {"ratio": _samples(rows)}


def cmd_ackermann(args, tw: Tower):
    if args.approx:
        val = ack_tower_estimate(args.m, args.n)
    else:
        val = ack_exact(args.m, args.n, args.bit_budget)
    payload = {"m": args.m, "n": args.n}
    payload.update(val.to_dict())
    if val.kind == "too-large":
        raise ReportedFailure(EXIT_BUDGET, payload, {})
    return payload, {}


def cmd_table(args, tw: Tower):
    cols = []
    traces = {}
    for label, src, res in classify_table(args.a, args.K, args.M, tw):
        row = {"f0": label, "expr": src}
        row.update(_class_payload(res))
        cols.append(row)
        for s in res.chain:
            traces[f"{label}/step{s.r}"] = _samples(s.evidence.samples)
    return {"a": args.a, "columns": cols}, traces


def cmd_selftest(args, tw: Tower):
    from .selftest import run_checks

    results = run_checks(tw)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=sys.stderr)
    payload = {"passed": all(ok for _, ok, _ in results),
               "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in results]}
    if not payload["passed"]:
        raise ReportedFailure(EXIT_DOMAIN, payload, {})
    return payload, {}


# ------------------------------------------------------------------ parser


def _add_schedule(p):
    g = p.add_argument_group("schedule")
    g.add_argument("--level", type=int, default=3, help="schedule coordinate level (1-3)")
    g.add_argument("--start", type=float, default=2.0)
    g.add_argument("--step", type=float, default=1.0)
    g.add_argument("--stop", type=float, default=40.0)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="growthlab", description="Growth rates between polynomial and exponential.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="tower config JSON (default: $GROWTHLAB_CONFIG)")
    p.add_argument("--trace", help="write per-sample traces to this CSV file")
    p.add_argument("--compact", action="store_true", help="omit traces from the JSON report")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eval", help="evaluate an expression")
    s.add_argument("expr")
    s.add_argument("--at", required=True, help="point: float or T[h;v]")
    s.add_argument("--mode", choices=("auto", "real", "tower"), default="auto")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("order", help="order of f with respect to F")
    s.add_argument("--f", required=True)
    s.add_argument("--F", required=True, help="expression or tower level")
    s.add_argument("--tol", type=float, default=1e-3)
    _add_schedule(s)
    s.set_defaults(func=cmd_order)

    s = sub.add_parser("classify", help="class-chain search")
    s.add_argument("--f", required=True)
    s.add_argument("--K", type=int, default=4, help="maximum chain depth")
    s.add_argument("--M", type=int, default=5, help="maximum tower level")
    _add_schedule(s)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("iterate", help="fractional iterate via an Abel function")
    s.add_argument("--f", required=True, help="exp or an expression")
    s.add_argument("--t", required=True, type=_parse_rational)
    s.add_argument("--at", required=True)
    s.add_argument("--base", type=float, default=1.0, help="base point for non-exp maps")
    s.add_argument("--twice", action="store_true", help="also apply the iterate twice")
    s.set_defaults(func=cmd_iterate)

    s = sub.add_parser("compare", help="compare f and g in Xi_3 coordinates")
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--tol", type=float, default=1e-3)
    _add_schedule(s)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("inb", help="derivative-regularity test at level n")
    s.add_argument("--f", required=True)
    s.add_argument("--n", type=int, required=True)
    _add_schedule(s)
    s.set_defaults(func=cmd_in_b)

    s = sub.add_parser("ackermann", help="Ackermann values")
    s.add_argument("m", type=int)
    s.add_argument("n", type=int)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact integer (default)")
    mode.add_argument("--approx", action="store_true", help="tower estimate (m = 3)")
    s.add_argument("--bit-budget", type=int, default=2 ** 20)
    s.set_defaults(func=cmd_ackermann)

    s = sub.add_parser("table", help="classify the eight example columns")
    s.add_argument("--a", type=float, default=2.0)
    s.add_argument("--K", type=int, default=4)
    s.add_argument("--M", type=int, default=5)
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("selftest", help="run the invariant checks")
    s.set_defaults(func=cmd_selftest)
    return p


def _load_config(path):
    path = path or os.environ.get("GROWTHLAB_CONFIG")
    if not path:
        return TowerConfig()
    return TowerConfig.load(path)


def _write_trace(path, traces):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["series", "x", "value"])
        for name, rows in traces.items():
            for x, v in rows:
                w.writerow([name, str(x) if isinstance(x, TowerReal) else format(x, ".17g"),
                            str(v) if isinstance(v, TowerReal) else format(v, ".17g")])


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        config = _load_config(args.config)
        tw = tower_for(config)
        try:
            payload, traces = args.func(args, tw)
        except ReportedFailure as rf:
            payload, traces, code = rf.payload, rf.traces, rf.code
    except ParseError as exc:
        d = exc.diagnostic
        print(f"parse error at offset {d.offset}: {d.message}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SampleError as exc:
        if isinstance(exc.cause, BudgetExceeded):
            print(f"budget exhausted: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (DomainError, TowerDomainError, TowerOverflow, TowerHeightError, PreconditionError,
            BracketError, UnsupportedParameter, ZeroDivisionError, ValueError, OverflowError) as exc:
        x = getattr(exc, "x", None)
        where = f" (x = {x})" if x is not None else ""
        print(f"domain error: {exc}{where}", file=sys.stderr)
        return EXIT_DOMAIN
    report = {
        "command": ["growthlab"] + argv,
        "config_hash": config.digest(),
        "payload": payload,
    }
    if not args.compact:
        report["traces"] = traces
    report["wall_time"] = round(time.perf_counter() - t0, 6)
    if args.trace:
        _write_trace(args.trace, traces)
    print(dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())

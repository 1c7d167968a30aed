"""Expression language for functions of one variable ``x``.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := atom ("^" atom)?
    atom   := number | "e" | "x" | call | "(" expr ")"
    call   := name "(" args ")"

``exp(u)``/``log(u)`` are sugar for ``ExpK(1,u)``/``LogK(1,u)``.  Xi, XiInv
and Chi refer to the tower of slow functions; ``FracIter(exp, p/q, u)`` is a
fractional iterate of exp; ``fk``, ``g``, ``h``, ``ell`` and ``gadget`` are
named builders.

Evaluation works over native floats and ``TowerReal`` values alike (see
:mod:`growthlab.mixed`).  Domain violations raise instead of producing NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import mixed
from .mixed import DomainError
from .towerreal import TowerReal, TowerOverflow

MAX_INDEX = 64


class Expr:
    """Base node.  Subclasses are frozen dataclasses."""

    children: tuple = ()

    @property
    def differentiable(self) -> bool:
        return all(c.differentiable for c in self.children)

    def __str__(self):
        return to_text(self)

    # arithmetic sugar for building trees in Python
    def __add__(self, other):
        return Add(self, _wrap(other))

    def __radd__(self, other):
        return Add(_wrap(other), self)

    def __sub__(self, other):
        return Sub(self, _wrap(other))

    def __rsub__(self, other):
        return Sub(_wrap(other), self)

    def __mul__(self, other):
        return Mul(self, _wrap(other))

    def __rmul__(self, other):
        return Mul(_wrap(other), self)

    def __truediv__(self, other):
        return Div(self, _wrap(other))

    def __rtruediv__(self, other):
        return Div(_wrap(other), self)

    def __pow__(self, other):
        return Pow(self, _wrap(other))


def _wrap(v):
    if isinstance(v, Expr):
        return v
    return Const(Fraction(v))


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True)
class ConstE(Expr):
    pass


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Sub(Add):
    pass


@dataclass(frozen=True)
class Mul(Add):
    pass


@dataclass(frozen=True)
class Div(Add):
    pass


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr

    @property
    def children(self):
        return (self.base, self.exponent)


@dataclass(frozen=True)
class ExpK(Expr):
    k: int
    arg: Expr

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class LogK(ExpK):
    pass


@dataclass(frozen=True)
class Xi(Expr):
    n: int
    arg: Expr

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class XiInv(Xi):
    pass


@dataclass(frozen=True)
class Chi(Xi):
    pass


@dataclass(frozen=True)
class FracIter(Expr):
    func: str
    t: Fraction
    arg: Expr

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Named(Expr):
    """Reference to a named builder (fk, g, h, ell) applied to ``arg``."""

    name: str
    params: tuple
    arg: Expr

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Gadget(Expr):
    """Function whose inverse is Xi_m^-1(Xi_m(x) - (1+delta(x))/Chi_m(F(x)))."""

    m: int
    F: Expr
    delta: Expr
    arg: Expr

    @property
    def children(self):
        return (self.arg,)

    @property
    def differentiable(self):
        return False


@dataclass(frozen=True)
class NumericDerivative(Expr):
    """d(body)/dx at ``arg`` by central differences."""

    body: Expr
    arg: Expr

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True, eq=False)
class AbelApply(Expr):
    """A constructed Abel function (or its inverse) applied to ``arg``."""

    abel: object
    inverse: bool
    arg: Expr
    label: str = "abel"

    @property
    def children(self):
        return (self.arg,)

    @property
    def differentiable(self):
        return False


X = Var()
E_CONST = ConstE()
ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


# ---------------------------------------------------------------- parsing


@dataclass(frozen=True)
class ParseDiagnostic:
    offset: int
    expected: frozenset
    message: str


class ParseError(ValueError):
    def __init__(self, diagnostic: ParseDiagnostic):
        super().__init__(f"{diagnostic.message} at offset {diagnostic.offset}")
        self.diagnostic = diagnostic


INDEXED = {"ExpK": ExpK, "LogK": LogK, "Xi": Xi, "XiInv": XiInv, "Chi": Chi}
UNARY = {"exp": ExpK, "log": LogK}
BUILDERS = ("fk", "g", "h", "ell")
NAMES = frozenset(["exp", "log", *INDEXED, "FracIter", *BUILDERS, "gadget"])


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            tokens.append(("num", text[i:j], i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
        elif c in "+-*/^(),":
            tokens.append((c, c, i))
            i += 1
        else:
            raise ParseError(ParseDiagnostic(i, frozenset(), f"unexpected character {c!r}"))
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def tok(self):
        return self.tokens[self.pos]

    def fail(self, expected, message=None):
        kind, value, off = self.tok
        found = "end of input" if kind == "end" else repr(value)
        msg = message or f"expected {' or '.join(sorted(expected))}, found {found}"
        raise ParseError(ParseDiagnostic(off, frozenset(expected), msg))

    def expect(self, kind):
        if self.tok[0] != kind:
            self.fail({kind})
        t = self.tok
        self.pos += 1
        return t

    def parse(self):
        e = self.expr()
        if self.tok[0] != "end":
            self.fail({"+", "-", "*", "/", "^", "end of input"})
        return e

    def expr(self):
        e = self.term()
        while self.tok[0] in ("+", "-"):
            op = self.expect(self.tok[0])[0]
            r = self.term()
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def term(self):
        e = self.factor()
        while self.tok[0] in ("*", "/"):
            op = self.expect(self.tok[0])[0]
            r = self.factor()
            e = Mul(e, r) if op == "*" else Div(e, r)
        return e

    def factor(self):
        base = self.atom()
        if self.tok[0] == "^":
            self.pos += 1
            return Pow(base, self.atom())
        return base

    def atom(self):
        kind, value, off = self.tok
        if kind == "num":
            self.pos += 1
            return Const(Fraction(value))
        if kind == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if value == "x":
                self.pos += 1
                return X
            if value == "e":
                self.pos += 1
                return E_CONST
            if value in NAMES:
                self.pos += 1
                return self.call(value)
            self.fail({"x", "e", "number", "function name"}, f"unknown name {value!r}")
        self.fail({"number", "x", "e", "(", "function name"})

    def index(self):
        kind, value, off = self.tok
        if kind != "num" or "." in value:
            self.fail({"integer"})
        self.pos += 1
        k = int(value)
        if k > MAX_INDEX:
            raise ParseError(ParseDiagnostic(off, frozenset({"integer"}), f"index {k} too large"))
        return k

    def rational(self):
        sgn = 1
        if self.tok[0] == "-":
            self.pos += 1
            sgn = -1
        kind, value, _ = self.tok
        if kind != "num":
            self.fail({"rational"})
        self.pos += 1
        t = Fraction(value)
        if self.tok[0] == "/":
            self.pos += 1
            kind, value, off = self.tok
            if kind != "num" or Fraction(value) == 0:
                self.fail({"nonzero number"})
            self.pos += 1
            t /= Fraction(value)
        return sgn * t

    def call(self, name):
        self.expect("(")
        if name in UNARY:
            e = UNARY[name](1, self.expr())
        elif name in INDEXED:
            k = self.index()
            self.expect(",")
            e = INDEXED[name](k, self.expr())
            if name in ("ExpK", "LogK") and k < 1:
                self.fail({")"}, f"{name} needs k >= 1")
        elif name == "FracIter":
            fname = self.expect("name")
            if fname[1] != "exp":
                raise ParseError(ParseDiagnostic(fname[2], frozenset({"exp"}), "only exp can be iterated"))
            self.expect(",")
            t = self.rational()
            self.expect(",")
            e = FracIter("exp", t, self.expr())
        elif name == "fk":
            k = self.index()
            self.expect(",")
            e = Named("fk", (k,), self.expr())
        elif name in BUILDERS:
            e = Named(name, (), self.expr())
        else:  # gadget
            m = self.index()
            self.expect(",")
            F = self.expr()
            self.expect(",")
            delta = self.expr()
            self.expect(",")
            e = Gadget(m, F, delta, self.expr())
        self.expect(")")
        return e


def parse(text: str) -> Expr:
    """Parse ``text``; raises :class:`ParseError` carrying a diagnostic."""
    return _Parser(text).parse()


# ---------------------------------------------------------------- printing


def _const_text(q: Fraction) -> str:
    if q.denominator == 1:
        s = str(q.numerator)
    else:
        d = q.denominator
        twos = fives = 0
        while d % 2 == 0:
            d //= 2
            twos += 1
        while d % 5 == 0:
            d //= 5
            fives += 1
        if d == 1:
            digits = max(twos, fives)
            scaled = abs(q.numerator) * 10**digits // q.denominator
            whole, frac = divmod(scaled, 10**digits)
            s = f"{'-' if q < 0 else ''}{whole}.{frac:0{digits}d}"
        else:
            return f"({q.numerator}/{q.denominator})" if q > 0 else f"(0 - {-q.numerator}/{q.denominator})"
    return s if q >= 0 else f"(0 - {s[1:]})"


def _is_atom(e):
    if isinstance(e, Const):
        return True  # fractions and negatives print with their own parentheses
    return not isinstance(e, (Add, Pow))


def to_text(e: Expr) -> str:
    """Printable form; ``parse(to_text(e)) == e`` for parsed expressions."""
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, ConstE):
        return "e"
    if isinstance(e, Var):
        return "x"
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        lt = to_text(e.left)
        if isinstance(e.left, Add) and not isinstance(e.left, (Mul, Div)):
            lt = f"({lt})"
        rt = to_text(e.right)
        if isinstance(e.right, Add):
            rt = f"({rt})"
        return f"{lt} {op} {rt}"
    if isinstance(e, Add):  # Add / Sub
        op = "+" if type(e) is Add else "-"
        rt = to_text(e.right)
        if type(e.right) in (Add, Sub):
            rt = f"({rt})"
        return f"{to_text(e.left)} {op} {rt}"
    if isinstance(e, Pow):
        b, x = to_text(e.base), to_text(e.exponent)
        if not _is_atom(e.base):
            b = f"({b})"
        if not _is_atom(e.exponent):
            x = f"({x})"
        return f"{b}^{x}"
    if isinstance(e, ExpK):
        name = "ExpK" if type(e) is ExpK else "LogK"
        if e.k == 1:
            return f"{name[:3].lower()}({to_text(e.arg)})"
        return f"{name}({e.k}, {to_text(e.arg)})"
    if isinstance(e, Xi):
        return f"{type(e).__name__}({e.n}, {to_text(e.arg)})"
    if isinstance(e, FracIter):
        t = e.t
        ts = f"{t.numerator}/{t.denominator}" if t.denominator != 1 else str(t.numerator)
        return f"FracIter({e.func}, {ts}, {to_text(e.arg)})"
    if isinstance(e, Named):
        params = "".join(f"{p}, " for p in e.params)
        return f"{e.name}({params}{to_text(e.arg)})"
    if isinstance(e, Gadget):
        return f"gadget({e.m}, {to_text(e.F)}, {to_text(e.delta)}, {to_text(e.arg)})"
    if isinstance(e, NumericDerivative):
        return f"D[{to_text(e.body)}]({to_text(e.arg)})"
    if isinstance(e, AbelApply):
        name = f"{e.label}^-1" if e.inverse else e.label
        return f"{name}({to_text(e.arg)})"
    raise TypeError(f"unknown node {e!r}")


# ------------------------------------------------------- tree utilities


def substitute(e: Expr, value: Expr) -> Expr:
    """Replace the variable in ``e`` by ``value`` (composition e∘value)."""
    if isinstance(e, Var):
        return value
    if isinstance(e, (Const, ConstE)):
        return e
    if isinstance(e, Add):
        return type(e)(substitute(e.left, value), substitute(e.right, value))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, value), substitute(e.exponent, value))
    if isinstance(e, ExpK):
        return type(e)(e.k, substitute(e.arg, value))
    if isinstance(e, Xi):
        return type(e)(e.n, substitute(e.arg, value))
    if isinstance(e, FracIter):
        return FracIter(e.func, e.t, substitute(e.arg, value))
    if isinstance(e, Named):
        return Named(e.name, e.params, substitute(e.arg, value))
    if isinstance(e, Gadget):
        return Gadget(e.m, e.F, e.delta, substitute(e.arg, value))
    if isinstance(e, NumericDerivative):
        return NumericDerivative(e.body, substitute(e.arg, value))
    if isinstance(e, AbelApply):
        return AbelApply(e.abel, e.inverse, substitute(e.arg, value), e.label)
    raise TypeError(f"unknown node {e!r}")


def has_var(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    return any(has_var(c) for c in e.children)


# ------------------------------------------------------- differentiation


def _c(e):
    return isinstance(e, Const)


def _add(a, b):
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    if _c(a) and _c(b):
        return Const(a.value + b.value)
    return Add(a, b)


def _sub(a, b):
    if b == ZERO:
        return a
    if _c(a) and _c(b):
        return Const(a.value - b.value)
    return Sub(a, b)


def _mul(a, b):
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    if _c(a) and _c(b):
        return Const(a.value * b.value)
    if _c(b) and not _c(a):
        return Mul(b, a)
    return Mul(a, b)


def _div(a, b):
    if a == ZERO:
        return ZERO
    if b == ONE:
        return a
    return Div(a, b)


def _pow(a, n):
    if n == ONE:
        return a
    if n == ZERO:
        return ONE
    return Pow(a, n)


def differentiate(e: Expr) -> Expr:
    """Symbolic derivative with respect to x.

    Nodes without a symbolic rule (gadgets, constructed Abel functions, Chi
    above level 2) turn into :class:`NumericDerivative` markers.
    """
    if isinstance(e, (Const, ConstE)):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if type(e) in (Add, Sub):
        op = _add if type(e) is Add else _sub
        return op(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Mul):
        return _add(_mul(differentiate(e.left), e.right), _mul(e.left, differentiate(e.right)))
    if isinstance(e, Div):
        u, v = e.left, e.right
        du, dv = differentiate(u), differentiate(v)
        if dv == ZERO:
            return _div(du, v)
        return _div(_sub(_mul(du, v), _mul(u, dv)), Pow(v, Const(Fraction(2))))
    if isinstance(e, Pow):
        u, v = e.base, e.exponent
        du = differentiate(u)
        if not has_var(v):
            if _c(v):
                return _mul(_mul(v, _pow(u, Const(v.value - 1))), du)
            return _mul(_mul(v, Pow(u, _sub(v, ONE))), du)
        dv = differentiate(v)
        # u^v (v' log u + v u'/u)
        return _mul(e, _add(_mul(dv, LogK(1, u)), _div(_mul(v, du), u)))
    if isinstance(e, ExpK) and type(e) is ExpK:
        d = differentiate(e.arg)
        for j in range(e.k, 0, -1):
            d = _mul(ExpK(j, e.arg), d)
        return d
    if isinstance(e, LogK):
        denom = e.arg
        for j in range(1, e.k):
            denom = _mul(denom, LogK(j, e.arg))
        return _div(differentiate(e.arg), denom)
    if type(e) is Xi:
        du = differentiate(e.arg)
        if e.n == 0:
            return du
        if e.n == 1:
            return _div(du, E_CONST)
        return _div(du, Chi(e.n, e.arg))
    if type(e) is XiInv:
        du = differentiate(e.arg)
        if e.n == 0:
            return du
        if e.n == 1:
            return _mul(E_CONST, du)
        return _mul(Chi(e.n, e), du)
    if type(e) is Chi:
        if e.n <= 1:
            return ZERO
        if e.n == 2:
            return differentiate(e.arg)
        return _mul(NumericDerivative(Chi(e.n, X), e.arg), differentiate(e.arg))
    if isinstance(e, FracIter):
        # phi = H^-1(H(u) + t) with H = Xi_3, so phi' = chi_3(phi) / chi_3(u) * u'
        return _mul(_div(Chi(3, e), Chi(3, e.arg)), differentiate(e.arg))
    if isinstance(e, Named):
        body = named_body(e.name, e.params)
        if body.differentiable:
            return differentiate(substitute(body, e.arg))
        return _mul(NumericDerivative(Named(e.name, e.params, X), e.arg), differentiate(e.arg))
    if isinstance(e, (Gadget, AbelApply)):
        return _mul(NumericDerivative(substitute(e, X), e.arg), differentiate(e.arg))
    if isinstance(e, NumericDerivative):
        return _mul(NumericDerivative(NumericDerivative(e.body, X), e.arg), differentiate(e.arg))
    raise TypeError(f"unknown node {e!r}")


def named_body(name: str, params: tuple) -> Expr:
    from . import tower

    if name == "fk":
        return tower.builder_fk(params[0])
    return {"g": tower.builder_g, "h": tower.builder_h, "ell": tower.builder_ell}[name]()


# ------------------------------------------------------------ evaluation


def _default_ctx():
    from . import tower

    return tower.default_tower()


def numeric_derivative(fn, x: float) -> float:
    h = max(1e-6, 1e-8 * abs(x))
    return (mixed.to_float(fn(x + h)) - mixed.to_float(fn(x - h))) / (2 * h)


class _Evaluator:
    def __init__(self, ctx):
        self.ctx = ctx

    def __call__(self, e, x):
        ev = self
        if isinstance(e, Var):
            return x
        if isinstance(e, Const):
            return float(e.value)
        if isinstance(e, ConstE):
            return math.e
        if isinstance(e, Add):
            a, b = ev(e.left, x), ev(e.right, x)
            op = {Add: mixed.add, Sub: mixed.sub, Mul: mixed.mul, Div: mixed.div}[type(e)]
            return op(a, b)
        if isinstance(e, Pow):
            return mixed.power(ev(e.base, x), ev(e.exponent, x))
        if type(e) is ExpK:
            v = ev(e.arg, x)
            for _ in range(e.k):
                v = mixed.exp(v)
            return v
        if type(e) is LogK:
            v = ev(e.arg, x)
            for _ in range(e.k):
                v = mixed.log(v)
            return v
        if type(e) is Xi:
            return self._xi(e, x)
        if type(e) is XiInv:
            return self.ctx.xi_inv(e.n, ev(e.arg, x))
        if type(e) is Chi:
            return self.ctx.chi(e.n, ev(e.arg, x))
        if isinstance(e, FracIter):
            return self.ctx.frac_iter(e.t, ev(e.arg, x))
        if isinstance(e, Named):
            body = named_body(e.name, e.params)
            return ev(body, ev(e.arg, x))
        if isinstance(e, Gadget):
            return self.ctx.gadget_forward(e.m, e.F, e.delta, ev(e.arg, x))
        if isinstance(e, NumericDerivative):
            p = ev(e.arg, x)
            if isinstance(p, TowerReal):
                raise TowerOverflow("numeric derivative needs a native argument")
            return numeric_derivative(lambda t: ev(e.body, t), p)
        if isinstance(e, AbelApply):
            v = ev(e.arg, x)
            return e.abel.inverse(v) if e.inverse else e.abel(v)
        raise TypeError(f"unknown node {e!r}")

    def _xi(self, e, x):
        # exact shortcuts from the Abel relation Xi_n(Xi_{n-1}^-1(u)) = Xi_n(u) + 1
        n, inner = e.n, e.arg
        if isinstance(inner, Named):
            inner = substitute(named_body(inner.name, inner.params), inner.arg)
        if type(inner) is XiInv and inner.n == n:
            return self(inner.arg, x)
        if type(inner) is XiInv and inner.n == n - 1 and n >= 1:
            u = self(inner.arg, x)
            if n <= 2 or mixed.cmp(u, 1.0) >= 0:
                return self.ctx.xi(n, u) + 1.0
            return self.ctx.xi(n, self.ctx.xi_inv(n - 1, u))
        if n == 3 and type(inner) is ExpK:
            u = self(inner.arg, x)
            if mixed.cmp(u, 1.0) >= 0:
                return self.ctx.xi(3, u) + inner.k
            v = u
            for _ in range(inner.k):
                v = mixed.exp(v)
            return self.ctx.xi(3, v)
        if n == 3 and isinstance(inner, FracIter):
            u = self(inner.arg, x)
            s = self.ctx.exp_abel(u) + float(inner.t)
            if s < 0:
                raise DomainError("fractional iterate leaves the domain", u)
            return s
        return self.ctx.xi(n, self(inner, x))


def evaluate(e: Expr, x, ctx=None):
    """Value of ``e`` at ``x`` (float or TowerReal); result is float or TowerReal."""
    return _Evaluator(ctx or _default_ctx())(e, x)


def eval_real(e: Expr, x: float, ctx=None) -> float:
    v = evaluate(e, float(x), ctx)
    if isinstance(v, TowerReal):
        raise TowerOverflow(f"value at {x} exceeds native range: {v}")
    return v


def eval_tower(e: Expr, x: TowerReal, ctx=None) -> TowerReal:
    v = evaluate(e, mixed.canon(x), ctx)
    return mixed.lift(v)

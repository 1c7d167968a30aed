"""The tower of slow functions Xi_0, Xi_1, ... and the functions chi_n.

Xi_0(x) = x - e, Xi_1(x) = x/e, Xi_2 = log, and for n >= 3 Xi_n is the Abel
function of Xi_{n-1}^-1 based at 1, so Xi_n(x) = Xi_n(Xi_{n-1}(x)) + 1.  The
fundamental domain of every level n >= 3 is [1, e) because Xi_{n-1}(e) = 1.
With the default reciprocal seed Xi_n = log there, and chi_n = 1/Xi_n' obeys
chi_n(x) = chi_{n-1}(x) chi_n(Xi_{n-1}(x)) with chi_n(y) = y on [1, e).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import mixed
from .abel import BudgetExceeded, SeedFunction, make_seed
from .expr import X, Const, Expr, ExpK, Gadget, LogK, Xi, XiInv, Chi, evaluate
from .mixed import DomainError
from .solve import invert_increasing
from .towerreal import TowerReal, TowerHeightError, normalize as _tower_from

E = math.e
SEED_KINDS = ("reciprocal", "loglinear")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TowerConfig:
    max_level: int = 6
    # level -> seed kind for levels >= 3; missing levels use "reciprocal"
    seeds: tuple = ()
    iteration_cap: int = 1_000_000

    def __post_init__(self):
        if not 3 <= self.max_level <= 64:
            raise ConfigError(f"max_level must be in [3, 64], got {self.max_level}")
        if self.iteration_cap < 1:
            raise ConfigError("iteration_cap must be positive")
        for lvl, kind in self.seeds:
            if kind not in SEED_KINDS:
                raise ConfigError(f"unknown seed {kind!r} for level {lvl}")
            if not 3 <= lvl <= self.max_level:
                raise ConfigError(f"seed given for level {lvl} outside [3, {self.max_level}]")

    def seed_for(self, n: int) -> str:
        return dict(self.seeds).get(n, "reciprocal")

    def to_dict(self) -> dict:
        return {
            "max_level": self.max_level,
            "seeds": {str(k): v for k, v in sorted(self.seeds)},
            "iteration_cap": self.iteration_cap,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict) -> "TowerConfig":
        unknown = set(data) - {"max_level", "seeds", "iteration_cap"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        seeds = data.get("seeds", {})
        if not isinstance(seeds, dict):
            raise ConfigError("seeds must map level to seed kind")
        try:
            pairs = tuple(sorted((int(k), str(v)) for k, v in seeds.items()))
            return cls(max_level=int(data.get("max_level", 6)), seeds=pairs,
                       iteration_cap=int(data.get("iteration_cap", 1_000_000)))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "TowerConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(data)


class Tower:
    """Evaluation context for Xi, XiInv, Chi, FracIter and Gadget nodes."""

    def __init__(self, config: TowerConfig | None = None):
        self.config = config or TowerConfig()
        self._seeds: dict[int, SeedFunction] = {}
        self._norm: dict[int, float] = {}
        for n in range(3, self.config.max_level + 1):
            # f = Xi_{n-1}^-1 on [1, e); f'(1) = chi_{n-1}(e)
            kind = self.config.seed_for(n)
            seed = make_seed(kind, 1.0, E, self.chi(n - 1, E))
            self._seeds[n] = seed
            self._norm[n] = 1.0 / seed.integral(E)

    # -- helpers
    def _check(self, n: int):
        if not 0 <= n <= self.config.max_level:
            raise DomainError(f"level {n} outside [0, {self.config.max_level}]", n)

    def _base(self, n: int, y: float) -> float:
        seed = self._seeds[n]
        if seed.kind == "reciprocal":
            return math.log(y)
        return self._norm[n] * seed.integral(y)

    def _base_inv(self, n: int, r: float) -> float:
        seed = self._seeds[n]
        if seed.kind == "reciprocal":
            return math.exp(r)
        return seed.integral_inverse(r / self._norm[n])

    def _base_chi(self, n: int, y: float) -> float:
        seed = self._seeds[n]
        if seed.kind == "reciprocal":
            return y
        return 1.0 / (self._norm[n] * seed(y))

    # -- public operations
    def xi(self, n: int, x) -> float:
        self._check(n)
        if n == 0:
            return mixed.sub(x, E)
        if n == 1:
            return mixed.div(x, E)
        if n == 2:
            return mixed.log(x)
        if mixed.cmp(x, 1.0) < 0:
            raise DomainError(f"Xi_{n} needs x >= 1, got {x}", x)
        if isinstance(x, TowerReal) and n == 3:
            return x.height + self._base(3, x.mantissa)
        # towers at higher levels collapse through Xi_3 on the first step
        k = 0
        while mixed.cmp(x, E) >= 0:
            x = self.xi(n - 1, x)
            k += 1
            if k > self.config.iteration_cap:
                raise BudgetExceeded(f"Xi_{n}: more than {self.config.iteration_cap} descents")
        return k + self._base(n, mixed.to_float(x))

    def xi_inv(self, n: int, t):
        self._check(n)
        if n == 0:
            return mixed.add(t, E)
        if n == 1:
            return mixed.mul(t, E)
        if n == 2:
            return mixed.exp(t)
        if isinstance(t, TowerReal):
            raise TowerHeightError(f"Xi_{n}^-1 of {t} is beyond any tower height")
        if not t >= 0:
            raise DomainError(f"Xi_{n}^-1 needs t >= 0, got {t}", t)
        k = math.floor(t)
        if k > self.config.iteration_cap:
            raise BudgetExceeded(f"Xi_{n}^-1: {k} ascents exceed the cap")
        y = self._base_inv(n, t - k)
        if n == 3:
            return mixed.canon(_tower_from(k, y))
        for _ in range(k):
            y = self.xi_inv(n - 1, y)
        return y

    def chi(self, n: int, x):
        """chi_n = 1/Xi_n'."""
        self._check(n)
        if n == 0:
            return 1.0
        if n == 1:
            return E
        if n == 2:
            if mixed.cmp(x, 0.0) <= 0:
                raise DomainError(f"chi_2 needs x > 0, got {x}", x)
            return x
        if mixed.cmp(x, 1.0) < 0:
            raise DomainError(f"chi_{n} needs x >= 1, got {x}", x)
        prod = 1.0
        k = 0
        while mixed.cmp(x, E) >= 0:
            prod = mixed.mul(prod, self.chi(n - 1, x))
            x = self.xi(n - 1, x)
            k += 1
            if k > self.config.iteration_cap:
                raise BudgetExceeded(f"chi_{n}: more than {self.config.iteration_cap} descents")
        return mixed.mul(prod, self._base_chi(n, mixed.to_float(x)))

    # Abel function of exp, extended below 1 by H(x) = H(e^x) - 1
    def exp_abel(self, u) -> float:
        k = 0
        if not isinstance(u, TowerReal):
            while u < 1.0:
                u = math.exp(u)
                k -= 1
        return k + self.xi(3, u)

    def exp_abel_inv(self, s: float):
        k = 0
        while s < 0:
            s += 1.0
            k += 1
        y = self.xi_inv(3, s)
        for _ in range(k):
            y = mixed.log(y)
        return y

    def frac_iter(self, t, v):
        """t-th iterate of exp at v."""
        return self.exp_abel_inv(self.exp_abel(v) + float(t))

    def gadget_inverse(self, m: int, F: Expr, delta: Expr, x):
        corr = mixed.div(mixed.add(1.0, evaluate(delta, x, self)),
                         self.chi(m, evaluate(F, x, self)))
        return self.xi_inv(m, self.xi(m, x) - mixed.to_float(corr))

    def gadget_forward(self, m: int, F: Expr, delta: Expr, v):
        """y with gadget_inverse(y) = v; y >= v since the inverse lies below x."""
        return invert_increasing(lambda y: self.gadget_inverse(m, F, delta, y), v, v)


@lru_cache(maxsize=None)
def default_tower() -> Tower:
    return Tower()


def tower_for(config: TowerConfig | None) -> Tower:
    if config is None or config == TowerConfig():
        return default_tower()
    return Tower(config)


# ------------------------------------------------------------------ builders


def builder_fk(k: int) -> Expr:
    """f_k(x) = e_k(log_k x + 1); f_0 = x + 1, f_1 = e x."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return X + 1
    return ExpK(k, LogK(k, X) + 1)


def builder_g() -> Expr:
    return XiInv(3, Xi(3, X) + 1 / Xi(3, X))


def builder_h() -> Expr:
    return XiInv(3, Xi(3, X) + 1 / XiInv(3, Xi(3, X) / 2))


def builder_ell() -> Expr:
    return XiInv(3, Xi(3, X) + 1 / XiInv(4, Xi(4, X) - Const(Fraction(1, 2))))


def gadget_inverse_expr(F: Expr, delta: Expr, m: int) -> Expr:
    """Xi_m^-1(Xi_m(x) - (1 + delta(x)) / chi_m(F(x))) as an expression."""
    return XiInv(m, Xi(m, X) - (1 + delta) / Chi(m, F))


GADGET_GRID = tuple(10.0 * 10 ** (3 * j / 39) for j in range(40))


def between_gadget(F: Expr, delta: Expr, m: int, check: bool = True,
                   tower: Tower | None = None) -> Expr:
    """Function whose inverse is Xi_m^-1(Xi_m - (1+delta)/chi_m(F)).

    With ``check`` the supplied F must be increasing and delta positive and
    decreasing on a grid over [10, 10^4].
    """
    if m < 3:
        raise DomainError(f"gadget level must be >= 3, got {m}", m)
    tw = tower or default_tower()
    tw._check(m)
    if check:
        fv = [mixed.to_float(evaluate(F, x, tw)) for x in GADGET_GRID]
        dv = [mixed.to_float(evaluate(delta, x, tw)) for x in GADGET_GRID]
        if any(b <= a for a, b in zip(fv, fv[1:])):
            raise DomainError("F is not strictly increasing on the check grid")
        if any(d <= 0 for d in dv) or any(b >= a for a, b in zip(dv, dv[1:])):
            raise DomainError("delta is not positive and decreasing on the check grid")
    return Gadget(m, F, delta, X)

"""Interpolation factors: Euler factors, the regulator factor and its
cancellation identity, Gauss sums, period tokens and the class-group sum
skeleton.

Symbolic factors are sympy expressions in the indeterminates
alpha, beta, chi_p, chi_pbar, p, eps_p subject to

    alpha * beta = p^(k+1) eps_p,     chi_p * chi_pbar = eps_p * p^e,

where e is the conjugate self-duality exponent.  ``euler_cancellation_check``
determines e from the cancellation identity instead of assuming it.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Callable, Optional, Sequence

import sympy

from .cmfield import ClassGroupData, Grossenchar, QFIdeal, QuadField
from .groups import DirichletCharacter, rou
from .padic import (PadicContext, PadicNum, multiplicative_order, primitive_root_of_unity,
                    teichmuller, unramified_context)
from .qexp import NewformRecord, hecke_poly

alpha, beta, chi_p, chi_pbar, p_sym, eps_p = sympy.symbols("alpha beta chi_p chi_pbar p eps_p")
SYMBOLS = (alpha, beta, chi_p, chi_pbar, p_sym, eps_p)


class ExceptionalZero(ArithmeticError):
    """An Euler-type factor vanishes (or has a pole) at the given data."""


class RelationError(ValueError):
    """The assumed self-duality relation is inconsistent with the cancellation identity."""


# ---------------------------------------------------------------------------
# symbolic factors


class FactorExpr:
    """A product of factors f_i^(n_i), each f_i a sympy expression such as 1 - X/Y."""

    def __init__(self, factors: Sequence = (), k: int = 0):
        self.factors = [(sympy.sympify(f), int(n)) for f, n in factors]
        self.k = k

    @classmethod
    def atom(cls, X, Y, k: int = 0, power: int = 1) -> "FactorExpr":
        return cls([(1 - X / Y, power)], k)

    @classmethod
    def one(cls, k: int = 0) -> "FactorExpr":
        return cls([], k)

    def __mul__(self, other: "FactorExpr") -> "FactorExpr":
        return FactorExpr(self.factors + other.factors, self.k)

    def inverse(self) -> "FactorExpr":
        return FactorExpr([(f, -n) for f, n in self.factors], self.k)

    @property
    def expr(self):
        out = sympy.Integer(1)
        for f, n in self.factors:
            out = out * f ** n
        return out

    def inverted_atoms(self) -> list:
        return [f for f, n in self.factors if n < 0]

    def normal_form(self, e: int = None):
        """Eliminate beta and chi_pbar with the relations and cancel."""
        e = self.k if e is None else e
        return normal_form(self.expr, self.k, e)

    def evaluate(self, values: dict):
        """Numeric value; raises ExceptionalZero when an inverted factor vanishes."""
        out = None
        for f, n in self.factors:
            v = evaluate(f, values)
            if _is_zero(v):
                if n < 0:
                    raise ExceptionalZero(f"factor {f} vanishes")
                return v
            t = v ** n
            out = t if out is None else out * t
        if out is None:
            return 1
        return out

    def __repr__(self):
        return f"FactorExpr({self.expr})"

    def to_json(self) -> str:
        return str(self.expr)


def normal_form(expr, k: int, e: int):
    subs = {beta: p_sym ** (k + 1) * eps_p / alpha, chi_pbar: eps_p * p_sym ** e / chi_p}
    return sympy.factor(sympy.cancel(sympy.together(sympy.sympify(expr).subs(subs))))


def _is_zero(v) -> bool:
    if isinstance(v, (int, Fraction)):
        return v == 0
    return v.is_zero()


def evaluate(expr, values: dict):
    """Evaluate a sympy expression with PadicNum (or rational) values for the symbols."""
    expr = sympy.sympify(expr)
    if expr.is_Symbol:
        return values[expr]
    if expr.is_Integer:
        return int(expr)
    if expr.is_Rational:
        return Fraction(int(expr.p), int(expr.q))
    if expr.is_Add:
        out = 0
        for a in expr.args:
            out = _add(out, evaluate(a, values))
        return out
    if expr.is_Mul:
        out = 1
        for a in expr.args:
            out = _mul(out, evaluate(a, values))
        return out
    if expr.is_Pow:
        base, exp = expr.args
        if not exp.is_Integer:
            raise ValueError("only integer powers are supported")
        b = evaluate(base, values)
        n = int(exp)
        if n >= 0:
            return b ** n
        if isinstance(b, (int, Fraction)):
            return Fraction(1) / Fraction(b) ** (-n)
        if b.is_zero():
            raise ExceptionalZero(f"{base} vanishes")
        return b.inverse() ** (-n)
    raise ValueError(f"cannot evaluate {expr}")


def _add(x, y):
    if isinstance(x, (int, Fraction)) and not isinstance(y, (int, Fraction)):
        x, y = y, x
    if isinstance(y, Fraction) and not isinstance(x, (int, Fraction)):
        return x + x.ctx.from_rational(y)
    return x + y


def _mul(x, y):
    if isinstance(x, (int, Fraction)) and not isinstance(y, (int, Fraction)):
        x, y = y, x
    if isinstance(y, Fraction) and not isinstance(x, (int, Fraction)):
        return x * x.ctx.from_rational(y)
    return x * y


# ---------------------------------------------------------------------------
# triples


def p_conductor_exponent(chi: Grossenchar) -> int:
    """Smallest m' such that the p-part of chi factors through level p^m'."""
    base = chi.base
    P = base.P
    if chi.m == 0:
        return 0
    p = base.p
    for mp in range(chi.m + 1):
        step = p ** mp
        if all(P.group.char_value(chi.psi, P.key(1, y)) == 0 for y in range(0, P.mod, step)):
            return mp
    return chi.m


class HeegnerTriple:
    """A p-stabilised pair (f, alpha, chi) with f of weight a+b+2."""

    def __init__(self, f: NewformRecord, alpha_val, chi: Grossenchar, p: int):
        self.f, self.chi, self.p = f, chi, p
        self.a, self.b = chi.a, chi.b
        self.k = self.a + self.b
        if f.weight != self.k + 2:
            raise ValueError(f"weight of f must be a + b + 2 = {self.k + 2}")
        if self.a < 0 or self.b < 0:
            raise ValueError("a and b must be >= 0")
        if f.eps.N != chi.eps.N or f.eps.table != chi.eps.table:
            raise ValueError("nebentypus of f does not match the character of chi")
        self.ctx = chi.ctx
        self.alpha = self.ctx(alpha_val)
        one, bb, c = hecke_poly(f, p)
        self.eps_p = f.eps_value(p)
        if not (self.alpha * self.alpha + bb * self.alpha + c).is_zero():
            raise ValueError("alpha is not a root of the Hecke polynomial")
        self.beta = c * self.alpha.inverse()
        self.m = p_conductor_exponent(chi)
        self.K = chi.base.K

    @property
    def noble(self) -> bool:
        """v_p(alpha) < k + 1 and alpha != beta."""
        return self.alpha.valuation() < self.k + 1 and not (self.alpha - self.beta).is_zero()

    def splitting(self) -> str:
        d = self.K.d
        if d % self.p == 0:
            return "ramified"
        from .cmfield import kronecker
        return "split" if kronecker(d, self.p) == 1 else "inert"

    def primes(self):
        """(frak_p, frak_pbar) with frak_p the prime cut out by the chosen embedding."""
        P1, P2 = self.K.primes_above(self.p)[:2]
        sq = self.chi.base.sqrt_d
        gen = self.ctx(Fraction(P1.b, 2)) + sq * self.ctx(Fraction(1, 2))
        if gen.valuation() > 0:
            return P1, P2
        return P2, P1

    def chi_values(self) -> dict:
        if self.m > 0:
            raise ValueError("chi is ramified at p: chi(frak_p) is undefined")
        if self.splitting() != "split":
            raise ValueError("p is not split")
        P, Pb = self.primes()
        return {chi_p: self.chi(P), chi_pbar: self.chi(Pb)}

    def values(self) -> dict:
        out = {alpha: self.alpha, beta: self.beta, p_sym: self.p, eps_p: self.eps_p}
        out.update(self.chi_values())
        return out


def euler_factor_A(t: HeegnerTriple = None, splitting: str = None, k: int = None) -> FactorExpr:
    """The Euler factor E_p(f_alpha, chi) as a FactorExpr (1 when chi is ramified at p)."""
    if t is not None:
        if t.m > 0:
            return FactorExpr.one(t.k)
        actual = t.splitting()
        if splitting is not None and splitting != actual:
            raise ValueError(f"p is {actual} in K, not {splitting}")
        splitting, k = actual, t.k
    k = 0 if k is None else k
    if splitting == "split":
        return FactorExpr.atom(chi_p, alpha, k) * FactorExpr.atom(chi_pbar, alpha, k)
    if splitting == "inert":
        return FactorExpr.atom(chi_p, alpha ** 2, k)
    if splitting == "ramified":
        return FactorExpr.atom(chi_p, alpha, k)
    raise ValueError(f"unknown splitting {splitting!r}")


def euler_factor_value(t: HeegnerTriple) -> PadicNum:
    if t.m > 0:
        return t.ctx.one()
    if t.splitting() != "split":
        raise NotImplementedError("numeric values are implemented for split p")
    return _as_padic(t.ctx, euler_factor_A(t).evaluate(t.values()))


def _as_padic(ctx, v):
    if isinstance(v, (int, Fraction)):
        return ctx.from_rational(Fraction(v))
    return v


def thmA_scalar(t: HeegnerTriple, j: int, m: int) -> PadicNum:
    """E_p(f_alpha, chi) / (alpha^m binom(k, j))."""
    if not 0 <= j <= t.k:
        raise ValueError("need 0 <= j <= k")
    if m < 0:
        raise ValueError("need m >= 0")
    E = euler_factor_value(t)
    return E * (t.alpha ** m * math.comb(t.k, j)).inverse()


def regulator_factor(t: HeegnerTriple = None, k: int = 0) -> FactorExpr:
    """(1 - alpha/(p chi_pbar)) (1 - chi_pbar/alpha)^-1."""
    if t is not None:
        if t.splitting() != "split":
            raise ValueError("the regulator factor needs p split")
        k = t.k
    return FactorExpr.atom(alpha, p_sym * chi_pbar, k) * FactorExpr.atom(chi_pbar, alpha, k, power=-1)


def regulator_value(t: HeegnerTriple) -> PadicNum:
    vals = t.values()
    for f in (1 - alpha / (p_sym * chi_pbar), 1 - chi_pbar / alpha):
        if _is_zero(evaluate(f, vals)):
            raise ExceptionalZero(f"exceptional zero: {f} vanishes")
    return regulator_factor(t).evaluate(vals)


def bdp_factor(k: int = 0) -> FactorExpr:
    """(1 - chi_p/alpha)(1 - chi_p/beta)."""
    return FactorExpr.atom(chi_p, alpha, k) * FactorExpr.atom(chi_p, beta, k)


class CancellationProof:
    def __init__(self, k: int, exponent: int, trace: list, lhs, rhs, rejected: list):
        self.k = k
        self.exponent = exponent
        self.trace = trace
        self.lhs = lhs
        self.rhs = rhs
        self.rejected = rejected

    @property
    def holds(self) -> bool:
        return self.exponent is not None

    def to_json(self) -> dict:
        return {"k": self.k, "exponent": self.exponent, "holds": self.holds, "trace": self.trace,
                "lhs": str(self.lhs), "rhs": str(self.rhs), "rejectedExponents": self.rejected}


def euler_cancellation_check(t: HeegnerTriple = None, k: int = None, assumed: int = None,
                             candidates: Sequence[int] = None) -> CancellationProof:
    """Find the exponents e for which E_A(split) * regulator = (1 - chi_p/alpha)(1 - chi_p/beta)
    holds in normal form.  Raises RelationError when none does, or when ``assumed`` is not one."""
    if t is not None:
        k = t.k
    if k is None:
        raise ValueError("need a triple or k")
    lhs = euler_factor_A(splitting="split", k=k) * regulator_factor(k=k)
    rhs = bdp_factor(k)
    candidates = range(0, 2 * k + 4) if candidates is None else candidates
    trace = [f"lhs = {lhs.expr}", f"rhs = {rhs.expr}",
             f"substitute beta = p^{k + 1} eps_p / alpha"]
    good, rejected = [], []
    for e in candidates:
        diff = normal_form(lhs.expr - rhs.expr, k, e)
        if diff == 0:
            good.append(e)
            trace.append(f"e = {e}: chi_pbar = eps_p p^{e} / chi_p gives lhs - rhs = 0")
        else:
            rejected.append(e)
    if len(good) != 1:
        raise RelationError(f"cancellation identity holds for exponents {good}, expected exactly one")
    e = good[0]
    if assumed is not None and assumed != e:
        raise RelationError(f"assumed relation exponent {assumed} is inconsistent; the identity needs {e}")
    trace.append(f"normal form of both sides: {normal_form(rhs.expr, k, e)}")
    return CancellationProof(k, e, trace, lhs.normal_form(e), rhs.normal_form(e), rejected)


def cancellation_spot_checks(k: int, ctx: PadicContext, count: int = 20, seed: int = 0,
                             exponent: int = None) -> list:
    """Random consistent tuples: both sides of the identity agree at precision."""
    e = euler_cancellation_check(k=k).exponent if exponent is None else exponent
    rng = random.Random(seed)
    p = ctx.p
    lhs = euler_factor_A(splitting="split", k=k) * regulator_factor(k=k)
    rhs = bdp_factor(k)
    out = []
    while len(out) < count:
        a = ctx(rng.randrange(1, p ** ctx.precision))
        c = ctx(rng.randrange(1, p ** ctx.precision))
        if not (a.is_unit() and c.is_unit()):
            continue
        ep = teichmuller(ctx(rng.randrange(1, p)))
        vals = {alpha: a, beta: ep * p ** (k + 1) * a.inverse(), chi_p: c,
                chi_pbar: ep * p ** e * c.inverse(), p_sym: p, eps_p: ep}
        try:
            l, r = lhs.evaluate(vals), rhs.evaluate(vals)
        except ExceptionalZero:
            continue
        out.append(bool((_as_padic(ctx, l) - _as_padic(ctx, r)).is_zero()))
    return out


# ---------------------------------------------------------------------------
# Gauss sums and constants


_GAUSS_CTX = {}


def gauss_context(eps: DirichletCharacter, p: int, precision: int = 10) -> PadicContext:
    """An unramified context holding the N-th roots of unity and the values of eps."""
    N = eps.N
    if N % p == 0:
        raise ValueError("p divides the modulus")
    if eps.order() % p == 0:
        raise ValueError("character values need a ramified extension")
    M = math.lcm(max(N, 1), eps.order())
    f = multiplicative_order(p, M) if M > 1 else 1
    key = (p, f, precision)
    if key not in _GAUSS_CTX:
        _GAUSS_CTX[key] = unramified_context(p, f, precision) if f > 1 else PadicContext(p, precision=precision)
    return _GAUSS_CTX[key]


_POWERS = {}


def _root_powers(ctx: PadicContext, M: int) -> list:
    key = (ctx._key(), M)
    if key not in _POWERS:
        zeta = primitive_root_of_unity(ctx, M)
        pw = [ctx.one()]
        for _ in range(M - 1):
            pw.append(pw[-1] * zeta)
        _POWERS[key] = pw
    return _POWERS[key]


def gauss_sum(eps: DirichletCharacter, ctx: PadicContext = None, p: int = 5, precision: int = 10) -> PadicNum:
    """G(eps) = sum over a mod N of eps(a) zeta_N^a."""
    if ctx is None:
        ctx = gauss_context(eps, p, precision)
    N = eps.N
    if N == 1:
        return ctx.one()
    M = math.lcm(N, eps.order())
    if (ctx.q - 1) % M:
        raise ValueError("context residue degree too small")
    # every term is a power of one primitive M-th root of unity
    counts = [0] * M
    for a in range(N):
        f = eps(a)
        if f is not None:
            counts[(a * (M // N) + int(f * M)) % M] += 1
    pw = _root_powers(ctx, M)
    out = ctx.zero()
    for i, c in enumerate(counts):
        if c:
            out = out + pw[i] * c
    return out


def gauss_check(eps: DirichletCharacter, p: int = 5, precision: int = 10) -> bool:
    """G(eps) G(eps-bar) = eps(-1) N."""
    ctx = gauss_context(eps, p, precision)
    lhs = gauss_sum(eps, ctx) * gauss_sum(eps.conj(), ctx)
    return (lhs - ctx(eps.parity() * eps.N)).is_zero()


class PeriodScaled:
    """value * Omega_p^omega_p * Omega_inf^omega_inf with formal period tokens."""

    def __init__(self, value, omega_p: int = 0, omega_inf: int = 0):
        self.value = value
        self.omega_p = omega_p
        self.omega_inf = omega_inf

    def __mul__(self, other):
        if not isinstance(other, PeriodScaled):
            return PeriodScaled(self.value * other, self.omega_p, self.omega_inf)
        return PeriodScaled(self.value * other.value, self.omega_p + other.omega_p,
                            self.omega_inf + other.omega_inf)

    def __add__(self, other: "PeriodScaled") -> "PeriodScaled":
        self._same(other)
        return PeriodScaled(self.value + other.value, self.omega_p, self.omega_inf)

    def _same(self, other):
        if (self.omega_p, self.omega_inf) != (other.omega_p, other.omega_inf):
            raise ValueError("cannot compare values with different period exponents")

    def __eq__(self, other):
        if not isinstance(other, PeriodScaled):
            return NotImplemented
        self._same(other)
        d = self.value - other.value
        return d == 0 if isinstance(d, (int, Fraction)) else d.is_zero()

    __hash__ = None

    def to_json(self) -> dict:
        v = self.value
        return {"value": str(v) if isinstance(v, (int, Fraction)) or not hasattr(v, "to_json") else v.to_json(),
                "omegaP": self.omega_p, "omegaInf": self.omega_inf}


def classify(a: int, b: int, k: int) -> str:
    if a + b != k:
        raise ValueError("need a + b = k")
    if 0 <= a <= k and 0 <= b <= k:
        return "Sigma1"
    if a >= k + 1 and b <= -1:
        return "Sigma2"
    if b >= k + 1 and a <= -1:
        return "Sigma2'"
    raise ValueError(f"({a}, {b}) is not of a recognised type")


def _constants(a: int, b: int, G_inv: PadicNum) -> dict:
    out = {}
    if b >= 0 and a >= 0:
        out["explrecipConst"] = PeriodScaled(G_inv * Fraction(1, math.factorial(b) * math.comb(a + b, a)))
        out["corollaryConst"] = PeriodScaled(G_inv * Fraction(math.factorial(a), math.factorial(a + b)))
    else:
        out["explrecipConst"] = None
        out["corollaryConst"] = None
    return out


def bdp_constants(a: int, b: int, k: int, eps: DirichletCharacter, p: int = 5, precision: int = 10,
                  triple: HeegnerTriple = None) -> dict:
    """Interpolation factor, reciprocity constants (under both (a, b) orderings)
    and the Omega_p exponent."""
    cls = classify(a, b, k)
    ctx = gauss_context(eps, p, precision)
    G_inv = gauss_sum(eps.conj(), ctx).inverse()
    out = {"classification": cls, "omegaExp": a - b, "gaussInverse": G_inv}
    out["bdpFactor"] = PeriodScaled(bdp_factor(k), omega_p=a - b)
    if triple is not None and triple.m == 0 and triple.splitting() == "split":
        out["bdpFactorValue"] = _as_padic(triple.ctx, bdp_factor(k).evaluate(triple.values()))
    out["ab"] = _constants(a, b, G_inv)
    out["ba"] = _constants(b, a, G_inv)
    return out


def constants_report(t: HeegnerTriple, ms: Sequence[int] = (0, 1, 2), precision: int = 10) -> dict:
    """JSON-ready constants for one triple."""
    consts = bdp_constants(t.a, t.b, t.k, t.f.eps, t.p, precision, t)
    split = t.splitting() == "split" and t.m == 0

    def js(v):
        if v is None:
            return None
        if isinstance(v, PeriodScaled):
            return v.to_json() if not isinstance(v.value, FactorExpr) else {
                "value": v.value.to_json(), "omegaP": v.omega_p, "omegaInf": v.omega_inf}
        return v.to_json() if hasattr(v, "to_json") else str(v)

    table = {}
    for m in ms:
        for j in range(t.k + 1):
            table[f"{m},{j}"] = thmA_scalar(t, j, m).to_json()
    return {
        "classification": consts["classification"],
        "eulerA": str(euler_factor_A(t).expr),
        "eulerAValue": euler_factor_value(t).to_json(),
        "regulator": str(regulator_factor(t).expr) if split else None,
        "regulatorValue": js(regulator_value(t)) if split else None,
        "bdpFactor": consts["bdpFactor"].value.to_json(),
        "bdpFactorValue": js(consts.get("bdpFactorValue")),
        "explrecipConst": js(consts["ab"]["explrecipConst"]),
        "corollaryConst": js(consts["ab"]["corollaryConst"]),
        "swapped": {"explrecipConst": js(consts["ba"]["explrecipConst"]),
                    "corollaryConst": js(consts["ba"]["corollaryConst"])},
        "omegaExp": consts["omegaExp"],
        "thmAScalar": table,
    }


# ---------------------------------------------------------------------------
# class-group sum


class MockEvaluator:
    """Indicator of the principal class: 1 on a principal ideal, 0 otherwise."""

    def __init__(self, ctx: PadicContext, cls: ClassGroupData):
        self.ctx = ctx
        self.cls = cls

    def __call__(self, ideal: QFIdeal, form=None) -> PadicNum:
        c = self.cls.class_of(ideal)
        return self.ctx.one() if c == self.cls.group.identity else self.ctx.zero()


def bdp_sum_skeleton(form, chi: Grossenchar, cls: ClassGroupData, evaluator: Callable, b: int = None,
                     avoid: int = None) -> PeriodScaled:
    """sum over classes c of chi(c)^-1 N(c)^b eval(c)."""
    b = chi.b if b is None else b
    avoid = chi.frakN.norm() * chi.base.p if avoid is None else avoid
    reps = cls.representatives(avoid)
    total = chi.ctx.zero()
    for c, I in enumerate(reps):
        try:
            v = evaluator(I, form)
        except Exception as exc:
            raise RuntimeError(f"evaluator failed on class {c}: {exc}") from exc
        if v.is_zero():
            continue
        total = total + chi(I).inverse() * v * (I.norm() ** b)
    return PeriodScaled(total, omega_p=chi.a - chi.b)


def orthogonality_check(chars: Sequence[Grossenchar], cls: ClassGroupData, form=None) -> dict:
    """With the mock evaluator the sum of the skeleton over all characters
    of one type is h_K times the principal term."""
    ctx = chars[0].ctx
    ev = MockEvaluator(ctx, cls)
    total = None
    for chi in chars:
        s = bdp_sum_skeleton(form, chi, cls, ev)
        total = s if total is None else total + s
    reps = cls.representatives(chars[0].frakN.norm() * chars[0].base.p)
    principal = reps[cls.group.identity]
    term = chars[0](principal).inverse() * (principal.norm() ** chars[0].b)
    expected = PeriodScaled(term * cls.h, omega_p=chars[0].a - chars[0].b)
    return {"sum": total, "expected": expected, "ok": total == expected, "h": cls.h,
            "characters": len(chars)}

"""Capped-precision arithmetic in Q_p and its finite extensions.

Two presentations of an extension are supported: an unramified one, given by a
monic polynomial that stays irreducible mod p, and a totally ramified one,
given by an Eisenstein polynomial.  The empty polynomial means Q_p itself.

Elements are stored as ``c / p^s`` where ``c`` is an integral coordinate
vector in the power basis of the generator.  Precision is absolute and kept in
units of the uniformiser (so for unramified contexts it is the usual number of
p-adic digits).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import sympy
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_irreducible_p


class PrecisionError(ArithmeticError):
    """Raised when an operation needs more precision than is known."""


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_factorial(n: int, p: int) -> int:
    v, q = 0, p
    while q <= n:
        v += n // q
        q *= p
    return v


def _kronecker_mul(a, b, n):
    """Coefficients of the product of two non-negative integer polynomials."""
    width = (max(a) * max(b) * min(len(a), len(b))).bit_length() + 1
    A = int.from_bytes(b"".join(x.to_bytes((width + 7) // 8, "little") for x in a), "little")
    B = int.from_bytes(b"".join(x.to_bytes((width + 7) // 8, "little") for x in b), "little")
    w = ((width + 7) // 8) * 8
    C = A * B
    mask = (1 << w) - 1
    out = []
    for _ in range(n):
        out.append(C & mask)
        C >>= w
    return out


class PadicContext:
    """The coefficient field: Q_p or Q_p[x]/(poly) at a fixed precision cap."""

    def __init__(self, p: int, poly: Sequence[int] = (), precision: int = 10):
        if p == 2 or not sympy.isprime(p):
            raise ValueError(f"p must be an odd prime (p != 2 is assumed throughout), got {p}")
        if precision < 1:
            raise ValueError("precision must be positive")
        poly = tuple(int(c) for c in poly)
        self.p = p
        self.precision = int(precision)
        if len(poly) <= 2:
            # empty, or a linear polynomial: the base field
            self.poly = ()
            self.degree, self.e, self.f = 1, 1, 1
            self.kind = "base"
        else:
            if poly[-1] != 1:
                raise ValueError("defining polynomial must be monic")
            d = len(poly) - 1
            self.poly = poly
            self.degree = d
            low = poly[:-1]
            if all(c % p == 0 for c in low) and poly[0] % (p * p) != 0:
                self.kind, self.e, self.f = "eisenstein", d, 1
            else:
                if not gf_irreducible_p([c % p for c in reversed(poly)], p, ZZ):
                    raise ValueError(
                        "unsupported presentation: polynomial is neither irreducible mod p nor Eisenstein"
                    )
                self.kind, self.e, self.f = "unramified", 1, d
        self.cap = self.precision * self.e
        self._poly_nz = None
        self.q = p ** self.f

    # identity -----------------------------------------------------------
    def _key(self):
        return (self.p, self.poly, self.precision)

    def __eq__(self, other):
        return isinstance(other, PadicContext) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.kind == "base":
            return f"PadicContext(p={self.p}, precision={self.precision})"
        return f"PadicContext(p={self.p}, poly={list(self.poly)}, precision={self.precision})"

    def with_precision(self, precision: int) -> "PadicContext":
        return PadicContext(self.p, self.poly, precision)

    def to_json(self) -> dict:
        return {"p": self.p, "poly": [str(c) for c in self.poly], "precision": self.precision}

    @classmethod
    def from_json(cls, data: dict) -> "PadicContext":
        return cls(int(data["p"]), [int(c) for c in data.get("poly", [])], int(data["precision"]))

    # constructors ---------------------------------------------------------
    def zero(self) -> "PadicNum":
        return PadicNum(self, (0,) * self.degree, 0, self.cap)

    def one(self) -> "PadicNum":
        return self(1)

    def __call__(self, value) -> "PadicNum":
        """Coerce an int, Fraction or PadicNum into this context."""
        if isinstance(value, PadicNum):
            if value.ctx is self or value.ctx == self:
                return value
            raise ValueError("context mismatch")
        if isinstance(value, int):
            return PadicNum(self, (value,) + (0,) * (self.degree - 1), 0, self.cap)
        if isinstance(value, Fraction):
            return self.from_rational(value)
        raise TypeError(f"cannot coerce {type(value).__name__} into a p-adic number")

    def from_rational(self, r) -> "PadicNum":
        r = Fraction(r)
        num, den = r.numerator, r.denominator
        s = 0
        while den % self.p == 0:
            den //= self.p
            s += 1
        mod = self.p ** (self.precision + s + 1)
        c0 = num * pow(den, -1, mod) % mod
        return PadicNum(self, (c0,) + (0,) * (self.degree - 1), s, self.cap)

    def from_coeffs(self, coeffs: Iterable[int], denom_exp: int = 0, precision=None) -> "PadicNum":
        c = list(int(x) for x in coeffs)
        if len(c) > self.degree:
            raise ValueError("too many coordinates")
        c += [0] * (self.degree - len(c))
        prec = self.cap if precision is None else int(precision * self.e)
        return PadicNum(self, tuple(c), denom_exp, min(prec, self.cap))

    def gen(self) -> "PadicNum":
        """The generator x of the presentation (the uniformiser when Eisenstein)."""
        if self.degree == 1:
            raise ValueError("base field has no generator")
        return self.from_coeffs([0, 1])

    def uniformizer(self) -> "PadicNum":
        return self.gen() if self.kind == "eisenstein" else self(self.p)

    # polynomial arithmetic on coordinate vectors -----------------------------
    def _mulmod(self, a, b):
        d = self.degree
        if d == 1:
            return (a[0] * b[0],)
        if d >= 6 and min(a) >= 0 and min(b) >= 0:
            r = _kronecker_mul(a, b, 2 * d - 1)
        else:
            r = [0] * (2 * d - 1)
            for i, ai in enumerate(a):
                if ai:
                    for j, bj in enumerate(b):
                        r[i + j] += ai * bj
        nz = self._poly_nz
        if nz is None:
            nz = self._poly_nz = [(j, c) for j, c in enumerate(self.poly[:d]) if c]
        for i in range(2 * d - 2, d - 1, -1):
            c = r[i]
            if c:
                base = i - d
                for j, pj in nz:
                    r[base + j] -= c * pj
        return tuple(r[:d])

    def _coord_val(self, c) -> int | None:
        """Valuation in uniformiser units of the integral vector c (None if zero)."""
        p = self.p
        best = None
        if self.kind == "eisenstein":
            for i, ci in enumerate(c):
                if ci:
                    v = self.e * vp(ci, p) + i
                    if best is None or v < best:
                        best = v
        else:
            for ci in c:
                if ci:
                    v = vp(ci, p)
                    if best is None or v < best:
                        best = v
        return best

    def _reduce(self, c, m):
        """Reduce integral coordinates modulo the m-th power of the uniformiser."""
        p = self.p
        if m <= 0:
            return (0,) * self.degree
        if self.kind == "eisenstein":
            e = self.e
            return tuple(ci % p ** max(0, -((i - m) // e)) for i, ci in enumerate(c))
        mod = p ** m
        return tuple(ci % mod for ci in c)


class PadicNum:
    """An element c/p^s of a p-adic field known modulo pi^prec."""

    __slots__ = ("ctx", "_c", "_s", "_prec")

    def __init__(self, ctx: PadicContext, c, s: int, prec: int):
        p = ctx.p
        prec = min(prec, ctx.cap)
        if s < 0:
            c = tuple(x * p ** (-s) for x in c)
            s = 0
        m = prec + ctx.e * s
        c = ctx._reduce(c, m)
        while s > 0 and all(x % p == 0 for x in c):
            c = tuple(x // p for x in c)
            s -= 1
        if not any(c):
            s = 0
        self.ctx = ctx
        self._c = c
        self._s = s
        self._prec = prec

    # basic data ------------------------------------------------------------
    @property
    def precision(self):
        """Absolute precision in the normalised valuation v(p) = 1."""
        e = self.ctx.e
        return self._prec if e == 1 else Fraction(self._prec, e)

    @property
    def coeffs(self) -> tuple:
        return self._c

    @property
    def denom_exp(self) -> int:
        return self._s

    def is_zero(self) -> bool:
        """True when the element is zero at its known precision."""
        return not any(self._c)

    def _v(self) -> int:
        """Valuation in uniformiser units; the precision if zero-at-precision."""
        cv = self.ctx._coord_val(self._c)
        if cv is None:
            return self._prec
        return cv - self.ctx.e * self._s

    def valuation(self):
        """Normalised valuation; for a zero-at-precision element this is the
        lower bound given by the precision (check ``is_zero``)."""
        v = self._v()
        e = self.ctx.e
        return v if e == 1 else Fraction(v, e)

    def is_unit(self) -> bool:
        return not self.is_zero() and self._v() == 0

    def is_integral(self) -> bool:
        return self._s == 0

    def with_precision(self, prec) -> "PadicNum":
        """Lower the known precision (normalised units); never raises it."""
        m = math.floor(prec * self.ctx.e) if not isinstance(prec, float) else int(prec * self.ctx.e)
        if m >= self._prec:
            return self
        return PadicNum(self.ctx, self._c, self._s, m)

    def lift_precision(self) -> "PadicNum":
        """Treat the representative as exact, raising precision to the cap."""
        return PadicNum(self.ctx, self._c, self._s, self.ctx.cap)

    def __repr__(self):
        if self.ctx.degree == 1:
            body = str(self._c[0]) if self._s == 0 else f"{self._c[0]}/{self.ctx.p}^{self._s}"
        else:
            body = f"{list(self._c)}" + ("" if self._s == 0 else f"/{self.ctx.p}^{self._s}")
        return f"{body} + O({self.ctx.p}^{self.precision})"

    def to_rational(self) -> Fraction:
        """The representative as a rational number (base field only)."""
        if self.ctx.degree != 1:
            raise ValueError("only base-field elements convert to rationals")
        return Fraction(self._c[0], self.ctx.p ** self._s)

    def residue_int(self) -> int:
        """Signed-free integer representative (base field, integral elements)."""
        if self.ctx.degree != 1 or self._s:
            raise ValueError("needs an integral base-field element")
        return self._c[0]

    def to_json(self) -> dict:
        return {
            "coeffs": [str(x) for x in self._c],
            "denomExp": self._s,
            "precision": str(self.precision),
        }

    @classmethod
    def from_json(cls, ctx: PadicContext, data: dict) -> "PadicNum":
        prec = Fraction(data["precision"])
        return cls(ctx, tuple(int(x) for x in data["coeffs"]), int(data["denomExp"]), int(prec * ctx.e))

    # arithmetic ---------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, PadicNum):
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise ValueError("context mismatch")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = self.ctx.p
        s = max(self._s, o._s)
        a, b = self._c, o._c
        fa, fb = p ** (s - self._s), p ** (s - o._s)
        c = tuple(x * fa + y * fb for x, y in zip(a, b))
        return PadicNum(self.ctx, c, s, min(self._prec, o._prec))

    __radd__ = __add__

    def __neg__(self):
        return PadicNum(self.ctx, tuple(-x for x in self._c), self._s, self._prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, int) and self.ctx.degree == 1:
            if other == 0:
                return self.ctx.zero()
            # exact integer scaling
            v = vp(other, self.ctx.p)
            return PadicNum(self.ctx, (self._c[0] * other,), self._s, self._prec + v)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        va, vb = self._v(), o._v()
        prec = min(self._prec + vb, o._prec + va)
        c = self.ctx._mulmod(self._c, o._c)
        return PadicNum(self.ctx, c, self._s + o._s, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNum":
        if self.is_zero():
            raise ZeroDivisionError("division by an element that is zero at precision")
        ctx = self.ctx
        v = self._v()
        rel = self._prec - v  # relative precision in uniformiser units
        if ctx.degree == 1:
            p = ctx.p
            c = self._c[0]
            w = vp(c, p)
            u = c // p ** w
            mod = p ** (ctx.precision + 2 * w + self._s + 2)
            inv = pow(u, -1, mod)
            # 1/(u p^w / p^s) = inv * p^(s-w)
            shift = self._s - w
            prec = min(ctx.cap, rel - v)
            if shift >= 0:
                return PadicNum(ctx, (inv * p ** shift,), 0, prec)
            return PadicNum(ctx, (inv,), -shift, prec)
        # extension: strip the valuation, invert the unit by Newton iteration
        if ctx.kind == "eisenstein":
            pinv = _pi_inverse(ctx)
            unit = self.lift_precision() * (pinv ** v if v >= 0 else ctx.uniformizer() ** (-v))
            scale = pinv ** v if v >= 0 else ctx.uniformizer() ** (-v)
        else:
            unit = self.lift_precision() * ctx.from_rational(Fraction(1, ctx.p) ** v) if v >= 0 else \
                self.lift_precision() * ctx(ctx.p ** (-v))
            scale = ctx.from_rational(Fraction(1, ctx.p) ** v) if v >= 0 else ctx(ctx.p ** (-v))
        winv = _unit_inverse(unit)
        res = winv * scale
        return res.with_precision(Fraction(rel - v, ctx.e))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if isinstance(other, int) and self.ctx.degree == 1 and other != 0:
            return self * self.ctx.from_rational(Fraction(1, other))
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("use unit_power for non-integer exponents")
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ctx.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        """Equality at the smaller of the two known precisions."""
        if isinstance(other, (int, Fraction)):
            other = self.ctx(other)
        if not isinstance(other, PadicNum):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __bool__(self):
        return not self.is_zero()

    def conj_coords(self):
        return self._c


def _unit_inverse(w: PadicNum) -> PadicNum:
    """Inverse of a unit: residue inverse via w^(q-2), then Newton lifting."""
    ctx = w.ctx
    low = w.with_precision(Fraction(1, ctx.e))
    z = low ** (ctx.q - 2) if ctx.kind == "unramified" else low ** (ctx.p - 2)
    z = z.lift_precision()
    two = ctx(2)
    known = 1
    while known < ctx.cap:
        z = z * (two - w.lift_precision() * z)
        known *= 2
    return z.with_precision(Fraction(w._prec, ctx.e))


_PI_INV_CACHE: dict = {}


def _pi_inverse(ctx: PadicContext) -> PadicNum:
    """1/pi for an Eisenstein generator pi: pi^(e-1) / (p * eta) with pi^e = p*eta."""
    key = ctx._key()
    if key not in _PI_INV_CACHE:
        e, p = ctx.e, ctx.p
        eta = ctx.from_coeffs([-c // p for c in ctx.poly[:-1]])
        eta_inv = _unit_inverse(eta)
        pi = ctx.gen()
        _PI_INV_CACHE[key] = (pi ** (e - 1)) * eta_inv * ctx.from_rational(Fraction(1, p))
    return _PI_INV_CACHE[key]


# --------------------------------------------------------------------------
# transcendental helpers


def teichmuller(x: PadicNum) -> PadicNum:
    """The (q-1)-st root of unity congruent to the unit x."""
    if not x.is_unit():
        raise ValueError("teichmuller needs a unit")
    ctx = x.ctx
    z = x.lift_precision()
    q = ctx.q
    for _ in range(ctx.cap + 2):
        nz = z ** q
        if (nz - z).is_zero():
            return nz
        z = nz
    return z


def _check_log_domain(y: PadicNum):
    ctx = y.ctx
    # v(y) > 1/(p-1), in uniformiser units: v*(p-1) > e
    if not y.is_zero() and y._v() * (ctx.p - 1) <= ctx.e:
        raise ValueError("series does not converge: valuation must exceed 1/(p-1)")


def log1(x: PadicNum) -> PadicNum:
    """p-adic logarithm of x with v(x-1) > 1/(p-1)."""
    ctx = x.ctx
    y = x - 1
    _check_log_domain(y)
    if y.is_zero():
        return y
    vy = y._v()
    e, p, cap = ctx.e, ctx.p, ctx.cap
    total = ctx.zero()
    power = ctx.one()
    i = 1
    while True:
        power = power * y
        term = power * ctx.from_rational(Fraction((-1) ** (i + 1), i))
        total = total + term
        i += 1
        # remaining terms have valuation >= i*vy - e*log_p(i), increasing once i*vy*ln p > e
        if i * vy - e * math.log(i, p) >= cap + 1 and i * vy * math.log(p) > e:
            break
    return total.with_precision(Fraction(min(total._prec, y._prec), e))


def exp1(x: PadicNum) -> PadicNum:
    """p-adic exponential of x with v(x) > 1/(p-1)."""
    ctx = x.ctx
    _check_log_domain(x)
    if x.is_zero():
        return ctx.one().with_precision(x.precision)
    vx = x._v()
    e, p, cap = ctx.e, ctx.p, ctx.cap
    total = ctx.one()
    term = ctx.one()
    i = 1
    while True:
        term = term * x * ctx.from_rational(Fraction(1, i))
        total = total + term
        i += 1
        # v(x^i/i!) >= i*vx - e*(i-1)/(p-1), increasing in i
        if i * vx - e * (i - 1) / (p - 1) >= cap + 1:
            break
    return total.with_precision(Fraction(min(total._prec, x._prec), e))


def unit_power(x: PadicNum, s) -> PadicNum:
    """x^s = exp1(s * log1(x)) for x congruent to 1 and a p-adic exponent s."""
    ctx = x.ctx
    s = ctx(s) if not isinstance(s, PadicNum) else s
    if s.is_zero() and s.precision >= ctx.precision:
        return ctx.one()
    return exp1(s * log1(x))


def one_unit_part(x: PadicNum) -> PadicNum:
    """<x> = x / teichmuller(x) for a unit x."""
    return x * teichmuller(x).inverse()


# --------------------------------------------------------------------------
# roots


def residue_field_elements(ctx: PadicContext, limit: int = 200000):
    """Iterate over Teichmuller-free representatives of the residue field."""
    if ctx.kind == "eisenstein":
        for a in range(ctx.p):
            yield ctx(a)
        return
    if ctx.q > limit:
        raise ValueError("residue field too large for exhaustive search")
    d, p = ctx.degree, ctx.p
    for n in range(ctx.q):
        digits = []
        for _ in range(d):
            digits.append(n % p)
            n //= p
        yield ctx.from_coeffs(digits)


def nth_root(c: PadicNum, n: int, choose: int = 0) -> PadicNum:
    """An n-th root of c by Hensel lifting from a residue root, for p not dividing n.

    ``choose`` picks among the residue roots (ordered by enumeration).
    """
    ctx = c.ctx
    if n % ctx.p == 0:
        raise ValueError("Hensel lifting needs p not dividing n")
    if c.is_zero():
        return c
    v = c._v()
    if v % n:
        raise ValueError("valuation not divisible by n; root needs a ramified extension")
    pi = ctx.uniformizer()
    unit = c * pi ** (-v) if v else c
    low = unit.with_precision(Fraction(1, ctx.e))
    roots = [r for r in residue_field_elements(ctx) if not r.is_zero() and (r ** n - low).is_zero()]
    if not roots:
        raise ValueError("no root in the residue field; an extension is needed")
    z = roots[choose].lift_precision()
    target = unit.lift_precision()
    known = 1
    inv_n = ctx.from_rational(Fraction(1, n))
    while known < ctx.cap + 1:
        z = z - (z ** n - target) * (z ** (n - 1)).inverse() * inv_n
        known *= 2
    z = z.with_precision(Fraction(unit._prec, ctx.e))
    if v:
        z = z * pi ** (v // n)
    return z


def sqrt(c: PadicNum, choose: int = 0) -> PadicNum:
    return nth_root(c, 2, choose)


# --------------------------------------------------------------------------
# unramified extensions and roots of unity


def multiplicative_order(a: int, n: int) -> int:
    return int(sympy.n_order(a, n))


def unramified_context(p: int, f: int, precision: int = 10) -> PadicContext:
    """Deterministic unramified extension of degree f (Q_p itself when f = 1)."""
    if f == 1:
        return PadicContext(p, (), precision)
    n = 0
    while True:
        n += 1
        digits, m = [], n
        for _ in range(f):
            digits.append(m % p)
            m //= p
        if digits[0] == 0:
            continue
        poly = digits + [1]
        if gf_irreducible_p(list(reversed(poly)), p, ZZ):
            return PadicContext(p, poly, precision)


_ROOT_CACHE: dict = {}


def primitive_root_of_unity(ctx: PadicContext, M: int) -> PadicNum:
    """A primitive M-th root of unity (p not dividing M), chosen as a power of the
    Teichmuller lift of the first multiplicative generator of the residue field."""
    key = (ctx._key(), M)
    if key in _ROOT_CACHE:
        return _ROOT_CACHE[key]
    q = ctx.q
    if (q - 1) % M:
        raise ValueError(f"context residue field F_{q} lacks primitive {M}-th roots of unity")
    zeta = _lifted_generator(ctx) ** ((q - 1) // M)
    _ROOT_CACHE[key] = zeta
    return zeta


_GEN_CACHE: dict = {}


def _lifted_generator(ctx: PadicContext) -> PadicNum:
    """Teichmuller lift of the first generator of the residue field's unit group."""
    key = ctx._key()
    if key in _GEN_CACHE:
        return _GEN_CACHE[key]
    q = ctx.q
    primes = list(sympy.factorint(q - 1))
    gen = None
    if ctx.degree == 1:
        gen = ctx(int(sympy.primitive_root(ctx.p)))
    else:
        for cand in _generator_candidates(ctx):
            low = cand.with_precision(1)
            if all(not (low ** ((q - 1) // ell) - 1).is_zero() for ell in primes):
                gen = cand
                break
    _GEN_CACHE[key] = teichmuller(gen)
    return _GEN_CACHE[key]


def _generator_candidates(ctx):
    d, p = ctx.degree, ctx.p
    n = p  # skip the constants first, they generate only F_p^x
    while True:
        digits, m = [], n
        for _ in range(d):
            digits.append(m % p)
            m //= p
        yield ctx.from_coeffs(digits)
        n += 1

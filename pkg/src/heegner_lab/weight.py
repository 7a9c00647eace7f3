"""Discs in weight space and their truncated coordinate rings.

A disc U is described by a centre k0, a radius exponent r and a truncation
degree.  Its coordinate u is normalised by

    nabla = k0 + p^(r-1) * u,

so the integer weight k corresponds to u = (k - k0) / p^(r-1).  Admissible
weights (k = k0 mod p-1, v_p(k - k0) >= r) have v_p(u) >= 1.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .padic import PadicContext, PadicNum, log1, teichmuller, vp, vp_factorial

INF = math.inf


class WeightDisc:
    """A disc around the integer weight k0 on one component of weight space."""

    def __init__(self, ctx: PadicContext, k0: int, r: int = 1, dmax: int = 12):
        if r < 1:
            raise ValueError("radius exponent r must be >= 1")
        if dmax < 1:
            raise ValueError("truncation degree must be >= 1")
        self.ctx = ctx
        self.p = ctx.p
        self.k0 = int(k0)
        self.r = int(r)
        self.dmax = int(dmax)
        self.scale = self.p ** (self.r - 1)

    def _key(self):
        return (self.ctx._key(), self.k0, self.r, self.dmax)

    def __eq__(self, other):
        return isinstance(other, WeightDisc) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"WeightDisc(p={self.p}, k0={self.k0}, r={self.r}, dmax={self.dmax})"

    def to_json(self) -> dict:
        return {"p": self.p, "k0": self.k0, "r": self.r, "dmax": self.dmax,
                "precision": self.ctx.precision}

    def is_admissible(self, k: int) -> bool:
        d = k - self.k0
        if d % (self.p - 1):
            return False
        return d == 0 or vp(d, self.p) >= self.r

    def check_admissible(self, k: int):
        if (k - self.k0) % (self.p - 1):
            raise ValueError(f"weight {k} lies off the component of k0={self.k0} mod {self.p - 1}")
        if not self.is_admissible(k):
            raise ValueError(f"weight {k} lies outside the disc (need v_p(k - k0) >= {self.r})")

    def admissible_weights(self, lo: int, hi: int) -> list[int]:
        return [k for k in range(lo, hi + 1) if self.is_admissible(k)]

    def u_value(self, k) -> PadicNum:
        """The coordinate of the integer weight k."""
        return self.ctx.from_rational(Fraction(k - self.k0, self.scale))

    def shifted(self, j: int) -> "WeightDisc":
        """The disc U + j; it shares the coordinate u with U."""
        return WeightDisc(self.ctx, self.k0 + j, self.r, self.dmax)

    # elements -----------------------------------------------------------------
    def const(self, c) -> "IwasawaElem":
        c = self.ctx(c)
        return IwasawaElem(self, [c] + [self.ctx.zero()] * self.dmax)

    def zero(self) -> "IwasawaElem":
        return self.const(0)

    def one(self) -> "IwasawaElem":
        return self.const(1)

    def u(self) -> "IwasawaElem":
        z = self.ctx.zero()
        return IwasawaElem(self, [z, self.ctx.one()] + [z] * (self.dmax - 1))

    def analyticity_level(self) -> int:
        """Smallest n >= 1 with v_p(kappa_U(1+p) - 1) > 1/(p^(n-1)(p-1)) on all of U.

        The valuation is the Gauss valuation of kappa_U(1+p) - 1 as a polynomial
        in u, which bounds it over the closed disc |u| <= 1.
        """
        v = (kappa_eval(self, self.ctx(1 + self.p)) - 1).valuation()
        if v <= 0:
            raise ValueError("kappa_U is not analytic on this disc")
        n = 1
        while Fraction(v) <= Fraction(1, self.p ** (n - 1) * (self.p - 1)):
            n += 1
        return n


def _tail_exp_bound(vL, start: int, p: int):
    """min over j >= start of j*vL - v_p(j!), for vL > 1/(p-1)."""
    best = INF
    j = start
    while True:
        val = j * vL - vp_factorial(j, p)
        best = min(best, val)
        # v_p(j!) <= (j-1)/(p-1), so later terms are at least this
        if j * vL - Fraction(j - 1, p - 1) >= best:
            return best
        j += 1


class IwasawaElem:
    """A truncated polynomial sum c_i u^i over a disc.

    ``loss`` is a lower bound on the valuation of the error from discarding
    terms of degree > dmax (``inf`` when nothing was discarded); it bounds the
    error uniformly on |u| <= 1.
    """

    __slots__ = ("disc", "coeffs", "loss")

    def __init__(self, disc: WeightDisc, coeffs: Sequence[PadicNum], loss=INF):
        n = disc.dmax + 1
        coeffs = list(coeffs)
        if len(coeffs) > n:
            raise ValueError("coefficient vector longer than truncation degree")
        if len(coeffs) < n:
            coeffs += [disc.ctx.zero()] * (n - len(coeffs))
        self.disc = disc
        self.coeffs = coeffs
        self.loss = loss

    # data ---------------------------------------------------------------------
    @property
    def denom_exp(self) -> int:
        """Smallest e >= 0 with p^e times this element integral."""
        return max([0] + [c.denom_exp for c in self.coeffs if not c.is_zero()])

    def valuation(self):
        """Gauss valuation (min over coefficients), capped by the truncation loss."""
        vals = [c.valuation() for c in self.coeffs]
        return min(min(vals), self.loss)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def degree(self) -> int:
        d = -1
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                d = i
        return d

    def __repr__(self):
        terms = [f"({c})*u^{i}" for i, c in enumerate(self.coeffs) if not c.is_zero()]
        return "IwasawaElem(" + (" + ".join(terms) or "0") + ")"

    def to_json(self) -> dict:
        e = self.denom_exp
        scale = self.disc.ctx(self.disc.p ** e)
        return {
            "disc": self.disc.to_json(),
            "denomExp": e,
            "coeffs": [(c * scale).to_json() for c in self.coeffs],
            "loss": None if self.loss == INF else str(self.loss),
        }

    def rebase(self, disc: WeightDisc) -> "IwasawaElem":
        """Reinterpret on a translate of the disc with the same coordinate u."""
        if (disc.ctx != self.disc.ctx or disc.r != self.disc.r or disc.dmax != self.disc.dmax):
            raise ValueError("discs do not share a coordinate")
        return IwasawaElem(disc, self.coeffs, self.loss)

    # arithmetic -----------------------------------------------------------------
    def _check(self, other: "IwasawaElem"):
        if other.disc is not self.disc and other.disc != self.disc:
            raise ValueError("disc mismatch")

    def _lift(self, other):
        if isinstance(other, IwasawaElem):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, PadicNum)):
            return self.disc.const(other)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return IwasawaElem(self.disc, [a + b for a, b in zip(self.coeffs, o.coeffs)],
                           min(self.loss, o.loss))

    __radd__ = __add__

    def __neg__(self):
        return IwasawaElem(self.disc, [-a for a in self.coeffs], self.loss)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "IwasawaElem":
        """Multiply by a scalar (int, Fraction or PadicNum)."""
        if isinstance(c, Fraction):
            c = self.disc.ctx(c)
        loss = self.loss
        if loss != INF:
            loss = loss + (c.valuation() if isinstance(c, PadicNum) else (vp(c, self.disc.p) if c else INF))
        return IwasawaElem(self.disc, [a * c for a in self.coeffs], loss)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PadicNum)):
            return self.scale(other)
        if not isinstance(other, IwasawaElem):
            return NotImplemented
        self._check(other)
        dmax = self.disc.dmax
        a, b = self.coeffs, other.coeffs
        da, db = self.degree(), other.degree()
        zero = self.disc.ctx.zero()
        out = [zero] * (dmax + 1)
        for i in range(da + 1):
            ai = a[i]
            if ai.is_zero():
                continue
            for j in range(min(db, dmax - i) + 1):
                bj = b[j]
                if not bj.is_zero():
                    out[i + j] = out[i + j] + ai * bj
        loss = min(self.loss + other.valuation(), other.loss + self.valuation())
        if da + db > dmax:
            # discarded cross terms c_i d_j with i + j > dmax
            va = [c.valuation() for c in a]
            vb = [c.valuation() for c in b]
            for i in range(da + 1):
                if a[i].is_zero():
                    continue
                for j in range(max(0, dmax + 1 - i), db + 1):
                    if not b[j].is_zero():
                        loss = min(loss, va[i] + vb[j])
        return IwasawaElem(self.disc, out, loss)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = self.disc.one()
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        """Coefficientwise equality at known precision."""
        o = self._lift(other) if not isinstance(other, IwasawaElem) else other
        if o is NotImplemented or not isinstance(o, IwasawaElem):
            return NotImplemented
        return all(x == y for x, y in zip(self.coeffs, o.coeffs))

    __hash__ = None

    # evaluation -------------------------------------------------------------------
    def evaluate(self, u: PadicNum) -> PadicNum:
        """Value at a point of the closed unit disc (error bounded by ``loss``)."""
        acc = self.disc.ctx.zero()
        for c in reversed(self.coeffs):
            acc = acc * u + c
        if self.loss != INF:
            acc = acc.with_precision(self.loss)
        return acc

    def specialize(self, k: int) -> PadicNum:
        self.disc.check_admissible(k)
        return self.evaluate(self.disc.u_value(k))


def specialize(a, k: int):
    """Specialise an IwasawaElem at weight k; PadicNums pass through."""
    if isinstance(a, IwasawaElem):
        return a.specialize(k)
    return a


def nabla(U: WeightDisc) -> IwasawaElem:
    """The element that specialises to k at every admissible weight k."""
    return U.const(U.k0) + U.u() * U.scale


def binom_nabla(U: WeightDisc, s: int, j: int) -> IwasawaElem:
    """binom(nabla - s, j) as a truncated element."""
    if j < 0:
        raise ValueError("j must be >= 0")
    nb = nabla(U)
    result = U.one()
    for i in range(j):
        result = result * (nb - (s + i))
    return result.scale(Fraction(1, math.factorial(j)))


def kappa_eval(U: WeightDisc, x) -> IwasawaElem:
    """The universal character kappa_U(x) = x^k0 * exp(p^(r-1) u log<x>)."""
    ctx = U.ctx
    x = ctx(x)
    if not x.is_unit():
        raise ValueError("kappa_U is evaluated on units")
    w = teichmuller(x)
    L = log1(x * w.inverse()) * U.scale
    head = x ** U.k0
    coeffs = []
    term = head
    for j in range(U.dmax + 1):
        if j:
            term = term * L * ctx.from_rational(Fraction(1, j))
        coeffs.append(term)
    if L.is_zero():
        loss = INF if L.precision >= ctx.precision else L.precision
    else:
        loss = _tail_exp_bound(L.valuation(), U.dmax + 1, U.p)
    return IwasawaElem(U, coeffs, loss)


class TwoVarElem:
    """Truncated polynomial in a weight coordinate u and a character coordinate w."""

    __slots__ = ("U", "B", "grid", "loss")

    def __init__(self, U: WeightDisc, B: WeightDisc, grid, loss=INF):
        if U.ctx != B.ctx:
            raise ValueError("both discs must share a coefficient context")
        self.U, self.B = U, B
        self.grid = [list(row) for row in grid]
        self.loss = loss

    @classmethod
    def outer(cls, a: IwasawaElem, b: IwasawaElem) -> "TwoVarElem":
        grid = [[ai * bj for bj in b.coeffs] for ai in a.coeffs]
        loss = min(a.loss + b.valuation(), b.loss + a.valuation())
        return cls(a.disc, b.disc, grid, loss)

    def scale(self, c) -> "TwoVarElem":
        if isinstance(c, Fraction):
            c = self.U.ctx(c)
        loss = self.loss + (c.valuation() if isinstance(c, PadicNum) else 0)
        return TwoVarElem(self.U, self.B, [[x * c for x in row] for row in self.grid], loss)

    def is_zero(self) -> bool:
        return all(x.is_zero() for row in self.grid for x in row)

    def specialize(self, k: int, b: int) -> PadicNum:
        self.U.check_admissible(k)
        self.B.check_admissible(b)
        u, w = self.U.u_value(k), self.B.u_value(b)
        acc = self.U.ctx.zero()
        for row in reversed(self.grid):
            inner = self.U.ctx.zero()
            for c in reversed(row):
                inner = inner * w + c
            acc = acc * u + inner
        if self.loss != INF:
            acc = acc.with_precision(self.loss)
        return acc

"""Locally analytic functions, distributions and the monoid action.

Functions on p^n O are written in the normalised variable W = Z/p^n, and a
distribution mu is stored through its moments mu_s = mu(W^s) for
s = 0..S.  The weight is either an integer k or a WeightDisc U.  The
element gamma in K_0(p^n) acts on functions by

    (gamma . f)(Z) = (bZ + d)^w f((aZ + c)/(bZ + d)),

and on distributions by (gamma . mu)(f) = mu(gamma^-1 . f).  The shift
diag(p^-1, 1) multiplies mu_s by p^s.

TSym^k is written in the divided-power basis x^[i] y^[k-i] with the pairing
<X^s Y^(k-s), x^[i] y^[k-i]> = delta_(s,i).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence, Union

from .cmfield import CMPoint
from .padic import PadicContext, PadicNum, vp_factorial
from .weight import INF, IwasawaElem, WeightDisc, binom_nabla, kappa_eval, nabla

Weight = Union[int, WeightDisc]


def gbinom(n: int, i: int) -> int:
    """binom(n, i) for any integer n and i >= 0 (falling factorial over i!)."""
    if i < 0:
        return 0
    num = 1
    for r in range(i):
        num *= n - r
    return num // math.factorial(i)


def _is_family(w) -> bool:
    return isinstance(w, WeightDisc)


def _ctx_of(w, fallback=None) -> PadicContext:
    if _is_family(w):
        return w.ctx
    return fallback


def _val(x):
    if isinstance(x, int):
        return INF if x == 0 else 0
    return x.valuation()


def _binom_weight(w, s: int, i: int):
    """binom(w - s, i) for an integer weight or a disc."""
    if _is_family(w):
        return binom_nabla(w, s, i)
    return gbinom(w - s, i)


def _same_weight(w1, w2) -> bool:
    if _is_family(w1) != _is_family(w2):
        return False
    return w1 == w2


# ---------------------------------------------------------------------------
# TSym


class TSymVec:
    """Element sum t_i x^[i] y^[k-i] of TSym^k."""

    __slots__ = ("k", "coeffs")

    def __init__(self, k: int, coeffs: Sequence):
        if len(coeffs) != k + 1:
            raise ValueError("TSym^k needs k+1 coefficients")
        self.k = k
        self.coeffs = list(coeffs)

    def __add__(self, other: "TSymVec") -> "TSymVec":
        if other.k != self.k:
            raise ValueError("degree mismatch")
        return TSymVec(self.k, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "TSymVec") -> "TSymVec":
        return self + other.scale(-1)

    def scale(self, c) -> "TSymVec":
        return TSymVec(self.k, [a * c for a in self.coeffs])

    def is_zero(self) -> bool:
        return all((x == 0) if isinstance(x, int) else x.is_zero() for x in self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, TSymVec) or other.k != self.k:
            return False
        return all(_eq(a, b) for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        return f"TSymVec(k={self.k}, {self.coeffs})"

    def specialize(self, k: int) -> "TSymVec":
        return TSymVec(self.k, [c.specialize(k) if isinstance(c, IwasawaElem) else c for c in self.coeffs])

    def act(self, matrix) -> "TSymVec":
        """gamma . T with <gamma T, F> = <T, gamma^-1 F>, (gamma F)(X,Y) = F(aX+cY, bX+dY)."""
        (a, b), (c, d) = matrix
        det = a * d - b * c
        inv = ((d / det, -b / det), (-c / det, a / det))
        k = self.k
        out = []
        for i in range(k + 1):
            row = _sym_image(inv, i, k)
            acc = 0
            for s, r in enumerate(row):
                if not _is_zero(r):
                    acc = acc + r * self.coeffs[s] if not isinstance(acc, int) or acc != 0 else r * self.coeffs[s]
            out.append(acc)
        return TSymVec(k, out)

    def to_json(self) -> list:
        return [_to_json(c) for c in self.coeffs]


def _sym_image(m, i: int, k: int) -> list:
    """Coefficients of (aX + cY)^i (bX + dY)^(k-i) in X^s Y^(k-s)."""
    (a, b), (c, d) = m
    p1 = [gbinom(i, l) * a ** l * c ** (i - l) for l in range(i + 1)]
    p2 = [gbinom(k - i, l) * b ** l * d ** (k - i - l) for l in range(k - i + 1)]
    out = [0] * (k + 1)
    for l1, x in enumerate(p1):
        for l2, y in enumerate(p2):
            out[l1 + l2] = out[l1 + l2] + x * y
    return out


def _is_zero(x) -> bool:
    return x == 0 if isinstance(x, (int, Fraction)) else x.is_zero()


def _eq(a, b) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    if isinstance(a, int):
        a, b = b, a
    return (a - b).is_zero()


def _to_json(c):
    if isinstance(c, (int, Fraction)):
        return str(c)
    return c.to_json()


def tsym_mul(s: TSymVec, t: TSymVec) -> TSymVec:
    """Divided-power product: x^[i]y^[a-i] . x^[j]y^[b-j] = C(i+j,i) C(a+b-i-j,a-i) x^[i+j]y^[a+b-i-j]."""
    a, b = s.k, t.k
    out = [0] * (a + b + 1)
    for i, si in enumerate(s.coeffs):
        if _is_zero(si):
            continue
        for j, tj in enumerate(t.coeffs):
            if _is_zero(tj):
                continue
            c = math.comb(i + j, i) * math.comb(a + b - i - j, a - i)
            out[i + j] = out[i + j] + si * tj * c
    return TSymVec(a + b, out)


def cm_tensor(a: int, b: int, cm: CMPoint, m: int = None) -> TSymVec:
    """e_m^[a,b] = e_m^(tensor a) . ebar_m^(tensor b) with e_m = z0 x + y."""
    if m is not None and m != cm.m:
        raise ValueError("CM point has a different level")
    z0, z0b = cm.z0, cm.z0bar
    e = TSymVec(a, [z0 ** i for i in range(a + 1)])
    eb = TSymVec(b, [z0b ** i for i in range(b + 1)])
    return tsym_mul(e, eb)


# ---------------------------------------------------------------------------
# monoid


class MonoidElem:
    """matrix * diag(p^-1, 1)^t with matrix in K_0(p^n)."""

    def __init__(self, ctx: PadicContext, a, b, c, d, t: int = 0, level: int = 1):
        self.ctx = ctx
        self.a, self.b, self.c, self.d = (ctx(x) for x in (a, b, c, d))
        self.t = int(t)
        self.level = int(level)
        p = ctx.p
        if not self.c.is_zero() and self.c.valuation() < level:
            raise ValueError(f"c must be divisible by p^{level}")
        if not (self.a.is_unit() and self.d.is_unit()):
            raise ValueError("a and d must be units")
        if not (self.a * self.d - self.b * self.c).is_unit():
            raise ValueError("determinant must be a unit")
        if self.b.valuation() < 0:
            raise ValueError("entries must be integral")

    @classmethod
    def identity(cls, ctx, level=1):
        return cls(ctx, 1, 0, 0, 1, 0, level)

    @classmethod
    def shift(cls, ctx, t=1, level=1):
        return cls(ctx, 1, 0, 0, 1, t, level)

    def det(self) -> PadicNum:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "MonoidElem":
        if self.t:
            raise ValueError("the shift part is not invertible in the monoid")
        det = self.det()
        di = det.inverse()
        return MonoidElem(self.ctx, self.d * di, -self.b * di, -self.c * di, self.a * di, 0, self.level)

    def __mul__(self, other: "MonoidElem") -> "MonoidElem":
        p = self.ctx.p
        t = self.t
        # diag(p^-t,1) M diag(p^t,1) = (a, p^-t b; p^t c, d)
        b2 = other.b * self.ctx.from_rational(Fraction(1, p ** t)) if t else other.b
        c2 = other.c * (p ** t) if t else other.c
        if t and not b2.is_zero() and b2.valuation() < 0:
            raise ValueError("product leaves the monoid normal form")
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, d2 = other.a, other.d
        return MonoidElem(self.ctx, a1 * a2 + b1 * c2, a1 * b2 + b1 * d2, c1 * a2 + d1 * c2, c1 * b2 + d1 * d2,
                          self.t + other.t, min(self.level, other.level))

    def matrix(self):
        """The actual 2x2 matrix, including the shift part."""
        p = self.ctx.p
        sc = self.ctx.from_rational(Fraction(1, p ** self.t)) if self.t >= 0 else self.ctx(p ** (-self.t))
        return ((self.a * sc, self.b), (self.c * sc, self.d))

    def __repr__(self):
        return f"MonoidElem(({self.a}, {self.b}; {self.c}, {self.d}), t={self.t})"


# ---------------------------------------------------------------------------
# analytic functions and distributions


class AnalyticElem:
    """sum a_s W^s with W = Z/p^n."""

    def __init__(self, level: int, weight: Weight, coeffs: Sequence):
        self.level = level
        self.weight = weight
        self.coeffs = list(coeffs)
        self.S = len(self.coeffs) - 1

    def is_integral(self) -> bool:
        return all(_is_zero(a) or _val(a) >= 0 for a in self.coeffs)

    def __eq__(self, other):
        return (isinstance(other, AnalyticElem) and other.level == self.level
                and len(other.coeffs) == len(self.coeffs)
                and all(_eq(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    __hash__ = None


class Distribution:
    """Moments mu_s = mu((Z/p^n)^s), s = 0..S."""

    def __init__(self, level: int, weight: Weight, moments: Sequence):
        self.level = level
        self.weight = weight
        self.moments = list(moments)
        self.S = len(self.moments) - 1

    @property
    def denom_exp(self) -> int:
        v = self.min_valuation()
        if v == INF:
            return 0
        return max(0, -math.floor(v))

    def min_valuation(self):
        return min(_val(m) for m in self.moments)

    def valuations(self) -> list:
        return [_val(m) for m in self.moments]

    def is_lattice(self) -> bool:
        return self.min_valuation() >= 0

    def __add__(self, other: "Distribution") -> "Distribution":
        self._check(other)
        S = min(self.S, other.S)
        return Distribution(self.level, self.weight, [self.moments[i] + other.moments[i] for i in range(S + 1)])

    def __sub__(self, other: "Distribution") -> "Distribution":
        return self + other.scale(-1)

    def scale(self, c) -> "Distribution":
        return Distribution(self.level, self.weight, [m * c if not isinstance(c, IwasawaElem) else c * m
                                                       for m in self.moments])

    def _check(self, other):
        if other.level != self.level or not _same_weight(self.weight, other.weight):
            raise ValueError("level or weight mismatch")

    def truncate(self, S: int) -> "Distribution":
        return Distribution(self.level, self.weight, self.moments[:S + 1])

    def equal_moments(self, other: "Distribution", upto: int = None) -> bool:
        upto = min(self.S, other.S) if upto is None else upto
        return all(_eq(self.moments[i], other.moments[i]) for i in range(upto + 1))

    def __eq__(self, other):
        return isinstance(other, Distribution) and self.S == other.S and self.equal_moments(other)

    __hash__ = None

    def to_json(self) -> dict:
        w = self.weight.to_json() if _is_family(self.weight) else self.weight
        return {"level": self.level, "weight": w, "denomExp": self.denom_exp,
                "moments": [_to_json(m) for m in self.moments]}


def _weight_factor(w, d: PadicNum):
    """kappa_w(d): d^k for integer weight, kappa_U(d) for a disc."""
    if _is_family(w):
        return kappa_eval(w, d)
    return d ** w


def _image_rows(a, b, c, d, w, n: int, S: int, ctx: PadicContext):
    """Rows R[s][t]: the image of W^s under (a b; c d) is
    kappa_w(d) * sum_t R[s][t] W^t (t <= S), together with per-row tail bounds."""
    p = ctx.p
    pn = p ** n
    dinv = d.inverse()
    beta = b * pn * dinv
    cc = c * ctx.from_rational(Fraction(1, pn))
    beta_zero = beta.is_zero() and beta.precision >= ctx.precision
    family = _is_family(w)
    vbeta = beta.valuation() if not beta_zero else INF
    rows, tails = [], []
    # powers
    apow = [ctx.one()]
    cpow = [ctx.one()]
    bpow = [ctx.one()]
    dinvpow = [ctx.one()]
    for _ in range(S):
        apow.append(apow[-1] * a)
        cpow.append(cpow[-1] * cc)
        bpow.append(bpow[-1] * beta)
        dinvpow.append(dinvpow[-1] * dinv)
    nb = nabla(w) if family else None
    for s in range(S + 1):
        P = [apow[l] * cpow[s - l] * math.comb(s, l) for l in range(s + 1)]
        # B = (1 + beta W)^(w - s)
        if beta_zero:
            B = [1]
        else:
            B = []
            bin_i = w.one() if family else 1
            for i in range(S + 1):
                if i:
                    if family:
                        bin_i = (bin_i * (nb - (s + i - 1))).scale(Fraction(1, i))
                    else:
                        bin_i = gbinom(w - s, i)
                if not family and bin_i == 0:
                    B.append(0)
                    continue
                B.append(bin_i * bpow[i] if family else bpow[i] * bin_i)
        row = []
        for t in range(S + 1):
            acc = None
            for l in range(max(0, t - len(B) + 1), min(s, t) + 1):
                term = B[t - l]
                if isinstance(term, int):
                    if term == 0:
                        continue
                    term = P[l] * term
                else:
                    term = term * P[l]
                acc = term if acc is None else acc + term
            if acc is None:
                acc = ctx.zero() if not family else w.zero()
            row.append(acc * dinvpow[s] if family else acc * dinvpow[s])
        rows.append(row)
        # valuation of the discarded terms of this row
        if beta_zero or (not family and 0 <= w - s and w <= S):
            tails.append(INF)
        else:
            start = S + 1 - s
            best = INF
            for i in range(start, start + 4 * (S + 2)):
                if not family and gbinom(w - s, i) == 0:
                    continue
                val = i * vbeta - (vp_factorial(i, p) if family else 0)
                best = min(best, val)
            tails.append(best)
    return rows, tails


def act_A(gamma: MonoidElem, f: AnalyticElem) -> AnalyticElem:
    """(gamma f)(Z) = (bZ+d)^w f((aZ+c)/(bZ+d)), truncated at degree S."""
    if gamma.t:
        raise ValueError("act_A needs t = 0")
    if gamma.level > f.level:
        pass
    if f.level > gamma.level:
        raise ValueError("level of gamma must be at least the level of f")
    ctx = gamma.ctx
    w, n, S = f.weight, f.level, f.S
    rows, _ = _image_rows(gamma.a, gamma.b, gamma.c, gamma.d, w, n, S, ctx)
    kd = _weight_factor(w, gamma.d)
    out = []
    for t in range(S + 1):
        acc = None
        for s in range(S + 1):
            a_s = f.coeffs[s]
            if _is_zero(a_s):
                continue
            term = rows[s][t] * a_s if not isinstance(a_s, IwasawaElem) else a_s * rows[s][t]
            acc = term if acc is None else acc + term
        if acc is None:
            acc = w.zero() if _is_family(w) else ctx.zero()
        out.append(kd * acc if _is_family(w) else acc * kd)
    return AnalyticElem(n, w, out)


def act_D(gamma: MonoidElem, mu: Distribution) -> Distribution:
    """(gamma mu)(f) = mu(gamma^-1 f); the shift part multiplies mu_s by p^(t s)."""
    if gamma.t < 0:
        raise ValueError("shift exponent must be >= 0")
    if mu.level > gamma.level:
        raise ValueError("level of gamma must be at least the level of mu")
    ctx = gamma.ctx
    w, n, S = mu.weight, mu.level, mu.S
    p = ctx.p
    moments = list(mu.moments)
    if gamma.t:
        moments = [m * (p ** (gamma.t * s)) for s, m in enumerate(moments)]
    if (gamma.a == 1 and gamma.d == 1 and gamma.b.is_zero() and gamma.c.is_zero()
            and gamma.a.precision >= ctx.precision and gamma.d.precision >= ctx.precision):
        return Distribution(n, w, moments)
    inv = MonoidElem(ctx, gamma.a, gamma.b, gamma.c, gamma.d, 0, gamma.level).inverse()
    rows, tails = _image_rows(inv.a, inv.b, inv.c, inv.d, w, n, S, ctx)
    kd = _weight_factor(w, inv.d)
    floor = min(_val(m) for m in moments)
    out = []
    for s in range(S + 1):
        acc = None
        for t in range(S + 1):
            mt = moments[t]
            if _is_zero(mt) and not isinstance(mt, IwasawaElem):
                continue
            r = rows[s][t]
            term = r * mt
            acc = term if acc is None else acc + term
        if acc is None:
            acc = w.zero() if _is_family(w) else ctx.zero()
        val = kd * acc if _is_family(w) else acc * kd
        bound = tails[s] + floor
        if bound != INF:
            if isinstance(val, IwasawaElem):
                val = IwasawaElem(val.disc, val.coeffs, min(val.loss, bound))
            else:
                val = val.with_precision(bound)
        out.append(val)
    return Distribution(n, w, out)


def mom(k: int, mu: Distribution) -> TSymVec:
    """Coefficient of x^[i] y^[k-i] is mu(Z^i) = p^(n i) mu_i, specialised at k for families."""
    if k > mu.S:
        raise ValueError("k exceeds the number of stored moments")
    w = mu.weight
    if _is_family(w):
        w.check_admissible(k)
        vals = [mu.moments[i].specialize(k) if isinstance(mu.moments[i], IwasawaElem) else mu.moments[i]
                for i in range(k + 1)]
    else:
        if k != w:
            raise ValueError("integer-weight distribution has a fixed weight")
        vals = mu.moments[:k + 1]
    p = _ctx_p(mu)
    return TSymVec(k, [v * (p ** (mu.level * i)) for i, v in enumerate(vals)])


def _ctx_p(mu: Distribution) -> int:
    if _is_family(mu.weight):
        return mu.weight.p
    for m in mu.moments:
        if isinstance(m, PadicNum):
            return m.ctx.p
    raise ValueError("cannot determine p")


def evaluation_distribution(ctx: PadicContext, z: PadicNum, level: int, weight: Weight, S: int) -> Distribution:
    """mu(f) = f(z) for z in p^n O: moments (z/p^n)^s."""
    w0 = z * ctx.from_rational(Fraction(1, ctx.p ** level))
    return Distribution(level, weight, [w0 ** s for s in range(S + 1)])


def eigen_dist(weight: Weight, j: int, m: int, n: int, cm: CMPoint, S: int = 16) -> Distribution:
    """The CM eigen-distribution e_{w,j,m} at level n:
    mu(Z^s) = sum_t C(s,t) binom(w-s, j-t) z0^(s-t) zbar0^t."""
    if m < n:
        raise ValueError("need m >= n")
    if m != cm.m:
        raise ValueError("CM point has a different level")
    if j < 0:
        raise ValueError("j must be >= 0")
    ctx = cm.ctx
    scale = cm.p ** (m - n)
    w0 = cm.sigma(cm.tau_star) * scale
    w0b = cm.sigma_bar(cm.tau_star) * scale
    pw = [ctx.one()]
    pwb = [ctx.one()]
    for _ in range(S):
        pw.append(pw[-1] * w0)
        pwb.append(pwb[-1] * w0b)
    family = _is_family(weight)
    moments = []
    for s in range(S + 1):
        acc = weight.zero() if family else ctx.zero()
        for t in range(min(j, s) + 1):
            coef = pw[s - t] * pwb[t] * math.comb(s, t)
            bn = _binom_weight(weight, s, j - t)
            if family:
                acc = acc + bn * coef
            elif bn:
                acc = acc + coef * bn
        moments.append(acc)
    return Distribution(n, weight, moments)


def overconvergent_proj(mu: Distribution, t: TSymVec, target: Weight = None) -> Distribution:
    """Pi_j(mu (x) t) for mu of weight w - j and t in TSym^j:
    Pi(Z^s) = sum_{i+i'=s} C(s,i) binom(w-s, j-i') mu(Z^i) t_i'."""
    j = t.k
    src = mu.weight
    if _is_family(src):
        w = src.shifted(j)
        if target is not None and target != w:
            raise ValueError("weight mismatch: distribution must live on U - j")
    else:
        w = src + j
        if target is not None and target != w:
            raise ValueError("weight mismatch: distribution must have weight k - j")
    n = mu.level
    p = _ctx_p(mu) if not _is_family(src) else src.p
    family = _is_family(w)
    ctx = src.ctx if family else None
    moments_src = [m.rebase(w) if isinstance(m, IwasawaElem) else m for m in mu.moments]
    tn = []
    for i, ti in enumerate(t.coeffs):
        tn.append(ti * Fraction(1, p ** (n * i)) if isinstance(ti, (int, Fraction)) else
                  ti * (ti.ctx.from_rational(Fraction(1, p ** (n * i)))))
    out = []
    for s in range(mu.S + 1):
        acc = None
        for ip in range(min(j, s) + 1):
            i = s - ip
            bn = _binom_weight(w, s, j - ip)
            if not family and bn == 0:
                continue
            term = moments_src[i] * tn[ip] * math.comb(s, i)
            term = bn * term if family else term * bn
            acc = term if acc is None else acc + term
        if acc is None:
            acc = w.zero() if family else moments_src[0] * 0
        out.append(acc)
    return Distribution(n, w, out)


class CongruenceReport:
    def __init__(self, h, m, n, valuations, floor, denom_exp):
        self.h, self.m, self.n = h, m, n
        self.valuations = valuations
        self.floor = floor
        self.denom_exp = denom_exp

    def to_json(self) -> dict:
        return {"h": self.h, "m": self.m, "n": self.n,
                "valuations": [str(v) for v in self.valuations], "floor": str(self.floor),
                "denomExp": self.denom_exp}


def congruence_sum(h: int, m: int, n: int, U: WeightDisc, cm: CMPoint, S: int = 16) -> Distribution:
    """sum_{j=0}^h (-1)^j binom(nabla - j, h - j) e_{U,j,m}."""
    total = None
    for j in range(h + 1):
        e = eigen_dist(U, j, m, n, cm, S)
        term = e.scale(binom_nabla(U, j, h - j))
        if j % 2:
            term = term.scale(-1)
        total = term if total is None else total + term
    return total


def congruence_report(h: int, m: int, n: int, U: WeightDisc, cm: CMPoint, S: int = 16) -> CongruenceReport:
    total = congruence_sum(h, m, n, U, cm, S)
    vals = total.valuations()
    return CongruenceReport(h, m, n, vals, min(vals), total.denom_exp)

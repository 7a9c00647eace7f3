"""q-expansions: newform records, Hecke polynomials, U_p, V_p, depletion,
theta twists and the two-variable family twist.

Expansions are stored as lists indexed by n with a dummy entry at n = 0, so
``g.an[n]`` is the coefficient of q^n for 1 <= n <= g.M.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from importlib import resources
from typing import Optional, Sequence

from .groups import DirichletCharacter, rou
from .padic import PadicContext, PadicNum, sqrt as padic_sqrt, teichmuller, unit_power
from .weight import INF, IwasawaElem, TwoVarElem, WeightDisc, kappa_eval


class QExpansion:
    """Truncated q-expansion a_1..a_M.

    U_p consumes length (M -> M // p); V_p, deplete and theta twists keep it.
    """

    def __init__(self, an: Sequence, weight=None, level=None):
        an = list(an)
        if not an:
            raise ValueError("empty expansion")
        self.an = an
        self.weight = weight
        self.level = level

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, weight=None, level=None) -> "QExpansion":
        """Build from a_1..a_M."""
        coeffs = list(coeffs)
        zero = coeffs[0] * 0
        return cls([zero] + coeffs, weight, level)

    @property
    def M(self) -> int:
        return len(self.an) - 1

    def __getitem__(self, n: int):
        return self.an[n]

    def truncate(self, M: int) -> "QExpansion":
        if M > self.M:
            raise ValueError("cannot extend a truncated expansion")
        return QExpansion(self.an[:M + 1], self.weight, self.level)

    def _zero(self):
        return self.an[1] * 0

    def scale(self, c) -> "QExpansion":
        return QExpansion([a * c for a in self.an], self.weight, self.level)

    def __add__(self, other: "QExpansion") -> "QExpansion":
        M = min(self.M, other.M)
        return QExpansion([self.an[i] + other.an[i] for i in range(M + 1)], self.weight, self.level)

    def __sub__(self, other: "QExpansion") -> "QExpansion":
        return self + other.scale(-1)

    def __eq__(self, other):
        if not isinstance(other, QExpansion) or other.M != self.M:
            return False
        return all(_eq(a, b) for a, b in zip(self.an[1:], other.an[1:]))

    __hash__ = None

    def agrees_with(self, other: "QExpansion", upto: int = None) -> bool:
        upto = min(self.M, other.M) if upto is None else upto
        return all(_eq(self.an[n], other.an[n]) for n in range(1, upto + 1))

    def mismatches(self, other: "QExpansion", upto: int = None) -> list:
        upto = min(self.M, other.M) if upto is None else upto
        return [n for n in range(1, upto + 1) if not _eq(self.an[n], other.an[n])]

    def to_json(self) -> dict:
        return {"M": self.M, "weight": _weight_json(self.weight), "level": self.level,
                "an": [_coef_json(a) for a in self.an[1:]]}


def _eq(a, b) -> bool:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a == b
    d = a - b
    return d == 0 if isinstance(d, (int, Fraction)) else d.is_zero()


def _coef_json(a):
    return str(a) if isinstance(a, (int, Fraction)) else a.to_json()


def _weight_json(w):
    return w.to_json() if isinstance(w, WeightDisc) else w


# ---------------------------------------------------------------------------
# newforms


class NewformRecord:
    """A normalised newform of weight k+2, level N and character eps."""

    def __init__(self, label: str, N: int, weight: int, eps: DirichletCharacter, an: Sequence, ctx: PadicContext):
        self.label = label
        self.N = int(N)
        self.weight = int(weight)
        self.eps = eps
        self.ctx = ctx
        self.an = [ctx.zero()] + [ctx(a) for a in an]

    @property
    def k(self) -> int:
        return self.weight - 2

    @property
    def M(self) -> int:
        return len(self.an) - 1

    def qexp(self) -> QExpansion:
        return QExpansion(self.an, self.weight, self.N)

    def eps_value(self, a: int) -> PadicNum:
        return self.eps.value(a, self.ctx)

    def check_invariants(self, samples: int = None) -> list:
        """Return a list of violated invariants (empty when the record is sound)."""
        problems = []
        if not _eq(self.an[1], self.ctx.one()):
            problems.append("a_1 != 1")
        M = self.M
        root = math.isqrt(M)
        for m in range(2, root + 1):
            for n in range(m + 1, root + 1):
                if math.gcd(m, n) == 1 and m * n <= M:
                    if not _eq(self.an[m * n], self.an[m] * self.an[n]):
                        problems.append(f"a_{m * n} != a_{m} a_{n}")
        for ell in _primes_upto(M):
            if self.N % ell == 0:
                continue
            c = self.eps_value(ell) * ell ** (self.k + 1)
            prev, cur, e = self.ctx.one(), self.an[ell], 1
            while ell ** (e + 1) <= M:
                nxt = self.an[ell] * cur - c * prev
                if not _eq(self.an[ell ** (e + 1)], nxt):
                    problems.append(f"Hecke recursion fails at {ell}^{e + 1}")
                    break
                prev, cur, e = cur, nxt, e + 1
        return problems

    @classmethod
    def from_json(cls, data: dict, ctx: PadicContext) -> "NewformRecord":
        eps = DirichletCharacter.from_json(data["eps"])
        an = [PadicNum.from_json(ctx, a) if isinstance(a, dict) else Fraction(a) for a in data["an"]]
        return cls(data["label"], data["N"], data["weight"], eps, an, ctx)

    def to_json(self) -> dict:
        return {"label": self.label, "N": self.N, "weight": self.weight, "eps": self.eps.to_json(),
                "an": [_coef_json(a) for a in self.an[1:]], "context": self.ctx.to_json()}

    def __repr__(self):
        return f"NewformRecord({self.label}, N={self.N}, weight={self.weight})"


def _primes_upto(M: int) -> list:
    sieve = [True] * (M + 1)
    out = []
    for i in range(2, M + 1):
        if sieve[i]:
            out.append(i)
            for j in range(i * i, M + 1, i):
                sieve[j] = False
    return out


FIXTURES = ("11a", "5.4.a", "delta")


def load_fixture(name: str, ctx: PadicContext, M: int = None) -> NewformRecord:
    """Load one of the bundled newform fixtures into the context ctx."""
    text = resources.files("heegner_lab").joinpath("data", f"{name}.json").read_text()
    data = json.loads(text)
    if M is not None:
        data["an"] = data["an"][:M]
    return NewformRecord.from_json(data, ctx)


def load_newform(path: str, ctx: PadicContext) -> NewformRecord:
    with open(path) as fh:
        return NewformRecord.from_json(json.load(fh), ctx)


# ---------------------------------------------------------------------------
# Hecke polynomial and stabilisation


class HeckeRoots:
    """Roots of X^2 - a_p X + p^(k+1) eps(p); ``alpha``/``beta`` are None when the
    roots need an extension, which is then described by ``extension``."""

    def __init__(self, coeffs, alpha=None, beta=None, extension=None):
        self.coeffs = coeffs
        self.alpha = alpha
        self.beta = beta
        self.extension = extension

    @property
    def split(self) -> bool:
        return self.alpha is not None


def hecke_poly(f: NewformRecord, p: int) -> tuple:
    """(1, -a_p, p^(k+1) eps(p))."""
    if f.N % p == 0:
        raise ValueError("p divides the level")
    if p > f.M:
        raise ValueError("a_p is not in the stored expansion")
    return (f.ctx.one(), -f.an[p], f.eps_value(p) * p ** (f.k + 1))


def hecke_roots(f: NewformRecord, p: int) -> HeckeRoots:
    """Roots sorted by valuation (alpha has the smaller slope)."""
    one, b, c = hecke_poly(f, p)
    ctx = f.ctx
    if ctx.p != p:
        raise ValueError("context prime differs from p")
    disc = b * b - c * 4
    try:
        r = padic_sqrt(disc)
    except ValueError as exc:
        v = disc.valuation()
        kind = "ramified" if v != INF and v % 2 else "unramified"
        return HeckeRoots((one, b, c), extension={"kind": kind, "discriminant": disc.to_json(),
                                                  "reason": str(exc)})
    two_inv = ctx.from_rational(Fraction(1, 2))
    r1 = (-b + r) * two_inv
    r2 = (-b - r) * two_inv
    big, small = (r1, r2) if r1.valuation() <= r2.valuation() else (r2, r1)
    # the root of larger valuation is recovered from Vieta to avoid cancellation
    small = c * big.inverse()
    return HeckeRoots((one, b, c), alpha=big, beta=small)


def _is_root(f: NewformRecord, p: int, alpha: PadicNum) -> bool:
    _, b, c = hecke_poly(f, p)
    return _eq(alpha * alpha + b * alpha + c, f.ctx.zero())


def p_stabilize(f: NewformRecord, p: int, alpha) -> QExpansion:
    """f_alpha(q) = f(q) - beta f(q^p) with beta = p^(k+1) eps(p) / alpha."""
    alpha = f.ctx(alpha)
    if not _is_root(f, p, alpha):
        raise ValueError("alpha is not a root of the Hecke polynomial")
    _, _, c = hecke_poly(f, p)
    beta = c * alpha.inverse()
    g = f.qexp()
    out = g - V_p(g, p).scale(beta)
    out.level = f.N * p
    return out


def stabilization_check(f: NewformRecord, p: int, alpha) -> bool:
    """U_p f_alpha = alpha f_alpha on the usable length M // p."""
    fa = p_stabilize(f, p, alpha)
    lhs = U_p(fa, p)
    return lhs.agrees_with(fa.scale(f.ctx(alpha)), lhs.M)


# ---------------------------------------------------------------------------
# operators


def U_p(g: QExpansion, p: int) -> QExpansion:
    """a_n -> a_(np); the result has length M // p."""
    M = g.M // p
    if M < 1:
        raise ValueError("expansion too short for U_p")
    return QExpansion([g.an[0]] + [g.an[n * p] for n in range(1, M + 1)], g.weight, g.level)


def V_p(g: QExpansion, p: int) -> QExpansion:
    """a_(pn) = a_n, zero off multiples of p; the length stays M."""
    z = g._zero()
    an = [z] * (g.M + 1)
    for n in range(1, g.M // p + 1):
        an[n * p] = g.an[n]
    return QExpansion(an, g.weight, g.level)


def deplete(g: QExpansion, p: int) -> QExpansion:
    """(1 - V_p U_p) g: zero every a_(pn)."""
    z = g._zero()
    an = [a if n % p else z for n, a in enumerate(g.an)]
    return QExpansion(an, g.weight, g.level)


def is_depleted(g: QExpansion, p: int) -> bool:
    return all(_eq(g.an[n], g._zero()) for n in range(p, g.M + 1, p))


def theta(g: QExpansion) -> QExpansion:
    """q d/dq."""
    return QExpansion([a * n for n, a in enumerate(g.an)], g.weight, g.level)


def theta_power(g: QExpansion, t, p: int = None, component: int = None) -> QExpansion:
    """a_n -> n^t a_n.

    For an integer t this is exact (negative t needs g depleted).  For a
    p-adic t, n^t means omega(n)^component * <n>^t and ``component`` must be
    given; it fixes the class of t mod (p-1).
    """
    if isinstance(t, int):
        if t >= 0:
            return QExpansion([a * n ** t if n else a for n, a in enumerate(g.an)], g.weight, g.level)
        if p is None:
            p = _guess_p(g)
        if not is_depleted(g, p):
            raise ValueError("negative theta powers need a p-depleted expansion")
        out = [g.an[0]]
        for n in range(1, g.M + 1):
            a = g.an[n]
            out.append(a if n % p == 0 else a * Fraction(1, n ** (-t)) if isinstance(a, (int, Fraction))
                       else a * a.ctx.from_rational(Fraction(1, n ** (-t))))
        return QExpansion(out, g.weight, g.level)
    if component is None:
        raise ValueError("a p-adic exponent needs its Teichmuller component")
    ctx = t.ctx
    p = ctx.p
    if not is_depleted(g, p):
        raise ValueError("non-integral theta powers need a p-depleted expansion")
    out = [g.an[0]]
    for n in range(1, g.M + 1):
        if n % p == 0:
            out.append(g.an[n])
            continue
        x = ctx(n)
        w = teichmuller(x)
        factor = w ** component * unit_power(x * w.inverse(), t)
        out.append(g.an[n] * factor)
    return QExpansion(out, g.weight, g.level)


def _guess_p(g: QExpansion) -> int:
    for a in g.an:
        if isinstance(a, PadicNum):
            return a.ctx.p
    raise ValueError("p is needed")


# ---------------------------------------------------------------------------
# families


class FamilyStub:
    """Classical specialisations (k_i, alpha_i, record_i) of a family, with an
    optional expansion whose coefficients are IwasawaElem on a disc U."""

    def __init__(self, p: int, specs: Sequence, lam: Optional[Sequence] = None, U: WeightDisc = None,
                 label: str = ""):
        if len(specs) < 2:
            raise ValueError("a family stub needs at least two specialisations")
        self.p = p
        self.specs = [(int(k), alpha, rec) for k, alpha, rec in specs]
        self.label = label
        levels = {rec.N for _, _, rec in self.specs}
        chars = {rec.eps for _, _, rec in self.specs}
        if len(levels) != 1 or len(chars) != 1:
            raise ValueError("specialisations must share tame level and character")
        for k, _, rec in self.specs:
            if rec.k != k:
                raise ValueError(f"record {rec.label} has weight {rec.weight}, expected {k + 2}")
        self.U = U
        self.lam = None
        if lam is not None:
            if U is None:
                raise ValueError("the family expansion needs its disc")
            self.lam = [U.zero()] + list(lam)
            report = self.coherence()
            if report:
                raise ValueError(f"family expansion disagrees with its specialisations: {report}")

    @property
    def M(self) -> int:
        return len(self.lam) - 1 if self.lam is not None else min(rec.M for _, _, rec in self.specs)

    def specialize(self, k: int) -> QExpansion:
        if self.lam is None:
            raise ValueError("no family expansion")
        return QExpansion([a.specialize(k) for a in self.lam], k + 2, None)

    def coherence(self) -> dict:
        """Per weight, the coefficient indices where the specialisation disagrees."""
        bad = {}
        for k, alpha, rec in self.specs:
            stab = p_stabilize(rec, self.p, alpha)
            M = min(self.M, stab.M)
            spec = QExpansion([self.lam[n].specialize(k) for n in range(M + 1)])
            miss = spec.mismatches(stab.truncate(M))
            if miss:
                bad[k] = miss
        return bad

    def to_json(self) -> dict:
        return {"label": self.label, "p": self.p,
                "specs": [{"k": k, "alpha": _coef_json(a), "record": rec.to_json()} for k, a, rec in self.specs],
                "disc": self.U.to_json() if self.U else None}


def eisenstein_record(k: int, ctx: PadicContext, M: int = 200) -> NewformRecord:
    """The weight k+2 level 1 Eisenstein series normalised with a_n = sigma_(k+1)(n)."""
    an = [sum(d ** (k + 1) for d in range(1, n + 1) if n % d == 0) for n in range(1, M + 1)]
    return NewformRecord(f"E{k + 2}", 1, k + 2, DirichletCharacter.trivial(1), an, ctx)


def eisenstein_family(U: WeightDisc, weights: Sequence[int], M: int = 200) -> FamilyStub:
    """The ordinary Eisenstein family: a_n = sum over d | n prime to p of d kappa_U(d).

    Its weight k specialisation is the stabilisation of E_(k+2) with alpha = 1.
    """
    ctx = U.ctx
    p = U.p
    kap = {}
    lam = []
    for n in range(1, M + 1):
        acc = U.zero()
        for d in range(1, n + 1):
            if n % d == 0 and d % p:
                if d not in kap:
                    kap[d] = kappa_eval(U, ctx(d)).scale(d)
                acc = acc + kap[d]
        lam.append(acc)
    specs = [(k, ctx.one(), eisenstein_record(k, ctx, M)) for k in weights]
    for k in weights:
        U.check_admissible(k)
    return FamilyStub(p, specs, lam, U, label=f"Eisenstein family on {U!r}")


def family_theta_twist(F: FamilyStub, B: WeightDisc, nmax: int = None) -> list:
    """Coefficients b_n = a_n(F) n^-(1+b) for p not dividing n, 0 otherwise,
    as two-variable elements in (u, w); index 0 is unused."""
    if F.lam is None:
        raise ValueError("family theta twist needs the family expansion")
    U = F.U
    ctx = U.ctx
    p = U.p
    nmax = F.M if nmax is None else min(nmax, F.M)
    zero_row = [ctx.zero()] * (B.dmax + 1)
    zero = TwoVarElem(U, B, [list(zero_row) for _ in range(U.dmax + 1)])
    out = [zero]
    for n in range(1, nmax + 1):
        if n % p == 0:
            out.append(zero)
            continue
        ninv = ctx.from_rational(Fraction(1, n))
        twist = kappa_eval(B, ninv).scale(ninv)
        out.append(TwoVarElem.outer(F.lam[n], twist))
    return out


def family_twist_check(F: FamilyStub, B: WeightDisc, b: int, nmax: int = 50) -> dict:
    """Compare the specialisation at (k_i, b) of the family twist with
    theta_power(deplete(f_alpha), -(1+b)) for each classical weight."""
    tw = family_theta_twist(F, B, nmax)
    report = {}
    for k, alpha, rec in F.specs:
        ref = theta_power(deplete(p_stabilize(rec, F.p, alpha), F.p), -(1 + b), F.p)
        bad = [n for n in range(1, nmax + 1) if not _eq(tw[n].specialize(k, b), ref.an[n])]
        report[k] = bad
    return report

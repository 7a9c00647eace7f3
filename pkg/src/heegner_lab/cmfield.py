"""Imaginary quadratic fields: ideals, class groups, ring/ray class groups,
CM points and algebraic Grossencharacters of finite type.

Conventions
-----------
* K = Q(sqrt(d)) with d = d_K the fundamental discriminant, and
  omega = (d + sqrt(d))/2, so that O_K = Z + Z*omega.
* The ideal I(a, b) is Z*a + Z*(b + sqrt(d))/2 (requires 4a | b^2 - d); its
  norm form is the binary quadratic form (a, b, (b^2 - d)/4a).
* sigma: K -> ctx sends sqrt(d) to the square root with the smallest residue;
  the prime p_frak above p is the one with v(sigma(x)) > 0.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Optional

import sympy

from .groups import AbelianGroup, DirichletCharacter, frac_mod1, rou, rou_log
from .padic import PadicContext, PadicNum, nth_root, sqrt as padic_sqrt


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a | n) for n > 0."""
    if n <= 0:
        raise ValueError("n must be positive")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * int(sympy.jacobi_symbol(a % n, n))


def fundamental_discriminant(D: int) -> int:
    if D <= 0 or not sympy.ntheory.factor_.core(D) == D:
        raise ValueError(f"D must be a positive squarefree integer, got {D}")
    return -D if (-D) % 4 == 1 else -4 * D


def is_fundamental_discriminant(d: int) -> bool:
    if d >= 0:
        return False
    if d % 4 == 1:
        return sympy.ntheory.factor_.core(-d) == -d
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and sympy.ntheory.factor_.core(-m) == -m
    return False


class QuadField:
    """K = Q(sqrt(-D))."""

    def __init__(self, D: int):
        self.D = int(D)
        self.d = fundamental_discriminant(self.D)
        d = self.d
        self.omega_trace = d
        self.omega_norm = (d * d - d) // 4

    @classmethod
    def from_discriminant(cls, d: int) -> "QuadField":
        if not is_fundamental_discriminant(d):
            raise ValueError(f"{d} is not a negative fundamental discriminant")
        return cls(-d if d % 4 == 1 else -d // 4)

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.d == self.d

    def __hash__(self):
        return hash(self.d)

    def __repr__(self):
        return f"QuadField(d_K={self.d})"

    def elem(self, x, y=0) -> "QuadElem":
        return QuadElem(self, Fraction(x), Fraction(y))

    def omega(self) -> "QuadElem":
        return QuadElem(self, Fraction(self.d, 2), Fraction(1, 2))

    def from_ocoords(self, x: int, y: int) -> "QuadElem":
        """x + y*omega."""
        return self.elem(x) + self.omega() * y

    def units(self) -> list["QuadElem"]:
        if self.d == -4:
            i = self.elem(0, Fraction(1, 2))  # sqrt(-4)/2
            return [self.elem(1), i, self.elem(-1), -i]
        if self.d == -3:
            z = self.elem(Fraction(1, 2), Fraction(1, 2))  # (1 + sqrt(-3))/2
            out, acc = [], self.elem(1)
            for _ in range(6):
                out.append(acc)
                acc = acc * z
            return out
        return [self.elem(1), self.elem(-1)]

    def unit_ideal(self) -> "QFIdeal":
        return QFIdeal(self, 1, self.d % 2)

    def ideal_from_int(self, n: int) -> "QFIdeal":
        return QFIdeal(self, 1, self.d % 2, abs(n))

    def primes_above(self, p: int) -> list["QFIdeal"]:
        """Prime ideals above the rational prime p (one or two)."""
        k = kronecker(self.d, p)
        if k == -1:
            return [self.ideal_from_int(p)]
        out = []
        for b in range(-p + 1, p + 1):
            if (b - self.d) % 2 == 0 and (b * b - self.d) % (4 * p) == 0:
                I = QFIdeal(self, p, b)
                if I not in out:
                    out.append(I)
        return out


class QuadElem:
    """x + y*sqrt(d) with rational x, y."""

    __slots__ = ("K", "x", "y")

    def __init__(self, K: QuadField, x, y):
        self.K, self.x, self.y = K, Fraction(x), Fraction(y)

    def _co(self, o):
        if isinstance(o, QuadElem):
            return o
        return QuadElem(self.K, Fraction(o), 0)

    def __add__(self, o):
        o = self._co(o)
        return QuadElem(self.K, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem(self.K, -self.x, -self.y)

    def __sub__(self, o):
        return self + (-self._co(o))

    def __rsub__(self, o):
        return self._co(o) - self

    def __mul__(self, o):
        o = self._co(o)
        d = self.K.d
        return QuadElem(self.K, self.x * o.x + d * self.y * o.y, self.x * o.y + self.y * o.x)

    __rmul__ = __mul__

    def conj(self) -> "QuadElem":
        return QuadElem(self.K, self.x, -self.y)

    def norm(self) -> Fraction:
        return self.x * self.x - self.K.d * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        return QuadElem(self.K, c.x / n, c.y / n)

    def __truediv__(self, o):
        return self * self._co(o).inverse()

    def __rtruediv__(self, o):
        return self._co(o) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        r = QuadElem(self.K, 1, 0)
        for _ in range(n):
            r = r * self
        return r

    def __eq__(self, o):
        o = self._co(o)
        return self.x == o.x and self.y == o.y

    def __hash__(self):
        return hash((self.x, self.y))

    def ocoords(self) -> tuple:
        """(u, v) with self = u + v*omega (rationals)."""
        d = self.K.d
        return (self.x - self.y * d, 2 * self.y)

    def is_integral(self) -> bool:
        u, v = self.ocoords()
        return u.denominator == 1 and v.denominator == 1

    def __repr__(self):
        return f"({self.x} + {self.y}*sqrt({self.K.d}))"


# ---------------------------------------------------------------------------
# ideals and forms


def _hnf2(vectors):
    """Basis [(A, 0), (B, C)] of the Z-span of integer pairs (x, y)."""
    vecs = [(int(x), int(y)) for x, y in vectors]
    # bring y-coordinates to a single gcd vector
    pivot = None
    rest = []
    for v in vecs:
        if pivot is None:
            if v[1] != 0:
                pivot = v
            else:
                rest.append(v)
            continue
        if v[1] == 0:
            rest.append(v)
            continue
        g, s, t = _xgcd(pivot[1], v[1])
        a1, a2 = pivot[1] // g, v[1] // g
        new_pivot = (s * pivot[0] + t * v[0], g)
        killed = (a2 * pivot[0] - a1 * v[0], 0)
        pivot = new_pivot
        rest.append(killed)
    A = 0
    for v in rest:
        A = math.gcd(A, v[0])
    if pivot is None:
        raise ValueError("lattice is not of rank 2")
    if pivot[1] < 0:
        pivot = (-pivot[0], -pivot[1])
    if A == 0:
        raise ValueError("lattice is not of rank 2")
    return A, pivot[0] % A, pivot[1]


def _xgcd(a: int, b: int):
    """(g, s, t) with s*a + t*b = g = gcd(a, b) > 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


class QFIdeal:
    """g * (Z*a + Z*(b + sqrt(d))/2), with b normalised into (-a, a]."""

    __slots__ = ("K", "a", "b", "g")

    def __init__(self, K: QuadField, a: int, b: int, g: int = 1):
        d = K.d
        if a <= 0 or g <= 0:
            raise ValueError("ideal parameters must be positive")
        if (b * b - d) % (4 * a):
            raise ValueError(f"4a must divide b^2 - d_K (a={a}, b={b}, d={d})")
        b = b % (2 * a)
        if b > a:
            b -= 2 * a
        self.K, self.a, self.b, self.g = K, int(a), int(b), int(g)

    @property
    def primitive(self) -> bool:
        return self.g == 1

    def norm(self) -> int:
        return self.g * self.g * self.a

    def conj(self) -> "QFIdeal":
        return QFIdeal(self.K, self.a, -self.b, self.g)

    def basis(self) -> list[tuple]:
        """Z-basis in O_K-coordinates (coefficients of 1 and omega)."""
        d, g = self.K.d, self.g
        return [(g * self.a, 0), (g * (self.b - d) // 2, g)]

    @classmethod
    def from_lattice(cls, K: QuadField, vectors) -> "QFIdeal":
        A, B, C = _hnf2(vectors)
        if A % C or B % C:
            raise ValueError("lattice is not an ideal")
        return cls(K, A // C, 2 * (B // C) + K.d, C)

    def __mul__(self, other: "QFIdeal") -> "QFIdeal":
        K = self.K
        t, n = K.omega_trace, K.omega_norm
        prods = []
        for (x1, y1) in self.basis():
            for (x2, y2) in other.basis():
                # (x1 + y1 w)(x2 + y2 w), w^2 = t w - n
                prods.append((x1 * x2 - n * y1 * y2, x1 * y2 + x2 * y1 + t * y1 * y2))
        return QFIdeal.from_lattice(K, prods)

    def __add__(self, other: "QFIdeal") -> "QFIdeal":
        return QFIdeal.from_lattice(self.K, self.basis() + other.basis())

    def __pow__(self, n: int) -> "QFIdeal":
        r = self.K.unit_ideal()
        for _ in range(n):
            r = r * self
        return r

    def is_unit_ideal(self) -> bool:
        return self.norm() == 1

    def is_coprime_to(self, other: "QFIdeal") -> bool:
        return (self + other).is_unit_ideal()

    def contains(self, xi: QuadElem) -> bool:
        u, v = xi.ocoords()
        if u.denominator != 1 or v.denominator != 1:
            return False
        A, B, C = _hnf2(self.basis())
        u, v = int(u), int(v)
        if v % C:
            return False
        return (u - (v // C) * B) % A == 0

    def form(self) -> tuple:
        a, b = self.a, self.b
        return (a, b, (b * b - self.K.d) // (4 * a))

    def primitive_part(self) -> "QFIdeal":
        return QFIdeal(self.K, self.a, self.b, 1)

    def __eq__(self, other):
        return isinstance(other, QFIdeal) and (self.K, self.a, self.b, self.g) == (other.K, other.a, other.b, other.g)

    def __hash__(self):
        return hash((self.K.d, self.a, self.b, self.g))

    def __repr__(self):
        g = "" if self.g == 1 else f"{self.g}*"
        return f"{g}[{self.a}, ({self.b}+sqrt({self.K.d}))/2]"

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "g": self.g, "dK": self.K.d}


def reduce_form(a: int, b: int, c: int):
    """Reduce a positive definite form; returns (form, M) with f o M = reduced."""
    M = ((1, 0), (0, 1))

    def mul(X, Y):
        return ((X[0][0] * Y[0][0] + X[0][1] * Y[1][0], X[0][0] * Y[0][1] + X[0][1] * Y[1][1]),
                (X[1][0] * Y[0][0] + X[1][1] * Y[1][0], X[1][0] * Y[0][1] + X[1][1] * Y[1][1]))

    while True:
        if b > a or b <= -a:
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
            M = mul(M, ((1, k), (0, 1)))
            continue
        if a > c:
            a, b, c = c, -b, a
            M = mul(M, ((0, -1), (1, 0)))
            continue
        if a == c and b < 0:
            a, b, c = c, -b, a
            M = mul(M, ((0, -1), (1, 0)))
            continue
        return (a, b, c), M


def reduced_forms(d: int) -> list[tuple]:
    """Reduced primitive positive definite forms of discriminant d, sorted."""
    out = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a:
                continue
            if b < 0 and a == c:
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            out.append((a, b, c))
        a += 1
    return sorted(out)


def principal_generator(I: QFIdeal) -> Optional[QuadElem]:
    """A generator of I when I is principal, else None."""
    (a, b, c), M = reduce_form(*I.form())
    if a != 1:
        return None
    x, y = M[0][0], M[1][0]
    K = I.K
    xi = K.elem(x * I.a) + QuadElem(K, Fraction(I.b, 2), Fraction(1, 2)) * y
    return xi * I.g


def ideal_of(xi: QuadElem) -> QFIdeal:
    """The principal ideal generated by an integral element."""
    if not xi.is_integral():
        raise ValueError("element is not integral")
    K = xi.K
    w = K.omega()
    gens = []
    for z in (xi, xi * w):
        u, v = z.ocoords()
        gens.append((int(u), int(v)))
    return QFIdeal.from_lattice(K, gens)


# ---------------------------------------------------------------------------
# Heegner data


def heegner_check(D: int, N: int) -> tuple[bool, dict]:
    """All primes dividing N split in K; returns (ok, per-prime symbols)."""
    if N < 4:
        raise ValueError("N >= 4 is assumed")
    d = fundamental_discriminant(D)
    cert = {int(q): kronecker(d, int(q)) for q in sympy.primefactors(N)}
    return all(v == 1 for v in cert.values()), cert


def choose_frakN(D: int, N: int) -> QFIdeal:
    """N_frak = Z*N + Z*(b0 + sqrt(d_K))/2 with the smallest b0 >= 0, b0^2 = d_K mod 4N."""
    K = QuadField(D)
    d = K.d
    for b0 in range(0, 2 * N + 1):
        if (b0 * b0 - d) % (4 * N) == 0:
            return _with_b0(QFIdeal(K, N, b0), b0)
    raise ValueError(f"d_K = {d} has no square root mod 4N; the Heegner hypothesis fails")


class _FrakN(QFIdeal):
    __slots__ = ("b0",)


def _with_b0(I: QFIdeal, b0: int) -> QFIdeal:
    J = _FrakN(I.K, I.a, I.b, I.g)
    J.b0 = b0
    return J


def omega_mod_frakN(frakN: QFIdeal) -> int:
    """Image of omega in O_K / N_frak = Z/N."""
    N, b = frakN.a, frakN.b
    return ((frakN.K.d - b) * pow(2, -1, N)) % N if N % 2 else _omega_mod_even(frakN)


def _omega_mod_even(frakN: QFIdeal) -> int:
    # omega - r lies in N_frak for exactly one r mod N
    K = frakN.K
    w = K.omega()
    for r in range(frakN.a):
        if frakN.contains(w - r):
            return r
    raise ValueError("no residue for omega")


def residue_mod_frakN(xi: QuadElem, frakN: QFIdeal) -> Optional[int]:
    """xi mod N_frak in Z/N for xi with denominator prime to N; None if not a unit."""
    N = frakN.a
    u, v = xi.ocoords()
    den = math.lcm(u.denominator, v.denominator)
    if math.gcd(den, N) != 1:
        raise ValueError("denominator not prime to N")
    w = omega_mod_frakN(frakN)
    r = (int(u * den) + int(v * den) * w) * pow(den, -1, N) % N if N > 1 else 0
    if N > 1 and math.gcd(r, N) != 1:
        return None
    return r


# ---------------------------------------------------------------------------
# class groups


class ClassGroupData:
    """Cl(K) via reduced forms, with composition through ideal multiplication."""

    def __init__(self, K: QuadField):
        self.K = K
        self.forms = reduced_forms(K.d)
        self.index = {f: i for i, f in enumerate(self.forms)}
        self.h = len(self.forms)
        self.identity = 0  # forms are sorted; the principal form has a = 1
        h = self.h
        self.table = [[self._compose_idx(i, j) for j in range(h)] for i in range(h)]
        self.group = AbelianGroup(list(range(h)), lambda i, j: self.table[i][j], 0)
        self._rep_cache: dict = {}

    def _compose_idx(self, i, j):
        I = self.ideal(i) * self.ideal(j)
        return self.class_of(I)

    def ideal(self, i: int) -> QFIdeal:
        a, b, c = self.forms[i]
        return QFIdeal(self.K, a, b)

    def class_of(self, I: QFIdeal) -> int:
        f, _ = reduce_form(*I.form())
        return self.index[f]

    def compose(self, i: int, j: int) -> int:
        return self.table[i][j]

    def inverse(self, i: int) -> int:
        a, b, c = self.forms[i]
        f, _ = reduce_form(a, -b, c)
        return self.index[f]

    def structure(self) -> list[int]:
        return self.group.invariants()

    def representatives(self, avoid: int = 1) -> list[QFIdeal]:
        """For each class, a primitive ideal of smallest norm prime to ``avoid``."""
        if avoid in self._rep_cache:
            return self._rep_cache[avoid]
        reps: list[Optional[QFIdeal]] = [None] * self.h
        found, a = 0, 1
        d = self.K.d
        while found < self.h:
            if math.gcd(a, avoid) == 1:
                for b in range(-a + 1, a + 1):
                    if (b * b - d) % (4 * a) == 0:
                        I = QFIdeal(self.K, a, b)
                        c = self.class_of(I)
                        if reps[c] is None:
                            reps[c] = I
                            found += 1
            a += 1
        self._rep_cache[avoid] = reps
        return reps

    def to_json(self) -> dict:
        return {"dK": self.K.d, "order": self.h, "forms": [list(f) for f in self.forms],
                "structure": self.structure()}


def class_group(D: int) -> ClassGroupData:
    return ClassGroupData(QuadField(D))


def closure_order(cls: ClassGroupData) -> int:
    """Order of the subgroup generated by the prime forms of norm up to the
    Minkowski bound; equals h when composition is correct."""
    K = cls.K
    bound = int(math.isqrt(-K.d // 3)) + 1
    gens = []
    for ell in sympy.primerange(2, bound + 1):
        for P in K.primes_above(ell):
            if P.g == 1:
                gens.append(cls.class_of(P))
    seen = {cls.identity}
    frontier = [cls.identity]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = cls.compose(x, g)
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return len(seen)


# ---------------------------------------------------------------------------
# local unit groups at p


class PLocalQuotient:
    """(O_K / p^m)^x modulo (Z / p^m)^x, with canonical keys."""

    def __init__(self, K: QuadField, p: int, m: int):
        self.K, self.p, self.m = K, p, m
        self.mod = p ** m
        if m == 0:
            self.elements = [("1", 0)]
        else:
            els = set()
            for y in range(self.mod):
                if self._is_unit(1, y):
                    els.add(self.key(1, y))
            for x in range(0, self.mod, p):
                if self._is_unit(x, 1):
                    els.add(self.key(x, 1))
            self.elements = sorted(els)
        self.group = AbelianGroup(self.elements, self.mul, ("1", 0) if m == 0 else self.key(1, 0))

    def _is_unit(self, x, y) -> bool:
        n = x * x + self.K.omega_trace * x * y + self.K.omega_norm * y * y
        return n % self.p != 0

    def key(self, x: int, y: int):
        if self.m == 0:
            return ("1", 0)
        M = self.mod
        x, y = x % M, y % M
        if x % self.p:
            return ("1", y * pow(x, -1, M) % M)
        if y % self.p == 0:
            raise ValueError("not a unit mod p")
        return ("0", x * pow(y, -1, M) % M)

    def _coords(self, k):
        return (1, k[1]) if k[0] == "1" else (k[1], 1)

    def mul(self, k1, k2):
        if self.m == 0:
            return ("1", 0)
        x1, y1 = self._coords(k1)
        x2, y2 = self._coords(k2)
        t, n = self.K.omega_trace, self.K.omega_norm
        return self.key(x1 * x2 - n * y1 * y2, x1 * y2 + x2 * y1 + t * y1 * y2)

    def of(self, xi: QuadElem):
        """Key of an element whose denominators are prime to p."""
        if self.m == 0:
            return ("1", 0)
        u, v = xi.ocoords()
        den = math.lcm(u.denominator, v.denominator)
        if den % self.p == 0:
            raise ValueError("denominator divisible by p")
        return self.key(int(u * den), int(v * den))


# ---------------------------------------------------------------------------
# Gal(F_m / K)


class RayClassData:
    """Gal(F_m/K) for F_m attached to (1 + N_frak O^)^x intersected with O_{p^m}^x.

    Elements are pairs (class index, local key) where the local key lives in
    ((Z/N)^x x P_m) modulo the image of O_K^x, P_m = (O/p^m)^x/(Z/p^m)^x.
    Each class c has a fixed representative ideal r_c; an ideal a in class c
    maps to (c, local image of xi) where a = r_c * (xi).
    """

    def __init__(self, K: QuadField, frakN: Optional[QFIdeal], p: int, m: int):
        self.K, self.p, self.m = K, p, m
        self.frakN = frakN if frakN is not None else K.unit_ideal()
        self.N = self.frakN.norm()
        if math.gcd(self.N, p) != 1:
            raise ValueError("N_frak and p must be coprime")
        if self.frakN.g != 1:
            raise ValueError("N_frak must be primitive")
        self.cls = ClassGroupData(K)
        self.avoid = self.N * p
        self.reps = self.cls.representatives(self.avoid)
        self.P = PLocalQuotient(K, p, m)
        self._unit_locs = [self._loc_raw(u) for u in K.units()]
        self._eta = {}
        for c1 in range(self.cls.h):
            for c2 in range(self.cls.h):
                self._eta[(c1, c2)] = self._cocycle(c1, c2)
        elements = []
        Nunits = [r for r in range(max(self.N, 1)) if math.gcd(r, self.N) == 1] if self.N > 1 else [0]
        locs = {self.canonical((r, t)) for r in Nunits for t in self.P.elements}
        for c in range(self.cls.h):
            for g in sorted(locs):
                elements.append((c, g))
        self.group = AbelianGroup(elements, self.mul, (0, self.canonical(self._loc_one())))
        self.order = self.group.order
        # ring class group: forget the N-part
        km = {(c, self._canonical_p(g[1])) for c, g in elements}
        self.order_Km = len(km)
        sub = {self.mul((0, self.canonical(self._loc_one())), (0, self.canonical((r, self.P.group.identity))))
               for r in Nunits}
        self.order_Fm_over_Km = len(sub)

    # local images ----------------------------------------------------------
    def _loc_one(self):
        return (1 % max(self.N, 1) if self.N > 1 else 0, self.P.group.identity)

    def _loc_raw(self, xi: QuadElem):
        r = residue_mod_frakN(xi, self.frakN) if self.N > 1 else 0
        if r is None:
            raise ValueError("element not prime to N_frak")
        return (r, self.P.of(xi))

    def _loc_mul(self, g1, g2):
        N = self.N
        return ((g1[0] * g2[0]) % N if N > 1 else 0, self.P.mul(g1[1], g2[1]))

    def canonical(self, g):
        return min(self._loc_mul(g, u) for u in self._unit_locs)

    def _canonical_p(self, t):
        return min(self.P.mul(t, u[1]) for u in self._unit_locs)

    def _generator_over_rep(self, I: QFIdeal, c: int):
        """xi with I = r_c * (xi)."""
        r = self.reps[c]
        J = I * r.conj()
        xi = principal_generator(J)
        if xi is None:
            raise RuntimeError("class bookkeeping failed")
        return xi / r.norm()

    def _cocycle(self, c1, c2):
        c3 = self.cls.compose(c1, c2)
        xi = self._generator_over_rep(self.reps[c1] * self.reps[c2], c3)
        return self._loc_raw(xi)

    def mul(self, x, y):
        c1, g1 = x
        c2, g2 = y
        c3 = self.cls.compose(c1, c2)
        return (c3, self.canonical(self._loc_mul(self._loc_mul(g1, g2), self._eta[(c1, c2)])))

    def element_of(self, I: QFIdeal):
        """The Frobenius-style image of an ideal prime to N_frak * p."""
        if math.gcd(I.norm(), self.avoid) != 1:
            raise ValueError("ideal not prime to the modulus")
        c = self.cls.class_of(I)
        xi = self._generator_over_rep(I, c)
        return (c, self.canonical(self._loc_raw(xi)))

    def dlog(self, x) -> tuple:
        return self.group.dlog(x)

    def structure(self) -> list[int]:
        return self.group.invariants()

    def expected_order(self) -> int:
        """h * #((Z/N)^x x P_m) / #(unit image), from the exact sequence."""
        nN = sympy.totient(self.N) if self.N > 1 else 1
        image = {self._loc_raw(u) for u in self.K.units()}
        return int(self.cls.h * nN * len(self.P.elements) // len(image))

    def to_json(self) -> dict:
        return {"dK": self.K.d, "N": self.N, "p": self.p, "m": self.m, "order": self.order,
                "structure": self.structure(), "orderKm": self.order_Km,
                "orderFmOverKm": self.order_Fm_over_Km}


def ray_class_group(D: int, frakN: Optional[QFIdeal], p: int, m: int) -> RayClassData:
    return RayClassData(QuadField(D), frakN, p, m)


# ---------------------------------------------------------------------------
# CM points


class CMPoint:
    """The CM point tau = omega + n with its embedding iota and p-adic images."""

    def __init__(self, K: QuadField, frakN: QFIdeal, p: int, m: int, ctx: PadicContext, shift: int):
        self.K, self.frakN, self.p, self.m, self.ctx = K, frakN, p, m, ctx
        self.shift = shift
        self.tau = K.omega() + shift
        self.tau_star = -1 / self.tau.conj()
        self.tau_m = self.tau / (p ** m)
        self.tau_star_m = self.tau_star * (p ** m)
        self.sqrt_d = _choose_sqrt(ctx, K.d)
        self.z0 = self.sigma(self.tau_star_m)
        self.z0bar = self.sigma_bar(self.tau_star_m)

    # embeddings ------------------------------------------------------------------
    def sigma(self, xi: QuadElem) -> PadicNum:
        return self.ctx(xi.x) + self.sqrt_d * self.ctx(xi.y)

    def sigma_bar(self, xi: QuadElem) -> PadicNum:
        return self.sigma(xi.conj())

    def tau_coords(self, u: QuadElem) -> tuple:
        """(x, y) with u = x + y*tau."""
        y = u.y / self.tau.y
        return (u.x - y * self.tau.x, y)

    def iota(self, u: QuadElem):
        """The matrix of multiplication by u on the basis (tau, 1)."""
        x, y = self.tau_coords(u)
        T, Nt = self.tau.trace(), self.tau.norm()
        return ((x + y * T, -y * Nt), (y, x))

    def iota_m(self, u: QuadElem):
        (a, b), (c, d) = self.iota(u)
        q = Fraction(self.p) ** self.m
        return ((a, b / q), (c * q, d))

    def padic_unit(self, x, y):
        """For u = x + y p^m tau with p-adic x, y: the entries of iota_m(u)
        (as p-adic numbers) and sigma(u)."""
        ctx = self.ctx
        x, y = ctx(x), ctx(y)
        T, Nt = self.tau.trace(), self.tau.norm()
        pm = self.p ** self.m
        a = x + y * ctx(T * pm)
        b = -(y * ctx(Nt))
        c = y * (pm * pm)
        d = x
        s = x + y * pm * self.sigma(self.tau)
        return (a, b, c, d), s

    def to_json(self) -> dict:
        return {"dK": self.K.d, "N": self.frakN.a, "b0": getattr(self.frakN, "b0", None),
                "p": self.p, "m": self.m, "tau": [str(self.tau.x), str(self.tau.y)],
                "z0": self.z0.to_json(), "z0bar": self.z0bar.to_json()}


def _choose_sqrt(ctx: PadicContext, d: int) -> PadicNum:
    try:
        return padic_sqrt(ctx(d))
    except ValueError as exc:
        raise ValueError(f"context cannot represent sqrt({d}): {exc}") from None


def cm_point(D: int, N: int, p: int, m: int, ctx: PadicContext) -> CMPoint:
    ok, cert = heegner_check(D, N)
    if not ok:
        raise ValueError(f"Heegner hypothesis fails: {cert}")
    if N % p == 0:
        raise ValueError("p must not divide N")
    K = QuadField(D)
    frakN = choose_frakN(D, N)
    w = K.omega()
    for shift in _search_order():
        if (w + shift).norm() % p != 0:
            return CMPoint(K, frakN, p, m, ctx, shift)


def _search_order():
    yield 0
    n = 1
    while True:
        yield n
        yield -n
        n += 1


# ---------------------------------------------------------------------------
# Grossencharacters


class Grossenchar:
    """An algebraic Grossencharacter of infinity type (a, b) and finite type
    (p^m, N_frak, eps).

    On principal ideals (xi) prime to the modulus the value is
        eps(xi mod N_frak) * sigma(xi)^a * sigma_bar(xi)^b * psi_p(xi)^(-1),
    where psi_p is a character of P_m (trivial when m = 0).  On the class-group
    generators g_i (order n_i, g_i^n_i = (xi_i)) the value is rho_i * zeta_i
    with rho_i a fixed n_i-th root of sigma(xi_i)^a sigma_bar(xi_i)^b and
    zeta_i an abstract root of unity.
    """

    def __init__(self, base: "_GrossencharBase", psi: tuple, choices: tuple):
        self.base = base
        self.psi = psi
        self.choices = choices
        self.a, self.b, self.m = base.a, base.b, base.m
        self.eps = base.eps
        self.frakN = base.frakN
        self.ctx = base.ctx
        self.gen_roots = []
        for i, (xi, n) in enumerate(zip(base.gen_elems, base.gen_orders)):
            f = base.abstract_part(xi, psi) / n + Fraction(choices[i], n)
            self.gen_roots.append(frac_mod1(f))

    def parts(self, I: QFIdeal):
        """(algebraic part in ctx, root of unity in Q/Z) of chi(I)."""
        base = self.base
        if not I.is_coprime_to(self.frakN):
            raise ValueError("ideal not prime to N_frak")
        if self.m > 0 and I.norm() % base.p == 0:
            raise ValueError("ideal not prime to p")
        cls = base.cls
        c = cls.class_of(I)
        exps = cls.group.dlog(c)
        r = base.K.unit_ideal()
        alg = self.ctx.one()
        root = Fraction(0)
        for e, g, rho, f in zip(exps, base.gen_ideals, base.rhos, self.gen_roots):
            r = r * g ** e
            alg = alg * rho ** e
            root += e * f
        J = I * r.conj()
        xi = principal_generator(J)
        if xi is None:
            raise RuntimeError("class bookkeeping failed")
        xi = xi / r.norm()
        alg = alg * base.algebraic(xi)
        root += base.abstract_part(xi, self.psi)
        return alg, frac_mod1(root)

    def __call__(self, I: QFIdeal) -> PadicNum:
        alg, root = self.parts(I)
        return alg * rou(self.ctx, root)

    def on_element(self, xi: QuadElem) -> PadicNum:
        """Value on the principal ideal (xi), from the defining formula."""
        base = self.base
        return base.algebraic(xi) * rou(self.ctx, base.abstract_part(xi, self.psi))

    def to_json(self) -> dict:
        return {"infinityType": [self.a, self.b], "m": self.m, "N": self.frakN.a,
                "b0": getattr(self.frakN, "b0", None), "eps": self.eps.to_json(),
                "psi": list(self.psi), "genRoots": [str(f) for f in self.gen_roots]}


class _GrossencharBase:
    def __init__(self, K, frakN, eps, a, b, m, p, ctx, sqrt_d):
        self.K, self.frakN, self.eps = K, frakN, eps
        self.a, self.b, self.m, self.p, self.ctx = a, b, m, p, ctx
        self.sqrt_d = sqrt_d
        self.cls = ClassGroupData(K)
        self.P = PLocalQuotient(K, p, m)
        G = self.cls.group
        reps = self.cls.representatives(frakN.norm() * p)
        self.gen_ideals = [reps[g] for g in G.gens]
        self.gen_orders = list(G.gen_orders)
        self.gen_elems = []
        self.rhos = []
        for g, n in zip(self.gen_ideals, self.gen_orders):
            xi = principal_generator(g ** n)
            self.gen_elems.append(xi)
            A = self.algebraic(xi)
            self.rhos.append(nth_root(A, n) if n > 1 else A)

    def sigma(self, xi):
        return self.ctx(xi.x) + self.sqrt_d * self.ctx(xi.y)

    def algebraic(self, xi: QuadElem) -> PadicNum:
        s, sb = self.sigma(xi), self.sigma(xi.conj())
        return s ** self.a * sb ** self.b

    def abstract_part(self, xi: QuadElem, psi: tuple) -> Fraction:
        """eps(xi mod N_frak) - psi_p(xi) in Q/Z."""
        N = self.frakN.norm()
        e = Fraction(0)
        if N > 1:
            r = residue_mod_frakN(xi, self.frakN)
            if r is None:
                raise ValueError("element not prime to N_frak")
            e = self.eps(r)
        if self.m > 0:
            e -= self.P.group.char_value(psi, self.P.of(xi))
        return frac_mod1(e)


def grossenchar_enumerate(D: int, frakN: QFIdeal, eps: DirichletCharacter, ab: tuple, m: int,
                          p: int, ctx: PadicContext):
    """All Grossencharacters of the given type; returns (list, diagnostic)."""
    a, b = ab
    K = QuadField(D)
    if eps.N != frakN.norm():
        raise ValueError("eps must be a character modulo N(N_frak)")
    if eps.parity() != (-1) ** (a + b):
        return [], "parity violated: eps(-1) != (-1)^(a+b)"
    sqrt_d = _choose_sqrt(ctx, K.d)
    base = _GrossencharBase(K, frakN, eps, a, b, m, p, ctx, sqrt_d)
    # psi_p must make the character trivial on global units
    units = K.units()
    unit_alg = []
    for u in units:
        val = base.algebraic(u)
        unit_alg.append(rou_log(ctx, val, len(units)))
    chars = []
    for psi in base.P.group.characters():
        ok = True
        for u, f in zip(units, unit_alg):
            if frac_mod1(f + base.abstract_part(u, psi)) != 0:
                ok = False
                break
        if ok:
            chars.append(psi)
    if not chars:
        return [], "no extension: the unit constraint has no solution"
    out = []
    for psi in chars:
        for choice in _vectors_of(base.gen_orders):
            out.append(Grossenchar(base, psi, choice))
    return out, "ok"


def _vectors_of(orders):
    if not orders:
        yield ()
        return
    for e in range(orders[0]):
        for t in _vectors_of(orders[1:]):
            yield (e,) + t


def ring_class_order(K: QuadField, p: int, m: int) -> int:
    """#Gal(K_m/K) = h * #P_m / #(image of units)."""
    P = PLocalQuotient(K, p, m)
    image = {P.of(u) for u in K.units()}
    return ClassGroupData(K).h * len(P.elements) // len(image)


def random_coprime_ideal(K: QuadField, avoid: int, rng: random.Random, max_norm: int = 200) -> QFIdeal:
    """A random primitive ideal of norm prime to ``avoid``."""
    d = K.d
    while True:
        a = rng.randint(1, max_norm)
        if math.gcd(a, avoid) != 1:
            continue
        bs = [b for b in range(-a + 1, a + 1) if (b * b - d) % (4 * a) == 0]
        if bs:
            return QFIdeal(K, a, rng.choice(bs))

"""Small finite abelian groups, abstract roots of unity and Dirichlet characters.

Roots of unity are carried abstractly as elements of Q/Z (a Fraction in [0, 1))
and only turned into p-adic numbers when a context is supplied.  The
identification sends f = k/W (p not dividing W) to the k-th power of the
primitive W-th root of unity chosen by ``primitive_root_of_unity``; these
choices are compatible across W, so the identification is a homomorphism.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Hashable, Sequence

import sympy

from .padic import PadicContext, PadicNum, primitive_root_of_unity


def frac_mod1(x) -> Fraction:
    x = Fraction(x)
    return x - math.floor(x)


def rou(ctx: PadicContext, f) -> PadicNum:
    """The root of unity exp(2 pi i f) realised in ctx."""
    f = frac_mod1(f)
    W = f.denominator
    if W == 1:
        return ctx.one()
    if W % ctx.p == 0 or (ctx.q - 1) % W:
        raise ValueError(f"context lacks the {W}-th roots of unity")
    return primitive_root_of_unity(ctx, W) ** f.numerator


def rou_log(ctx: PadicContext, z: PadicNum, W: int) -> Fraction:
    """Inverse of ``rou`` on W-th roots of unity."""
    zeta = primitive_root_of_unity(ctx, W)
    acc = ctx.one()
    for k in range(W):
        if acc == z:
            return Fraction(k, W)
        acc = acc * zeta
    raise ValueError(f"not a {W}-th root of unity")


class AbelianGroup:
    """A finite abelian group given by its elements and a multiplication.

    The constructor finds a basis g_1..g_r with orders n_1 | ... (up to
    reordering, within each Sylow subgroup) so that every element is uniquely
    a product of powers g_i^e_i with 0 <= e_i < n_i.
    """

    def __init__(self, elements: Sequence[Hashable], op: Callable, identity: Hashable):
        self.elements = list(elements)
        self.op = op
        self.identity = identity
        self._index = {x: i for i, x in enumerate(self.elements)}
        if identity not in self._index:
            raise ValueError("identity missing from element list")
        self.order = len(self.elements)
        self._orders = {x: self._element_order(x) for x in self.elements}
        self.gens, self.gen_orders = self._basis()
        self._dlog = {}
        for exps in _vectors(self.gen_orders):
            x = self.identity
            for g, e in zip(self.gens, exps):
                x = self.op(x, self.power(g, e))
            if x in self._dlog:
                raise RuntimeError("basis does not give a direct decomposition")
            self._dlog[x] = tuple(exps)
        if len(self._dlog) != self.order:
            raise RuntimeError("basis does not generate the group")

    def power(self, x, e: int):
        r = self.identity
        for _ in range(e):
            r = self.op(r, x)
        return r

    def _element_order(self, x) -> int:
        n, y = 1, x
        while y != self.identity:
            y = self.op(y, x)
            n += 1
            if n > self.order:
                raise RuntimeError("operation is not a group law on the element list")
        return n

    def element_order(self, x) -> int:
        return self._orders[x]

    def _basis(self):
        gens, orders = [], []
        for ell in sorted(sympy.factorint(self.order)):
            sylow = [x for x in self.elements if _is_power_of(self._orders[x], ell)]
            H = {self.identity}
            while len(H) < len(sylow):
                best = None
                for x in sorted(sylow, key=lambda y: -self._orders[y]):
                    if x in H:
                        continue
                    cyc = self._cyclic(x)
                    if len(set(cyc) & H) == 1:
                        best = x
                        break
                if best is None:
                    raise RuntimeError("failed to split Sylow subgroup")
                cyc = self._cyclic(best)
                H = {self.op(h, c) for h in H for c in cyc}
                gens.append(best)
                orders.append(self._orders[best])
        return gens, orders

    def _cyclic(self, x):
        out, y = [self.identity], x
        while y != self.identity:
            out.append(y)
            y = self.op(y, x)
        return out

    def dlog(self, x) -> tuple:
        return self._dlog[x]

    def from_exponents(self, exps) -> Hashable:
        x = self.identity
        for g, n, e in zip(self.gens, self.gen_orders, exps):
            x = self.op(x, self.power(g, e % n))
        return x

    def invariants(self) -> list[int]:
        """Invariant factors d_1 | d_2 | ... of the group."""
        by_prime: dict[int, list[int]] = {}
        for n in self.gen_orders:
            if n > 1:
                ell = min(sympy.factorint(n))
                by_prime.setdefault(ell, []).append(n)
        for v in by_prime.values():
            v.sort(reverse=True)
        width = max((len(v) for v in by_prime.values()), default=0)
        inv = []
        for i in range(width):
            d = 1
            for v in by_prime.values():
                if i < len(v):
                    d *= v[i]
            inv.append(d)
        return sorted(inv)

    def exponent(self) -> int:
        return math.lcm(*self.gen_orders) if self.gen_orders else 1

    def characters(self) -> list[tuple]:
        """All characters, each as a tuple c with chi(g_i) = c_i / n_i in Q/Z."""
        return [tuple(v) for v in _vectors(self.gen_orders)]

    def char_value(self, c: tuple, x) -> Fraction:
        return frac_mod1(sum(Fraction(ci * ei, ni) for ci, ei, ni in zip(c, self.dlog(x), self.gen_orders)))


def _is_power_of(n: int, ell: int) -> bool:
    while n % ell == 0:
        n //= ell
    return n == 1


def _vectors(orders):
    if not orders:
        yield ()
        return
    head, rest = orders[0], orders[1:]
    for e in range(head):
        for tail in _vectors(rest):
            yield (e,) + tail


# ---------------------------------------------------------------------------
# Dirichlet characters


def unit_group_mod(N: int) -> AbelianGroup:
    elems = [a for a in range(N) if math.gcd(a, N) == 1] if N > 1 else [0]
    return AbelianGroup(elems, lambda x, y: (x * y) % N if N > 1 else 0, 1 % N if N > 1 else 0)


class DirichletCharacter:
    """A Dirichlet character mod N with values in Q/Z (abstract roots of unity)."""

    def __init__(self, N: int, table: dict):
        self.N = int(N)
        self.table = {int(a) % max(self.N, 1): frac_mod1(v) for a, v in table.items()}

    @classmethod
    def trivial(cls, N: int) -> "DirichletCharacter":
        return cls(N, {a: 0 for a in range(max(N, 1)) if math.gcd(a, N) == 1})

    @classmethod
    def all_mod(cls, N: int) -> list["DirichletCharacter"]:
        G = unit_group_mod(N)
        return [cls(N, {x: G.char_value(c, x) for x in G.elements}) for c in G.characters()]

    def __call__(self, a: int):
        """Value in Q/Z, or None when gcd(a, N) > 1."""
        if self.N == 1:
            return Fraction(0)
        return self.table.get(a % self.N)

    def value(self, a: int, ctx: PadicContext) -> PadicNum:
        f = self(a)
        if f is None:
            return ctx.zero()
        return rou(ctx, f)

    def order(self) -> int:
        return math.lcm(*[v.denominator for v in self.table.values()]) if self.table else 1

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.N, {a: -v for a, v in self.table.items()})

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.N != self.N:
            raise ValueError("modulus mismatch")
        return DirichletCharacter(self.N, {a: v + other.table[a] for a, v in self.table.items()})

    def __eq__(self, other):
        return isinstance(other, DirichletCharacter) and self.N == other.N and self.table == other.table

    def __hash__(self):
        return hash((self.N, tuple(sorted(self.table.items()))))

    def parity(self) -> int:
        """epsilon(-1) as +1 or -1."""
        return 1 if self(-1) == 0 else -1

    def is_trivial(self) -> bool:
        return all(v == 0 for v in self.table.values())

    def conductor(self) -> int:
        for d in sorted(sympy.divisors(self.N)):
            if all(v == 0 for a, v in self.table.items() if (a - 1) % d == 0):
                return d
        return self.N

    def is_primitive(self) -> bool:
        return self.conductor() == self.N

    def to_json(self) -> dict:
        return {"modulus": self.N, "values": {str(a): str(v) for a, v in sorted(self.table.items())}}

    @classmethod
    def from_json(cls, data: dict) -> "DirichletCharacter":
        return cls(int(data["modulus"]), {int(a): Fraction(v) for a, v in data["values"].items()})

    def __repr__(self):
        return f"DirichletCharacter(N={self.N}, order={self.order()})"

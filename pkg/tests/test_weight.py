import math
import random
from fractions import Fraction

import pytest

from heegner_lab.padic import PadicContext, teichmuller
from heegner_lab.weight import (IwasawaElem, TwoVarElem, WeightDisc, binom_nabla, kappa_eval, nabla,
                                specialize)


@pytest.fixture
def U():
    return WeightDisc(PadicContext(5, precision=10), 2, 1)


def test_admissibility(U):
    assert U.admissible_weights(0, 50) == [2, 22, 42]
    with pytest.raises(ValueError, match="component"):
        U.check_admissible(3)
    with pytest.raises(ValueError, match="outside the disc"):
        U.check_admissible(6)


def test_kappa_specialises_to_powers(U):
    assert specialize(kappa_eval(U, 6), 2).with_precision(8) == 36
    for k in (22, 42):
        assert specialize(kappa_eval(U, 6), k) == U.ctx(6) ** k


def test_kappa_examples(U):
    ctx = U.ctx
    assert kappa_eval(U, 1) == U.one()
    w = teichmuller(ctx(3))
    assert kappa_eval(U, w) == U.const(w ** U.k0)
    assert specialize(kappa_eval(U, 6), 22) == ctx(6) ** 22
    with pytest.raises(ValueError):
        kappa_eval(U, 5)


def test_kappa_on_random_units(U):
    rng = random.Random(0)
    ctx = U.ctx
    for _ in range(50):
        x = ctx(rng.randrange(1, 5 ** 10))
        if not x.is_unit():
            continue
        kx = kappa_eval(U, x)
        for k in (2, 22):
            assert kx.specialize(k) == x ** k


def test_nabla(U):
    nb = nabla(U)
    for k in (2, 22, 42, 2 + 5 * 4 * 7):
        assert nb.specialize(k) == k
    assert all(c.valuation() >= 0 for c in (nb - U.k0).coeffs)


def test_binom_nabla(U):
    assert binom_nabla(U, 0, 0) == U.one()
    for k in (2, 22):
        assert binom_nabla(U, 0, 2).specialize(k) == k * (k - 1) // 2
    lhs = binom_nabla(U, 0, 3).scale(math.comb(3, 1))
    rhs = binom_nabla(U, 0, 1) * binom_nabla(U, 1, 2)
    assert lhs == rhs


def test_binomial_identity_all(U):
    for h in range(5):
        for j in range(h + 1):
            assert binom_nabla(U, 0, h).scale(math.comb(h, j)) == binom_nabla(U, 0, j) * binom_nabla(U, j, h - j)


def test_specialisation_is_a_ring_map(U):
    rng = random.Random(1)
    ctx = U.ctx

    def rand():
        return IwasawaElem(U, [ctx(rng.randrange(5 ** 10)) for _ in range(4)] + [ctx.zero()] * (U.dmax - 3))

    for _ in range(100):
        a, b = rand(), rand()
        for k in (2, 22):
            assert (a + b).specialize(k) == a.specialize(k) + b.specialize(k)
            assert (a * b).specialize(k) == a.specialize(k) * b.specialize(k)


def test_ring_axioms_with_truncation(U):
    rng = random.Random(2)
    ctx = U.ctx

    def rand():
        return IwasawaElem(U, [ctx(rng.randrange(5 ** 10)) * 5 ** (i // 3) for i in range(U.dmax + 1)])

    for _ in range(10):
        a, b, c = rand(), rand(), rand()
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
    assert (a * b).loss < math.inf


def test_analyticity_level(U):
    assert U.analyticity_level() >= 1


def test_denominator(U):
    # bounded by v_p(j!) and attained for r = 1
    assert binom_nabla(U, 0, 5).denom_exp == 1
    half = U.one().scale(Fraction(1, 5))
    assert half.denom_exp == 1


def test_two_variable_outer(U):
    B = WeightDisc(U.ctx, 21, 1)
    t = TwoVarElem.outer(kappa_eval(U, 6), kappa_eval(B, 7))
    assert t.specialize(22, 1) == U.ctx(6) ** 22 * 7

import math
import random

import pytest

from heegner_lab import cmfield
from heegner_lab.distributions import (
    AnalyticElem, Distribution, MonoidElem, TSymVec, act_A, act_D, cm_tensor, congruence_report,
    eigen_dist, evaluation_distribution, mom, overconvergent_proj, tsym_mul,
)
from heegner_lab.checks import random_cm_unit
from heegner_lab.padic import PadicContext
from heegner_lab.weight import WeightDisc, binom_nabla


@pytest.fixture(scope="module")
def ctx():
    return PadicContext(5, precision=10)


@pytest.fixture(scope="module")
def cm2(ctx):
    return cmfield.cm_point(1, 13, 5, 2, ctx)


def _shuffle_oracle(a, b, z, zb):
    # symmetrised product of e^(x)a and ebar^(x)b: fix the x-positions to the first i
    # slots and sum over the C(a+b, a) ways of assigning slots to e or ebar
    from itertools import combinations
    k = a + b
    out = []
    for i in range(k + 1):
        acc = 0
        for A in combinations(range(k), a):
            term = 1
            for pos in range(i):
                term = term * (z if pos in A else zb)
            acc = acc + term
        out.append(acc)
    return out


def test_tsym_basic_products():
    x = TSymVec(1, [0, 1])
    assert tsym_mul(x, x) == TSymVec(2, [0, 0, 2])
    one = TSymVec(0, [1])
    t = TSymVec(3, [1, 2, 3, 4])
    assert tsym_mul(one, t) == t


def test_tsym_associative_commutative():
    rng = random.Random(1)
    for _ in range(10):
        a, b, c = (TSymVec(d, [rng.randint(-5, 5) for _ in range(d + 1)]) for d in (1, 2, 3))
        assert tsym_mul(a, b) == tsym_mul(b, a)
        assert tsym_mul(tsym_mul(a, b), c) == tsym_mul(a, tsym_mul(b, c))


def test_cm_tensor_small_cases(cm2):
    z, zb = cm2.z0, cm2.z0bar
    assert cm_tensor(1, 0, cm2) == TSymVec(1, [1, z])
    assert cm_tensor(1, 1, cm2) == TSymVec(2, [2, z + zb, z * zb * 2])
    assert cm_tensor(4, 0, cm2) == TSymVec(4, [z ** i for i in range(5)])


@pytest.mark.parametrize("a,b", [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)])
def test_cm_tensor_matches_shuffle_oracle(cm2, a, b):
    want = _shuffle_oracle(a, b, cm2.z0, cm2.z0bar)
    assert cm_tensor(a, b, cm2) == TSymVec(a + b, want)


def test_monoid_validation(ctx):
    with pytest.raises(ValueError):
        MonoidElem(ctx, 1, 0, 1, 1)
    with pytest.raises(ValueError):
        MonoidElem(ctx, 5, 0, 0, 1)
    g = MonoidElem(ctx, 2, 3, 5, 7)
    prod = g * g.inverse()
    for x, y in ((prod.a, 1), (prod.b, 0), (prod.c, 0), (prod.d, 1)):
        assert (x - y).is_zero()
    with pytest.raises(ValueError):
        MonoidElem.shift(ctx).inverse()


def test_act_A_examples(ctx):
    n, S = 1, 6
    f = AnalyticElem(n, 4, [ctx.one()] + [ctx.zero()] * S)
    g = MonoidElem(ctx, 1, 0, 5, 1)
    assert act_A(MonoidElem.identity(ctx), f) == f
    assert act_A(g, f) == f
    z = AnalyticElem(n, 4, [ctx.zero(), ctx.one()] + [ctx.zero()] * (S - 1))
    want = AnalyticElem(n, 4, [ctx.one(), ctx.one()] + [ctx.zero()] * (S - 1))
    assert act_A(g, z) == want


def test_act_D_identity_and_shift(ctx, cm2):
    mu = evaluation_distribution(ctx, cm2.z0, 1, 4, 8)
    assert act_D(MonoidElem.identity(ctx), mu) == mu
    shifted = act_D(MonoidElem.shift(ctx, 1, 1), mu)
    want = evaluation_distribution(ctx, cm2.z0 * 5, 1, 4, 8)
    assert shifted.equal_moments(want)


def test_monoid_action_axiom_integer_weight(ctx):
    rng = random.Random(3)
    k, S = 5, 10
    mu = Distribution(1, k, [ctx(rng.randrange(5 ** 8)) for _ in range(S + 1)])

    def rnd():
        while True:
            a, b, d = (rng.randrange(1, 5 ** 6) for _ in range(3))
            c = 5 * rng.randrange(5 ** 5)
            try:
                return MonoidElem(ctx, a, b, c, d)
            except ValueError:
                continue

    for _ in range(10):
        g1, g2 = rnd(), rnd()
        lhs = act_D(g1, act_D(g2, mu))
        rhs = act_D(g1 * g2, mu)
        assert lhs.equal_moments(rhs, S - 4)


def test_mom_equivariance(ctx):
    rng = random.Random(7)
    for k in range(0, 7):
        mu = Distribution(1, k, [ctx(rng.randrange(5 ** 8)) for _ in range(k + 1)])
        g = MonoidElem(ctx, 1 + 5 * rng.randrange(100), rng.randrange(100), 5 * rng.randrange(100), 2)
        assert mom(k, act_D(g, mu)) == mom(k, mu).act(g.matrix())


def test_eigen_property(ctx):
    # guard digits: compare at precision 8 out of 10
    cm = cmfield.cm_point(1, 13, 5, 1, ctx)
    rng = random.Random(0)
    k = 4
    e = eigen_dist(k, 0, 1, 1, cm, 14)
    for _ in range(5):
        g, s, _ = random_cm_unit(cm, rng)
        f = act_D(g, e)
        sk = s ** (-k)
        for i in range(7):
            assert f.moments[i].with_precision(8) == (e.moments[i] * sk).with_precision(8)


def test_eigen_dist_j0_is_evaluation(ctx, cm2):
    e = eigen_dist(6, 0, 2, 1, cm2, 8)
    w0 = cm2.sigma(cm2.tau_star) * 5
    for s in range(9):
        assert (e.moments[s] - w0 ** s).is_zero()
    assert mom(6, e) == cm_tensor(6, 0, cm2)


def test_eigen_dist_j1_derivative_formula(ctx, cm2):
    k, n = 6, 1
    e = eigen_dist(k, 1, 2, n, cm2, 8)
    z, zb = cm2.z0, cm2.z0bar
    for s in range(7):
        want = z ** s * (k - s) + (zb * z ** (s - 1) * s if s else 0)
        assert (e.moments[s] * 5 ** (n * s) - want).is_zero()


def test_eigen_dist_requires_m_ge_n(ctx):
    cm = cmfield.cm_point(1, 13, 5, 1, ctx)
    with pytest.raises(ValueError):
        eigen_dist(4, 0, 1, 2, cm)


def test_family_mom_interpolation(ctx, cm2):
    # centre each disc at k + 20 so that k is admissible but not the centre
    for j in range(3):
        for k in range(0, j + 3):
            U = WeightDisc(ctx, k + 20, 1)
            e = eigen_dist(U, j, 2, 1, cm2, 12)
            want = cm_tensor(k - j, j, cm2) if k >= j else TSymVec(k, [0] * (k + 1))
            assert mom(k, e) == want


def test_family_mom_rejects_inadmissible(ctx, cm2):
    e = eigen_dist(WeightDisc(ctx, 0, 1), 0, 2, 1, cm2, 8)
    with pytest.raises(ValueError):
        mom(3, e)


def test_mom_zero_and_bounds(ctx):
    mu = Distribution(1, 3, [ctx.zero()] * 4)
    assert mom(3, mu).is_zero()
    with pytest.raises(ValueError):
        mom(5, mu)


def test_overconvergent_projector(ctx, cm2):
    U = WeightDisc(ctx, 0, 1)
    base = eigen_dist(U.shifted(-2), 0, 2, 1, cm2, 10)
    proj = overconvergent_proj(base, cm_tensor(0, 2, cm2))
    assert proj.equal_moments(eigen_dist(U, 2, 2, 1, cm2, 10))
    same = overconvergent_proj(base, TSymVec(0, [1]))
    assert same.equal_moments(base)
    # Pi_h(e_{U-h} (x) e^[h-j, j]) = binom(nabla - j, h - j) e_{U,j}
    h, j = 3, 1
    base_h = eigen_dist(U.shifted(-h), 0, 2, 1, cm2, 10)
    lhs = overconvergent_proj(base_h, cm_tensor(h - j, j, cm2))
    rhs = eigen_dist(U, j, 2, 1, cm2, 10).scale(binom_nabla(U, j, h - j))
    assert lhs.equal_moments(rhs)


def test_overconvergent_weight_mismatch(ctx, cm2):
    base = eigen_dist(4, 0, 2, 1, cm2, 6)
    with pytest.raises(ValueError):
        overconvergent_proj(base, TSymVec(1, [1, 1]), target=7)


def test_norm_shift(ctx):
    U = WeightDisc(ctx, 0, 1)
    cm1, cm2_ = cmfield.cm_point(1, 13, 5, 1, ctx), cmfield.cm_point(1, 13, 5, 2, ctx)
    for j in range(3):
        lhs = act_D(MonoidElem.shift(ctx), eigen_dist(U, j, 1, 1, cm1, 10))
        assert lhs.equal_moments(eigen_dist(U, j, 2, 1, cm2_, 10))


def test_congruence_h0_integral(ctx, cm2):
    U = WeightDisc(ctx, 0, 1)
    rep = congruence_report(0, 2, 1, U, cm2, 10)
    assert rep.floor >= 0


def test_congruence_floor_grows(ctx):
    U = WeightDisc(ctx, 0, 1)
    floors = [congruence_report(2, m, 1, U, cmfield.cm_point(1, 13, 5, m, ctx), 12).floor for m in (1, 2, 3)]
    assert floors[1] - floors[0] >= 2 and floors[2] - floors[1] >= 2


def test_distribution_json_and_lattice(ctx):
    mu = Distribution(1, 2, [ctx(1), ctx(5), ctx.from_rational(__import__("fractions").Fraction(1, 5))])
    assert not mu.is_lattice()
    assert mu.denom_exp == 1
    d = mu.to_json()
    assert d["level"] == 1 and len(d["moments"]) == 3

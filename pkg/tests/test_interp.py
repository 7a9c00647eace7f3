import math

import pytest
import sympy

from heegner_lab import cmfield, interp
from heegner_lab.checks import triple_5_4_a
from heegner_lab.groups import DirichletCharacter
from heegner_lab.interp import (
    FactorExpr, RelationError, alpha, beta, chi_p, chi_pbar, eps_p, p_sym,
)
from heegner_lab.padic import PadicContext


@pytest.fixture(scope="module")
def triple():
    return triple_5_4_a()


def test_euler_factor_shapes():
    split = interp.euler_factor_A(splitting="split", k=1)
    assert sympy.simplify(split.expr - (1 - chi_p / alpha) * (1 - chi_pbar / alpha)) == 0
    inert = interp.euler_factor_A(splitting="inert")
    assert sympy.simplify(inert.expr - (1 - chi_p / alpha ** 2)) == 0
    with pytest.raises(ValueError):
        interp.euler_factor_A(splitting="weird")


def test_regulator_has_one_inverted_atom():
    assert len(interp.regulator_factor(k=2).inverted_atoms()) == 1


def test_triple_basics(triple):
    assert triple.splitting() == "split"
    assert triple.k == 2 and triple.m == 0
    assert triple.noble
    vals = triple.values()
    assert (vals[chi_p] * vals[chi_pbar] - triple.eps_p * 13 ** triple.k).is_zero()


def test_triple_rejects_bad_alpha(triple):
    with pytest.raises(ValueError):
        interp.HeegnerTriple(triple.f, triple.alpha + 1, triple.chi, 13)


def test_numeric_factors_nonzero(triple):
    E = interp.euler_factor_value(triple)
    assert not E.is_zero()
    assert not interp.regulator_value(triple).is_zero()


def test_thmA_scalar(triple):
    E = interp.euler_factor_value(triple)
    assert (interp.thmA_scalar(triple, triple.k, 0) - E).is_zero()
    s = interp.thmA_scalar(triple, 1, 2)
    # alpha is a unit, so only binom(k, j) = 2 can shift the valuation at p = 13
    assert s.valuation() == E.valuation()
    with pytest.raises(ValueError):
        interp.thmA_scalar(triple, triple.k + 1, 0)


def test_exceptional_zero_raises(triple):
    # force chi(pbar) = alpha: the regulator factor has a pole
    vals = triple.values()
    vals[chi_pbar] = vals[alpha]
    with pytest.raises(interp.ExceptionalZero):
        interp.regulator_factor(k=triple.k).evaluate(vals)


@pytest.mark.parametrize("k", range(5))
def test_cancellation_exponent_is_k(k):
    proof = interp.euler_cancellation_check(k=k)
    assert proof.holds and proof.exponent == k
    assert k not in proof.rejected


def test_cancellation_rejects_wrong_assumption():
    with pytest.raises(RelationError):
        interp.euler_cancellation_check(k=2, assumed=3)


def test_cancellation_spot_checks():
    spots = interp.cancellation_spot_checks(2, PadicContext(5, precision=10), 20, seed=1)
    assert len(spots) == 20 and all(spots)
    wrong = interp.cancellation_spot_checks(2, PadicContext(5, precision=10), 5, seed=1, exponent=3)
    assert not any(wrong)


def test_gauss_trivial_and_quadratic():
    assert (interp.gauss_sum(DirichletCharacter.trivial(1)) - 1).is_zero()
    quad = [e for e in DirichletCharacter.all_mod(3) if not e.is_trivial()][0]
    G = interp.gauss_sum(quad)
    assert (G * G + 3).is_zero()


@pytest.mark.parametrize("N", [4, 7, 8, 13])
def test_gauss_primitive_property(N):
    for eps in DirichletCharacter.all_mod(N):
        if eps.is_primitive() and eps.order() % 5:
            assert interp.gauss_check(eps)


def test_classify():
    assert interp.classify(1, 1, 2) == "Sigma1"
    assert interp.classify(3, -1, 2) == "Sigma2"
    assert interp.classify(-1, 3, 2) == "Sigma2'"
    with pytest.raises(ValueError):
        interp.classify(1, 2, 2)


def test_bdp_constants():
    eps = DirichletCharacter.trivial(1)
    c = interp.bdp_constants(3, 0, 3, eps)
    G_inv = c["gaussInverse"]
    assert c["ab"]["explrecipConst"] == interp.PeriodScaled(G_inv)
    c21 = interp.bdp_constants(2, 1, 3, eps)
    assert c21["omegaExp"] == 1
    val = c21["ab"]["explrecipConst"].value * (math.comb(3, 2) * math.factorial(1))
    assert (val * interp.gauss_sum(eps.conj()) - 1).is_zero()


def test_period_tokens_must_match():
    with pytest.raises(ValueError):
        interp.PeriodScaled(1, 1) + interp.PeriodScaled(1, 2)


def test_class_number_one_skeleton():
    ctx = PadicContext(13, precision=10)
    eps = DirichletCharacter.trivial(1)
    frakN = cmfield.choose_frakN(1, 1)
    chis, _ = cmfield.grossenchar_enumerate(1, frakN, eps, (0, 0), 0, 13, ctx)
    cls = cmfield.ClassGroupData(cmfield.QuadField(1))
    s = interp.bdp_sum_skeleton(None, chis[0], cls, interp.MockEvaluator(ctx, cls))
    assert s == interp.PeriodScaled(ctx.one())


def test_orthogonality_order_three():
    ctx = PadicContext(13, precision=10)
    chis, _ = cmfield.grossenchar_enumerate(23, cmfield.choose_frakN(23, 6), DirichletCharacter.trivial(6),
                                            (0, 0), 0, 13, ctx)
    cls = cmfield.ClassGroupData(cmfield.QuadField(23))
    r = interp.orthogonality_check(chis, cls)
    assert r["ok"] and r["h"] == 3 and r["characters"] == 3

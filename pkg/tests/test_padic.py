import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from heegner_lab.padic import (PadicContext, PrecisionError, exp1, log1, nth_root, primitive_root_of_unity,
                               sqrt, teichmuller, unit_power, unramified_context, vp, vp_factorial)

P10 = 5 ** 10


def test_vp_helpers():
    assert vp(250, 5) == 3
    assert vp_factorial(25, 5) == 6


def test_rejects_even_prime_and_composites():
    with pytest.raises(ValueError, match="odd prime"):
        PadicContext(2)
    with pytest.raises(ValueError):
        PadicContext(9)


def test_rejects_reducible_polynomial():
    # x^2 - 1 is neither irreducible mod 5 nor Eisenstein
    with pytest.raises(ValueError, match="unsupported presentation"):
        PadicContext(5, (-1, 0, 1))


def test_extension_kinds():
    unr = PadicContext(5, (2, 0, 1))  # x^2 + 2 is irreducible mod 5
    assert (unr.kind, unr.e, unr.f) == ("unramified", 1, 2)
    ram = PadicContext(5, (5, 0, 1))  # x^2 + 5
    assert (ram.kind, ram.e, ram.f) == ("eisenstein", 2, 1)
    assert ram.e * ram.f == ram.degree


def test_basic_arithmetic(Q5):
    assert Q5(1) + Q5(1) == Q5(2)
    assert (Q5(5) * Q5(5)).valuation() == 2
    half = Q5(Fraction(1, 2))
    assert half.residue_int() == pow(2, -1, P10)
    assert half.precision == 10


def test_precision_propagation(Q5):
    x = Q5(3).with_precision(4)
    y = Q5(7)
    assert (x + y).precision == 4
    # multiplying by p shifts the absolute precision
    assert (x * 5).precision == 5
    z = Q5(Fraction(1, 25))
    assert z.valuation() == -2
    assert z.denom_exp == 2


def test_zero_at_precision_is_distinct(Q5):
    z = Q5(P10)
    assert z.is_zero()
    assert z.valuation() == 10
    with pytest.raises(ZeroDivisionError):
        Q5(1) / z


def test_context_mismatch(Q5, Q13):
    with pytest.raises(ValueError):
        Q5(1) + Q13(1)


def test_teichmuller(Q5):
    w = teichmuller(Q5(2))
    assert w ** 4 == 1
    assert w.residue_int() % 5 == 2
    assert teichmuller(w) == w
    assert teichmuller(Q5(1)) == 1
    with pytest.raises(ValueError):
        teichmuller(Q5(5))


def test_log_exp_examples(Q5):
    assert log1(Q5(1)).is_zero()
    assert exp1(Q5(0)) == 1
    lhs = log1(Q5(6) ** 5)
    rhs = log1(Q5(6)) * 5
    assert lhs.with_precision(8) == rhs.with_precision(8)


def test_log_domain(Q5):
    with pytest.raises(ValueError):
        log1(Q5(2))
    with pytest.raises(ValueError):
        exp1(Q5(1))


def test_unit_power(Q5):
    x = Q5(6)
    assert unit_power(x, 0) == 1
    assert unit_power(x, 3) == x * x * x
    r = unit_power(x, Fraction(1, 2))
    assert (r * r).with_precision(8) == x.with_precision(8)


def test_sqrt_minus_one(Q5):
    i = sqrt(Q5(-1))
    assert i * i == -1
    assert i.residue_int() == 6139557


def test_nth_root(Q13):
    c = Q13(3) ** 3
    r = nth_root(c, 3)
    assert r ** 3 == c


def test_eisenstein_inverse():
    K = PadicContext(5, (5, 0, 1), precision=6)
    pi = K.gen()
    assert pi.valuation() == Fraction(1, 2)
    u = K.one() + pi
    assert u * u.inverse() == 1
    assert (pi * pi + 5).is_zero()


def test_roots_of_unity_in_unramified_extension():
    K = unramified_context(5, 2)
    z = primitive_root_of_unity(K, 8)
    assert z ** 8 == 1
    assert not (z ** 4 - 1).is_zero()


def test_json_round_trip(Q5):
    x = Q5(Fraction(7, 25)).with_precision(6)
    y = type(x).from_json(Q5, x.to_json())
    assert y == x and y.precision == x.precision
    assert PadicContext.from_json(Q5.to_json()) == Q5


units = st.integers(min_value=1, max_value=P10 - 1).filter(lambda n: n % 5)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=P10), st.integers(min_value=1, max_value=P10))
def test_valuation_additivity(a, b):
    Q = PadicContext(5, precision=10)
    x, y = Q(a), Q(b)
    if x.is_zero() or y.is_zero():
        return
    prod = x * y
    if not prod.is_zero():
        assert prod.valuation() == x.valuation() + y.valuation()


@settings(max_examples=100, deadline=None)
@given(units, units)
def test_higher_cap_truncates_to_lower(a, b):
    lo, hi = PadicContext(5, precision=6), PadicContext(5, precision=12)
    r_lo = lo(a) * lo(b).inverse() + lo(a)
    r_hi = hi(a) * hi(b).inverse() + hi(a)
    assert r_hi.residue_int() % 5 ** 6 == r_lo.residue_int()


@settings(max_examples=50, deadline=None)
@given(units)
def test_teichmuller_order(a):
    Q = PadicContext(5, precision=10)
    assert teichmuller(Q(a)) ** 4 == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=5 ** 9))
def test_log_exp_inverse(n):
    Q = PadicContext(5, precision=12)
    x = Q(5 * n)
    assert log1(exp1(x)).with_precision(10) == x.with_precision(10)
    y = Q(1 + 5 * n)
    assert exp1(log1(y)).with_precision(10) == y.with_precision(10)


def test_unramified_arithmetic_is_a_field():
    K = unramified_context(5, 3)
    rng = random.Random(3)
    for _ in range(20):
        a = K.from_coeffs([rng.randrange(P10) for _ in range(3)])
        if a.is_zero():
            continue
        assert a * a.inverse() == 1

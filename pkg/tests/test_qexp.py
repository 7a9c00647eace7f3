import json
from fractions import Fraction

import pytest

from heegner_lab import qexp
from heegner_lab.groups import DirichletCharacter
from heegner_lab.padic import PadicContext
from heegner_lab.weight import WeightDisc


@pytest.fixture(scope="module")
def f11():
    return qexp.load_fixture("11a", PadicContext(5, precision=10))


def test_fixture_coefficients():
    ctx = PadicContext(13, precision=10)
    f = qexp.load_fixture("11a", ctx)
    g = qexp.load_fixture("5.4.a", ctx)
    d = qexp.load_fixture("delta", ctx)
    for rec, want in ((f, [1, -2, -1, 2, 1]), (g, [1, -4, 2, 8, -5]), (d, [1, -24, 252, -1472, 4830])):
        assert all((rec.an[n] - w).is_zero() for n, w in enumerate(want, 1))


@pytest.mark.parametrize("name", qexp.FIXTURES)
def test_fixture_invariants(name):
    f = qexp.load_fixture(name, PadicContext(7, precision=8))
    assert f.check_invariants() == []
    assert f.M == 200


def test_invariants_detect_corruption(f11):
    data = f11.to_json()
    data["an"][5] = "7"
    bad = qexp.NewformRecord.from_json(data, f11.ctx)
    assert bad.check_invariants()


def test_json_round_trip(f11, tmp_path):
    path = tmp_path / "f.json"
    path.write_text(json.dumps(f11.to_json()))
    g = qexp.load_newform(str(path), f11.ctx)
    assert g.qexp() == f11.qexp()


def test_hecke_roots_vieta(f11):
    roots = qexp.hecke_roots(f11, 5)
    assert roots.split
    a, b = roots.alpha, roots.beta
    assert (a + b - f11.an[5]).is_zero()
    assert (a * b - 5).is_zero()
    assert a.valuation() == 0 and b.valuation() == 1


def test_hecke_roots_wrong_prime(f11):
    with pytest.raises(ValueError):
        qexp.hecke_roots(f11, 7)


def test_delta_slopes():
    f = qexp.load_fixture("delta", PadicContext(5, precision=20))
    roots = qexp.hecke_roots(f, 5)
    assert (roots.alpha.valuation(), roots.beta.valuation()) == (1, 10)


def test_stabilisation_eigenvector(f11):
    roots = qexp.hecke_roots(f11, 5)
    for alpha in (roots.alpha, roots.beta):
        assert qexp.stabilization_check(f11, 5, alpha)
    with pytest.raises(ValueError):
        qexp.stabilization_check(f11, 5, roots.alpha + 1)


def test_up_vp_and_deplete(f11):
    g = f11.qexp()
    assert qexp.U_p(qexp.V_p(g, 5), 5) == g.truncate(g.M // 5)
    dep = qexp.deplete(g, 5)
    assert qexp.is_depleted(dep, 5)
    assert qexp.deplete(dep, 5) == dep
    assert not qexp.is_depleted(g, 5)


def test_theta_round_trip(f11):
    dep = qexp.deplete(f11.qexp(), 5)
    for t in (1, 2, 3):
        assert qexp.theta_power(qexp.theta_power(dep, t), -t, 5) == dep
    assert qexp.theta(dep) == qexp.theta_power(dep, 1)


def test_negative_theta_needs_depletion(f11):
    with pytest.raises(ValueError):
        qexp.theta_power(f11.qexp(), -1, 5)


def test_padic_theta_power_matches_integer(f11):
    # for t = 4 = 0 + 4 with component 0 mod 4, omega^0 <n>^4 = n^4 only up to omega(n)^4 = 1
    ctx = f11.ctx
    dep = qexp.deplete(f11.qexp(), 5)
    got = qexp.theta_power(dep, ctx(4), component=0)
    assert got == qexp.theta_power(dep, 4)


def test_eisenstein_family_and_twist():
    ctx = PadicContext(5, precision=10)
    U = WeightDisc(ctx, 42, 1)
    F = qexp.eisenstein_family(U, (2, 22), M=30)
    assert F.coherence() == {}
    B = WeightDisc(ctx, 20, 1)
    tw = qexp.family_theta_twist(F, B, 30)
    assert (tw[1].specialize(2, 0) - 1).is_zero()
    assert tw[5].is_zero()
    rep = qexp.family_twist_check(F, B, 0, 30)
    assert all(not v for v in rep.values())


def test_family_rejects_incoherent_expansion():
    ctx = PadicContext(5, precision=10)
    U = WeightDisc(ctx, 42, 1)
    F = qexp.eisenstein_family(U, (2, 22), M=20)
    lam = list(F.lam[1:])
    lam[3] = lam[3].scale(2)
    with pytest.raises(ValueError):
        qexp.FamilyStub(5, F.specs, lam, U)


def test_family_requires_shared_level():
    ctx = PadicContext(5, precision=10)
    e = qexp.eisenstein_record(2, ctx, 20)
    f = qexp.load_fixture("11a", ctx, M=20)
    with pytest.raises(ValueError):
        qexp.FamilyStub(5, [(2, ctx.one(), e), (0, ctx.one(), f)])

from fractions import Fraction

import pytest

from heegner_lab.groups import AbelianGroup, DirichletCharacter, frac_mod1, rou, rou_log, unit_group_mod
from heegner_lab.padic import PadicContext


def test_unit_group_invariants():
    assert unit_group_mod(8).invariants() == [2, 2]
    assert unit_group_mod(13).invariants() == [12]
    assert unit_group_mod(40).invariants() == [2, 2, 4]
    assert unit_group_mod(1).order == 1


def test_dlog_round_trip():
    G = unit_group_mod(63)
    for x in G.elements:
        assert G.from_exponents(G.dlog(x)) == x


def test_characters_are_homomorphisms():
    G = unit_group_mod(21)
    for c in G.characters():
        for x in G.elements[:6]:
            for y in G.elements[:6]:
                lhs = G.char_value(c, G.op(x, y))
                assert lhs == frac_mod1(G.char_value(c, x) + G.char_value(c, y))


def test_bad_group_law_is_detected():
    with pytest.raises(RuntimeError):
        AbelianGroup([0, 1, 2], lambda x, y: 0 if (x, y) != (0, 0) else 1, 0)


def test_dirichlet_basics():
    chars = DirichletCharacter.all_mod(40)
    assert len(chars) == 16
    assert sum(1 for e in chars if e.is_primitive()) == 6
    triv = DirichletCharacter.trivial(40)
    assert triv.is_trivial() and triv.conductor() == 1
    assert triv(5) is None


def test_quadratic_character_mod_3():
    eps = [e for e in DirichletCharacter.all_mod(3) if not e.is_trivial()][0]
    assert eps.order() == 2 and eps.parity() == -1
    assert (eps * eps).is_trivial()
    assert eps.conj() == eps


def test_json_round_trip():
    eps = DirichletCharacter.all_mod(13)[5]
    assert DirichletCharacter.from_json(eps.to_json()) == eps


def test_roots_of_unity():
    Q = PadicContext(13, precision=10)
    z = rou(Q, Fraction(1, 4))
    assert z ** 4 == 1 and not (z ** 2 - 1).is_zero()
    assert rou_log(Q, z, 4) == Fraction(1, 4)
    # compatibility across levels: zeta_12^3 = zeta_4
    assert rou(Q, Fraction(3, 12)) == z
    with pytest.raises(ValueError):
        rou(Q, Fraction(1, 5))

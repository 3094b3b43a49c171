import json

import numpy as np
import pytest

from phigamma import iwasawa as iw, pgmod
from phigamma.errors import (FamilyConstraintViolated, IllDefinedMorphism, InvalidModule, NotInvertible,
                             ParseError, PhiDoesNotCommute, PhiMissing, SemidirectRelationFails,
                             WrongOrder)
from phigamma.homalg import AbMorphism, FinAbGroup

FAMILIES = ["trivial", "gamma_character(1)", "gamma_character:2", "beta_unipotent", "regular",
            "cyclic_quotient"]


def make(gp, G, Bs, F=None, exps=None):
    grp = FinAbGroup(gp.p, exps or (gp.N,) * len(G))
    return pgmod.TorsionPhiGammaModuleSpec(
        gp, grp, AbMorphism(grp, grp, G), tuple(AbMorphism(grp, grp, B) for B in Bs),
        None if F is None else AbMorphism(grp, grp, F))


def test_semidirect_example(gp3):
    B = [[1, 1], [0, 1]]
    pgmod.validate_module(make(gp3, [[4, 0], [0, 1]], [B]))
    with pytest.raises(SemidirectRelationFails):
        pgmod.validate_module(make(gp3, [[1, 0], [0, 1]], [B]))


def test_validation_errors(gp3):
    with pytest.raises(NotInvertible):
        pgmod.validate_module(make(gp3, [[3]], [[[1]]]))
    with pytest.raises(WrongOrder):
        pgmod.validate_module(make(gp3, [[2]], [[[1]]]))     # 2 has order 6 mod 9
    with pytest.raises(PhiDoesNotCommute):
        pgmod.validate_module(make(gp3, [[4, 0], [0, 1]], [np.eye(2, dtype=int)], F=[[0, 1], [1, 0]]))
    with pytest.raises(InvalidModule):
        pgmod.validate_module(make(gp3, [[1]], []))            # wrong number of beta
    with pytest.raises(IllDefinedMorphism):
        make(gp3, [[1, 0], [1, 1]], [np.eye(2, dtype=int)], exps=(1, 2))


def test_is_etale(gp3):
    grp = FinAbGroup(3, (2,))
    M = pgmod.gamma_character(gp3)
    assert pgmod.is_etale(M)
    assert pgmod.is_etale(pgmod.gamma_character(gp3, phi_scalar=4))
    bad = pgmod.TorsionPhiGammaModuleSpec(gp3, grp, M.gamma, M.beta, AbMorphism(grp, grp, [[3]]))
    assert not pgmod.is_etale(bad)
    with pytest.raises(PhiMissing):
        pgmod.is_etale(pgmod.TorsionPhiGammaModuleSpec(gp3, grp, M.gamma, M.beta))


def test_gamma_character_example(gp3):
    M = pgmod.builtin_family(gp3, "gamma_character(1)")
    assert M.group == FinAbGroup(3, (2,)) and M.gamma.matrix[0, 0] == 4


def test_beta_unipotent_constraint():
    with pytest.raises(FamilyConstraintViolated):
        pgmod.beta_unipotent(iw.validate_params(3, 1, 1, 2, 4))
    with pytest.raises(FamilyConstraintViolated):
        pgmod.beta_unipotent(iw.validate_params(3, 0, 2, 2, 4))


def test_unknown_family(gp3):
    with pytest.raises(FamilyConstraintViolated):
        pgmod.builtin_family(gp3, "nope")


@pytest.mark.parametrize("name", FAMILIES)
def test_families_validate_and_round_trip(grid_point, name):
    try:
        M = pgmod.builtin_family(grid_point, name, seed=3)
    except FamilyConstraintViolated:
        assert name == "beta_unipotent"
        return
    pgmod.validate_module(M)
    text = pgmod.serialize_spec(M)
    back = pgmod.parse_spec(text)
    assert back == M
    assert pgmod.serialize_spec(back) == text


def test_regular_module_matches_multiplication_table(gp3):
    M = pgmod.regular_module(gp3)
    for k in range(0, gp3.size, 7):
        g = gp3.element(k)
        for h in (iw.GroupElement(1, (0,)), iw.GroupElement(0, (1,))):
            col = M.group_action(h).matrix[:, k]
            target = gp3.index(iw.elem_mul(gp3, h, g))
            assert col[target] == 1 and col.sum() == 1


def test_seed_determinism(gp3):
    assert pgmod.regular_module(gp3, 5) == pgmod.regular_module(gp3, 5)
    assert pgmod.cyclic_quotient(gp3, 5) == pgmod.cyclic_quotient(gp3, 5)


def _doc(gp3):
    return json.loads(pgmod.serialize_spec(pgmod.beta_unipotent(gp3)))


def test_parse_missing_field(gp3):
    d = _doc(gp3)
    del d["p"]
    with pytest.raises(ParseError):
        pgmod.parse_spec(d)


def test_parse_wrong_row_count(gp3):
    d = _doc(gp3)
    d["gamma"] = d["gamma"][:1]
    with pytest.raises(ParseError) as e:
        pgmod.parse_spec(d)
    assert "gamma" in str(e.value)


def test_parse_unknown_field_and_types(gp3):
    d = _doc(gp3)
    d["extra"] = 1
    with pytest.raises(ParseError):
        pgmod.parse_spec(d)
    d = _doc(gp3)
    d["N"] = "2"
    with pytest.raises(ParseError):
        pgmod.parse_spec(d)
    with pytest.raises(ParseError) as e:
        pgmod.parse_spec('{"p": 3,,}')
    assert "line 1" in str(e.value)


def test_parse_field_order_irrelevant(gp3):
    d = _doc(gp3)
    shuffled = dict(reversed(list(d.items())))
    assert pgmod.parse_spec(shuffled) == pgmod.parse_spec(d)


def test_parse_reduces_entries(gp3):
    d = _doc(gp3)
    d["gamma"] = [[13, 9], [0, 10]]
    assert pgmod.parse_spec(d) == pgmod.beta_unipotent(gp3)

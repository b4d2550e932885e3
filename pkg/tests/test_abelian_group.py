"""Tests for finite abelian groups, characters, subgroups and quotients."""

import pytest

from src.supergrade.abelian_group import (
    FiniteAbelianGroup,
    GroupMismatchError,
    GroupParseError,
    Subgroup,
    SubgroupError,
    annihilator,
    character_annihilator,
    char_eval,
    generated_subgroup,
    quotient,
    subgroups,
    supports_generate,
)
from src.supergrade.cyclotomic import CycScalar, root_of_unity


@pytest.mark.parametrize("text,factors", [
    ("Z2", (2,)),
    ("Z6", (6,)),
    ("Z2xZ3", (6,)),
    ("Z4xZ2", (2, 4)),
    ("z2 x z2 x z4", (2, 2, 4)),
    ("1", ()),
    ("trivial", ()),
])
def test_parse_normalizes_invariant_factors(text, factors):
    """Test parsing to invariant-factor form."""
    assert FiniteAbelianGroup.parse(text).invariant_factors == factors


def test_parse_rejects_garbage():
    """Test malformed group text."""
    with pytest.raises(GroupParseError):
        FiniteAbelianGroup.parse("Z2+Z4")
    g = FiniteAbelianGroup.parse("Z2xZ4")
    with pytest.raises(GroupParseError):
        g.parse_element("(1)")
    with pytest.raises(GroupParseError):
        g.parse_elements("0,1")


def test_group_invariants():
    """Test order, exponent and scalar order."""
    g = FiniteAbelianGroup.parse("Z2xZ4")
    assert g.order == 8
    assert g.exponent == 4
    assert g.rank == 2
    assert g.cyclotomic_order() == 4
    assert FiniteAbelianGroup.parse("Z3").cyclotomic_order() == 12
    assert FiniteAbelianGroup.parse("1").cyclotomic_order() == 4
    assert g.render() == "Z2xZ4"


def test_elements_and_law():
    """Test element parsing, multiplication, inverses and orders."""
    g = FiniteAbelianGroup.parse("Z2xZ4")
    a = g.parse_element("(1,3)")
    b = g.parse_element("(1,2)")
    assert (a * b).render() == "(0,1)"
    assert (a * a.inverse()).is_identity
    assert a.order == 4
    assert g.parse_element("(1,0)").order == 2
    assert len(g.elements()) == 8
    assert g.elements()[0] == g.identity()
    z4 = FiniteAbelianGroup.parse("Z4")
    assert [e.render() for e in z4.parse_elements("0,2,1,3")] == ["(0)", "(2)", "(1)", "(3)"]
    with pytest.raises(GroupMismatchError):
        a * z4.element(1)


def test_character_values():
    """Test chi(g) as exact roots of unity."""
    z4 = FiniteAbelianGroup.parse("Z4")
    chi = z4.character(1)
    assert char_eval(chi, z4.element(1)) == root_of_unity(1, 4)
    assert chi(z4.element(2)) == -1
    assert chi(z4.element(1), 8) == root_of_unity(2, 8)


@pytest.mark.parametrize("spec", ["Z2xZ2", "Z3", "Z2xZ4"])
def test_character_orthogonality(spec):
    """Test that summing a nontrivial character over the group gives zero."""
    g = FiniteAbelianGroup.parse(spec)
    m = g.cyclotomic_order()
    for chi in g.characters():
        total = sum((chi(x) for x in g.elements()), CycScalar.zero(m))
        assert total == (g.order if chi.is_trivial else 0)


def test_subgroup_counts():
    """Test the number of subgroups of small groups."""
    assert len(subgroups(FiniteAbelianGroup.parse("Z4"))) == 3
    assert len(subgroups(FiniteAbelianGroup.parse("Z2xZ2"))) == 5
    assert len(subgroups(FiniteAbelianGroup.parse("Z2xZ4"))) == 8


def test_subgroup_must_be_closed():
    """Test that a non-closed element set is rejected."""
    z4 = FiniteAbelianGroup.parse("Z4")
    with pytest.raises(SubgroupError):
        Subgroup(z4, frozenset({z4.identity(), z4.element(1)}))


def test_generation():
    """Test generated subgroups and support generation."""
    g = FiniteAbelianGroup.parse("Z2xZ2")
    assert generated_subgroup(g, [g.element(1, 1)]).order == 2
    assert not supports_generate(g, [g.element(1, 0)])
    assert supports_generate(g, [g.element(1, 0), g.element(0, 1)])


@pytest.mark.parametrize("spec", ["Z4", "Z2xZ2", "Z2xZ4"])
def test_double_annihilator(spec):
    """Test that the annihilator of the character annihilator of H is H."""
    g = FiniteAbelianGroup.parse(spec)
    for sub in subgroups(g):
        chars = character_annihilator(sub)
        assert len(chars) * sub.order == g.order
        assert annihilator(chars, g).elements == sub.elements


@pytest.mark.parametrize("spec,gens,factors", [
    ("Z4", [(2,)], (2,)),
    ("Z2xZ4", [(0, 2)], (2, 2)),
    ("Z2xZ4", [(1, 0)], (4,)),
    ("Z2xZ4", [(1, 2)], (4,)),
])
def test_quotient_normal_form(spec, gens, factors):
    """Test the invariant factors of G/H."""
    g = FiniteAbelianGroup.parse(spec)
    sub = generated_subgroup(g, [g.element(*e) for e in gens])
    q, project = quotient(g, sub)
    assert q.order == g.order // sub.order
    assert project(g.identity()) == 0
    target, mapping = q.normalized()
    assert target.invariant_factors == factors
    assert len(set(mapping.values())) == q.order


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

"""Tests for Type A/Q gradings, relation checks, enumeration and bounded scans."""

from pathlib import Path

import msgspec
import pytest

from src.supergrade.abelian_group import FiniteAbelianGroup
from src.supergrade.classify import (
    BoundsExceededError,
    DistinctnessError,
    SpecError,
    TypeASpec,
    TypeQSpec,
    VerificationError,
    build_type_A,
    build_type_Q,
    canonicalize,
    enumerate_admissible,
    falsify_lemma51,
    falsify_thm43,
    lemma65_check,
    lemma65_survey,
    merge_enumerations,
    osp_block_space,
    partition_ranges,
    thm52_admissible,
    thm53_admissible,
    trp_block_space,
    verify_thm52,
    verify_thm53,
    verify_thm68,
)
from src.supergrade.exact_linalg import span_equal
from src.supergrade.grading import ElementarySpec, PauliSpec, elementary_grading
from src.supergrade.schemas import Bounds, EvidenceKind, Verdict
from src.supergrade.superinvolution import H_space, K_space, Superinvolution
from src.supergrade.supermatrix import SuperSignature

FIXTURES = Path(__file__).parent / "fixtures"
Z2 = FiniteAbelianGroup.parse("Z2")
Z4 = FiniteAbelianGroup.parse("Z4")
Z2Z2 = FiniteAbelianGroup.parse("Z2xZ2")


@pytest.fixture(scope="module")
def golden_counts():
    """Reference enumeration counts."""
    return msgspec.json.decode((FIXTURES / "golden_counts.json").read_bytes())


# ========== Specs and constructions ==========

def test_type_a_spec_validation():
    """Test distinctness and block-size checks."""
    g = Z2Z2.parse_elements("(0,0),(0,0)")
    with pytest.raises(DistinctnessError):
        TypeASpec(Z2Z2, g, (1, 1), (0, 0))
    with pytest.raises(SpecError):
        TypeASpec(Z2Z2, Z2Z2.parse_elements("(0,0),(1,0)"), (1, 0), (0, 0))
    with pytest.raises(SpecError):
        TypeASpec(Z2Z2, Z2Z2.parse_elements("(0,0)"), (1, 1), (0, 0))


def test_build_type_a():
    """Test the Type A grading and its even-part ideals."""
    spec = TypeASpec(Z2Z2, Z2Z2.parse_elements("(0,0),(1,0)"), (1, 1), (1, 0))
    grading, details = build_type_A(spec)
    assert grading.signature == SuperSignature(2, 1)
    assert details["theta"] == "(0,0),(1,0),(0,0)"
    assert details["theta_interleaved"] == "(0,0),(0,0),(1,0)"
    assert details["parities_interleaved"] == [0, 1, 0]
    assert details["ideals_graded"] == [True, True]
    assert details["even_dim"] == details["even_dim_expected"] == 5
    assert not details["support_generates"]


def test_type_q_spec_validation():
    """Test the order of h and the collision rule."""
    with pytest.raises(SpecError):
        TypeQSpec(Z4, Z4.element(1), Z4.parse_elements("0"), (1,))
    with pytest.raises(SpecError):
        TypeQSpec(Z2, Z2.element(1), Z2.parse_elements("0,1"), (1, 1))
    with pytest.raises(SpecError):
        TypeQSpec(Z2, Z2.element(1), Z2.parse_elements("0"), (0,))


def test_build_type_q():
    """Test the minimal Type Q grading on M_(1,1)."""
    spec = TypeQSpec(Z2, Z2.element(1), Z2.parse_elements("0"), (1,))
    grading, details = build_type_Q(spec)
    assert grading.signature == SuperSignature(1, 1)
    assert details["theta_q_frame"] == "(0),(1)"
    assert details["dimensions"] == {"(0)": 2, "(1)": 2}
    assert details["ideals_graded"] == [False, False]
    assert details["super_compatible"]
    assert (details["even_dim"], details["odd_dim"]) == (2, 2)


def test_canonicalize_type_a():
    """Test the reordering of an interleaved Type A tuple."""
    spec = TypeASpec(Z2Z2, Z2Z2.parse_elements("(0,0),(1,0)"), (1, 1), (1, 0))
    form = canonicalize(spec)
    assert form.permutation == (0, 2, 1)
    assert form.theta_after == spec.example_form()
    assert not form.is_identity
    assert form.preserves_dimensions


def test_canonicalize_type_q():
    """Test the reordering of an interleaved Type Q tuple into the Q frame."""
    spec = TypeQSpec(Z4, Z4.element(2), Z4.parse_elements("0,1"), (1, 1))
    form = canonicalize(spec)
    assert [g.render() for g in form.theta_after] == ["(0)", "(1)", "(2)", "(3)"]
    assert form.permutation == (0, 2, 1, 3)


# ========== Relations ==========

def test_paired_relation():
    """Test the paired product relation and its input checks."""
    assert thm52_admissible(Z2Z2.parse_elements("(0,0),(1,1),(0,1),(1,0)"), (1, 1, 0, 0), (0, 0, 1, 1))
    assert not thm52_admissible(Z4.parse_elements("0,2,1,3"), (1, 1, 0, 0), (0, 0, 1, 1))
    assert not thm52_admissible(Z4.parse_elements("0,2,1,3"), (1, 2, 0, 0), (0, 0, 1, 1))
    with pytest.raises(SpecError):
        thm52_admissible(Z4.parse_elements("0,1,2"), (1, 1, 1), (0, 0, 0))
    with pytest.raises(DistinctnessError):
        thm52_admissible(Z4.parse_elements("0,0"), (1, 1), (0, 0))


def test_verify_paired_osp_admissible():
    """Test an admissible Z2xZ2 instance: graded, with H and K in block form."""
    result = verify_thm52(Z2Z2, Z2Z2.parse_elements("(0,0),(1,1),(0,1),(1,0)"), (1, 1, 0, 0), (0, 0, 1, 1))
    assert result.claim == "Thm5.2"
    assert result.verdict == Verdict.PASS
    assert result.details["admissible"] and result.details["graded"]
    assert result.details["H_block_form"] and result.details["K_block_form"]
    assert result.details["H_dim"] + result.details["K_dim"] == 16


def test_verify_paired_osp_rejected():
    """Test a non-admissible Z4 instance: not graded, and the verdicts agree."""
    result = verify_thm52(Z4, Z4.parse_elements("0,2,1,3"), (1, 1, 0, 0), (0, 0, 1, 1))
    assert result.passed
    assert not result.details["admissible"]
    assert not result.details["graded"]
    assert result.witnesses


def test_verify_paired_osp_needs_paired_sizes():
    """Test that unpaired sizes are refused."""
    with pytest.raises(SpecError):
        verify_thm52(Z4, Z4.parse_elements("0,2,1,3"), (1, 2, 0, 0), (0, 0, 1, 1))


@pytest.mark.parametrize("p,q", [
    ((1, 1, 0, 0), (1, 1, 0, 0)),
    ((0, 0, 1, 1), (0, 0, 0, 0)),
    ((1, 1, -1, -1), (0, 0, 2, 2)),
])
def test_paired_relation_rejects_empty_blocks(p, q):
    """Test that a g_i with p_i + q_i = 0 is refused instead of vanishing from theta."""
    elements = Z4.parse_elements("0,2,1,3")
    with pytest.raises(SpecError):
        thm52_admissible(elements, p, q)
    with pytest.raises(SpecError):
        verify_thm52(Z4, elements, p, q)


def test_trp_relation_rejects_empty_blocks():
    """Test that trp block sizes must all be positive."""
    with pytest.raises(SpecError):
        verify_thm53(Z4, Z4.parse_elements("0,1"), (2, 1), (1, 0))


@pytest.mark.parametrize("perm,admissible", [((2, 1), True), ((1, 2), False)])
def test_verify_trp(perm, admissible):
    """Test the permutation relation for trp on Z4."""
    elements = Z4.parse_elements("0,1")
    assert thm53_admissible(elements, perm) == admissible
    result = verify_thm53(Z4, elements, perm)
    assert result.claim == "Thm5.3"
    assert result.passed
    assert result.details["graded"] == admissible


def test_trp_relation_rejects_bad_permutation():
    """Test that the permutation must be a permutation of 1..r."""
    with pytest.raises(SpecError):
        thm53_admissible(Z4.parse_elements("0,1"), (1, 1))


@pytest.mark.parametrize("sig", [SuperSignature(1, 2), SuperSignature(2, 2), SuperSignature(0, 2)])
def test_osp_block_space_matches_eigenspaces(sig):
    """Test the block formula against the eigenspaces of the canonical osp."""
    inv = Superinvolution.osp(sig, 4)
    assert span_equal(osp_block_space(inv.phi, 1), H_space(inv))
    assert span_equal(osp_block_space(inv.phi, -1), K_space(inv))


def test_trp_block_space_matches_eigenspaces():
    """Test the trp block formula against the eigenspaces."""
    inv = Superinvolution.trp(SuperSignature(2, 2), 4)
    assert span_equal(trp_block_space(2, 1, 4), H_space(inv))
    assert span_equal(trp_block_space(2, -1, 4), K_space(inv))


# ========== Enumeration ==========

@pytest.mark.parametrize("key,group,kind", [
    ("Z2_osp_2_2", "Z2", "osp"),
    ("Z4_trp_2_2", "Z4", "trp"),
])
def test_enumeration_golden_counts(golden_counts, key, group, kind):
    """Test raw and deduplicated admissible counts on M_(2,2)."""
    result = enumerate_admissible(FiniteAbelianGroup.parse(group), 2, 2, kind)
    assert result.raw_count == golden_counts[key]["raw"]
    assert result.dedup_count == golden_counts[key]["dedup"]
    assert not result.disagreements
    claim = result.to_claim()
    assert claim.passed
    assert claim.claim == ("Thm5.2" if kind == "osp" else "Thm5.3")


def test_enumeration_in_parts_merges_to_whole():
    """Test that disjoint slices merge to the full scan."""
    total = 2 ** 4
    parts = [enumerate_admissible(Z2, 2, 2, "osp", index_range=r) for r in partition_ranges(total, 3)]
    merged = merge_enumerations(parts)
    assert merged.scanned == total
    assert merged.raw_count == 8
    assert merged.dedup_count == 5
    assert merged.index_range == (0, total)


KLEIN_SIGNATURES = [
    ("osp", 2, 0), ("osp", 0, 2), ("osp", 2, 2), ("osp", 4, 0), ("osp", 0, 4),
    ("osp", 4, 2), ("osp", 2, 4), ("osp", 6, 0), ("osp", 0, 6),
    ("trp", 1, 1), ("trp", 2, 2), ("trp", 3, 3),
]


@pytest.mark.parametrize("kind,n,m", KLEIN_SIGNATURES)
def test_enumeration_over_klein_four_group(kind, n, m):
    """Test relation against direct gradedness over Z2xZ2 for every scannable signature with n+m <= 6."""
    result = enumerate_admissible(Z2Z2, n, m, kind)
    pairs = (n + m) // 2
    assert result.scanned == 4 ** (n + m)
    assert not result.disagreements
    # one free element per pair plus the common product
    assert result.raw_count == 4 ** (pairs + 1)
    assert 0 < result.dedup_count <= result.raw_count
    claim = result.to_claim()
    assert claim.passed
    assert claim.details["relation_form_discrepancies"] == result.discrepancies


def test_partition_ranges():
    """Test near-equal contiguous ranges."""
    assert partition_ranges(10, 3) == [(0, 4), (4, 7), (7, 10)]
    with pytest.raises(SpecError):
        partition_ranges(10, 0)


def test_merge_rejects_overlaps():
    """Test that overlapping slices cannot be merged."""
    a = enumerate_admissible(Z2, 2, 2, "osp", index_range=(0, 10))
    b = enumerate_admissible(Z2, 2, 2, "osp", index_range=(5, 16))
    with pytest.raises(SpecError):
        merge_enumerations([a, b])


def test_enumeration_bounds_and_kinds():
    """Test bound enforcement and the signature each involution needs."""
    with pytest.raises(BoundsExceededError):
        enumerate_admissible(Z4, 2, 2, "trp", Bounds(max_candidates=10))
    with pytest.raises(BoundsExceededError):
        enumerate_admissible(Z4, 2, 2, "trp", Bounds(max_group_order=2))
    with pytest.raises(SpecError):
        enumerate_admissible(Z2, 1, 2, "osp")
    with pytest.raises(SpecError):
        enumerate_admissible(Z2, 1, 2, "trp")
    with pytest.raises(SpecError):
        enumerate_admissible(Z2, 2, 2, "exchange")


# ========== Bounded scans ==========

def test_type_q_has_no_graded_superinvolution():
    """Test the bounded scan on the minimal Type Q grading."""
    spec = TypeQSpec(Z2, Z2.element(1), Z2.parse_elements("0"), (1,))
    result = falsify_lemma51(spec)
    assert result.claim == "Lemma5.1"
    assert result.passed
    assert result.evidence_kind == EvidenceKind.BOUNDED
    assert result.family_size == 64
    assert result.details["compatible_candidates"] == 0
    assert result.details["trp_witness"] is not None


def test_pauli_fine_grading_has_no_graded_superinvolution():
    """Test the bounded scan on the Pauli grading of M_(1,1)."""
    result = falsify_thm43(1)
    assert result.claim == "Thm4.3"
    assert result.passed
    assert result.family_size == 64
    assert result.details["identity_component_dim"] == 1
    assert result.details["super_compatible"]
    assert result.details["trp_violation"] is not None
    with pytest.raises(SpecError):
        falsify_thm43(0)


def test_bounded_scan_respects_candidate_bound():
    """Test that a family larger than the bound is refused."""
    with pytest.raises(BoundsExceededError):
        falsify_thm43(1, Bounds(max_candidates=10))


# ========== Tensor instances ==========

def test_tensor_instance_checks():
    """Test every stability and centralizer check for C ⊗ M_2."""
    elem = ElementarySpec(Z2Z2, Z2Z2.parse_elements("(0,0),(0,0),(0,0)"), SuperSignature(1, 2))
    inv_c = Superinvolution.osp(SuperSignature(1, 2), 4)
    result = verify_thm68(elem, inv_c, PauliSpec(1))
    assert result.claim == "Thm6.8"
    assert result.passed, result.witnesses
    assert all(result.details.values())


def test_tensor_instance_needs_graded_factor():
    """Test that a non-graded involution on C is refused."""
    elem = ElementarySpec(Z2Z2, Z2Z2.parse_elements("(0,0),(1,0),(0,1)"), SuperSignature(1, 2))
    with pytest.raises(VerificationError):
        verify_thm68(elem, Superinvolution.osp(SuperSignature(1, 2), 4), PauliSpec(1))


# ========== Two-summand identity components ==========

def test_two_summand_check():
    """Test A_1 R A_2 inside a single nontrivial component."""
    grading = elementary_grading(Z2, Z2.parse_elements("0,1"), SuperSignature(1, 1))
    result = lemma65_check(grading)
    assert result.passed
    assert result.witnesses == ["(1)"]
    assert result.details["A1RA2_dim"] == 1
    with pytest.raises(SpecError):
        lemma65_check(elementary_grading(Z2, Z2.parse_elements("0,0"), SuperSignature(1, 1)))


def test_two_summand_survey():
    """Test the survey over Z2 up to size 3."""
    result = lemma65_survey(Z2, 3)
    assert result.passed
    assert result.details["checked"] == 30


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

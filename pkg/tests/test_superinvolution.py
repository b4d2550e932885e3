"""Tests for superinvolutions, their eigenspaces and graded compatibility."""

import pytest

from src.supergrade.abelian_group import FiniteAbelianGroup
from src.supergrade.exact_linalg import span_equal
from src.supergrade.grading import elementary_grading, pauli_fine_grading
from src.supergrade.superinvolution import (
    InvolutionError,
    LinearMap,
    SingularPhiError,
    Superinvolution,
    UnpairedBlocksError,
    H_space,
    K_space,
    antiauto_containment,
    conjugation_family,
    graded_on_theta,
    graded_violation,
    is_graded,
    is_superinvolution,
    paired_block_phi,
    parity_automorphism,
    restriction_is_involution,
    symmetrized_space,
    tensor_involution,
    thm52_phi,
    transpose_map,
)
from src.supergrade.supermatrix import SignatureError, SuperMatrix, SuperSignature

ORDER = 4
Z2 = FiniteAbelianGroup.parse("Z2")


@pytest.mark.parametrize("n,m,h_dim,k_dim", [
    (1, 2, 4, 5),
    (2, 2, 8, 8),
    (0, 2, 1, 3),
    (3, 0, 6, 3),
])
def test_osp_eigenspaces(n, m, h_dim, k_dim):
    """Test dim H and dim K for the canonical orthosymplectic superinvolution."""
    inv = Superinvolution.osp(SuperSignature(n, m), ORDER)
    assert H_space(inv).dim == h_dim
    assert K_space(inv).dim == k_dim
    assert restriction_is_involution(inv.map)
    assert inv.map.is_monomial()


@pytest.mark.parametrize("kind,n,m,h_dim,k_dim", [
    ("osp", 3, 2, 13, 12),
    ("osp", 2, 4, 17, 19),
    ("trp", 3, 3, 18, 18),
])
def test_axioms_on_larger_signatures(kind, n, m, h_dim, k_dim):
    """Test parity, order 2 and the signed antimultiplicativity beyond M_(2,2)."""
    sig = SuperSignature(n, m)
    inv = Superinvolution.osp(sig, ORDER) if kind == "osp" else Superinvolution.trp(sig, ORDER)
    check = is_superinvolution(inv.map)
    assert check, check.reason
    assert restriction_is_involution(inv.map)
    assert H_space(inv).dim == h_dim
    assert K_space(inv).dim == k_dim
    assert span_equal(symmetrized_space(inv, 1), H_space(inv))


def test_osp_needs_even_odd_block():
    """Test that osp is refused for odd m."""
    with pytest.raises(InvolutionError):
        Superinvolution.osp(SuperSignature(1, 1), ORDER)


@pytest.mark.parametrize("n", [1, 2])
def test_trp_eigenspaces(n):
    """Test dim H = dim K = 2n^2 for the transpose superinvolution."""
    inv = Superinvolution.trp(SuperSignature(n, n), ORDER)
    assert H_space(inv).dim == 2 * n * n
    assert K_space(inv).dim == 2 * n * n
    assert is_superinvolution(inv.map)


def test_trp_needs_square_blocks():
    """Test that trp needs n = m."""
    with pytest.raises(SignatureError):
        Superinvolution.trp(SuperSignature(1, 2), ORDER)


def test_trp_block_action():
    """Test [[A, B], [C, D]] -> [[D^t, -B^t], [C^t, A^t]]."""
    sig = SuperSignature(1, 1)
    inv = Superinvolution.trp(sig, ORDER)
    x = SuperMatrix.from_rows(sig, [[1, 2], [3, 4]], ORDER)
    assert inv(x) == SuperMatrix.from_rows(sig, [[4, -2], [3, 1]], ORDER)


def test_symmetrized_spaces_match_eigenspaces():
    """Test span{E + E*} = H and span{E - E*} = K."""
    for inv in (Superinvolution.osp(SuperSignature(1, 2), ORDER), Superinvolution.trp(SuperSignature(2, 2), ORDER)):
        assert span_equal(symmetrized_space(inv, 1), H_space(inv))
        assert span_equal(symmetrized_space(inv, -1), K_space(inv))


def test_axiom_check_rejects_non_superinvolutions():
    """Test the axiom check on an automorphism and on the plain transpose of M_(1,1)."""
    sig = SuperSignature(1, 1)
    check = is_superinvolution(parity_automorphism(sig, ORDER))
    assert not check
    assert check.reason == "antimultiplicative"
    plain = LinearMap(sig, ORDER, transpose_map(2, ORDER).images)
    assert not is_superinvolution(plain)
    assert is_superinvolution(transpose_map(2, ORDER))


def test_singular_phi():
    """Test that a singular Phi is refused."""
    with pytest.raises(SingularPhiError):
        Superinvolution.from_phi(SuperMatrix.zero(SuperSignature(1, 2), ORDER))


def test_paired_block_phi():
    """Test the paired antidiagonal Phi and its pairing checks."""
    phi = paired_block_phi((1, 1), (1, 1), ORDER)
    assert phi == SuperMatrix.from_rows(SuperSignature(2, 2), [
        [0, 1, 0, 0],
        [1, 0, 0, 0],
        [0, 0, 0, 1],
        [0, 0, -1, 0],
    ], ORDER)
    inv = thm52_phi((1, 1), (1, 1), ORDER)
    assert inv.signature == SuperSignature(2, 2)
    with pytest.raises(UnpairedBlocksError):
        paired_block_phi((1, 2), (1, 1), ORDER)
    with pytest.raises(UnpairedBlocksError):
        paired_block_phi((1,), (), ORDER)


def test_exchange_superinvolution():
    """Test the swap superinvolution on the doubled algebra."""
    inv = Superinvolution.exchange(SuperSignature(1, 1), ORDER)
    assert inv.signature == SuperSignature(2, 2)
    assert H_space(inv).dim + K_space(inv).dim == 16


def test_tensor_involution():
    """Test Phi ⊗ I_d on C ⊗ M_d."""
    inv = Superinvolution.osp(SuperSignature(1, 2), ORDER)
    big = tensor_involution(inv, 2)
    assert big.signature == SuperSignature(2, 4)
    assert H_space(big).dim == H_space(inv).dim * 3 + K_space(inv).dim * 1


@pytest.mark.parametrize("text,graded", [
    ("0,1,1,0", True),
    ("1,1,0,0", True),
    ("0,0,0,1", False),
])
def test_trp_gradedness_on_theta(text, graded):
    """Test trp on M_(2,2) is graded iff theta_a theta_(a+2) is constant."""
    sig = SuperSignature(2, 2)
    inv = Superinvolution.trp(sig, ORDER)
    theta = Z2.parse_elements(text)
    grading = elementary_grading(Z2, theta, sig)
    assert graded_on_theta(inv, theta) == graded
    assert is_graded(inv, grading) == graded
    assert (graded_violation(inv, grading) is None) == graded


def test_transpose_is_graded_for_pauli():
    """Test that the transpose preserves the Pauli grading."""
    grading = pauli_fine_grading(2)
    assert is_graded(transpose_map(4, ORDER), grading)


def test_antiauto_containment():
    """Test phi(x R y) ⊆ phi(y) R phi(x)."""
    sig = SuperSignature(1, 2)
    inv = Superinvolution.osp(sig, ORDER)
    ident = SuperMatrix.identity(sig, ORDER)
    unit = SuperMatrix.unit(sig, 0, 0, ORDER)
    assert antiauto_containment(inv, ident, ident)
    assert antiauto_containment(inv, unit, ident)


def test_conjugation_family_size():
    """Test the bounded conjugation family on M_(1,1)."""
    family = conjugation_family(SuperSignature(1, 1), ORDER)
    assert len(family) == 64
    assert sum(1 for member in family if member.form == "trp") == 32
    with pytest.raises(InvolutionError):
        conjugation_family(SuperSignature(1, 1), 6)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

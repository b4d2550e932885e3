"""Graded Jordan and Lie superalgebras carried by H(R, *) and K(R, *).

A structure is a carrier subspace of a graded M_{n,m} together with the product
it is closed under. The grading induced on the carrier is J_g = J ∩ R_g; it is
total exactly when the superinvolution is graded.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .abelian_group import GroupElement
from .classify import trp_block_space
from .errors import SupergradeError
from .exact_linalg import Subspace, intersect, span_equal, subspace_sum
from .grading import Grading, PauliSpec, build_grading, tensor_grading
from .schemas import ClaimResult
from .superinvolution import (
    H_space,
    K_space,
    Superinvolution,
    graded_violation,
    is_graded,
    tensor_involution,
    transpose_map,
)
from .supermatrix import (
    ProductRule,
    SuperAlgebraView,
    SuperMatrix,
    SuperSignature,
    kron,
    parity_subspace,
    supercommutator,
)

logger = logging.getLogger(__name__)


class StructureError(SupergradeError):
    """A structure cannot be built on the given data."""
    pass


class StructureKind(str, Enum):
    OSP_JORDAN = "osp-jordan"
    P_JORDAN = "p-jordan"
    B_LIE = "b-lie"


_CLAIMS = {
    StructureKind.OSP_JORDAN: "Thm7.2",
    StructureKind.P_JORDAN: "Thm7.3",
    StructureKind.B_LIE: "Thm7.4",
}


@dataclass
class InducedGrading:
    """Components J ∩ R_g and whether they add up to J."""
    components: dict[GroupElement, Subspace]
    carrier_dim: int

    @property
    def total_dim(self) -> int:
        return sum(s.dim for s in self.components.values())

    @property
    def is_total(self) -> bool:
        return self.total_dim == self.carrier_dim

    @property
    def deficit(self) -> int:
        return self.carrier_dim - self.total_dim


@dataclass
class GradedSuperStructure:
    """H or K of a graded superinvolution, with the product it carries."""
    kind: StructureKind
    grading: Grading
    involution: Superinvolution
    carrier: Subspace
    rule: ProductRule
    label: str = ""
    details: dict = field(default_factory=dict)

    @property
    def signature(self) -> SuperSignature:
        return self.grading.signature

    @property
    def dim(self) -> int:
        return self.carrier.dim

    @property
    def view(self) -> SuperAlgebraView:
        return SuperAlgebraView(self.signature, self.carrier, self.rule, self.label)

    def closure_violation(self) -> Optional[tuple[int, int]]:
        return self.view.closure_violation()

    def parity_dims(self) -> tuple[int, int]:
        view = self.view
        return view.even_subspace().dim, view.odd_subspace().dim


def _check_graded(inv: Superinvolution, grading: Grading) -> None:
    if inv.signature != grading.signature:
        raise StructureError(f"Involution on ({inv.signature}) and grading on ({grading.signature}) differ")
    bad = graded_violation(inv, grading)
    if bad is not None:
        raise StructureError(f"{inv.label} is not graded: component {bad.render()} is not stable")


def make_structure(
    kind: StructureKind,
    inv: Superinvolution,
    grading: Grading,
    require_graded: bool = True,
) -> GradedSuperStructure:
    """H with the Jordan superproduct (Jordan kinds) or K with the supercommutator (Lie kind).

    Raises:
        StructureError: If inv is not graded (unless require_graded is False) or the carrier is not closed
    """
    if require_graded:
        _check_graded(inv, grading)
    if kind == StructureKind.B_LIE:
        carrier, rule = K_space(inv), ProductRule.LIE_SUPER
    else:
        carrier, rule = H_space(inv), ProductRule.JORDAN_SUPER
    structure = GradedSuperStructure(kind, grading, inv, carrier, rule, label=f"{kind.value}({grading.signature})")
    bad = structure.closure_violation()
    if bad is not None:
        raise StructureError(f"{structure.label} is not closed: basis pair {bad}")
    structure.details["closed"] = True
    logger.info(f"Built {structure.label} of dimension {structure.dim}")
    return structure


def structure_signature(kind: StructureKind, n: int, m: int = 0) -> SuperSignature:
    """Ambient signature of a structure: (n, 2m) for osp Jordan, (n, n) for P(n), (2n+1, 2m) for B(n,m).

    Raises:
        StructureError: If n or m is negative or the signature would be empty
    """
    if n < 0 or m < 0:
        raise StructureError(f"{kind.value} needs n, m >= 0, got n={n} m={m}")
    if kind == StructureKind.B_LIE:
        return SuperSignature(2 * n + 1, 2 * m)
    if kind == StructureKind.P_JORDAN:
        if n < 1:
            raise StructureError(f"P(n) needs n >= 1, got n={n}")
        return SuperSignature(n, n)
    if n + m < 1:
        raise StructureError("osp Jordan superalgebra needs n + m >= 1")
    return SuperSignature(n, 2 * m)


def structure_parameters(kind: StructureKind, sig: SuperSignature) -> tuple[int, int]:
    """(n, m) with structure_signature(kind, n, m) == sig.

    Raises:
        StructureError: If no such (n, m) exists
    """
    if kind == StructureKind.B_LIE:
        if sig.n % 2 != 1 or sig.m % 2:
            raise StructureError(f"B(n,m) lives on M_(2n+1,2m), got ({sig})")
        return (sig.n - 1) // 2, sig.m // 2
    if kind == StructureKind.P_JORDAN:
        if sig.n != sig.m:
            raise StructureError(f"P(n) lives on M_(n,n), got ({sig})")
        return sig.n, sig.n
    if sig.m % 2:
        raise StructureError(f"osp Jordan superalgebra needs an even odd-block size, got ({sig})")
    return sig.n, sig.m // 2


def _check_shape(kind: StructureKind, n: int, m: int, grading: Grading) -> SuperSignature:
    expected = structure_signature(kind, n, m)
    if grading.signature != expected:
        raise StructureError(f"{kind.value} with n={n} m={m} lives on M_({expected}), got ({grading.signature})")
    return expected


def build_osp_jordan(n: int, m: int, inv: Superinvolution, grading: Grading) -> GradedSuperStructure:
    """J = H(M_{n,2m}, osp) under the Jordan superproduct; the odd block has size 2m.

    Raises:
        StructureError: If the grading does not live on M_(n,2m) or inv is not graded
    """
    sig = _check_shape(StructureKind.OSP_JORDAN, n, m, grading)
    structure = make_structure(StructureKind.OSP_JORDAN, inv, grading)
    identity = SuperMatrix.identity(sig, grading.order)
    structure.details["contains_identity"] = structure.carrier.contains(identity.flat())
    return structure


def build_p_jordan(n: int, inv: Superinvolution, grading: Grading) -> GradedSuperStructure:
    """J = H(M_{n,n}, trp); the carrier is compared with [[A, B], [C, A^t]], B skew, C symmetric.

    Raises:
        StructureError: If the grading does not live on M_(n,n) or inv is not graded
    """
    _check_shape(StructureKind.P_JORDAN, n, n, grading)
    structure = make_structure(StructureKind.P_JORDAN, inv, grading)
    structure.details["H_block_form"] = span_equal(structure.carrier, trp_block_space(n, 1, grading.order))
    return structure


def bracket_span(space: Subspace, signature: SuperSignature) -> Subspace:
    """span{[a, b]} over basis pairs of space."""
    order = space.order
    basis = [SuperMatrix.from_flat(signature, v, order) for v in space.basis]
    vectors = [supercommutator(a, b).flat() for a in basis for b in basis]
    return Subspace.span(vectors, signature.size ** 2, order)


def build_b_lie(n: int, m: int, inv: Superinvolution, grading: Grading) -> GradedSuperStructure:
    """L = K(M_{2n+1,2m}, osp) under the supercommutator, with the [H, H] cross-check.

    Raises:
        StructureError: If the grading does not live on M_(2n+1,2m) or inv is not graded
    """
    sig = _check_shape(StructureKind.B_LIE, n, m, grading)
    structure = make_structure(StructureKind.B_LIE, inv, grading)
    hh = bracket_span(H_space(inv), sig)
    structure.details["HH_in_K"] = hh.is_subspace_of(structure.carrier)
    structure.details["K_equals_HH"] = span_equal(hh, structure.carrier)
    return structure


def induced_grading(structure: GradedSuperStructure) -> InducedGrading:
    """J_g = J ∩ R_g for every g in the support of the ambient grading."""
    components = {}
    for g, comp in structure.grading.components.items():
        part = intersect(structure.carrier, comp)
        if part.dim:
            components[g] = part
    induced = InducedGrading(components, structure.dim)
    if not induced.is_total:
        logger.warning(f"{structure.label}: induced components miss {induced.deficit} dimensions")
    return induced


def structure_report(structure: GradedSuperStructure) -> ClaimResult:
    """Dimensions per degree and parity with closure and totality verdicts."""
    induced = induced_grading(structure)
    sig, order = structure.signature, structure.grading.order
    even = parity_subspace(sig, 0, order)
    odd = parity_subspace(sig, 1, order)
    per_degree = {
        g.render(): [intersect(part, even).dim, intersect(part, odd).dim]
        for g, part in induced.components.items()
    }
    even_dim, odd_dim = structure.parity_dims()
    details = dict(structure.details)
    details.update({
        "kind": structure.kind.value,
        "dim": structure.dim,
        "parity_dims": [even_dim, odd_dim],
        "components": per_degree,
        "induced_total": induced.is_total,
    })
    checks = [v for k, v in details.items() if isinstance(v, bool)]
    return ClaimResult(
        claim=_CLAIMS[structure.kind],
        instance=f"{structure.kind.value} sig={sig} inv={structure.involution.label} grading={structure.grading.label}",
        passed=all(checks),
        details=details,
    )


# ========== Tensor decompositions ==========

def _tensor_span(outer: Subspace, outer_sig: SuperSignature, inner: Subspace, inner_sig: SuperSignature,
                 ambient: int) -> Subspace:
    order = outer.order
    left = [SuperMatrix.from_flat(outer_sig, v, order) for v in outer.basis]
    right = [SuperMatrix.from_flat(inner_sig, v, order) for v in inner.basis]
    return Subspace.span([kron(a, b).flat() for a in left for b in right], ambient, order)


def _per_degree_counts(space_t: Subspace, t_grading: Grading, space_r: Subspace, r_grading: Grading) -> dict:
    counts: dict = {}
    for a, t_comp in t_grading.components.items():
        dt = intersect(space_t, t_comp).dim
        if not dt:
            continue
        for b, r_comp in r_grading.components.items():
            dr = intersect(space_r, r_comp).dim
            if dr:
                counts[a * b] = counts.get(a * b, 0) + dt * dr
    return counts


def decomposition_check(structure: GradedSuperStructure, fine: PauliSpec) -> ClaimResult:
    """H and K of R ⊗ T as sums of products of the factors' H and K.

    T is the structure's graded superalgebra with its superinvolution; R = M_{2^k}
    carries the Pauli grading and the transpose. Both sides are built as exact
    subspaces of R ⊗ T, and the per-degree dimensions of the product structure are
    compared with the sum formula.

    Raises:
        StructureError: If either factor involution is not graded
    """
    t_grading, t_inv = structure.grading, structure.involution
    order = t_grading.order
    r_grading = build_grading(fine, order)
    d = r_grading.signature.size
    r_map = transpose_map(d, order)
    if not is_graded(r_map, r_grading):
        raise StructureError("Transpose is not graded for the fine factor")
    _check_graded(t_inv, t_grading)
    product_grading = tensor_grading(t_grading, r_grading)
    product_inv = tensor_involution(t_inv, d)
    _check_graded(product_inv, product_grading)

    t_sig, r_sig = t_grading.signature, r_grading.signature
    ambient = product_grading.signature.size ** 2
    h_t, k_t = H_space(t_inv), K_space(t_inv)
    h_r, k_r = H_space(r_map), K_space(r_map)
    h_rhs = subspace_sum(_tensor_span(k_t, t_sig, k_r, r_sig, ambient), _tensor_span(h_t, t_sig, h_r, r_sig, ambient))
    k_rhs = subspace_sum(_tensor_span(h_t, t_sig, k_r, r_sig, ambient), _tensor_span(k_t, t_sig, h_r, r_sig, ambient))
    h_prod, k_prod = H_space(product_inv), K_space(product_inv)

    carrier = k_prod if structure.kind == StructureKind.B_LIE else h_prod
    expected: dict = {}
    if structure.kind == StructureKind.B_LIE:
        pairs = [(h_t, k_r), (k_t, h_r)]
    else:
        pairs = [(k_t, k_r), (h_t, h_r)]
    for space_t, space_r in pairs:
        for g, c in _per_degree_counts(space_t, t_grading, space_r, r_grading).items():
            expected[g] = expected.get(g, 0) + c
    actual = {
        g: intersect(carrier, comp).dim
        for g, comp in product_grading.components.items()
        if intersect(carrier, comp).dim
    }
    details = {
        "H_identity": span_equal(h_prod, h_rhs),
        "K_identity": span_equal(k_prod, k_rhs),
        "per_degree_dims": expected == actual,
        "fine_factor_involution": "transpose",
        "dims": {g.render(): actual[g] for g in sorted(actual, key=lambda g: g.sort_key)},
    }
    logger.info(f"Decomposition of {structure.label} with fine k={fine.k}: H={details['H_identity']} "
                f"K={details['K_identity']}")
    return ClaimResult(
        claim=_CLAIMS[structure.kind],
        instance=f"decomposition {structure.kind.value} sig={t_sig} fine_k={fine.k}",
        passed=details["H_identity"] and details["K_identity"] and details["per_degree_dims"],
        details=details,
    )

"""Gradings of matrix (super)algebras by finite abelian groups.

A Grading keeps an explicit homogeneous basis of the full matrix space together
with the degree of each basis matrix. Components, projections and the dual
action of characters are all derived from that basis.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Literal, Optional, Sequence, Union

from .abelian_group import (
    Character,
    FiniteAbelianGroup,
    GroupElement,
    GroupError,
    Subgroup,
    char_eval,
    quotient,
    supports_generate,
)
from .cyclotomic import CycScalar
from .errors import SupergradeError
from .exact_linalg import Subspace, Vector, intersect, matrix_inverse, sum_of
from .supermatrix import SuperMatrix, SuperSignature, kron, parity_subspace

logger = logging.getLogger(__name__)


class GradingError(SupergradeError):
    """Base exception for grading errors."""
    pass


class GradingSpecError(GradingError):
    """A grading specification is inconsistent."""
    pass


# ========== Specs ==========

@dataclass(frozen=True)
class ElementarySpec:
    """Elementary grading: E_ij has degree theta_i^-1 theta_j."""
    group: FiniteAbelianGroup
    theta: tuple[GroupElement, ...]
    signature: SuperSignature

    def __post_init__(self):
        if len(self.theta) != self.signature.size:
            raise GradingSpecError(
                f"theta has {len(self.theta)} entries, signature ({self.signature}) needs {self.signature.size}"
            )
        for g in self.theta:
            if g.group != self.group:
                raise GradingSpecError(f"theta entry {g} is not an element of {self.group}")

    def render(self) -> str:
        return ",".join(g.render() for g in self.theta)


@dataclass(frozen=True)
class PauliSpec:
    """Fine grading on M_{2^k} by the tensor power of the Z2xZ2 Pauli grading."""
    k: int
    group: Optional[FiniteAbelianGroup] = None
    embedding: Optional[tuple[GroupElement, ...]] = None
    signature: Optional[SuperSignature] = None


@dataclass(frozen=True)
class TensorSpec:
    """Elementary part on C tensored with a fine part on D (D outermost-inner)."""
    elementary: ElementarySpec
    fine: PauliSpec


GradingSpec = Union[ElementarySpec, PauliSpec, TensorSpec]


# ========== Grading ==========

class Grading:
    """R = sum of R_g over G, stored through a homogeneous basis."""

    def __init__(
        self,
        group: FiniteAbelianGroup,
        signature: SuperSignature,
        basis: Sequence[tuple[SuperMatrix, GroupElement]],
        order: Optional[int] = None,
        spec: Optional[GradingSpec] = None,
        unit_degrees: Optional[Sequence[GroupElement]] = None,
        label: str = "",
    ):
        self.group = group
        self.signature = signature
        self.order = order if order is not None else group.cyclotomic_order()
        self.spec = spec
        self.label = label
        self.basis = tuple(basis)
        self.unit_degrees = tuple(unit_degrees) if unit_degrees is not None else None
        dim = signature.size ** 2
        if len(self.basis) != dim:
            raise GradingError(f"Homogeneous basis has {len(self.basis)} matrices, expected {dim}")
        for mat, g in self.basis:
            if mat.signature != signature or mat.order != self.order:
                raise GradingError("Basis matrix does not live in the graded algebra")
            if g.group != group:
                raise GradingError(f"Degree {g} is not an element of {group}")
        self._validate()

    # ----- construction checks -----

    def _validate(self) -> None:
        dim = self.signature.size ** 2
        if self.unit_degrees is not None:
            return
        if self._orthogonal_norms is None:
            total = sum_of(self.components.values(), dim, self.order)
            if total.dim != dim:
                raise GradingError(f"Homogeneous basis spans only {total.dim} of {dim} dimensions")
        if sum(s.dim for s in self.components.values()) != dim:
            raise GradingError("Components are not independent")

    @cached_property
    def _sparse_basis(self) -> tuple[dict[int, CycScalar], ...]:
        out = []
        for mat, _ in self.basis:
            flat = mat.flat()
            out.append({i: x for i, x in enumerate(flat) if not x.is_zero()})
        return tuple(out)

    @cached_property
    def _orthogonal_norms(self) -> Optional[tuple[CycScalar, ...]]:
        """<B_i, B_i> when the basis is orthogonal for the bilinear form sum X_uv Y_uv, else None."""
        sparse = self._sparse_basis
        norms = []
        for i, bi in enumerate(sparse):
            for bj in sparse[i + 1:]:
                if _sparse_dot(bi, bj, self.order):
                    return None
            norm = _sparse_dot(bi, bi, self.order)
            if norm.is_zero():
                return None
            norms.append(norm)
        return tuple(norms)

    @cached_property
    def _inverse_basis(self) -> list[list[CycScalar]]:
        dim = self.signature.size ** 2
        columns = [mat.flat() for mat, _ in self.basis]
        square = [[columns[j][i] for j in range(dim)] for i in range(dim)]
        return matrix_inverse(square)

    # ----- components -----

    @cached_property
    def components(self) -> dict[GroupElement, Subspace]:
        dim = self.signature.size ** 2
        grouped: dict[GroupElement, list[Vector]] = {}
        for mat, g in self.basis:
            grouped.setdefault(g, []).append(mat.flat())
        if self.unit_degrees is not None:
            return {
                g: Subspace.coordinate([i for i, d in enumerate(self.unit_degrees) if d == g], dim, self.order)
                for g in sorted(grouped, key=lambda x: x.sort_key)
            }
        return {
            g: Subspace.span(grouped[g], dim, self.order)
            for g in sorted(grouped, key=lambda x: x.sort_key)
        }

    def component(self, g: GroupElement) -> Subspace:
        return self.components.get(g, Subspace.zero(self.signature.size ** 2, self.order))

    @property
    def support(self) -> list[GroupElement]:
        return list(self.components)

    def support_generates(self) -> bool:
        return supports_generate(self.group, self.support)

    def dimension_map(self) -> dict[str, int]:
        return {g.render(): s.dim for g, s in self.components.items()}

    @property
    def is_elementary(self) -> bool:
        return self.unit_degrees is not None

    # ----- decomposition -----

    def coordinates(self, a: SuperMatrix) -> tuple[CycScalar, ...]:
        """Coefficients of a in the homogeneous basis."""
        flat = a.flat()
        if self.unit_degrees is not None:
            return flat
        norms = self._orthogonal_norms
        if norms is not None:
            sparse_a = {i: x for i, x in enumerate(flat) if not x.is_zero()}
            return tuple(
                _sparse_dot(b, sparse_a, self.order) / norm for b, norm in zip(self._sparse_basis, norms)
            )
        inv = self._inverse_basis
        zero = CycScalar.zero(self.order)
        out = []
        for row in inv:
            acc = zero
            for x, y in zip(row, flat):
                if not x.is_zero() and not y.is_zero():
                    acc = acc + x * y
            out.append(acc)
        return tuple(out)

    def homogeneous_parts(self, a: SuperMatrix) -> dict[GroupElement, SuperMatrix]:
        """a_g for every g with a_g != 0."""
        if self.unit_degrees is not None:
            parts: dict[GroupElement, list[tuple[int, CycScalar]]] = {}
            for i, x in enumerate(a.flat()):
                if not x.is_zero():
                    parts.setdefault(self.unit_degrees[i], []).append((i, x))
            result = {}
            dim = self.signature.size ** 2
            zero = CycScalar.zero(self.order)
            for g, entries in parts.items():
                flat = [zero] * dim
                for i, x in entries:
                    flat[i] = x
                result[g] = SuperMatrix.from_flat(self.signature, flat, self.order)
            return result
        coeffs = self.coordinates(a)
        result: dict[GroupElement, SuperMatrix] = {}
        for c, (mat, g) in zip(coeffs, self.basis):
            if c.is_zero():
                continue
            term = mat.scale(c)
            result[g] = result[g] + term if g in result else term
        return {g: m for g, m in result.items() if not m.is_zero()}

    def component_of(self, a: SuperMatrix, g: GroupElement) -> SuperMatrix:
        """Direct extraction of a_g from basis coefficients."""
        return self.homogeneous_parts(a).get(g, SuperMatrix.zero(self.signature, self.order))

    def degree_of_unit(self, index: int) -> Optional[GroupElement]:
        return self.unit_degrees[index] if self.unit_degrees is not None else None

    def __repr__(self) -> str:
        return f"Grading({self.label or self.group.render()}, ({self.signature}), support={len(self.components)})"


def _sparse_dot(a: dict[int, CycScalar], b: dict[int, CycScalar], order: int) -> CycScalar:
    if len(b) < len(a):
        a, b = b, a
    acc = CycScalar.zero(order)
    for i, x in a.items():
        y = b.get(i)
        if y is not None:
            acc = acc + x * y
    return acc


# ========== Constructions ==========

def elementary_grading(
    group: FiniteAbelianGroup,
    theta: Sequence[GroupElement],
    signature: SuperSignature,
    order: Optional[int] = None,
) -> Grading:
    """Elementary grading with deg E_ij = theta_i^-1 theta_j.

    Raises:
        GradingSpecError: If len(theta) != n + m
    """
    spec = ElementarySpec(group, tuple(theta), signature)
    order = order if order is not None else group.cyclotomic_order()
    size = signature.size
    basis = []
    degrees = []
    for i in range(size):
        for j in range(size):
            g = theta[i].inverse() * theta[j]
            basis.append((SuperMatrix.unit(signature, i, j, order), g))
            degrees.append(g)
    grading = Grading(group, signature, basis, order, spec, degrees, label=f"elementary[{spec.render()}]")
    logger.debug(f"Built elementary grading on M_({signature}) over {group}: {grading.dimension_map()}")
    return grading


_PAULI_ROWS = {
    (0, 0): [[1, 0], [0, 1]],
    (1, 0): [[1, 0], [0, -1]],
    (0, 1): [[0, 1], [1, 0]],
    (1, 1): [[0, 1], [-1, 0]],
}


def pauli_matrix(exponents: Sequence[int], order: int, signature: Optional[SuperSignature] = None) -> SuperMatrix:
    """Tensor product of Pauli generators for (a1, b1, ..., ak, bk), factor 1 outermost."""
    k = len(exponents) // 2
    result = SuperMatrix.identity(SuperSignature(1, 0), order)
    for f in range(k):
        key = (exponents[2 * f] % 2, exponents[2 * f + 1] % 2)
        factor = SuperMatrix.from_rows(SuperSignature(2, 0), _PAULI_ROWS[key], order)
        result = kron(result, factor)
    if signature is not None:
        result = result.with_signature(signature)
    return result


def _check_embedding(group: FiniteAbelianGroup, embedding: Sequence[GroupElement], k: int) -> None:
    if len(embedding) != 2 * k:
        raise GradingSpecError(f"Pauli embedding needs {2 * k} generator images, got {len(embedding)}")
    for g in embedding:
        if g.group != group:
            raise GradingSpecError(f"Embedding image {g} is not an element of {group}")
        if not (g * g).is_identity:
            raise GradingSpecError(f"Embedding image {g} does not have order dividing 2")
    images = set()
    for vec in _binary_vectors(2 * k):
        images.add(_embed(group, embedding, vec))
    if len(images) != 4 ** k:
        raise GradingSpecError("Pauli embedding is not injective")


def _binary_vectors(length: int):
    for code in range(2 ** length):
        yield tuple((code >> (length - 1 - i)) & 1 for i in range(length))


def _embed(group: FiniteAbelianGroup, embedding: Sequence[GroupElement], vec: Sequence[int]) -> GroupElement:
    g = group.identity()
    for img, a in zip(embedding, vec):
        if a:
            g = g * img
    return g


def pauli_fine_grading(
    k: int,
    group: Optional[FiniteAbelianGroup] = None,
    embedding: Optional[Sequence[GroupElement]] = None,
    signature: Optional[SuperSignature] = None,
    order: Optional[int] = None,
) -> Grading:
    """Fine grading of M_{2^k}: each component is spanned by one generalized Pauli matrix.

    Args:
        k: Number of tensor factors (k=0 gives M_1 with the trivial grading)
        group: Grading group; defaults to (Z2)^(2k)
        embedding: Images of the 2k generators (a1, b1, ..., ak, bk); defaults to the standard basis
        signature: Super-signature to view M_{2^k} with; defaults to purely even

    Raises:
        GradingSpecError: On a non-injective embedding or a signature of the wrong size
    """
    if k < 0:
        raise GradingSpecError(f"k must be >= 0, got {k}")
    if group is None:
        group = FiniteAbelianGroup.from_cyclic_orders([2] * (2 * k))
    if embedding is None:
        if group.invariant_factors != (2,) * (2 * k):
            raise GradingSpecError(f"{group} needs an explicit Pauli embedding")
        embedding = tuple(group.element(*[1 if j == i else 0 for j in range(2 * k)]) for i in range(2 * k))
    embedding = tuple(embedding)
    _check_embedding(group, embedding, k)
    size = 2 ** k
    if signature is None:
        signature = SuperSignature(size, 0)
    if signature.size != size:
        raise GradingSpecError(f"Pauli grading lives on M_{size}, signature ({signature}) has size {signature.size}")
    order = order if order is not None else group.cyclotomic_order()
    basis = [
        (pauli_matrix(vec, order, signature), _embed(group, embedding, vec))
        for vec in _binary_vectors(2 * k)
    ]
    spec = PauliSpec(k, group, embedding, signature)
    grading = Grading(group, signature, basis, order, spec, label=f"pauli[k={k}]")
    logger.debug(f"Built Pauli fine grading k={k} over {group}")
    return grading


def tensor_grading(elementary: Grading, fine: Grading) -> Grading:
    """Grading of C ⊗ D with deg(x ⊗ y) = deg(x) deg(y); D must be purely even.

    Raises:
        GradingError: If the groups differ
    """
    if elementary.group != fine.group:
        raise GradingError(f"Tensor factors graded by {elementary.group} and {fine.group}")
    if elementary.order != fine.order:
        raise GradingError("Tensor factors live over different scalar fields")
    basis = [
        (kron(x, y), g * h)
        for x, g in elementary.basis
        for y, h in fine.basis
    ]
    sig = basis[0][0].signature
    spec = None
    if isinstance(elementary.spec, ElementarySpec) and isinstance(fine.spec, PauliSpec):
        spec = TensorSpec(elementary.spec, fine.spec)
    grading = Grading(elementary.group, sig, basis, elementary.order, spec, label="tensor")
    logger.debug(f"Built tensor grading on M_({sig}): support {len(grading.components)}")
    return grading


def build_grading(spec: GradingSpec, order: Optional[int] = None) -> Grading:
    if isinstance(spec, ElementarySpec):
        return elementary_grading(spec.group, spec.theta, spec.signature, order)
    if isinstance(spec, PauliSpec):
        return pauli_fine_grading(spec.k, spec.group, spec.embedding, spec.signature, order)
    elementary = build_grading(spec.elementary, order)
    fine = build_grading(spec.fine, elementary.order)
    return tensor_grading(elementary, fine)


# ========== Dual action ==========

def dual_action(chi: Character, a: SuperMatrix, grading: Grading) -> SuperMatrix:
    """chi * a = sum over g of chi(g) a_g."""
    result = SuperMatrix.zero(grading.signature, grading.order)
    for g, part in grading.homogeneous_parts(a).items():
        value = char_eval(chi, g, grading.order)
        result = result + (part if value == 1 else part.scale(value))
    return result


def homogeneous_projection(a: SuperMatrix, g: GroupElement, grading: Grading) -> SuperMatrix:
    """a_g by character averaging: |G|^-1 sum over chi of chi(g)^-1 (chi * a)."""
    total = SuperMatrix.zero(grading.signature, grading.order)
    for chi in grading.group.characters():
        weight = char_eval(chi, g, grading.order).inverse()
        total = total + dual_action(chi, a, grading).scale(weight)
    return total.scale(Fraction(1, grading.group.order))


def degrees(a: SuperMatrix, grading: Grading) -> frozenset[GroupElement]:
    """Degrees at which a has a nonzero homogeneous part."""
    return frozenset(grading.homogeneous_parts(a))


# ========== Predicates ==========

def identity_component(grading: Grading) -> Subspace:
    return grading.component(grading.group.identity())


def is_fine(grading: Grading) -> bool:
    return all(s.dim == 1 for s in grading.components.values())


def _split_graded(space: Subspace, grading: Grading) -> bool:
    return sum(intersect(space, comp).dim for comp in grading.components.values()) == space.dim


def graded_subspace_invariant(space: Subspace, grading: Grading) -> bool:
    """Whether chi * V = V for every character chi."""
    sig = grading.signature
    vectors = [SuperMatrix.from_flat(sig, v, grading.order) for v in space.basis]
    for chi in grading.group.characters():
        if chi.is_trivial:
            continue
        for x in vectors:
            if not space.contains(dual_action(chi, x, grading).flat()):
                return False
    return True


def is_graded_subspace(
    space: Subspace,
    grading: Grading,
    method: Literal["split", "characters"] = "split",
) -> bool:
    """Whether V = sum over g of (V ∩ R_g).

    Args:
        method: "split" intersects with every component, "characters" tests invariance
            under the dual action
    """
    if method == "characters":
        return graded_subspace_invariant(space, grading)
    return _split_graded(space, grading)


def is_super_compatible(grading: Grading, signature: Optional[SuperSignature] = None) -> bool:
    """Whether every component splits into its even and odd intersections."""
    sig = signature if signature is not None else grading.signature
    if sig.size != grading.signature.size:
        raise GradingError(f"Signature ({sig}) does not match M_{grading.signature.size}")
    even = parity_subspace(sig, 0, grading.order)
    odd = parity_subspace(sig, 1, grading.order)
    for g, comp in grading.components.items():
        if intersect(comp, even).dim + intersect(comp, odd).dim != comp.dim:
            logger.debug(f"Component {g} of {grading} does not split by parity")
            return False
    return True


def graded_isomorphic_elementary(spec1: ElementarySpec, spec2: ElementarySpec) -> Optional[tuple[int, ...]]:
    """Permutation p with spec2.theta[p[i]] = spec1.theta[i] and matching parities, or None."""
    if spec1.group != spec2.group or spec1.signature != spec2.signature:
        return None
    sig = spec1.signature
    key1 = sorted((g.sort_key, sig.parity(i)) for i, g in enumerate(spec1.theta))
    key2 = sorted((g.sort_key, sig.parity(i)) for i, g in enumerate(spec2.theta))
    if key1 != key2:
        return None
    used = [False] * sig.size
    perm = []
    for i, g in enumerate(spec1.theta):
        j = next(
            j for j, h in enumerate(spec2.theta)
            if not used[j] and h == g and sig.parity(j) == sig.parity(i)
        )
        used[j] = True
        perm.append(j)
    return tuple(perm)


def quotient_grading(grading: Grading, subgroup: Subgroup) -> Grading:
    """Coarsening to G/H, with G/H put in invariant-factor form.

    Raises:
        GroupError: If H belongs to another group
    """
    if subgroup.group != grading.group:
        raise GroupError(f"Subgroup of {subgroup.group} used with grading over {grading.group}")
    qgroup, project = quotient(grading.group, subgroup)
    target, iso = qgroup.normalized()
    basis = [(mat, iso[project(g)]) for mat, g in grading.basis]
    unit_degrees = None
    if grading.unit_degrees is not None:
        unit_degrees = [iso[project(g)] for g in grading.unit_degrees]
    coarse = Grading(target, grading.signature, basis, grading.order, None, unit_degrees,
                     label=f"{grading.label}/H{subgroup.order}")
    logger.info(f"Quotient grading by subgroup of order {subgroup.order}: support {len(coarse.components)}")
    return coarse

"""Superinvolutions of M_{n,m}: orthosymplectic, transpose and exchange.

Every superinvolution is held as a LinearMap given by the images of the matrix
units in flattening order. Most variants come from a defining matrix Phi through
X -> Phi^-1 X^st Phi, where st is the supertranspose.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

from .abelian_group import GroupElement
from .cyclotomic import CycScalar, root_of_unity
from .errors import SupergradeError
from .exact_linalg import SingularMatrixError, Subspace, matrix_inverse, nullspace, span_equal
from .grading import Grading
from .supermatrix import (
    SuperMatrix,
    SuperSignature,
    SignatureError,
    doubled_signature,
    exchange_phi,
    kron,
    sign_factor,
)

logger = logging.getLogger(__name__)

SparseMatrix = dict[int, CycScalar]


class InvolutionError(SupergradeError):
    """A map fails the superinvolution axioms."""
    pass


class SingularPhiError(InvolutionError):
    """The defining matrix Phi is singular."""
    pass


class UnpairedBlocksError(InvolutionError):
    """Block sizes do not come in equal consecutive pairs."""
    pass


class InvolutionKind(str, Enum):
    """How a superinvolution was defined."""
    OSP = "osp"
    OSP_PAIRED = "osp-thm52"
    TRP = "trp"
    EXCHANGE = "exchange"
    PHI = "phi"
    TENSOR = "tensor"


# ========== Linear maps on matrix space ==========

def _sparse(mat: SuperMatrix) -> SparseMatrix:
    n = mat.size
    return {i * n + j: x for i, j, x in mat.nonzero_entries()}


def _sparse_mul(a: SparseMatrix, b: SparseMatrix, size: int) -> SparseMatrix:
    by_row: dict[int, list[tuple[int, CycScalar]]] = {}
    for key, y in b.items():
        k, j = divmod(key, size)
        by_row.setdefault(k, []).append((j, y))
    out: SparseMatrix = {}
    for key, x in a.items():
        i, k = divmod(key, size)
        for j, y in by_row.get(k, ()):
            idx = i * size + j
            out[idx] = out[idx] + x * y if idx in out else x * y
    return {k: v for k, v in out.items() if not v.is_zero()}


def _sparse_scale(a: SparseMatrix, c: int) -> SparseMatrix:
    return dict(a) if c == 1 else {k: -v for k, v in a.items()}


@dataclass(frozen=True)
class LinearMap:
    """A linear map of the flattened matrix space, stored column-wise and sparse."""

    signature: SuperSignature
    order: int
    images: tuple[SparseMatrix, ...]

    @property
    def size(self) -> int:
        return self.signature.size

    def apply_sparse(self, v: SparseMatrix) -> SparseMatrix:
        out: SparseMatrix = {}
        for idx, c in v.items():
            for k, x in self.images[idx].items():
                term = c * x
                out[k] = out[k] + term if k in out else term
        return {k: x for k, x in out.items() if not x.is_zero()}

    def apply_flat(self, v: Sequence[CycScalar]) -> tuple[CycScalar, ...]:
        out = self.apply_sparse({i: x for i, x in enumerate(v) if not x.is_zero()})
        zero = CycScalar.zero(self.order)
        return tuple(out.get(i, zero) for i in range(self.size ** 2))

    def apply(self, x: SuperMatrix) -> SuperMatrix:
        if x.signature != self.signature:
            raise SignatureError(f"Map on ({self.signature}) applied to matrix of ({x.signature})")
        return SuperMatrix.from_flat(self.signature, self.apply_flat(x.flat()), self.order)

    def is_monomial(self) -> bool:
        """Whether every matrix unit goes to a multiple of a matrix unit."""
        return all(len(img) == 1 for img in self.images)

    def dense(self) -> list[list[CycScalar]]:
        dim = self.size ** 2
        zero = CycScalar.zero(self.order)
        rows = [[zero] * dim for _ in range(dim)]
        for col, img in enumerate(self.images):
            for row, x in img.items():
                rows[row][col] = x
        return rows

    def image_space(self, space: Subspace) -> Subspace:
        return Subspace.span([self.apply_flat(v) for v in space.basis], space.ambient_dim, self.order)


def phi_form_map(phi: SuperMatrix) -> LinearMap:
    """X -> Phi^-1 X^st Phi; E_ab goes to sign(b,a) (column b of Phi^-1)(row a of Phi).

    Raises:
        SingularPhiError: If Phi is singular
    """
    try:
        inv = matrix_inverse(phi.rows)
    except SingularMatrixError as e:
        raise SingularPhiError(f"Phi is singular: {e}") from e
    sig, size = phi.signature, phi.size
    cols = [[(i, inv[i][b]) for i in range(size) if not inv[i][b].is_zero()] for b in range(size)]
    rows = [[(j, x) for j, x in enumerate(phi.rows[a]) if not x.is_zero()] for a in range(size)]
    images = []
    for a in range(size):
        for b in range(size):
            sign = sign_factor(sig, b, a)
            img: SparseMatrix = {}
            for i, x in cols[b]:
                for j, y in rows[a]:
                    val = x * y
                    img[i * size + j] = val if sign == 1 else -val
            images.append(img)
    return LinearMap(sig, phi.order, tuple(images))


def trp_map(signature: SuperSignature, order: int) -> LinearMap:
    """[[A, B], [C, D]] -> [[D^t, -B^t], [C^t, A^t]] on M_{n,n}."""
    n = signature.n
    if signature.m != n:
        raise SignatureError(f"Transpose superinvolution needs n = m, got ({signature})")
    size = 2 * n
    one = CycScalar.one(order)
    images = []
    for a in range(size):
        for b in range(size):
            if a < n and b < n:
                target, coef = (n + b, n + a), one
            elif a < n <= b:
                target, coef = (b - n, n + a), -one
            elif b < n <= a:
                target, coef = (n + b, a - n), one
            else:
                target, coef = (b - n, a - n), one
            images.append({target[0] * size + target[1]: coef})
    return LinearMap(signature, order, tuple(images))


def parity_automorphism(signature: SuperSignature, order: int) -> LinearMap:
    """sigma: X -> S X S with S = diag(I_n, -I_m)."""
    size = signature.size
    one = CycScalar.one(order)
    return LinearMap(signature, order, tuple(
        {a * size + b: one if signature.unit_parity(a, b) == 0 else -one}
        for a in range(size) for b in range(size)
    ))


# ========== Axioms ==========

@dataclass(frozen=True)
class InvolutionCheck:
    """Outcome of the superinvolution axiom check."""
    ok: bool
    reason: str = ""
    witness: Optional[tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.ok


def is_superinvolution(linear_map: LinearMap, signature: Optional[SuperSignature] = None) -> InvolutionCheck:
    """Check parity preservation, order 2 and (ab)* = (-1)^{|a||b|} b* a* on matrix units.

    Returns:
        InvolutionCheck with the first violating unit (or unit pair) as witness
    """
    sig = signature if signature is not None else linear_map.signature
    size = sig.size
    dim = size * size
    images = linear_map.images
    if len(images) != dim:
        return InvolutionCheck(False, "map has the wrong number of unit images")
    for idx, img in enumerate(images):
        p = sig.unit_parity(*divmod(idx, size))
        if any(sig.unit_parity(*divmod(k, size)) != p for k in img):
            return InvolutionCheck(False, "parity", (idx,))
    one = CycScalar.one(linear_map.order)
    for idx, img in enumerate(images):
        if linear_map.apply_sparse(img) != {idx: one}:
            return InvolutionCheck(False, "order", (idx,))
    for a in range(size):
        for b in range(size):
            u = a * size + b
            pu = sig.unit_parity(a, b)
            for d in range(size):
                # E_ab E_cd vanishes unless c = b
                for c in range(size):
                    v = c * size + d
                    lhs = images[a * size + d] if c == b else {}
                    sign = -1 if pu and sig.unit_parity(c, d) else 1
                    rhs = _sparse_scale(_sparse_mul(images[v], images[u], size), sign)
                    if lhs != rhs:
                        return InvolutionCheck(False, "antimultiplicative", (u, v))
    return InvolutionCheck(True)


def restriction_is_involution(linear_map: LinearMap) -> bool:
    """Whether the restriction to the even part is an ordinary involution."""
    sig, size = linear_map.signature, linear_map.size
    even = [i for i in range(size * size) if sig.unit_parity(*divmod(i, size)) == 0]
    one = CycScalar.one(linear_map.order)
    for u in even:
        img = linear_map.images[u]
        if any(sig.unit_parity(*divmod(k, size)) for k in img):
            return False
        if linear_map.apply_sparse(img) != {u: one}:
            return False
    for u in even:
        a, b = divmod(u, size)
        for v in even:
            c, d = divmod(v, size)
            lhs = linear_map.images[a * size + d] if b == c else {}
            if lhs != _sparse_mul(linear_map.images[v], linear_map.images[u], size):
                return False
    return True


# ========== Superinvolution ==========

class Superinvolution:
    """A verified superinvolution with its defining data."""

    def __init__(
        self,
        kind: InvolutionKind,
        linear_map: LinearMap,
        phi: Optional[SuperMatrix] = None,
        label: str = "",
        verify: bool = True,
    ):
        self.kind = kind
        self.map = linear_map
        self.phi = phi
        self.label = label or kind.value
        if verify:
            check = is_superinvolution(linear_map)
            if not check:
                raise InvolutionError(
                    f"{self.label} on ({linear_map.signature}) is not a superinvolution: "
                    f"{check.reason} at {check.witness}"
                )

    @property
    def signature(self) -> SuperSignature:
        return self.map.signature

    @property
    def order(self) -> int:
        return self.map.order

    @classmethod
    def from_phi(cls, phi: SuperMatrix, kind: InvolutionKind = InvolutionKind.PHI, label: str = "") -> "Superinvolution":
        return cls(kind, phi_form_map(phi), phi, label)

    @classmethod
    def osp(cls, signature: SuperSignature, order: int = 4) -> "Superinvolution":
        """Canonical Phi = diag(I_n, [[0, I], [-I, 0]])."""
        if signature.m % 2:
            raise InvolutionError(f"Orthosymplectic involution needs m even, got ({signature})")
        return cls.from_phi(canonical_osp_phi(signature, order), InvolutionKind.OSP, "osp")

    @classmethod
    def from_osp_blocks(cls, phi0: SuperMatrix, phi1: SuperMatrix, order: int = 4) -> "Superinvolution":
        """Phi = diag(Phi0, Phi1) from even and odd blocks given as purely even matrices."""
        n, m = phi0.size, phi1.size
        sig = SuperSignature(n, m)
        z = CycScalar.zero(order)
        rows = [[z] * (n + m) for _ in range(n + m)]
        for i, j, x in phi0.nonzero_entries():
            rows[i][j] = x
        for i, j, x in phi1.nonzero_entries():
            rows[n + i][n + j] = x
        return cls.from_phi(SuperMatrix(sig, order, rows), InvolutionKind.OSP, "osp-blocks")

    @classmethod
    def trp(cls, signature: SuperSignature, order: int = 4) -> "Superinvolution":
        n = signature.n
        return cls(InvolutionKind.TRP, trp_map(signature, order), flip_matrix(n, order), "trp")

    @classmethod
    def exchange(cls, signature: SuperSignature, order: int = 4) -> "Superinvolution":
        """Swap superinvolution on the doubled algebra holding A ⊕ A^sop."""
        return cls.from_phi(exchange_phi(signature, order), InvolutionKind.EXCHANGE, "exchange")

    def apply(self, x: SuperMatrix) -> SuperMatrix:
        return self.map.apply(x)

    def __call__(self, x: SuperMatrix) -> SuperMatrix:
        return self.apply(x)

    def __repr__(self) -> str:
        return f"Superinvolution({self.label}, ({self.signature}))"


def apply(inv: Superinvolution, x: SuperMatrix) -> SuperMatrix:
    return inv.apply(x)


def canonical_osp_phi(signature: SuperSignature, order: int) -> SuperMatrix:
    n, m = signature.n, signature.m
    half = m // 2
    rows = [[0] * (n + m) for _ in range(n + m)]
    for i in range(n):
        rows[i][i] = 1
    for i in range(half):
        rows[n + i][n + half + i] = 1
        rows[n + half + i][n + i] = -1
    return SuperMatrix.from_rows(signature, rows, order)


def flip_matrix(n: int, order: int) -> SuperMatrix:
    """F = [[0, I_n], [I_n, 0]] on M_{n,n}."""
    rows = [[1 if abs(i - j) == n else 0 for j in range(2 * n)] for i in range(2 * n)]
    return SuperMatrix.from_rows(SuperSignature(n, n), rows, order)


def _check_pairs(sizes: Sequence[int], name: str) -> None:
    if len(sizes) % 2:
        raise UnpairedBlocksError(f"{name} has an odd number of blocks: {tuple(sizes)}")
    for k in range(0, len(sizes), 2):
        if sizes[k] != sizes[k + 1]:
            raise UnpairedBlocksError(f"{name} blocks {k + 1} and {k + 2} differ: {sizes[k]} != {sizes[k + 1]}")


def paired_block_phi(p: Sequence[int], q: Sequence[int], order: int = 4) -> SuperMatrix:
    """Phi0 = diag([[0, I_p], [I_p, 0]], ...) and Phi1 = diag([[0, I_q], [-I_q, 0]], ...).

    Raises:
        UnpairedBlocksError: Unless p1 = p2, p3 = p4, ... and likewise for q
    """
    _check_pairs(p, "p")
    _check_pairs(q, "q")
    n, m = sum(p), sum(q)
    sig = SuperSignature(n, m)
    rows = [[0] * (n + m) for _ in range(n + m)]
    offset = 0
    for k in range(0, len(p), 2):
        s = p[k]
        for i in range(s):
            rows[offset + i][offset + s + i] = 1
            rows[offset + s + i][offset + i] = 1
        offset += 2 * s
    offset = n
    for k in range(0, len(q), 2):
        s = q[k]
        for i in range(s):
            rows[offset + i][offset + s + i] = 1
            rows[offset + s + i][offset + i] = -1
        offset += 2 * s
    return SuperMatrix.from_rows(sig, rows, order)


def thm52_phi(p: Sequence[int], q: Sequence[int], order: int = 4) -> Superinvolution:
    """Orthosymplectic superinvolution with paired block-antidiagonal Phi0 and Phi1."""
    phi = paired_block_phi(p, q, order)
    return Superinvolution.from_phi(phi, InvolutionKind.OSP_PAIRED, f"osp-thm52 p={tuple(p)} q={tuple(q)}")


def tensor_involution(inv: Superinvolution, d: int) -> Superinvolution:
    """(c ⊗ x)* = c* ⊗ x^t on C ⊗ M_d, realized by Phi ⊗ I_d.

    Raises:
        InvolutionError: If the factor involution has no defining Phi
    """
    if inv.phi is None:
        raise InvolutionError(f"{inv.label} has no defining matrix to tensor with")
    ident = SuperMatrix.identity(SuperSignature(d, 0), inv.order)
    phi = kron(inv.phi, ident)
    return Superinvolution.from_phi(phi, InvolutionKind.TENSOR, f"{inv.label}⊗t")


def transpose_map(size: int, order: int) -> LinearMap:
    """Ordinary transpose on M_size viewed as purely even."""
    one = CycScalar.one(order)
    return LinearMap(SuperSignature(size, 0), order, tuple(
        {b * size + a: one} for a in range(size) for b in range(size)
    ))


# ========== Graded compatibility ==========

def _monomial_graded_violation(linear_map: LinearMap, grading: Grading) -> Optional[GroupElement]:
    for idx, img in enumerate(linear_map.images):
        (target,) = img
        g = grading.unit_degrees[idx]
        if grading.unit_degrees[target] != g:
            return g
    return None


def graded_violation(inv, grading: Grading) -> Optional[GroupElement]:
    """First degree g (in sorted support order) with (R_g)* != R_g, or None."""
    linear_map = inv.map if isinstance(inv, Superinvolution) else inv
    if linear_map.signature.size != grading.signature.size:
        raise SignatureError("Involution and grading live on different matrix sizes")
    if grading.is_elementary and linear_map.is_monomial():
        bad = _monomial_graded_violation(linear_map, grading)
        if bad is None:
            return None
        return min((g for g in grading.components
                    if _component_violated(linear_map, grading, g)), key=lambda g: g.sort_key)
    for g, comp in grading.components.items():
        if not span_equal(linear_map.image_space(comp), comp):
            return g
    return None


def _component_violated(linear_map: LinearMap, grading: Grading, g: GroupElement) -> bool:
    for idx, d in enumerate(grading.unit_degrees):
        if d == g:
            (target,) = linear_map.images[idx]
            if grading.unit_degrees[target] != g:
                return True
    return False


def graded_on_theta(inv, theta: Sequence[GroupElement]) -> bool:
    """Gradedness for the elementary grading of theta without materializing it.

    Requires a monomial map; each unit E_ab must land on a unit of degree theta_a^-1 theta_b.
    """
    linear_map = inv.map if isinstance(inv, Superinvolution) else inv
    if not linear_map.is_monomial():
        raise InvolutionError("Degree bookkeeping on theta needs a monomial map")
    size = linear_map.size
    inverses = [g.inverse() for g in theta]
    for idx, img in enumerate(linear_map.images):
        a, b = divmod(idx, size)
        (target,) = img
        c, d = divmod(target, size)
        if inverses[a] * theta[b] != inverses[c] * theta[d]:
            return False
    return True


def is_graded(inv, grading: Grading) -> bool:
    """Whether (R_g)* = R_g for every g in the support."""
    return graded_violation(inv, grading) is None


def H_space(inv) -> Subspace:
    """Symmetric elements: the +1 eigenspace."""
    return _eigenspace(inv, 1)


def K_space(inv) -> Subspace:
    """Skew elements: the -1 eigenspace."""
    return _eigenspace(inv, -1)


def _eigenspace(inv, eigenvalue: int) -> Subspace:
    linear_map = inv.map if isinstance(inv, Superinvolution) else inv
    dense = linear_map.dense()
    dim = len(dense)
    system = [
        [x - eigenvalue if i == j else x for j, x in enumerate(row)]
        for i, row in enumerate(dense)
    ]
    return nullspace(system, ncols=dim, order=linear_map.order)


def symmetrized_space(inv, sign: int) -> Subspace:
    """span{E + sign * E*} over matrix units; equals H (sign=1) or K (sign=-1)."""
    linear_map = inv.map if isinstance(inv, Superinvolution) else inv
    dim = linear_map.size ** 2
    zero = CycScalar.zero(linear_map.order)
    one = CycScalar.one(linear_map.order)
    vectors = []
    for idx, img in enumerate(linear_map.images):
        v = [zero] * dim
        v[idx] = one
        for k, x in img.items():
            v[k] = v[k] + x if sign == 1 else v[k] - x
        vectors.append(v)
    return Subspace.span(vectors, dim, linear_map.order)


def antiauto_containment(phi_map, x: SuperMatrix, y: SuperMatrix) -> bool:
    """Whether phi(x R y) ⊆ phi(y) R phi(x), checked on matrix units."""
    linear_map = phi_map.map if isinstance(phi_map, Superinvolution) else phi_map
    sig, order = x.signature, x.order
    size = sig.size
    dim = size * size
    fx, fy = linear_map.apply(x), linear_map.apply(y)
    left, right = [], []
    for a in range(size):
        for b in range(size):
            unit = SuperMatrix.unit(sig, a, b, order)
            left.append(linear_map.apply_flat((x @ unit @ y).flat()))
            right.append((fy @ unit @ fx).flat())
    left_space = Subspace.span(left, dim, order)
    right_space = Subspace.span(right, dim, order)
    return left_space.is_subspace_of(right_space)


# ========== Bounded conjugation family ==========

def _entry_values(order: int) -> list[CycScalar]:
    zero = CycScalar.zero(order)
    i = root_of_unity(order // 4, order)
    return [zero, CycScalar.one(order), -CycScalar.one(order), i, -i]


def _block_positions(signature: SuperSignature, parity: int) -> list[tuple[int, int]]:
    size = signature.size
    return [(a, b) for a in range(size) for b in range(size) if signature.unit_parity(a, b) == parity]


def _homogeneous_matrices(signature: SuperSignature, order: int, full_limit: int):
    """Parity-homogeneous invertible S: exhaustive over small blocks, monomial otherwise."""
    values = _entry_values(order)
    nonzero = values[1:]
    size = signature.size
    for parity in (0, 1):
        if parity == 1 and signature.n != signature.m:
            continue
        positions = _block_positions(signature, parity)
        if len(positions) <= full_limit:
            for choice in itertools.product(values, repeat=len(positions)):
                rows = [[values[0]] * size for _ in range(size)]
                for (a, b), x in zip(positions, choice):
                    rows[a][b] = x
                yield SuperMatrix(signature, order, rows)
            continue
        for perm in itertools.permutations(range(size)):
            if any(signature.unit_parity(i, perm[i]) != parity for i in range(size)):
                continue
            for diag in itertools.product(nonzero, repeat=size):
                rows = [[values[0]] * size for _ in range(size)]
                for i in range(size):
                    rows[i][perm[i]] = diag[i]
                yield SuperMatrix(signature, order, rows)


@dataclass(frozen=True)
class FamilyMember:
    """One candidate X -> S^-1 X^st S (form "st") or S^-1 trp(X) S (form "trp")."""
    form: str
    s: SuperMatrix
    map: LinearMap


def conjugation_family(signature: SuperSignature, order: int = 4, full_limit: int = 4) -> list[FamilyMember]:
    """The bounded family of conjugates of the supertranspose and of trp.

    S ranges over invertible parity-homogeneous matrices with entries in
    {0, ±1, ±zeta_4}; every entry of the block is free when the block has at most
    full_limit entries, otherwise S is monomial.
    """
    if order % 4:
        raise InvolutionError(f"Conjugation family needs zeta_4, order {order} is not a multiple of 4")
    members = []
    flip = flip_matrix(signature.n, order) if signature.n == signature.m else None
    for s in _homogeneous_matrices(signature, order, full_limit):
        try:
            members.append(FamilyMember("st", s, phi_form_map(s)))
        except SingularPhiError:
            continue
        if flip is not None:
            members.append(FamilyMember("trp", s, phi_form_map(flip @ s)))
    logger.info(f"Conjugation family on ({signature}): {len(members)} candidates")
    return members

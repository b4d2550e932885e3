"""Exact linear algebra over Q(zeta_m).

Vectors are tuples of CycScalar. Matrices are sequences of rows. Matrix spaces
are handled through their row-major flattening, index a*N + b for entry (a, b).
Elimination, nullspaces and inverses run on sympy ``DomainMatrix`` over the
scalars' cyclotomic domain.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from .cyclotomic import CycScalar, OrderMismatchError, cyclotomic_domain
from .errors import SupergradeError

logger = logging.getLogger(__name__)

Vector = tuple[CycScalar, ...]


class LinalgError(SupergradeError):
    """Base exception for linear algebra errors."""
    pass


class DimensionMismatchError(LinalgError):
    """Operands live in different ambient spaces."""
    pass


class SingularMatrixError(LinalgError):
    """A matrix that must be invertible is singular."""
    pass


# ========== DomainMatrix conversion ==========

def _order_of(rows: Sequence[Sequence[CycScalar]], order: Optional[int]) -> int:
    if order is not None:
        return order
    for row in rows:
        for x in row:
            return x.order
    raise LinalgError("Cannot infer the scalar field of an empty matrix; pass order=")


def to_domain_matrix(rows: Sequence[Sequence[CycScalar]], ncols: int, order: int) -> DomainMatrix:
    """Pack CycScalar rows into a DomainMatrix over Q(zeta_order).

    Raises:
        DimensionMismatchError: If a row does not have ncols entries
        OrderMismatchError: If an entry lives in another cyclotomic field
    """
    data = []
    for row in rows:
        if len(row) != ncols:
            raise DimensionMismatchError(f"Ragged matrix: expected {ncols} columns, got {len(row)}")
        for x in row:
            if x.order != order:
                raise OrderMismatchError(f"Entry in Q(zeta_{x.order}) inside a Q(zeta_{order}) matrix")
        data.append([x.value for x in row])
    return DomainMatrix(data, (len(data), ncols), cyclotomic_domain(order))


def from_domain_matrix(matrix: DomainMatrix, order: int) -> list[list[CycScalar]]:
    return [[CycScalar.from_domain(x, order) for x in row] for row in matrix.to_list()]


# ========== Elimination ==========

def _echelon(rows: Sequence[Sequence[CycScalar]], ncols: int,
             order: int) -> tuple[list[list[CycScalar]], list[int]]:
    """Reduced row-echelon form; returns the nonzero rows and their pivot columns."""
    if not rows:
        return [], []
    reduced, pivots = to_domain_matrix(rows, ncols, order).rref()
    return from_domain_matrix(reduced, order)[: len(pivots)], list(pivots)


def rref(matrix: Sequence[Sequence[CycScalar]], order: Optional[int] = None) -> list[list[CycScalar]]:
    """Canonical reduced row-echelon form, zero rows kept at the bottom."""
    if not matrix:
        return []
    ncols = len(matrix[0])
    m = _order_of(matrix, order)
    reduced, _ = _echelon(matrix, ncols, m)
    zero_row = [CycScalar.zero(m)] * ncols
    return reduced + [list(zero_row) for _ in range(len(matrix) - len(reduced))]


def rank(matrix: Sequence[Sequence[CycScalar]]) -> int:
    if not matrix:
        return 0
    return len(_echelon(matrix, len(matrix[0]), _order_of(matrix, None))[1])


def nullspace(matrix: Sequence[Sequence[CycScalar]], ncols: Optional[int] = None,
              order: Optional[int] = None) -> "Subspace":
    """Right nullspace {v : M v = 0} as a Subspace of F^ncols."""
    if ncols is None:
        if not matrix:
            raise LinalgError("Column count of an empty matrix is ambiguous; pass ncols=")
        ncols = len(matrix[0])
    m = _order_of(matrix, order)
    if not matrix:
        return Subspace.full(ncols, m)
    if not ncols:
        return Subspace.zero(0, m)
    kernel = to_domain_matrix(matrix, ncols, m).nullspace()
    return Subspace.span(from_domain_matrix(kernel, m), ncols, m)


def matrix_inverse(matrix: Sequence[Sequence[CycScalar]]) -> list[list[CycScalar]]:
    """Inverse of a square matrix.

    Raises:
        SingularMatrixError: If M is singular
    """
    n = len(matrix)
    m = _order_of(matrix, None)
    try:
        inverse = to_domain_matrix(matrix, n, m).inv()
    except (DMNonInvertibleMatrixError, ValueError, ZeroDivisionError) as e:
        raise SingularMatrixError(f"{n}x{n} matrix is singular") from e
    return from_domain_matrix(inverse, m)


def mat_vec(matrix: Sequence[Sequence[CycScalar]], v: Sequence[CycScalar],
            order: Optional[int] = None) -> Vector:
    """M v. An empty v needs order= to name the scalar field of the zero result.

    Raises:
        DimensionMismatchError: If a row length differs from len(v)
        LinalgError: If v is empty and no order is given
    """
    if not matrix:
        return ()
    m = order if order is not None else (v[0].order if v else _order_of(matrix, None))
    out = []
    for row in matrix:
        if len(row) != len(v):
            raise DimensionMismatchError(f"Row of length {len(row)} against a vector of length {len(v)}")
        acc = CycScalar.zero(m)
        for a, b in zip(row, v):
            if a.is_zero() or b.is_zero():
                continue
            acc = acc + a * b
        out.append(acc)
    return tuple(out)


def is_zero_vector(v: Iterable[CycScalar]) -> bool:
    return all(x.is_zero() for x in v)


# ========== Subspaces ==========

@dataclass(frozen=True)
class Subspace:
    """A subspace of F^ambient_dim stored by its canonical RREF basis."""

    ambient_dim: int
    order: int
    basis: tuple[Vector, ...]
    pivots: tuple[int, ...]

    @classmethod
    def span(cls, vectors: Iterable[Sequence[CycScalar]], ambient_dim: int, order: int) -> "Subspace":
        rows = [tuple(v) for v in vectors]
        for v in rows:
            if len(v) != ambient_dim:
                raise DimensionMismatchError(f"Vector of length {len(v)} in ambient dimension {ambient_dim}")
        rows = [v for v in rows if not is_zero_vector(v)]
        reduced, pivots = _echelon(rows, ambient_dim, order)
        return cls(ambient_dim, order, tuple(tuple(r) for r in reduced), tuple(pivots))

    @classmethod
    def zero(cls, ambient_dim: int, order: int) -> "Subspace":
        return cls(ambient_dim, order, (), ())

    @classmethod
    def full(cls, ambient_dim: int, order: int) -> "Subspace":
        return cls.coordinate(range(ambient_dim), ambient_dim, order)

    @classmethod
    def coordinate(cls, indices: Iterable[int], ambient_dim: int, order: int) -> "Subspace":
        """Span of standard basis vectors e_i for the given indices."""
        zero, one = CycScalar.zero(order), CycScalar.one(order)
        idx = sorted(set(indices))
        basis = tuple(tuple(one if j == i else zero for j in range(ambient_dim)) for i in idx)
        return cls(ambient_dim, order, basis, tuple(idx))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_domain_matrix(self) -> DomainMatrix:
        """The basis as the rows of a DomainMatrix."""
        return to_domain_matrix(self.basis, self.ambient_dim, self.order)

    def residue(self, v: Sequence[CycScalar]) -> Vector:
        """v minus its reduction against the basis; zero iff v lies in the subspace."""
        if len(v) != self.ambient_dim:
            raise DimensionMismatchError(f"Vector of length {len(v)} in ambient dimension {self.ambient_dim}")
        work = list(v)
        for row, p in zip(self.basis, self.pivots):
            factor = work[p]
            if factor.is_zero():
                continue
            for j in range(p, self.ambient_dim):
                if not row[j].is_zero():
                    work[j] = work[j] - factor * row[j]
        return tuple(work)

    def contains(self, v: Sequence[CycScalar]) -> bool:
        return is_zero_vector(self.residue(v))

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def coordinates(self, v: Sequence[CycScalar]) -> Vector:
        """Coefficients of v in the canonical basis.

        Raises:
            LinalgError: If v is not in the subspace
        """
        if not self.contains(v):
            raise LinalgError("Vector does not lie in the subspace")
        return tuple(v[p] for p in self.pivots)

    def is_subspace_of(self, other: "Subspace") -> bool:
        _check_ambient(self, other)
        return all(other.contains(b) for b in self.basis)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def _check_ambient(u: Subspace, v: Subspace) -> None:
    if u.ambient_dim != v.ambient_dim:
        raise DimensionMismatchError(f"Ambient dimensions differ: {u.ambient_dim} vs {v.ambient_dim}")
    if u.order != v.order:
        raise OrderMismatchError(f"Subspaces over Q(zeta_{u.order}) and Q(zeta_{v.order})")


def span_equal(u: Subspace, v: Subspace) -> bool:
    """Equality of spans, read off the canonical bases.

    Raises:
        DimensionMismatchError: If the ambient dimensions differ
        OrderMismatchError: If the scalar fields differ
    """
    _check_ambient(u, v)
    return u.basis == v.basis


def subspace_sum(u: Subspace, v: Subspace) -> Subspace:
    _check_ambient(u, v)
    return Subspace.span(u.basis + v.basis, u.ambient_dim, u.order)


def intersect(u: Subspace, v: Subspace) -> Subspace:
    """U ∩ V: combinations of V's basis whose residue modulo U vanishes."""
    _check_ambient(u, v)
    if not u.dim or not v.dim:
        return Subspace.zero(u.ambient_dim, u.order)
    residues = [u.residue(b) for b in v.basis]
    # columns are residues; solve sum c_j r_j = 0
    system = [[r[i] for r in residues] for i in range(u.ambient_dim)]
    kernel = to_domain_matrix(system, len(residues), u.order).nullspace()
    if not kernel.shape[0]:
        return Subspace.zero(u.ambient_dim, u.order)
    combos = kernel * v.to_domain_matrix()
    return Subspace.span(from_domain_matrix(combos, u.order), u.ambient_dim, u.order)


def sum_of(spaces: Iterable[Subspace], ambient_dim: int, order: int) -> Subspace:
    vectors: list[Vector] = []
    for s in spaces:
        if s.order != order:
            raise OrderMismatchError(f"Subspace over Q(zeta_{s.order}) in a Q(zeta_{order}) sum")
        vectors.extend(s.basis)
    return Subspace.span(vectors, ambient_dim, order)

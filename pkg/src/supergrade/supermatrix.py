"""The matrix superalgebra M_{n,m}(F) and sub-superalgebras of it.

Index i (0-based) is even when i < n and odd otherwise. A matrix unit E_ab has
parity parity(a) + parity(b). Matrices flatten row-major: entry (a, b) sits at
a*N + b with N = n + m.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .cyclotomic import CycScalar, scalar
from .errors import SupergradeError
from .exact_linalg import Subspace, Vector, intersect, nullspace

logger = logging.getLogger(__name__)


class SignatureError(SupergradeError):
    """Invalid super-signature or mismatched operands."""
    pass


class StructureClosureError(SupergradeError):
    """A sub-superalgebra is not closed under its product."""
    pass


# ========== Signatures ==========

@dataclass(frozen=True)
class SuperSignature:
    """Block sizes (n, m) of M_{n,m}."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0 or self.n + self.m < 1:
            raise SignatureError(f"Invalid super-signature ({self.n},{self.m})")

    @classmethod
    def parse(cls, text: str) -> "SuperSignature":
        parts = text.replace(" ", "").split(",")
        if len(parts) != 2:
            raise SignatureError(f"Signature must be 'n,m', got {text!r}")
        try:
            return cls(int(parts[0]), int(parts[1]))
        except ValueError as e:
            raise SignatureError(f"Signature must be 'n,m', got {text!r}") from e

    @property
    def size(self) -> int:
        return self.n + self.m

    @property
    def is_nontrivial(self) -> bool:
        return self.n * self.m != 0

    def parity(self, i: int) -> int:
        return 0 if i < self.n else 1

    def unit_parity(self, a: int, b: int) -> int:
        return (self.parity(a) + self.parity(b)) % 2

    def render(self) -> str:
        return f"{self.n},{self.m}"

    def __str__(self) -> str:
        return self.render()


def sign_factor(signature: SuperSignature, u: int, v: int) -> int:
    """-1 exactly when u is odd and v is even; the supertranspose sign at (u, v)."""
    return -1 if signature.parity(u) == 1 and signature.parity(v) == 0 else 1


# ========== Matrices ==========

class SuperMatrix:
    """An (n+m)x(n+m) matrix over Q(zeta_order) with a super-signature."""

    __slots__ = ("signature", "order", "rows")

    def __init__(self, signature: SuperSignature, order: int, rows: Sequence[Sequence[CycScalar]]):
        size = signature.size
        if len(rows) != size or any(len(r) != size for r in rows):
            raise SignatureError(f"Expected a {size}x{size} matrix for signature ({signature})")
        self.signature = signature
        self.order = order
        self.rows = tuple(tuple(r) for r in rows)

    # ----- constructors -----

    @classmethod
    def zero(cls, signature: SuperSignature, order: int) -> "SuperMatrix":
        z = CycScalar.zero(order)
        return cls(signature, order, [[z] * signature.size for _ in range(signature.size)])

    @classmethod
    def identity(cls, signature: SuperSignature, order: int) -> "SuperMatrix":
        z, o = CycScalar.zero(order), CycScalar.one(order)
        n = signature.size
        return cls(signature, order, [[o if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def unit(cls, signature: SuperSignature, a: int, b: int, order: int, coef=1) -> "SuperMatrix":
        z = CycScalar.zero(order)
        n = signature.size
        rows = [[z] * n for _ in range(n)]
        rows[a][b] = scalar(coef, order)
        return cls(signature, order, rows)

    @classmethod
    def from_rows(cls, signature: SuperSignature, rows: Sequence[Sequence], order: int) -> "SuperMatrix":
        """Build from ints, Fractions, scalar strings or CycScalars."""
        return cls(signature, order, [[scalar(x, order) for x in r] for r in rows])

    @classmethod
    def from_flat(cls, signature: SuperSignature, flat: Sequence[CycScalar], order: int) -> "SuperMatrix":
        n = signature.size
        if len(flat) != n * n:
            raise SignatureError(f"Flat vector of length {len(flat)} does not fit {n}x{n}")
        return cls(signature, order, [flat[i * n:(i + 1) * n] for i in range(n)])

    @classmethod
    def from_blocks(cls, signature: SuperSignature, a, b, c, d, order: int) -> "SuperMatrix":
        """Assemble [[A, B], [C, D]] with A of size n x n and D of size m x m."""
        rows = [list(ra) + list(rb) for ra, rb in zip(a, b)] if signature.n else []
        rows += [list(rc) + list(rd) for rc, rd in zip(c, d)] if signature.m else []
        return cls.from_rows(signature, rows, order)

    # ----- views -----

    @property
    def size(self) -> int:
        return self.signature.size

    def __getitem__(self, index: tuple[int, int]) -> CycScalar:
        i, j = index
        return self.rows[i][j]

    def flat(self) -> Vector:
        return tuple(x for r in self.rows for x in r)

    def nonzero_entries(self) -> list[tuple[int, int, CycScalar]]:
        return [(i, j, x) for i, r in enumerate(self.rows) for j, x in enumerate(r) if not x.is_zero()]

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.rows for x in r)

    def _check(self, other: "SuperMatrix") -> None:
        if other.signature != self.signature:
            raise SignatureError(f"Signature mismatch: ({self.signature}) vs ({other.signature})")
        if other.order != self.order:
            raise SignatureError(f"Scalar field mismatch: zeta_{self.order} vs zeta_{other.order}")

    # ----- arithmetic -----

    def __add__(self, other: "SuperMatrix") -> "SuperMatrix":
        self._check(other)
        return SuperMatrix(self.signature, self.order,
                           [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: "SuperMatrix") -> "SuperMatrix":
        self._check(other)
        return SuperMatrix(self.signature, self.order,
                           [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self) -> "SuperMatrix":
        return SuperMatrix(self.signature, self.order, [[-a for a in r] for r in self.rows])

    def scale(self, c) -> "SuperMatrix":
        c = scalar(c, self.order) if not isinstance(c, (int, Fraction)) else c
        return SuperMatrix(self.signature, self.order, [[a * c for a in r] for r in self.rows])

    def __rmul__(self, c) -> "SuperMatrix":
        return self.scale(c)

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        return mul(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SuperMatrix):
            return NotImplemented
        return self.signature == other.signature and self.order == other.order and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.signature, self.order, self.rows))

    # ----- structure -----

    def transpose(self) -> "SuperMatrix":
        n = self.size
        return SuperMatrix(self.signature, self.order, [[self.rows[j][i] for j in range(n)] for i in range(n)])

    def _masked(self, parity: int) -> "SuperMatrix":
        sig = self.signature
        z = CycScalar.zero(self.order)
        return SuperMatrix(sig, self.order, [
            [x if sig.unit_parity(i, j) == parity else z for j, x in enumerate(r)]
            for i, r in enumerate(self.rows)
        ])

    def even_part(self) -> "SuperMatrix":
        return self._masked(0)

    def odd_part(self) -> "SuperMatrix":
        return self._masked(1)

    def parity(self) -> Optional[int]:
        """0 or 1 for homogeneous matrices (zero counts as even), None when mixed."""
        parities = {self.signature.unit_parity(i, j) for i, j, _ in self.nonzero_entries()}
        if not parities:
            return 0
        if len(parities) == 1:
            return parities.pop()
        return None

    def is_homogeneous(self) -> bool:
        return self.parity() is not None

    def lift(self, new_order: int) -> "SuperMatrix":
        return SuperMatrix(self.signature, new_order, [[x.lift(new_order) for x in r] for r in self.rows])

    def with_signature(self, signature: SuperSignature) -> "SuperMatrix":
        return SuperMatrix(signature, self.order, self.rows)

    def render(self) -> list[list[str]]:
        return [[x.render() for x in r] for r in self.rows]

    def __repr__(self) -> str:
        return f"SuperMatrix(({self.signature}), {self.render()})"


def mul(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    """Ordinary matrix product, skipping zero entries."""
    a._check(b)
    n = a.size
    z = CycScalar.zero(a.order)
    out = [[None] * n for _ in range(n)]
    b_rows = [[(j, x) for j, x in enumerate(r) if not x.is_zero()] for r in b.rows]
    for i, row in enumerate(a.rows):
        acc = out[i]
        for k, x in enumerate(row):
            if x.is_zero():
                continue
            for j, y in b_rows[k]:
                term = x * y
                acc[j] = term if acc[j] is None else acc[j] + term
    return SuperMatrix(a.signature, a.order, [[z if v is None else v for v in r] for r in out])


def even_part(a: SuperMatrix) -> SuperMatrix:
    return a.even_part()


def odd_part(a: SuperMatrix) -> SuperMatrix:
    return a.odd_part()


def _homogeneous_parts(a: SuperMatrix) -> list[tuple[int, SuperMatrix]]:
    return [(p, part) for p, part in ((0, a.even_part()), (1, a.odd_part())) if not part.is_zero()]


def _signed_sum(a: SuperMatrix, b: SuperMatrix, forward: int, backward_sign: int, scale=None) -> SuperMatrix:
    """Bilinear extension of forward*xy + backward_sign*(-1)^{|x||y|} yx over homogeneous parts."""
    a._check(b)
    total = SuperMatrix.zero(a.signature, a.order)
    for pa, x in _homogeneous_parts(a):
        for pb, y in _homogeneous_parts(b):
            sign = -1 if pa and pb else 1
            term = mul(y, x).scale(sign * backward_sign) if backward_sign else None
            if forward:
                fwd = mul(x, y)
                term = fwd if term is None else fwd + term
            total = total + term
    return total.scale(scale) if scale is not None else total


def supercommutator(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    """[a, b] = ab - (-1)^{|a||b|} ba, extended bilinearly."""
    return _signed_sum(a, b, 1, -1)


def jordan_superproduct(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    """a o b = (ab + (-1)^{|a||b|} ba) / 2, extended bilinearly."""
    return _signed_sum(a, b, 1, 1, Fraction(1, 2))


def super_opposite_product(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    """Product of the super-opposite algebra: (-1)^{|a||b|} ba."""
    return _signed_sum(a, b, 0, 1)


def supertranspose(x: SuperMatrix) -> SuperMatrix:
    """(X^st)_{uv} = sign(u, v) X_{vu}; on blocks [[A,B],[C,D]] -> [[A^t, C^t], [-B^t, D^t]]."""
    sig = x.signature
    n = x.size
    return SuperMatrix(sig, x.order, [
        [x.rows[v][u] if sign_factor(sig, u, v) == 1 else -x.rows[v][u] for v in range(n)]
        for u in range(n)
    ])


def parity_operator(signature: SuperSignature, order: int) -> SuperMatrix:
    """diag(I_n, -I_m); conjugation by it is the parity automorphism."""
    return SuperMatrix.from_rows(
        signature,
        [[(1 if signature.parity(i) == 0 else -1) if i == j else 0 for j in range(signature.size)]
         for i in range(signature.size)],
        order,
    )


def kron(outer: SuperMatrix, inner: SuperMatrix) -> SuperMatrix:
    """Kronecker product with a purely even inner factor.

    Row (i, k) maps to i*d + k, so the result stays in the standard frame with
    signature (n*d, m*d).
    """
    if inner.signature.m != 0:
        raise SignatureError(f"Inner tensor factor must be purely even, got ({inner.signature})")
    if inner.order != outer.order:
        raise SignatureError("Tensor factors live over different scalar fields")
    d = inner.size
    sig = SuperSignature(outer.signature.n * d, outer.signature.m * d)
    size = sig.size
    z = CycScalar.zero(outer.order)
    rows = [[z] * size for _ in range(size)]
    inner_entries = inner.nonzero_entries()
    for i, j, x in outer.nonzero_entries():
        for k, l, y in inner_entries:
            rows[i * d + k][j * d + l] = x * y
    return SuperMatrix(sig, outer.order, rows)


def matrix_units(signature: SuperSignature, order: int) -> list[SuperMatrix]:
    """E_ab in flattening order."""
    n = signature.size
    return [SuperMatrix.unit(signature, a, b, order) for a in range(n) for b in range(n)]


def parity_subspace(signature: SuperSignature, parity: int, order: int) -> Subspace:
    n = signature.size
    return Subspace.coordinate(
        [a * n + b for a in range(n) for b in range(n) if signature.unit_parity(a, b) == parity],
        n * n, order,
    )


def even_ideals(signature: SuperSignature, order: int) -> tuple[Subspace, Subspace]:
    """I1 (upper-left block) and I2 (lower-right block) of the even part."""
    n, size = signature.n, signature.size
    i1 = [a * size + b for a in range(n) for b in range(n)]
    i2 = [a * size + b for a in range(n, size) for b in range(n, size)]
    return Subspace.coordinate(i1, size * size, order), Subspace.coordinate(i2, size * size, order)


def idempotent_witness(signature: SuperSignature, order: int) -> SuperMatrix:
    """a = E_{0,n} + E_{n,n}: an idempotent with nonzero odd part (needs n, m >= 1)."""
    if not signature.is_nontrivial:
        raise SignatureError(f"Idempotent witness needs a nontrivial signature, got ({signature})")
    n = signature.n
    return SuperMatrix.unit(signature, 0, n, order) + SuperMatrix.unit(signature, n, n, order)


def centralizer(matrices: Iterable[SuperMatrix], signature: SuperSignature, order: int) -> Subspace:
    """{X : XB = BX for every B} as a subspace of the flattened matrix space."""
    size = signature.size
    dim = size * size
    z = CycScalar.zero(order)
    system: list[list[CycScalar]] = []
    for b in matrices:
        block = [[z] * dim for _ in range(dim)]
        for p in range(size):
            for q in range(size):
                col = p * size + q
                # (E_pq B)_{p,j} = B_{q,j};  (B E_pq)_{i,q} = B_{i,p}
                for j in range(size):
                    x = b.rows[q][j]
                    if not x.is_zero():
                        block[p * size + j][col] = block[p * size + j][col] + x
                for i in range(size):
                    x = b.rows[i][p]
                    if not x.is_zero():
                        block[i * size + q][col] = block[i * size + q][col] - x
        system.extend(block)
    if not system:
        return Subspace.full(dim, order)
    return nullspace(system, ncols=dim, order=order)


# ========== Sub-superalgebras ==========

class ProductRule(str, Enum):
    """Product a sub-superalgebra is closed under."""
    ASSOCIATIVE = "associative"
    JORDAN_SUPER = "jordan-super"
    LIE_SUPER = "lie-super"


def product(rule: ProductRule, a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    if rule == ProductRule.ASSOCIATIVE:
        return mul(a, b)
    if rule == ProductRule.JORDAN_SUPER:
        return jordan_superproduct(a, b)
    return supercommutator(a, b)


@dataclass(frozen=True)
class SuperAlgebraView:
    """A subspace of M_{n,m} together with the product it should be closed under."""

    signature: SuperSignature
    space: Subspace
    rule: ProductRule = ProductRule.ASSOCIATIVE
    label: str = ""

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def dim(self) -> int:
        return self.space.dim

    def basis_matrices(self) -> list[SuperMatrix]:
        return [SuperMatrix.from_flat(self.signature, v, self.order) for v in self.space.basis]

    def contains(self, x: SuperMatrix) -> bool:
        return self.space.contains(x.flat())

    def closure_violation(self) -> Optional[tuple[int, int]]:
        """First basis pair (i, j) whose product leaves the span, or None."""
        basis = self.basis_matrices()
        for i, a in enumerate(basis):
            for j, b in enumerate(basis):
                if not self.contains(product(self.rule, a, b)):
                    logger.debug(f"{self.label or 'view'}: basis pair ({i},{j}) not closed")
                    return i, j
        return None

    def is_closed(self) -> bool:
        return self.closure_violation() is None

    def even_subspace(self) -> Subspace:
        return intersect(self.space, parity_subspace(self.signature, 0, self.order))

    def odd_subspace(self) -> Subspace:
        return intersect(self.space, parity_subspace(self.signature, 1, self.order))


def q_superalgebra(n: int, order: int = 4) -> SuperAlgebraView:
    """Q(n): matrices [[X, Y], [Y, X]] inside M_{n,n}."""
    if n < 1:
        raise SignatureError("Q(n) needs n >= 1")
    sig = SuperSignature(n, n)
    size = 2 * n
    vectors = []
    for i in range(n):
        for j in range(n):
            even = SuperMatrix.unit(sig, i, j, order) + SuperMatrix.unit(sig, n + i, n + j, order)
            odd = SuperMatrix.unit(sig, i, n + j, order) + SuperMatrix.unit(sig, n + i, j, order)
            vectors += [even.flat(), odd.flat()]
    view = SuperAlgebraView(sig, Subspace.span(vectors, size * size, order), ProductRule.ASSOCIATIVE, f"Q({n})")
    logger.debug(f"Built Q({n}) of dimension {view.dim}")
    return view


# ========== Exchange structures ==========

def pair_index(signature: SuperSignature, copy: int, i: int) -> int:
    """Position of index i of copy 0 or 1 inside the doubled signature (2n, 2m)."""
    n, m = signature.n, signature.m
    if i < n:
        return copy * n + i
    return 2 * n + copy * m + (i - n)


def doubled_signature(signature: SuperSignature) -> SuperSignature:
    return SuperSignature(2 * signature.n, 2 * signature.m)


def embed_pair(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    """(a, b) -> diag(a, st(b)); the second factor carries the super-opposite product."""
    a._check(b)
    sig = a.signature
    big = doubled_signature(sig)
    z = CycScalar.zero(a.order)
    rows = [[z] * big.size for _ in range(big.size)]
    bst = supertranspose(b)
    for i, j, x in a.nonzero_entries():
        rows[pair_index(sig, 0, i)][pair_index(sig, 0, j)] = x
    for i, j, x in bst.nonzero_entries():
        rows[pair_index(sig, 1, i)][pair_index(sig, 1, j)] = x
    return SuperMatrix(big, a.order, rows)


def exchange_phi(signature: SuperSignature, order: int) -> SuperMatrix:
    """Psi with Psi[(0,i),(1,i)] = 1 and Psi[(1,i),(0,i)] = +1 (i even) or -1 (i odd)."""
    big = doubled_signature(signature)
    z = CycScalar.zero(order)
    rows = [[z] * big.size for _ in range(big.size)]
    for i in range(signature.size):
        rows[pair_index(signature, 0, i)][pair_index(signature, 1, i)] = CycScalar.one(order)
        rows[pair_index(signature, 1, i)][pair_index(signature, 0, i)] = CycScalar.from_rational(
            1 if signature.parity(i) == 0 else -1, order
        )
    return SuperMatrix(big, order, rows)


def exchange_pair(view: SuperAlgebraView):
    """A ⊕ A^sop inside M_{2n,2m} with the swap superinvolution (a, b) -> (b, a).

    Returns:
        (SuperAlgebraView of the embedded pair, Superinvolution on the doubled algebra)

    Raises:
        InvolutionError: If the swap map fails the superinvolution axioms
    """
    from .superinvolution import Superinvolution

    sig, order = view.signature, view.order
    zero = SuperMatrix.zero(sig, order)
    vectors = []
    for a in view.basis_matrices():
        vectors.append(embed_pair(a, zero).flat())
        vectors.append(embed_pair(zero, a).flat())
    big = doubled_signature(sig)
    pair_view = SuperAlgebraView(
        big, Subspace.span(vectors, big.size ** 2, order), ProductRule.ASSOCIATIVE,
        f"{view.label or 'A'}+{view.label or 'A'}^sop",
    )
    involution = Superinvolution.exchange(sig, order)
    return pair_view, involution

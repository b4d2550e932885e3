"""Finite abelian groups in invariant-factor form.

Covers the grading group G, its elements, the dual group of characters,
explicit subgroups, annihilators and quotient groups (as coset tables).
"""

import itertools
import logging
import re
from dataclasses import dataclass
from functools import cached_property
from math import lcm, prod
from typing import Callable, Iterable, Optional

from sympy import factorint

from .cyclotomic import CycScalar, root_of_unity
from .errors import SupergradeError

logger = logging.getLogger(__name__)


class GroupError(SupergradeError):
    """Base exception for group errors."""
    pass


class GroupMismatchError(GroupError):
    """Elements or characters from different groups were combined."""
    pass


class SubgroupError(GroupError):
    """An element set is not a subgroup."""
    pass


class GroupParseError(GroupError):
    """Malformed group or element text."""
    pass


def invariant_factors_from_orders(orders: Iterable[int]) -> tuple[int, ...]:
    """Normalize a product of cyclic groups to invariant factors n1 | n2 | ... | nk.

    Args:
        orders: Orders of the cyclic factors, in any order

    Returns:
        Invariant factors, each >= 2 (empty for the trivial group)
    """
    prime_powers: dict[int, list[int]] = {}
    for n in orders:
        if n < 1:
            raise GroupError(f"Cyclic order must be >= 1, got {n}")
        for p, e in factorint(n).items():
            prime_powers.setdefault(int(p), []).append(int(p) ** int(e))
    if not prime_powers:
        return ()
    length = max(len(powers) for powers in prime_powers.values())
    factors = [1] * length
    for powers in prime_powers.values():
        powers.sort(reverse=True)
        for i, q in enumerate(powers):
            factors[i] *= q
    return tuple(sorted(f for f in factors if f > 1))


# ========== Groups ==========

@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Z_{n1} x ... x Z_{nk} with n1 | n2 | ... | nk."""

    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self):
        factors = tuple(int(n) for n in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", factors)
        for n in factors:
            if n < 2:
                raise GroupError(f"Invariant factors must be >= 2, got {factors}")
        for a, b in zip(factors, factors[1:]):
            if b % a:
                raise GroupError(f"Invariant factors must form a divisibility chain, got {factors}")

    @classmethod
    def from_cyclic_orders(cls, orders: Iterable[int]) -> "FiniteAbelianGroup":
        return cls(invariant_factors_from_orders(orders))

    @classmethod
    def parse(cls, text: str) -> "FiniteAbelianGroup":
        """Parse ``Z2xZ4`` style text (case-insensitive); ``1`` or ``trivial`` is the trivial group.

        Raises:
            GroupParseError: On malformed text
        """
        compact = text.strip().lower().replace(" ", "")
        if compact in ("", "1", "trivial", "z1"):
            return cls(())
        orders = []
        for part in compact.split("x"):
            match = re.fullmatch(r"z(\d+)", part)
            if not match:
                raise GroupParseError(f"Malformed cyclic factor {part!r} in group spec {text!r}")
            orders.append(int(match.group(1)))
        return cls.from_cyclic_orders(orders)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def order(self) -> int:
        return prod(self.invariant_factors)

    @property
    def exponent(self) -> int:
        return lcm(*self.invariant_factors) if self.invariant_factors else 1

    @property
    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def cyclotomic_order(self) -> int:
        """Ambient order of the scalar field used for this group: lcm(exponent, 4)."""
        return lcm(self.exponent, 4)

    def render(self) -> str:
        if self.is_trivial:
            return "1"
        return "x".join(f"Z{n}" for n in self.invariant_factors)

    def __str__(self) -> str:
        return self.render()

    # ----- elements and characters -----

    def element(self, *exponents: int) -> "GroupElement":
        if len(exponents) != self.rank:
            raise GroupError(f"{self.render()} elements have {self.rank} coordinates, got {len(exponents)}")
        return GroupElement(self, tuple(a % n for a, n in zip(exponents, self.invariant_factors)))

    def identity(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.rank)

    def parse_element(self, text: str) -> "GroupElement":
        """Parse ``(a1,...,ak)``; a bare integer is accepted for cyclic groups."""
        body = text.strip()
        if body.startswith("(") and body.endswith(")"):
            body = body[1:-1]
        body = body.replace(" ", "")
        if not body:
            parts: list[str] = []
        else:
            parts = body.split(",")
        try:
            values = [int(p) for p in parts]
        except ValueError as e:
            raise GroupParseError(f"Malformed element {text!r}: {e}") from e
        if len(values) != self.rank:
            raise GroupParseError(
                f"Element {text!r} has {len(values)} coordinates, {self.render()} needs {self.rank}"
            )
        return self.element(*values)

    def parse_elements(self, text: str) -> tuple["GroupElement", ...]:
        """Parse a comma-separated element list such as ``(0,0),(1,0)`` or ``0,2,1,3``."""
        if "(" in text:
            return tuple(self.parse_element(body) for body in re.findall(r"\(([^()]*)\)", text))
        if self.rank != 1:
            raise GroupParseError(f"Element list {text!r} needs parenthesized tuples for {self.render()}")
        return tuple(self.parse_element(part) for part in text.split(",") if part.strip())

    @cached_property
    def _elements(self) -> tuple["GroupElement", ...]:
        return tuple(
            GroupElement(self, exps)
            for exps in itertools.product(*(range(n) for n in self.invariant_factors))
        )

    def elements(self) -> list["GroupElement"]:
        return list(self._elements)

    def characters(self) -> list["Character"]:
        return [
            Character(self, exps)
            for exps in itertools.product(*(range(n) for n in self.invariant_factors))
        ]

    def character(self, *exponents: int) -> "Character":
        if len(exponents) != self.rank:
            raise GroupError(f"{self.render()} characters have {self.rank} coordinates")
        return Character(self, tuple(c % n for c, n in zip(exponents, self.invariant_factors)))

    def trivial_character(self) -> "Character":
        return Character(self, (0,) * self.rank)


@dataclass(frozen=True)
class GroupElement:
    """An element (a1,...,ak) with 0 <= ai < ni."""

    group: FiniteAbelianGroup
    exponents: tuple[int, ...]

    def _check(self, other: "GroupElement") -> None:
        if other.group != self.group:
            raise GroupMismatchError(f"Elements of {self.group} and {other.group} cannot be combined")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(
            self.group,
            tuple((a + b) % n for a, b, n in zip(self.exponents, other.exponents, self.group.invariant_factors)),
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group, tuple((-a) % n for a, n in zip(self.exponents, self.group.invariant_factors)))

    def __pow__(self, k: int) -> "GroupElement":
        return GroupElement(
            self.group, tuple((a * k) % n for a, n in zip(self.exponents, self.group.invariant_factors))
        )

    @property
    def is_identity(self) -> bool:
        return not any(self.exponents)

    @property
    def order(self) -> int:
        return element_order(self)

    @property
    def sort_key(self) -> tuple[int, ...]:
        return self.exponents

    def render(self) -> str:
        return "(" + ",".join(str(a) for a in self.exponents) + ")"

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"GroupElement({self.group.render()}, {self.render()})"


@dataclass(frozen=True)
class Character:
    """The character g -> zeta_e^(sum ci*ai*e/ni), e the group exponent."""

    group: FiniteAbelianGroup
    exponents: tuple[int, ...]

    def exponent_of(self, g: GroupElement) -> int:
        """k with chi(g) = zeta_e^k."""
        if g.group != self.group:
            raise GroupMismatchError(f"Character of {self.group} evaluated at element of {g.group}")
        e = self.group.exponent
        return sum(c * a * (e // n) for c, a, n in zip(self.exponents, g.exponents, self.group.invariant_factors)) % e

    def is_one_at(self, g: GroupElement) -> bool:
        return self.exponent_of(g) == 0

    def __call__(self, g: GroupElement, order: Optional[int] = None) -> CycScalar:
        return char_eval(self, g, order)

    def __mul__(self, other: "Character") -> "Character":
        if other.group != self.group:
            raise GroupMismatchError("Characters of different groups cannot be multiplied")
        return Character(
            self.group,
            tuple((a + b) % n for a, b, n in zip(self.exponents, other.exponents, self.group.invariant_factors)),
        )

    def inverse(self) -> "Character":
        return Character(self.group, tuple((-c) % n for c, n in zip(self.exponents, self.group.invariant_factors)))

    @property
    def is_trivial(self) -> bool:
        return not any(self.exponents)

    def render(self) -> str:
        return "chi(" + ",".join(str(c) for c in self.exponents) + ")"

    def __str__(self) -> str:
        return self.render()


# ========== Group law and evaluation ==========

def mul(g: GroupElement, h: GroupElement) -> GroupElement:
    """Group law (componentwise addition mod ni)."""
    return g * h


def element_order(g: GroupElement) -> int:
    """Least t >= 1 with g^t = e."""
    t = 1
    current = g
    while not current.is_identity:
        current = current * g
        t += 1
    return t


def char_eval(chi: Character, g: GroupElement, order: Optional[int] = None) -> CycScalar:
    """Evaluate chi(g) in Q(zeta_order).

    Raises:
        GroupError: If the group exponent does not divide the ambient order
    """
    m = order if order is not None else chi.group.cyclotomic_order()
    e = chi.group.exponent
    if m % e:
        raise GroupError(f"Cyclotomic order {m} is not a multiple of the group exponent {e}")
    return root_of_unity(chi.exponent_of(g) * (m // e), m)


def enumerate_elements(group: FiniteAbelianGroup) -> list[GroupElement]:
    return group.elements()


def enumerate_characters(group: FiniteAbelianGroup) -> list[Character]:
    return group.characters()


# ========== Subgroups ==========

@dataclass(frozen=True)
class Subgroup:
    """A subgroup stored as an explicit element set."""

    group: FiniteAbelianGroup
    elements: frozenset[GroupElement]

    def __post_init__(self):
        if self.group.identity() not in self.elements:
            raise SubgroupError("Subgroup must contain the identity")
        for g in self.elements:
            if g.group != self.group:
                raise GroupMismatchError(f"Element {g} does not belong to {self.group}")
            for h in self.elements:
                if g * h not in self.elements:
                    raise SubgroupError(f"Set is not closed: {g}*{h} missing")

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g: GroupElement) -> bool:
        return g in self.elements

    def sorted_elements(self) -> list[GroupElement]:
        return sorted(self.elements, key=lambda g: g.sort_key)

    def render(self) -> str:
        return "{" + ",".join(g.render() for g in self.sorted_elements()) + "}"


def _closure(group: FiniteAbelianGroup, generators: Iterable[GroupElement]) -> frozenset[GroupElement]:
    span = {group.identity()}
    frontier = list(span)
    gens = list(generators)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y not in span:
                    span.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(span)


def generated_subgroup(group: FiniteAbelianGroup, generators: Iterable[GroupElement]) -> Subgroup:
    return Subgroup(group, _closure(group, generators))


def supports_generate(group: FiniteAbelianGroup, support: Iterable[GroupElement]) -> bool:
    """Whether a grading support generates the whole group."""
    return len(_closure(group, support)) == group.order


def subgroups(group: FiniteAbelianGroup) -> list[Subgroup]:
    """All subgroups, ordered by size then by sorted elements."""
    found = {_closure(group, [])}
    frontier = list(found)
    while frontier:
        nxt = []
        for sub in frontier:
            for g in group.elements():
                if g in sub:
                    continue
                bigger = _closure(group, list(sub) + [g])
                if bigger not in found:
                    found.add(bigger)
                    nxt.append(bigger)
        frontier = nxt
    ordered = sorted(found, key=lambda s: (len(s), sorted(g.sort_key for g in s)))
    return [Subgroup(group, s) for s in ordered]


def generated_characters(group: FiniteAbelianGroup, generators: Iterable[Character]) -> frozenset[Character]:
    """The subgroup of the dual group generated by some characters."""
    span = {group.trivial_character()}
    frontier = list(span)
    gens = list(generators)
    while frontier:
        nxt = []
        for x in frontier:
            for chi in gens:
                y = x * chi
                if y not in span:
                    span.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(span)


def annihilator(characters: Iterable[Character], group: Optional[FiniteAbelianGroup] = None) -> Subgroup:
    """Subgroup of all g with chi(g) = 1 for every chi in the character set.

    Raises:
        SubgroupError: If the character set is not closed under product
    """
    chars = frozenset(characters)
    if group is None:
        if not chars:
            raise GroupError("Cannot infer the group of an empty character set")
        group = next(iter(chars)).group
    if chars:
        if group.trivial_character() not in chars:
            raise SubgroupError("Character set must contain the trivial character")
        for a in chars:
            for b in chars:
                if a * b not in chars:
                    raise SubgroupError(f"Character set is not closed: {a}*{b} missing")
    elements = frozenset(g for g in group.elements() if all(chi.is_one_at(g) for chi in chars))
    result = Subgroup(group, elements)
    logger.debug(f"Annihilator of {len(chars)} characters in {group}: order {result.order}")
    return result


def character_annihilator(subgroup: Subgroup) -> frozenset[Character]:
    """Characters that are trivial on a subgroup."""
    return frozenset(
        chi for chi in subgroup.group.characters() if all(chi.is_one_at(g) for g in subgroup.elements)
    )


# ========== Quotients ==========

@dataclass(frozen=True)
class QuotientGroup:
    """G/H materialized as a coset table; coset 0 contains the identity."""

    parent: FiniteAbelianGroup
    subgroup: Subgroup
    cosets: tuple[frozenset[GroupElement], ...]

    @property
    def order(self) -> int:
        return len(self.cosets)

    @cached_property
    def _index(self) -> dict[GroupElement, int]:
        return {g: i for i, coset in enumerate(self.cosets) for g in coset}

    def project(self, g: GroupElement) -> int:
        return self._index[g]

    def representative(self, index: int) -> GroupElement:
        return min(self.cosets[index], key=lambda g: g.sort_key)

    def mul(self, i: int, j: int) -> int:
        return self.project(self.representative(i) * self.representative(j))

    def element_order(self, index: int) -> int:
        t, current = 1, index
        while current != 0:
            current = self.mul(current, index)
            t += 1
        return t

    def normalized(self) -> tuple[FiniteAbelianGroup, dict[int, GroupElement]]:
        """Invariant-factor form of the quotient with an explicit isomorphism from cosets.

        Element-order counts per prime determine the invariant factors; generators
        are then found by a bounded search over cosets of the right orders.
        """
        orders = [self.element_order(i) for i in range(self.order)]
        cyclic_orders = []
        for p in factorint(self.order):
            p = int(p)
            counts = [1]
            k = 1
            while counts[-1] < _p_part(self.order, p):
                counts.append(sum(1 for o in orders if (p**k) % o == 0))
                k += 1
            ranks = [_log_exact(counts[i] // counts[i - 1], p) for i in range(1, len(counts))]
            for i in range(1, (ranks[0] if ranks else 0) + 1):
                cyclic_orders.append(p ** sum(1 for r in ranks if r >= i))
        target = FiniteAbelianGroup.from_cyclic_orders(cyclic_orders)
        wanted = target.invariant_factors
        choices = [[i for i in range(self.order) if orders[i] == n] for n in wanted]
        for gens in itertools.product(*choices):
            mapping: dict[int, GroupElement] = {}
            for exps in itertools.product(*(range(n) for n in wanted)):
                idx = 0
                for gen, a in zip(gens, exps):
                    for _ in range(a):
                        idx = self.mul(idx, gen)
                mapping[idx] = target.element(*exps)
            if len(mapping) == self.order:
                return target, mapping
        raise GroupError(f"No isomorphism found for quotient of {self.parent} by {self.subgroup.render()}")


def _p_part(n: int, p: int) -> int:
    part = 1
    while n % p == 0:
        n //= p
        part *= p
    return part


def _log_exact(value: int, p: int) -> int:
    k = 0
    while value > 1:
        if value % p:
            raise GroupError(f"{value} is not a power of {p}")
        value //= p
        k += 1
    return k


def quotient(group: FiniteAbelianGroup, subgroup: Subgroup) -> tuple[QuotientGroup, Callable[[GroupElement], int]]:
    """Quotient group G/H and its projection map.

    Raises:
        GroupMismatchError: If H belongs to another group
    """
    if subgroup.group != group:
        raise GroupMismatchError(f"Subgroup of {subgroup.group} used with {group}")
    seen: set[GroupElement] = set()
    cosets = []
    for g in group.elements():
        if g in seen:
            continue
        coset = frozenset(g * h for h in subgroup.elements)
        seen |= coset
        cosets.append(coset)
    q = QuotientGroup(group, subgroup, tuple(cosets))
    logger.debug(f"Quotient of {group} by subgroup of order {subgroup.order}: {q.order} cosets")
    return q, q.project

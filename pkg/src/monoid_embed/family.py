"""Independent family of sets, realised as coordinate bits.

Every node whose last bit is 0 owns one set of the family.  A node ending
in 1 refers to the complement of the set owned by its 0-sibling, and the
set attached to a node is the intersection of those signed sets along its
chain of initial segments.  Symbolically that intersection is a *cube*: a
conjunction of literals over pairwise distinct bits.
"""

from __future__ import annotations

import threading
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import ConstructionError, DomainError, ResourceError
from .tree import ROOT, Node, is_proper_initial_segment, is_reduced


class Literal(NamedTuple):
    bit: Node  # always a node whose last bit is 0
    positive: bool

    def holds(self, value: bool) -> bool:
        return value == self.positive

    def __str__(self):
        return ("+" if self.positive else "-") + str(self.bit)


class Cube(frozenset):
    """Conjunction of literals on distinct bits; the empty cube is the whole ground set."""

    __slots__ = ()

    def __new__(cls, literals: Iterable[Literal] = ()):
        self = super().__new__(cls, literals)
        bits = [lit.bit for lit in self]
        if len(set(bits)) != len(bits):
            raise DomainError(f"cube mentions a bit with both polarities: {sorted(map(str, self))}")
        return self

    @property
    def bits(self) -> frozenset:
        return frozenset(lit.bit for lit in self)

    def contains(self, assignment: Mapping[Node, bool]) -> bool:
        try:
            return all(assignment[lit.bit] == lit.positive for lit in self)
        except KeyError as exc:
            raise DomainError(f"assignment does not fix bit {exc.args[0]}") from None

    def __repr__(self):
        return "Cube{" + " ".join(sorted(map(str, self))) + "}"


class BitRegistry:
    """Dense integer ids for family bits, allocated on first use."""

    def __init__(self):
        self._ids: dict[Node, int] = {}
        self._bits: list[Node] = []
        self._lock = threading.Lock()

    def get(self, bit: Node) -> int:
        if bit.last_bit != 0:
            raise DomainError(f"only nodes ending in 0 carry a family bit, got {bit}")
        found = self._ids.get(bit)
        if found is not None:
            return found
        with self._lock:
            if bit not in self._ids:
                self._ids[bit] = len(self._bits)
                self._bits.append(bit)
            return self._ids[bit]

    def bits(self) -> list[Node]:
        return list(self._bits)

    def __len__(self):
        return len(self._bits)

    def __contains__(self, bit):
        return bit in self._ids


def sharp_literal(n: Node, registry: BitRegistry | None = None) -> Literal:
    if n == ROOT:
        raise DomainError("the whole-space root carries no literal")
    bit = n.zero_form()
    if registry is not None:
        registry.get(bit)
    return Literal(bit, n.last_bit == 0)


def b_cube(n: Node, registry: BitRegistry | None = None) -> Cube:
    return Cube(sharp_literal(s, registry) for s in n.prefixes())


class ExplicitGround:
    """The ground set ``{0, ..., 2**m - 1}``; bit ``b`` owns the points with coordinate ``b`` set."""

    def __init__(self, bits: Iterable[Node], max_bits: int = 22):
        self.bits = list(bits)
        self.m = len(self.bits)
        if self.m > max_bits:
            raise ResourceError(
                f"explicit ground needs 2**{self.m} points, budget is 2**{max_bits}",
                estimate=2 ** self.m,
            )
        self.position = {b: i for i, b in enumerate(self.bits)}
        if len(self.position) != self.m:
            raise DomainError("duplicate bits in explicit ground")
        self.points = np.arange(2 ** self.m, dtype=np.int64)

    @classmethod
    def from_registry(cls, registry: BitRegistry, max_bits: int = 22) -> "ExplicitGround":
        return cls(registry.bits(), max_bits=max_bits)

    def __len__(self):
        return len(self.points)

    def _pos(self, bit):
        try:
            return self.position[bit]
        except KeyError:
            raise DomainError(f"bit {bit} is not part of this explicit ground") from None

    def coordinate(self, x: int, bit: Node) -> bool:
        return bool((x >> self._pos(bit)) & 1)

    def contains(self, x: int, cube: Cube) -> bool:
        return all(self.coordinate(x, lit.bit) == lit.positive for lit in cube)

    def mask(self, cube: Cube) -> np.ndarray:
        """Boolean membership vector of the cube over all points."""
        out = np.ones(len(self.points), dtype=bool)
        for lit in cube:
            col = ((self.points >> self._pos(lit.bit)) & 1).astype(bool)
            out &= col if lit.positive else ~col
        return out

    def assignment(self, x: int) -> dict[Node, bool]:
        return {b: bool((x >> i) & 1) for i, b in enumerate(self.bits)}

    def point(self, assignment: Mapping[Node, bool]) -> int:
        """The first point agreeing with a partial assignment."""
        x = 0
        for bit, value in assignment.items():
            if value:
                x |= 1 << self._pos(bit)
        return x


def separating_point(n: Node, q: Iterable[Node]) -> dict[Node, bool]:
    """A bit assignment inside the cube of ``n`` and outside the cube of every entry of ``q``.

    Requires ``q`` reduced, ``n`` absent from ``q`` and no entry of ``q`` a
    proper initial segment of ``n``.  The search is an exact backtracking
    solve over the relevant bits.
    """
    q = list(q)
    if not is_reduced(q):
        raise DomainError("separating_point needs a reduced word")
    if n in q:
        raise DomainError(f"{n} occurs in the word")
    # the whole-space root lies above every node
    bad = [p for p in q if p == ROOT or is_proper_initial_segment(p, n)]
    if bad:
        raise DomainError(f"{bad[0]} is a proper initial segment of {n}")

    fixed = {lit.bit: lit.positive for lit in b_cube(n)}
    cubes = sorted({b_cube(p) for p in q}, key=lambda c: (len(c), sorted(map(str, c))))

    def falsified(cube, assignment):
        return any(lit.bit in assignment and assignment[lit.bit] != lit.positive for lit in cube)

    def solve(i, assignment):
        while i < len(cubes) and falsified(cubes[i], assignment):
            i += 1
        if i == len(cubes):
            return assignment
        for lit in sorted(cubes[i], key=str):
            if lit.bit in assignment:
                continue
            found = solve(i + 1, {**assignment, lit.bit: not lit.positive})
            if found is not None:
                return found
        return None

    found = solve(0, fixed)
    if found is None:
        raise ConstructionError(f"no separating point for {n} against {sorted(map(str, q))}")
    for cube in cubes:
        for lit in cube:
            found.setdefault(lit.bit, False)
    return found

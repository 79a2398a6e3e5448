"""Finite lattices, their compact join-semilattice and its ideals."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from itertools import combinations, product
from pathlib import Path
from typing import Iterable

from .errors import DomainError, LatticeError, NotALatticeError, OrderError, ResourceError
from .report import CheckReport, timed


class FiniteLattice:
    """A finite lattice on opaque string names, with precomputed join and meet tables."""

    def __init__(self, elements: Iterable[str], leq_pairs: Iterable[tuple[str, str]], closed: bool = False):
        names = list(elements)
        if not names:
            raise LatticeError("a lattice needs at least one element")
        for x in names:
            if not isinstance(x, str) or not x:
                raise LatticeError(f"element names must be non-empty strings, got {x!r}")
        if len(set(names)) != len(names):
            dup = next(x for x in names if names.count(x) > 1)
            raise LatticeError(f"duplicate element {dup!r}", witness=[dup])
        self.elements = tuple(names)
        self.index = {x: i for i, x in enumerate(names)}
        n = len(names)
        up = [set([i]) for i in range(n)]
        for pair in leq_pairs:
            try:
                x, y = pair
            except (TypeError, ValueError):
                raise LatticeError(f"order pairs must have two entries, got {pair!r}") from None
            for z in (x, y):
                if z not in self.index:
                    raise LatticeError(f"unknown element {z!r}", witness=[z])
            up[self.index[x]].add(self.index[y])
        if closed:
            for i in range(n):
                for j in list(up[i]):
                    missing = up[j] - up[i]
                    if missing:
                        k = min(missing)
                        raise OrderError(
                            f"relation is not transitive: {names[i]} <= {names[j]} <= {names[k]}",
                            witness=[names[i], names[j], names[k]],
                        )
        else:
            for k in range(n):
                for i in range(n):
                    if k in up[i]:
                        up[i] |= up[k]
        for i in range(n):
            for j in up[i]:
                if i != j and i in up[j]:
                    raise OrderError(f"cycle between {names[i]} and {names[j]}", witness=[names[i], names[j]])
        self._up = [frozenset(s) for s in up]
        self._down = [frozenset(j for j in range(n) if i in up[j]) for i in range(n)]
        self._join = {}
        self._meet = {}
        for i, j in product(range(n), repeat=2):
            self._join[i, j] = self._extreme(self._up[i] & self._up[j], self._up, "join", i, j)
            self._meet[i, j] = self._extreme(self._down[i] & self._down[j], self._down, "meet", i, j)
        self._bottom = reduce(lambda a, b: self._meet[a, b], range(n))
        self._top = reduce(lambda a, b: self._join[a, b], range(n))

    def _extreme(self, bounds, cone, what, i, j):
        best = [b for b in bounds if bounds <= cone[b]]
        if len(best) != 1:
            x, y = self.elements[i], self.elements[j]
            raise NotALatticeError(f"{x} and {y} have no {what}", witness=[x, y])
        return best[0]

    def __repr__(self):
        return f"FiniteLattice({list(self.elements)})"

    def __len__(self):
        return len(self.elements)

    @property
    def bottom(self) -> str:
        return self.elements[self._bottom]

    @property
    def top(self) -> str:
        return self.elements[self._top]

    def leq(self, x: str, y: str) -> bool:
        return self.index[y] in self._up[self.index[x]]

    def join(self, x: str, y: str) -> str:
        return self.elements[self._join[self.index[x], self.index[y]]]

    def meet(self, x: str, y: str) -> str:
        return self.elements[self._meet[self.index[x], self.index[y]]]

    def join_all(self, xs: Iterable[str]) -> str:
        return reduce(self.join, xs, self.bottom)

    def down(self, x: str) -> frozenset[str]:
        return frozenset(self.elements[j] for j in self._down[self.index[x]])

    def compact(self) -> "CompactSemilattice":
        return CompactSemilattice(self)

    def to_description(self) -> dict:
        return {"elements": list(self.elements),
                "leq": [[x, y] for x in self.elements for y in self.elements if self.leq(x, y)]}


class CompactSemilattice:
    """Join-semilattice of the non-bottom elements; carrier sorted by name."""

    def __init__(self, lattice: FiniteLattice):
        self.lattice = lattice
        self.carrier = tuple(sorted(x for x in lattice.elements if x != lattice.bottom))

    def __len__(self):
        return len(self.carrier)

    def __iter__(self):
        return iter(self.carrier)

    def __contains__(self, x):
        return x in self.carrier

    def join(self, x: str, y: str) -> str:
        return self.lattice.join(x, y)

    def leq(self, x: str, y: str) -> bool:
        return self.lattice.leq(x, y)

    def join_all(self, xs: Iterable[str]) -> str:
        xs = list(xs)
        if not xs:
            raise DomainError("empty join in the compact semilattice")
        return reduce(self.join, xs)

    def principal(self, x: str) -> "Ideal":
        return Ideal(self.lattice.down(x) & frozenset(self.carrier))

    def is_ideal(self, members: Iterable[str]) -> bool:
        members = frozenset(members)
        if not members <= frozenset(self.carrier):
            return False
        for x in members:
            if any(y not in members for y in self.lattice.down(x) if y in self):
                return False
        return all(self.join(x, y) in members for x, y in combinations(members, 2))


@dataclass(frozen=True)
class Ideal:
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))

    def __contains__(self, x):
        return x in self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self):
        return len(self.members)

    def __le__(self, other):
        return self.members <= other.members

    def sort_key(self):
        return (len(self.members), sorted(self.members))

    def __repr__(self):
        return "Ideal{" + ",".join(sorted(self.members)) + "}"

    def to_json(self) -> list:
        return sorted(self.members)


def ideals_enumerate(c: CompactSemilattice, max_carrier: int = 20) -> list[Ideal]:
    """Every ideal, empty one included, by filtering all subsets of the carrier."""
    if len(c) > max_carrier:
        raise ResourceError(f"subset filter over {len(c)} elements", estimate=2 ** len(c))
    out = []
    for mask in range(2 ** len(c)):
        members = frozenset(x for i, x in enumerate(c.carrier) if mask >> i & 1)
        if c.is_ideal(members):
            out.append(Ideal(members))
    return sorted(out, key=Ideal.sort_key)


def ideal_join(c: CompactSemilattice, family: Iterable[Ideal]) -> Ideal:
    """Elements below a finite join of members of the union."""
    family = list(family)
    if not family:
        raise DomainError("the join is only defined for non-empty families")
    union = frozenset().union(*(i.members for i in family))
    # in a finite semilattice the joins of finite subsets of the union are reached by closing under binary join
    closed = set(union)
    grew = True
    while grew:
        grew = False
        for x, y in combinations(sorted(closed), 2):
            z = c.join(x, y)
            if z not in closed:
                closed.add(z)
                grew = True
    members = {x for x in c.carrier if any(c.leq(x, y) for y in closed)}
    return Ideal(members)


def ideal_meet(family: Iterable[Ideal]) -> Ideal:
    family = list(family)
    if not family:
        raise DomainError("the meet is only defined for non-empty families")
    return Ideal(frozenset.intersection(*(i.members for i in family)))


def ideal_lattice_iso_check(lattice: FiniteLattice) -> CheckReport:
    """Check ``x -> down(x) minus bottom`` is an isomorphism onto the ideal lattice."""
    report = CheckReport("lattice.ideal_isomorphism")
    with timed(report):
        c = lattice.compact()
        ideals = ideals_enumerate(c)
        image = {x: Ideal(lattice.down(x) - {lattice.bottom}) for x in lattice.elements}
        report.counts.update(elements=len(lattice), ideals=len(ideals))
        if len(set(image.values())) != len(lattice):
            report.fail({"kind": "not_injective"})
        if set(image.values()) != set(ideals):
            report.fail({"kind": "not_surjective",
                         "missing": [i.to_json() for i in ideals if i not in set(image.values())]})
        for x, y in product(lattice.elements, repeat=2):
            if image[lattice.join(x, y)] != ideal_join(c, [image[x], image[y]]):
                report.fail({"kind": "join", "pair": [x, y]})
            if image[lattice.meet(x, y)] != ideal_meet([image[x], image[y]]):
                report.fail({"kind": "meet", "pair": [x, y]})
    return report


# -- loading ------------------------------------------------------------------

def load_lattice(description: dict) -> FiniteLattice:
    """Build a lattice from ``{"elements": [...], "leq": [...]}`` or ``{"elements": [...], "covers": [...]}``."""
    if not isinstance(description, dict):
        raise LatticeError("lattice description must be a JSON object")
    if "elements" not in description:
        raise LatticeError("lattice description lacks 'elements'")
    has_leq, has_covers = "leq" in description, "covers" in description
    if has_leq == has_covers:
        raise LatticeError("lattice description needs exactly one of 'leq' or 'covers'")
    elements = description["elements"]
    if not isinstance(elements, list):
        raise LatticeError("'elements' must be a list")
    pairs = description["leq"] if has_leq else description["covers"]
    if not isinstance(pairs, list):
        raise LatticeError("order pairs must be a list")
    return FiniteLattice(elements, [tuple(p) if isinstance(p, list) else p for p in pairs], closed=has_leq)


def load_lattice_file(path: str | Path) -> FiniteLattice:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise LatticeError(f"{path}: invalid JSON: {exc}") from None
    return load_lattice(data)


def _chain(n):
    names = ["0"] + [chr(ord("a") + i) for i in range(n - 1)]
    return {"elements": names, "covers": [[x, y] for x, y in zip(names, names[1:])]}


def _boolean(atoms):
    subsets = [frozenset(s) for k in range(len(atoms) + 1) for s in combinations(atoms, k)]

    def name(s):
        if not s:
            return "0"
        if len(s) == len(atoms):
            return "1"
        return "".join(sorted(s))

    return {"elements": [name(s) for s in subsets],
            "covers": [[name(s), name(t)] for s in subsets for t in subsets if s < t and len(t) == len(s) + 1]}


CATALOG = {
    "chain2": _chain(2),
    "chain3": _chain(3),
    "chain4": _chain(4),
    "chain5": _chain(5),
    "boolean2": _boolean("xy"),
    "boolean3": _boolean("xyz"),
    "M3": {"elements": ["0", "a", "b", "c", "1"],
           "covers": [["0", "a"], ["0", "b"], ["0", "c"], ["a", "1"], ["b", "1"], ["c", "1"]]},
    "N5": {"elements": ["0", "a", "b", "c", "1"],
           "covers": [["0", "a"], ["a", "c"], ["c", "1"], ["0", "b"], ["b", "1"]]},
}


def catalog_lattice(name: str) -> FiniteLattice:
    try:
        return load_lattice(CATALOG[name])
    except KeyError:
        raise LatticeError(f"unknown catalog lattice {name!r}; known: {', '.join(CATALOG)}") from None

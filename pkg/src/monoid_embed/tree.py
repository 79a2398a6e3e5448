"""Index tree combinatorics.

A node is a pair ``(eta, phi)`` of equal-length sequences: ``eta`` holds
branch indices below ``kappa`` and ``phi`` holds bits.  Words are finite
multisets of nodes; since the generators commute, the order of a word's
entries never matters and a :class:`Word` is stored as a sorted tuple.

Besides the proper nodes there is :data:`ROOT`, the empty pair.  It is not
a generator index.  The two depth-1 nodes ``(<alpha>, <0>)`` and
``(<alpha>, <1>)`` have complementary cubes, so together they shift every
point by one, for every ``alpha``.  Treating them as siblings with parent
``ROOT`` is what makes reduced words unique; with ``roots=False`` the
reduction functions skip that level and depth-1 pairs count as reduced.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, NamedTuple

from .errors import DomainError, TruncationError


class Node(NamedTuple):
    eta: tuple[int, ...]
    phi: tuple[int, ...]

    @classmethod
    def root(cls, alpha: int, bit: int = 0) -> "Node":
        return cls((alpha,), (bit,))

    @property
    def depth(self) -> int:
        return len(self.eta)

    @property
    def last_bit(self) -> int:
        return self.phi[-1]

    def parent(self) -> "Node":
        if self.depth < 1:
            raise DomainError("the whole-space root has no parent")
        return Node(self.eta[:-1], self.phi[:-1])

    def sibling(self) -> "Node":
        """The node differing from this one only in the last bit."""
        if self.depth < 1:
            raise DomainError("the whole-space root has no sibling")
        return Node(self.eta, self.phi[:-1] + (1 - self.phi[-1],))

    def zero_form(self) -> "Node":
        """This node with its last bit forced to 0."""
        return self if self.phi[-1] == 0 else self.sibling()

    def prefixes(self) -> Iterator["Node"]:
        """All non-empty initial segments, shortest first, ending with self."""
        for k in range(1, self.depth + 1):
            yield Node(self.eta[:k], self.phi[:k])

    def __str__(self):
        eta = ",".join(map(str, self.eta))
        phi = "".join(map(str, self.phi))
        return f"({eta}|{phi})"

    def to_json(self) -> list:
        return [list(self.eta), list(self.phi)]

    @classmethod
    def from_json(cls, data) -> "Node":
        eta, phi = data
        return cls(tuple(eta), tuple(phi))


def node(eta, phi) -> Node:
    """Build a node from any two sequences, checking their shape."""
    eta, phi = tuple(int(x) for x in eta), tuple(int(x) for x in phi)
    if not eta or len(eta) != len(phi):
        raise DomainError(f"eta and phi must be non-empty and of equal length: {eta}, {phi}")
    if any(b not in (0, 1) for b in phi):
        raise DomainError(f"phi must contain bits only: {phi}")
    if any(a < 0 for a in eta):
        raise DomainError(f"branch indices must be non-negative: {eta}")
    return Node(eta, phi)


class Word(tuple):
    """A finite multiset of nodes, stored sorted so equal multisets compare equal."""

    __slots__ = ()

    def __new__(cls, entries: Iterable[Node] = ()):
        return super().__new__(cls, sorted(entries))

    @classmethod
    def from_counts(cls, counts: Counter) -> "Word":
        return cls(n for n, k in counts.items() for _ in range(k))

    def counts(self) -> Counter:
        return Counter(self)

    def __add__(self, other):
        return Word(tuple(self) + tuple(other))

    def __repr__(self):
        return "Word{" + ", ".join(map(str, self)) + "}"

    def to_json(self) -> list:
        return [n.to_json() for n in self]


IDENTITY = Word()

ROOT = Node((), ())


@dataclass(frozen=True)
class TruncationConfig:
    """Finite cut of the index tree: branching ``kappa``, depth ``depth``, word size bound."""

    kappa: int
    depth: int
    word_bound: int = 4

    def __post_init__(self):
        for name in ("kappa", "depth", "word_bound"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise DomainError(f"{name} must be an integer >= 1, got {value!r}")

    def check(self, n: Node) -> Node:
        if n == ROOT:
            return n
        if n.depth < 1 or n.depth > self.depth:
            raise TruncationError(f"{n} has depth {n.depth}, truncation depth is {self.depth}")
        if any(a >= self.kappa for a in n.eta):
            raise DomainError(f"{n} uses a branch index >= kappa={self.kappa}")
        return n

    def contains(self, n: Node) -> bool:
        return 1 <= n.depth <= self.depth and all(a < self.kappa for a in n.eta)

    def children(self, n: Node, alpha: int) -> tuple[Node, Node]:
        """The two children ``(eta*alpha, phi*0)`` and ``(eta*alpha, phi*1)``; for ``ROOT`` the depth-1 pair."""
        self.check(n)
        if n.depth >= self.depth:
            raise TruncationError(f"{n} is at the truncation depth {self.depth}")
        if not 0 <= alpha < self.kappa:
            raise DomainError(f"branch index {alpha} outside 0..{self.kappa - 1}")
        eta = n.eta + (alpha,)
        return Node(eta, n.phi + (0,)), Node(eta, n.phi + (1,))

    def nodes(self, depth: int | None = None, branch_limit: int | None = None,
              root_limit: int | None = None) -> Iterator[Node]:
        """Every node up to ``depth``, optionally restricted to a window of branch indices.

        ``root_limit`` bounds the first branch index, ``branch_limit`` the others.
        """
        depth = self.depth if depth is None else min(depth, self.depth)
        roots = self.kappa if root_limit is None else min(root_limit, self.kappa)
        inner = self.kappa if branch_limit is None else min(branch_limit, self.kappa)
        for d in range(1, depth + 1):
            for eta in product(range(roots), *[range(inner)] * (d - 1)):
                for phi in product((0, 1), repeat=d):
                    yield Node(eta, phi)

    def node_count(self, depth: int | None = None) -> int:
        depth = self.depth if depth is None else min(depth, self.depth)
        return sum((2 * self.kappa) ** d for d in range(1, depth + 1))

    def interior_nodes(self) -> Iterator[Node]:
        return self.nodes(depth=self.depth - 1)


def children(n: Node, alpha: int, config: TruncationConfig) -> tuple[Node, Node]:
    return config.children(n, alpha)


def is_initial_segment(p: Node, q: Node) -> bool:
    """True iff ``p`` is a non-empty initial segment of ``q`` (``q`` counts for itself)."""
    k = p.depth
    return 1 <= k <= q.depth and q.eta[:k] == p.eta and q.phi[:k] == p.phi


def is_proper_initial_segment(p: Node, q: Node) -> bool:
    return p.depth < q.depth and is_initial_segment(p, q)


def _collapsible(n: Node, roots: bool) -> bool:
    return n.depth >= (1 if roots else 2) and n.last_bit == 0


def is_reduced(w: Iterable[Node], roots: bool = True) -> bool:
    present = set(w)
    return not any(_collapsible(n, roots) and n.sibling() in present for n in present)


def equivalent(p: Iterable[Node], q: Iterable[Node]) -> bool:
    return Counter(p) == Counter(q)


def reduction_steps(w: Word, roots: bool = True) -> Iterator[Word]:
    """All words reachable from ``w`` by collapsing a single sibling pair."""
    counts = w.counts()
    for n in counts:
        if _collapsible(n, roots) and n.sibling() in counts:
            nxt = counts.copy()
            for m in (n, n.sibling()):
                nxt[m] -= 1
                if not nxt[m]:
                    del nxt[m]
            nxt[n.parent()] += 1
            yield Word.from_counts(nxt)


def reduce_canonical(w: Iterable[Node], roots: bool = True) -> Word:
    """Collapse sibling pairs into their parent until none remain.

    Pairs are collapsed deepest level first, so every parent produced at
    one level is available for collapsing at the next.
    """
    counts = Counter(w)
    if not counts:
        return IDENTITY
    by_depth: dict[int, set[Node]] = {}
    for n in counts:
        by_depth.setdefault(n.depth, set()).add(n)
    for d in range(max(by_depth), 0 if roots else 1, -1):
        for n in sorted(by_depth.get(d, ())):
            if n.last_bit:
                continue
            sib = n.sibling()
            k = min(counts[n], counts[sib])
            if not k:
                continue
            for m in (n, sib):
                counts[m] -= k
                if not counts[m]:
                    del counts[m]
            par = n.parent()
            counts[par] += k
            by_depth.setdefault(d - 1, set()).add(par)
    return Word.from_counts(counts)


def expand_once(w: Iterable[Node], n: Node, alpha: int, config: TruncationConfig) -> Word:
    """Replace one occurrence of ``n`` by its two children under ``alpha``."""
    counts = Counter(w)
    if not counts[n]:
        raise DomainError(f"{n} does not occur in the word")
    c0, c1 = config.children(n, alpha)
    counts[n] -= 1
    if not counts[n]:
        del counts[n]
    counts[c0] += 1
    counts[c1] += 1
    return Word.from_counts(counts)


def normal_forms(w: Iterable[Node], roots: bool = True) -> set[Word]:
    """Every terminal word over all possible orders of reduction steps.

    Independent of :func:`reduce_canonical`; the search explores the full
    rewriting graph, memoising visited words.
    """
    start = Word(w)
    seen = {start}
    stack = [start]
    terminal = set()
    while stack:
        cur = stack.pop()
        succ = list(reduction_steps(cur, roots))
        if not succ:
            terminal.add(cur)
        for nxt in succ:
            if len(nxt) != len(cur) - 1:
                raise AssertionError(f"reduction step changed size by {len(cur) - len(nxt)}")
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return terminal


def words_up_to(nodes: Iterable[Node], size_bound: int) -> Iterator[Word]:
    """All multisets of the given nodes with at most ``size_bound`` entries."""
    from itertools import combinations_with_replacement

    pool = sorted(set(nodes))
    for k in range(size_bound + 1):
        for combo in combinations_with_replacement(pool, k):
            yield Word(combo)


def multiset_count(n: int, size_bound: int) -> int:
    """Number of multisets of size <= size_bound over n items."""
    from math import comb

    if n == 0:
        return 1
    return sum(comb(n + k - 1, k) for k in range(size_bound + 1))

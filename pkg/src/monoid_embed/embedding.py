"""The map from ideals to generated monoids, and checks that it is a closed embedding.

``F(I)`` is the monoid generated by the generators whose node label lies in
``I``.  It is infinite, so it is represented by a membership predicate and
by bounded fragments: canonical forms of all words up to a size bound over
a finite window of nodes.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, NamedTuple

from .enumeration import Labeling, label_histogram, required_branching
from .errors import ConstructionError, DomainError, ResourceError, TruncationError
from .ice import IceInstance, find_difference
from .lattice import CompactSemilattice, FiniteLattice, Ideal, ideal_join, ideal_meet, ideals_enumerate
from .report import CheckReport, timed
from .tree import (
    IDENTITY,
    ROOT,
    Node,
    TruncationConfig,
    Word,
    multiset_count,
    reduce_canonical,
    reduction_steps,
    words_up_to,
)


@dataclass(frozen=True)
class IndexedMonoid:
    ideal: Ideal
    labeling: Labeling
    # fault injection: replaces the membership test for generator nodes
    s_override: Callable[[Node], bool] | None = None

    def in_S(self, n: Node) -> bool:
        """Generator nodes labelled inside the ideal.

        The whole-space root is no generator but may appear in canonical
        forms; it is expressible exactly when its label, the top element,
        lies in the ideal.
        """
        if self.s_override is not None:
            return self.s_override(n)
        return self.labeling.label(n) in self.ideal

    def member(self, w: Iterable[Node]) -> bool:
        return all(self.in_S(n) for n in reduce_canonical(w))


def in_S(m: IndexedMonoid, n: Node) -> bool:
    return m.in_S(n)


def member(w: Iterable[Node], m: IndexedMonoid) -> bool:
    """Whether the composite of ``w`` lies in ``F(I)``: the canonical form uses only generators of ``F(I)``."""
    return m.member(w)


class Window(NamedTuple):
    """Finite set of nodes used for bounded fragments."""

    depth: int
    root_limit: int | None = None
    branch_limit: int | None = None

    def nodes(self, truncation: TruncationConfig):
        return truncation.nodes(self.depth, branch_limit=self.branch_limit, root_limit=self.root_limit)

    def to_json(self):
        return {"depth": self.depth, "root_limit": self.root_limit, "branch_limit": self.branch_limit}


def default_window(labeling: Labeling, depth: int = 2, branch_limit: int = 2) -> Window:
    """Roots covering the whole carrier, plus the first ``branch_limit`` branches below them."""
    return Window(min(depth, labeling.truncation.depth), len(labeling.roots), branch_limit)


DEFAULT_BUDGET = 300_000


def monoid_enumerate(m: IndexedMonoid, size_bound: int, window: Window | None = None,
                     budget: int = DEFAULT_BUDGET) -> set[Word]:
    """Canonical forms of every word of size at most ``size_bound`` over generators of ``m`` in ``window``."""
    trunc = m.labeling.truncation
    window = window or Window(trunc.depth)
    pool = [n for n in window.nodes(trunc) if m.in_S(n)]
    estimate = multiset_count(len(pool), size_bound)
    if estimate > budget:
        raise ResourceError(f"{estimate} words over {len(pool)} generators exceed budget {budget}",
                            estimate=estimate)
    return {reduce_canonical(w) for w in words_up_to(pool, size_bound)}


def member_by_expansion(w: Iterable[Node], m: IndexedMonoid, size_bound: int | None = None,
                        state_budget: int = 50_000) -> bool:
    """Membership by search over collapse and expansion moves, independent of canonical forms.

    Explores every word reachable from ``w`` by collapsing a sibling pair or
    splitting a non-generator entry into two children, within the
    truncation and ``size_bound`` entries; succeeds when some reachable word
    uses generators of ``m`` only.  Both moves preserve the composite.  The
    whole-space root is never accepted as a generator here, only expanded.
    """
    trunc = m.labeling.truncation
    start = Word(w)
    size_bound = len(start) + trunc.depth if size_bound is None else size_bound
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if all(n != ROOT and m.in_S(n) for n in cur):
            return True
        moves = list(reduction_steps(cur))
        if len(cur) < size_bound:
            for n in set(cur):
                if n.depth < trunc.depth and (n == ROOT or not m.in_S(n)):
                    for alpha in range(trunc.kappa):
                        c0, c1 = trunc.children(n, alpha)
                        rest = list(cur)
                        rest.remove(n)
                        moves.append(Word(rest + [c0, c1]))
        for nxt in moves:
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > state_budget:
                    raise ResourceError(f"expansion search exceeded {state_budget} states", estimate=len(seen))
                queue.append(nxt)
    return False


class Embedding:
    """A lattice together with its labelled engine: everything the checks need."""

    def __init__(self, lattice: FiniteLattice, kappa: int | None = None, depth: int | None = None,
                 word_bound: int = 4, realization: str = "symbolic", strict: bool = True,
                 one_roots: str = "top"):
        self.lattice = lattice
        self.semilattice: CompactSemilattice = lattice.compact()
        c = self.semilattice
        if not len(c):
            raise DomainError("the one-element lattice has no compact non-bottom elements")
        kappa = required_branching(c) if kappa is None else kappa
        depth = len(c) if depth is None else depth
        self.truncation = TruncationConfig(kappa, depth, word_bound)
        self.labeling = Labeling(c, self.truncation, strict=strict, one_roots=one_roots)
        self.instance = IceInstance(self.truncation, realization=realization)
        self.ideals = ideals_enumerate(c)

    def monoid(self, ideal: Ideal) -> IndexedMonoid:
        return IndexedMonoid(ideal, self.labeling)

    def s_set(self, ideal: Ideal, depth: int | None = None) -> list[tuple[Node, str]]:
        return [(n, lab) for n, lab in self.labeling.walk(depth) if lab in ideal]


# -- factorisation ----------------------------------------------------------

def factorize(emb: Embedding, n: Node, cover: list[tuple[str, Ideal]]) -> Word:
    """Write the generator of ``n`` as a composite of generators taken from the cover's ideals.

    Follows the induction on the length of the cover: one element means
    ``label(n)`` lies in that element's ideal; otherwise split the cover into
    the join of all but the last element and the last element, descend to
    the child pair realising that split, and recurse on the 0-child.
    """
    if not cover:
        raise DomainError("factorize needs a non-empty cover")
    c = emb.semilattice
    lab = emb.labeling.label(n)
    elems = [x for x, _ in cover]
    for x, ideal in cover:
        if x not in ideal:
            raise DomainError(f"cover element {x} is not in its ideal {ideal}")
    if not c.leq(lab, c.join_all(elems)):
        raise DomainError(f"label {lab} of {n} is not below the join of {elems}")
    if len(cover) == 1:
        x, ideal = cover[0]
        if lab not in ideal:
            raise ConstructionError(f"{lab} <= {x} but {lab} is missing from {ideal}")
        return Word([n])
    d, d2 = c.join_all(elems[:-1]), elems[-1]
    table = emb.labeling.pair_tables[lab]
    try:
        alpha = table.index((d, d2))
    except ValueError:
        raise ConstructionError(f"pair ({d}, {d2}) is not realised below label {lab}") from None
    if alpha >= emb.truncation.kappa:
        raise ConstructionError(f"pair ({d}, {d2}) needs branch index {alpha} >= kappa")
    if n.depth >= emb.truncation.depth:
        raise TruncationError(f"depth budget exhausted at {n} with {len(cover)} cover elements left")
    c0, c1 = emb.truncation.children(n, alpha)
    return factorize(emb, c0, cover[:-1]) + Word([c1])


def minimal_cover(emb: Embedding, label: str, family: list[Ideal]) -> list[tuple[str, Ideal]] | None:
    """Shortest list of elements of the family's union whose join lies above ``label``."""
    c = emb.semilattice
    owner = {}
    for ideal in family:
        for x in sorted(ideal.members):
            owner.setdefault(x, ideal)
    union = sorted(owner)
    for k in range(1, len(union) + 1):
        for combo in combinations(union, k):
            if c.leq(label, c.join_all(combo)):
                return [(x, owner[x]) for x in combo]
    return None


# -- verification -----------------------------------------------------------

def _family_json(family):
    return [i.to_json() for i in family]


def verify_join_preservation(emb: Embedding, family: list[Ideal], depth_budget: int | None = None) -> CheckReport:
    """``F(I_1) v ... v F(I_k) == F(I_1 v ... v I_k)`` on every node within the depth budget.

    Inclusion of each ``F(I_u)`` in the right side is structural.  For the
    converse, generators labelled inside some ``I_u`` are immediate; every
    other generator labelled in the joined ideal is factorised over the
    family and the factorisation is checked with the engine's equality
    oracle.  Nodes whose factorisation would leave the depth budget are
    counted as skipped.
    """
    family = list(family)
    if not family:
        raise DomainError("join preservation needs a non-empty family")
    c = emb.semilattice
    depth_budget = emb.truncation.depth if depth_budget is None else min(depth_budget, emb.truncation.depth)
    joined = ideal_join(c, family)
    union = frozenset().union(*(i.members for i in family))
    report = CheckReport("embedding.join_preservation")
    report.counts.update(family=len(family), depth_budget=depth_budget, generators_included=0,
                         nodes_immediate=0, nodes_factorized=0, nodes_skipped_for_depth=0, max_cover=0)
    with timed(report):
        for ideal in family:
            if not ideal <= joined:
                report.fail({"kind": "not_included", "ideal": ideal.to_json(), "join": joined.to_json()})
            else:
                report.bump("generators_included")
        covers = {}
        for lab in sorted(joined.members - union):
            cover = minimal_cover(emb, lab, family)
            if cover is None:
                report.fail({"kind": "no_cover", "label": lab})
            else:
                covers[lab] = cover
                report.counts["max_cover"] = max(report.counts["max_cover"], len(cover))
        hist = label_histogram(emb.labeling, depth_budget)
        report.counts["nodes_immediate"] = sum(k for level in hist for lab, k in level.items() if lab in union)
        fit = depth_budget - (min(map(len, covers.values())) - 1) if covers else 0
        for d in range(max(fit, 0) + 1, depth_budget + 1):
            report.bump("nodes_skipped_for_depth", sum(hist[d - 1].get(lab, 0) for lab in covers))
        if covers and fit >= 1:
            for n, lab in emb.labeling.walk(fit):
                cover = covers.get(lab)
                if cover is None:
                    continue
                if n.depth + len(cover) - 1 > depth_budget:
                    report.bump("nodes_skipped_for_depth")
                    continue
                try:
                    w = factorize(emb, n, cover)
                except ConstructionError as exc:
                    report.fail({"node": str(n), "label": lab, "error": str(exc)})
                    continue
                report.bump("nodes_factorized")
                if not emb.instance.equal_words([n], w):
                    report.fail({"node": str(n), "label": lab, "word": [str(x) for x in w], "kind": "not_equal"})
                bad = [str(x) for x in w if emb.labeling.label(x) not in union]
                if bad:
                    report.fail({"node": str(n), "label": lab, "kind": "foreign_generator", "entries": bad})
    return report


class FragmentCache:
    """Bounded fragments per ideal, computed once."""

    def __init__(self, emb: Embedding, size_bound: int, window: Window, budget: int = DEFAULT_BUDGET):
        self.emb, self.size_bound, self.window, self.budget = emb, size_bound, window, budget
        self._cache: dict[Ideal, set[Word]] = {}

    def __call__(self, ideal: Ideal) -> set[Word]:
        if ideal not in self._cache:
            self._cache[ideal] = monoid_enumerate(self.emb.monoid(ideal), self.size_bound, self.window, self.budget)
        return self._cache[ideal]


def _random_word_over(rng: random.Random, emb: Embedding, m: IndexedMonoid, size_bound: int,
                      attempts: int = 200) -> Word | None:
    from .ice import random_node

    entries = []
    target = rng.randint(1, size_bound)
    for _ in range(attempts):
        n = random_node(rng, emb.truncation)
        if m.in_S(n):
            entries.append(n)
            if len(entries) == target:
                break
    return Word(entries) if entries else None


def verify_meet_preservation(emb: Embedding, family: list[Ideal], size_bound: int = 4,
                             window: Window | None = None, seed: int = 0, trials: int = 200,
                             fragments: FragmentCache | None = None) -> CheckReport:
    """``F(I_1) & ... & F(I_k) == F(I_1 & ... & I_k)`` on bounded fragments and on random words."""
    family = list(family)
    if not family:
        raise DomainError("meet preservation needs a non-empty family")
    window = window or default_window(emb.labeling)
    fragments = fragments or FragmentCache(emb, size_bound, window)
    meet = ideal_meet(family)
    report = CheckReport("embedding.meet_preservation")
    report.counts.update(family=len(family), size_bound=fragments.size_bound, seed=seed, trials=0,
                         window_depth=fragments.window.depth)
    with timed(report):
        lhs = set.intersection(*(fragments(i) for i in family))
        rhs = fragments(meet)
        report.counts.update(intersection_size=len(lhs), meet_fragment_size=len(rhs))
        for w in sorted(lhs ^ rhs)[:5]:
            report.fail({"kind": "fragment_mismatch", "word": [str(n) for n in w], "in_meet_fragment": w in rhs})
        rng = random.Random(seed)
        meet_monoid = emb.monoid(meet)
        factors = [emb.monoid(i) for i in family]
        for _ in range(trials):
            src = rng.choice(factors)
            w = _random_word_over(rng, emb, src, emb.truncation.word_bound)
            if w is None:
                continue
            report.bump("trials")
            if meet_monoid.member(w) != all(f.member(w) for f in factors):
                report.fail({"kind": "membership", "word": [str(n) for n in w]})
    return report


def separating_root(emb: Embedding, i: Ideal, j: Ideal) -> tuple[Node, bool] | None:
    """A depth-1 node labelled in exactly one of the ideals; the flag says it lies in ``i``."""
    for alpha in range(emb.truncation.kappa):
        n = Node.root(alpha, 0)
        lab = emb.labeling.label(n)
        if (lab in i) != (lab in j):
            return n, lab in i
    return None


def verify_injectivity(emb: Embedding, ideals: list[Ideal] | None = None, oracle: bool = True) -> CheckReport:
    """Distinct ideals generate distinct monoids, witnessed by a single generator."""
    ideals = emb.ideals if ideals is None else ideals
    report = CheckReport("embedding.injectivity")
    report.counts.update(ideals=len(ideals), pairs=0, separated=0)
    with timed(report):
        for i, j in combinations(ideals, 2):
            report.bump("pairs")
            found = separating_root(emb, i, j)
            if found is None:
                report.fail({"kind": "no_separating_node", "ideals": [i.to_json(), j.to_json()]})
                continue
            n, in_i = found
            inside, outside = (i, j) if in_i else (j, i)
            mi, mo = emb.monoid(inside), emb.monoid(outside)
            ok = mi.member([n]) and not mo.member([n])
            if ok and oracle:
                ok = member_by_expansion([n], mi) and not member_by_expansion([n], mo, size_bound=3)
            if ok:
                report.bump("separated")
            else:
                report.fail({"node": str(n), "ideals": [inside.to_json(), outside.to_json()]})
    return report


def verify_bottom(emb: Embedding, size_bound: int = 4, window: Window | None = None,
                  monoid: IndexedMonoid | None = None) -> CheckReport:
    """The empty ideal generates only the identity."""
    report = CheckReport("embedding.bottom")
    with timed(report):
        m = monoid or emb.monoid(Ideal(frozenset()))
        frag = monoid_enumerate(m, size_bound, window or default_window(emb.labeling))
        report.counts.update(size_bound=size_bound, fragment_size=len(frag))
        if frag != {IDENTITY}:
            report.fail({"extra": [[str(n) for n in w] for w in sorted(frag - {IDENTITY})[:5]]})
    return report


def verify_no_inverses(emb: Embedding, fragments: FragmentCache, ideals: list[Ideal] | None = None,
                       pair_cap: int = 200) -> CheckReport:
    """No non-identity fragment element has an inverse in the fragment.

    Every element's counting vector must be positive somewhere (so no
    composite with it can be the identity); in addition the first
    ``pair_cap`` elements of each fragment are checked pairwise.
    """
    ideals = emb.ideals if ideals is None else ideals
    report = CheckReport("embedding.no_inverses")
    report.counts.update(size_bound=fragments.size_bound, elements=0, pairs=0)
    with timed(report):
        for ideal in ideals:
            frag = sorted(w for w in fragments(ideal) if w)
            for w in frag:
                report.bump("elements")
                point = find_difference(emb.instance.word_chi(w).terms, {})
                if point is None or emb.instance.word_chi(w).value(
                        {**{s.zero_form(): False for n in w for s in n.prefixes()}, **point}) <= 0:
                    report.fail({"kind": "not_positive", "word": [str(n) for n in w]})
            head = frag[:pair_cap]
            for a in range(len(head)):
                for b in range(a, len(head)):
                    report.bump("pairs")
                    if emb.instance.equal_words(head[a] + head[b], IDENTITY):
                        report.fail({"kind": "inverse", "ideal": ideal.to_json(),
                                     "pair": [[str(n) for n in head[a]], [str(n) for n in head[b]]]})
    return report

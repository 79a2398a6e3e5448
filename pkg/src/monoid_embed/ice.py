"""Independent composition engine on ``ground x Z``.

The generator of a node raises the level of every point whose ground
coordinate lies in the node's cube and fixes all other points.  A composite
of generators therefore acts fibrewise: it shifts the level over ``x`` by the
number of entries whose cube contains ``x``.  That count is the word's
*counting vector*, the canonical value used to compare composites.
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from itertools import combinations
from typing import Any, Callable, Iterable, Mapping, NamedTuple

import numpy as np

from .errors import DomainError
from .family import BitRegistry, Cube, ExplicitGround, b_cube, separating_point
from .report import CheckReport, timed
from .tree import (
    ROOT,
    Node,
    TruncationConfig,
    Word,
    is_proper_initial_segment,
    is_reduced,
    reduce_canonical,
    words_up_to,
)


class Point(NamedTuple):
    alpha: Any  # ground point index, or a bit assignment
    level: int


class CountingVector:
    """Formal sum of cubes; its value at a point is the summed multiplicity of cubes containing it."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Cube, int] | None = None):
        self.terms = Counter({c: k for c, k in (terms or {}).items() if k})
        if any(k < 0 for k in self.terms.values()):
            raise DomainError("counting vectors have non-negative multiplicities")

    def __add__(self, other: "CountingVector") -> "CountingVector":
        return CountingVector(self.terms + other.terms)

    def __eq__(self, other):
        if not isinstance(other, CountingVector):
            return NotImplemented
        return find_difference(self.terms, other.terms) is None

    __hash__ = None

    def value(self, assignment: Mapping[Node, bool]) -> int:
        return sum(k for c, k in self.terms.items() if c.contains(assignment))

    def on_ground(self, ground: ExplicitGround) -> np.ndarray:
        out = np.zeros(len(ground), dtype=np.int64)
        for c, k in self.terms.items():
            out += k * ground.mask(c)
        return out

    def bits(self) -> set[Node]:
        return {lit.bit for c in self.terms for lit in c}

    def __repr__(self):
        return "CountingVector(" + ", ".join(f"{k}*{c!r}" for c, k in sorted(self.terms.items(), key=repr)) + ")"


def find_difference(left: Mapping[Cube, int], right: Mapping[Cube, int]) -> dict[Node, bool] | None:
    """A partial bit assignment on which the two formal sums differ, or None if they agree everywhere.

    Exact Shannon expansion over the bits occurring in either sum; every
    assignment of those bits is realised because the family is independent.
    """
    terms: dict[frozenset, int] = defaultdict(int)
    for c, k in left.items():
        terms[frozenset(c)] += k
    for c, k in right.items():
        terms[frozenset(c)] -= k
    return _split({c: k for c, k in terms.items() if k}, {})


def _split(terms: dict[frozenset, int], fixed: dict[Node, bool]):
    if not terms:
        return None
    freq = Counter(lit.bit for c in terms for lit in c)
    if not freq:
        # only the empty cube survives, with a non-zero coefficient
        return dict(fixed)
    bit = max(freq, key=lambda b: (freq[b], b))
    for value in (True, False):
        sub: dict[frozenset, int] = defaultdict(int)
        for c, k in terms.items():
            hit = next((lit for lit in c if lit.bit == bit), None)
            if hit is None:
                sub[c] += k
            elif hit.positive == value:
                sub[c - {hit}] += k
        found = _split({c: k for c, k in sub.items() if k}, {**fixed, bit: value})
        if found is not None:
            return found
    return None


def _cube_diagram(cube: Cube, weight: int):
    """Ordered decision diagram of ``weight * [cube]``; nodes are ``(bit, hi, lo)``, leaves ints."""
    out = weight
    for lit in sorted(cube, reverse=True):
        out = (lit.bit, out, 0) if lit.positive else (lit.bit, 0, out)
    return out


def _diagram_sum(a, b, memo):
    if isinstance(a, int) and isinstance(b, int):
        return a + b
    key = (id(a), id(b))
    found = memo.get(key)
    if found is not None:
        return found[0]
    if isinstance(b, int) or (not isinstance(a, int) and a[0] < b[0]):
        top, (a_hi, a_lo), (b_hi, b_lo) = a[0], a[1:], (b, b)
    elif isinstance(a, int) or b[0] < a[0]:
        top, (a_hi, a_lo), (b_hi, b_lo) = b[0], (a, a), b[1:]
    else:
        top, (a_hi, a_lo), (b_hi, b_lo) = a[0], a[1:], b[1:]
    hi, lo = _diagram_sum(a_hi, b_hi, memo), _diagram_sum(a_lo, b_lo, memo)
    out = hi if hi == lo else (top, hi, lo)
    memo[key] = (out, a, b)  # keep operands alive so ids stay valid
    return out


def canonical_key(vector: "CountingVector"):
    """Canonical form of the counting function: equal keys iff equal functions.

    A reduced decision diagram over the bits in their natural order, with
    integer leaves; redundant tests are dropped, so a parent's cube and the
    sum of its two children's cubes give the same key.
    """
    out = 0
    memo: dict = {}
    for cube, k in sorted(vector.terms.items(), key=lambda ck: sorted(ck[0])):
        out = _diagram_sum(out, _cube_diagram(cube, k), memo)
    return out


# vectorised generator: (ground indices, levels) -> (ground indices, levels)
Generator = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


class IceInstance:
    """The indexed family of generators over a truncated index tree.

    ``realization`` is ``"symbolic"`` or ``"explicit"``; the explicit form
    registers every family bit of the truncation and builds the full ground
    set, so it is only available for small truncations.  ``cube_fn`` exists
    for fault injection.
    """

    def __init__(self, truncation: TruncationConfig, registry: BitRegistry | None = None,
                 realization: str = "symbolic", max_bits: int = 22,
                 cube_fn: Callable[[Node], Cube] | None = None):
        if realization not in ("symbolic", "explicit"):
            raise DomainError(f"unknown realization {realization!r}")
        self.truncation = truncation
        self.registry = registry if registry is not None else BitRegistry()
        self.realization = realization
        self._cube_fn = cube_fn
        self._cubes: dict[Node, Cube] = {}
        self.ground: ExplicitGround | None = None
        if realization == "explicit":
            n_bits = sum(truncation.kappa ** d * 2 ** (d - 1) for d in range(1, truncation.depth + 1))
            if n_bits > max_bits:
                # checked before touching the tree so oversized instances fail fast
                ExplicitGround([None] * n_bits, max_bits=max_bits)
            for n in truncation.nodes():
                if n.last_bit == 0:
                    self.registry.get(n)
            self.ground = ExplicitGround.from_registry(self.registry, max_bits=max_bits)

    def cube(self, n: Node) -> Cube:
        found = self._cubes.get(n)
        if found is None:
            self.truncation.check(n)
            found = self._cube_fn(n) if self._cube_fn else b_cube(n, self.registry)
            self._cubes[n] = found
        return found

    # -- point evaluation -------------------------------------------------

    def contains(self, n: Node, alpha) -> bool:
        cube = self.cube(n)
        if isinstance(alpha, Mapping):
            return cube.contains(alpha)
        if self.ground is None:
            raise DomainError("integer ground points need an explicit realization")
        return self.ground.contains(int(alpha), cube)

    def apply_generator(self, n: Node, p: Point) -> Point:
        if self.contains(n, p.alpha):
            return Point(p.alpha, p.level + 1)
        return p

    def evaluate(self, w: Iterable[Node], p: Point) -> Point:
        for n in w:
            p = self.apply_generator(n, p)
        return p

    def generator(self, n: Node) -> Generator:
        mask = self.explicit_mask(n)

        def f(alpha, level):
            return alpha, level + mask[alpha]

        return f

    def explicit_mask(self, n: Node) -> np.ndarray:
        if self.ground is None:
            raise DomainError("explicit evaluation needs an explicit realization")
        return self.ground.mask(self.cube(n))

    # -- composite semantics ---------------------------------------------

    def word_chi(self, w: Iterable[Node]) -> CountingVector:
        return CountingVector(Counter(self.cube(n) for n in w))

    def difference(self, p: Iterable[Node], q: Iterable[Node]) -> dict[Node, bool] | None:
        cp, cq = Counter(p), Counter(q)
        common = cp & cq
        cp, cq = cp - common, cq - common
        return find_difference(self.word_chi(cp.elements()).terms, self.word_chi(cq.elements()).terms)

    def equal_words(self, p: Iterable[Node], q: Iterable[Node]) -> bool:
        """Whether the composites of ``p`` and ``q`` are the same permutation."""
        return self.difference(p, q) is None

    def explicit_levels(self, w: Iterable[Node]) -> np.ndarray:
        """Level of ``t_w(x, 0)`` for every ground point ``x``, by applying generators in turn."""
        if self.ground is None:
            raise DomainError("explicit evaluation needs an explicit realization")
        alpha = self.ground.points.copy()
        level = np.zeros(len(alpha), dtype=np.int64)
        for n in w:
            alpha, level = self.generator(n)(alpha, level)
        return level

    def explicit_equal(self, p: Iterable[Node], q: Iterable[Node]) -> bool:
        return bool(np.array_equal(self.explicit_levels(p), self.explicit_levels(q)))


def apply_generator(instance: IceInstance, n: Node, p: Point) -> Point:
    return instance.apply_generator(n, p)


def word_chi(instance: IceInstance, w: Iterable[Node]) -> CountingVector:
    return instance.word_chi(w)


def equal_words(instance: IceInstance, p: Iterable[Node], q: Iterable[Node]) -> bool:
    return instance.equal_words(p, q)


# -- sampling ---------------------------------------------------------------

def random_node(rng: random.Random, config: TruncationConfig, depth: int | None = None) -> Node:
    d = depth if depth is not None else rng.randint(1, config.depth)
    return Node(tuple(rng.randrange(config.kappa) for _ in range(d)),
                tuple(rng.randrange(2) for _ in range(d)))


def random_reduced_word(rng: random.Random, config: TruncationConfig, size_bound: int) -> Word:
    size = rng.randint(1, size_bound)
    return reduce_canonical(random_node(rng, config) for _ in range(size))


def _relative(rng: random.Random, config: TruncationConfig, n: Node) -> Node:
    """A node close to ``n`` in the tree: sibling, parent or a child."""
    options = [n.sibling(), n.parent()] if n != ROOT else []
    if n.depth < config.depth:
        options.extend(config.children(n, rng.randrange(config.kappa)))
    return rng.choice(options)


def random_pair(rng: random.Random, config: TruncationConfig, size_bound: int) -> tuple[Word, Word]:
    """Two reduced words, often near-misses of one another."""
    p = random_reduced_word(rng, config, size_bound)
    mode = rng.randrange(4)
    entries = list(p)
    if mode == 0:
        q = random_reduced_word(rng, config, size_bound)
    elif mode == 1:
        i = rng.randrange(len(entries))
        entries[i] = _relative(rng, config, entries[i])
        q = reduce_canonical(entries)
    elif mode == 2:
        if len(entries) < size_bound:
            entries.append(rng.choice(entries))
        else:
            entries.pop(rng.randrange(len(entries)))
        q = reduce_canonical(entries)
    else:
        # expand one entry, drop one of the two children
        i = rng.randrange(len(entries))
        n = entries[i]
        if n.depth < config.depth:
            c0, c1 = config.children(n, rng.randrange(config.kappa))
            entries[i] = rng.choice((c0, c1))
        q = reduce_canonical(entries)
    return p, q


# -- verification -----------------------------------------------------------

def _word_json(w):
    return [str(n) for n in w]


def _assignment_json(a: Mapping[Node, bool]):
    return {str(b): int(v) for b, v in sorted(a.items())}


def verify_composition(instance: IceInstance, node_cap: int | None = 5000, seed: int = 0,
                       explicit: bool | None = None) -> CheckReport:
    """Each generator equals the composite of its two children, for every branch index."""
    cfg = instance.truncation
    report = CheckReport("ice.composition")
    explicit = instance.ground is not None if explicit is None else explicit
    with timed(report):
        interior = cfg.node_count(cfg.depth - 1) if cfg.depth > 1 else 0
        if node_cap is not None and interior > node_cap:
            rng = random.Random(seed)
            nodes = sorted({random_node(rng, cfg, rng.randint(1, cfg.depth - 1)) for _ in range(node_cap)})
            report.counts.update(mode="sampled", seed=seed)
        else:
            nodes = list(cfg.interior_nodes())
            report.counts["mode"] = "exhaustive"
        report.counts.update(interior_nodes=interior, nodes_checked=len(nodes), identities=0)
        # the depth-1 pairs compose to the shift of every point, the whole-space root
        for n in [ROOT] + nodes:
            for alpha in range(cfg.kappa):
                c0, c1 = cfg.children(n, alpha)
                report.bump("identities")
                sym = instance.equal_words([n], [c0, c1])
                if explicit:
                    exp = instance.explicit_equal([n], [c0, c1])
                    if exp != sym:
                        report.fail({"kind": "oracle_disagreement", "node": str(n), "alpha": alpha})
                        continue
                if not sym:
                    report.fail({"node": str(n), "alpha": alpha,
                                 "point": _assignment_json(instance.difference([n], [c0, c1]))})
    return report


def verify_commutativity(instance: IceInstance, bound: int = 2, pair_cap: int | None = 20000,
                         seed: int = 0, generators: Mapping[Node, Generator] | None = None) -> CheckReport:
    """``f_a o f_b == f_b o f_a`` on every ground point and every level in ``-bound..bound``.

    Also checks each generator is injective on that window.  ``generators``
    replaces the engine's own maps, for fault injection.
    """
    if instance.ground is None:
        raise DomainError("commutativity is checked on the explicit realization")
    report = CheckReport("ice.commutativity")
    with timed(report):
        nodes = list(instance.truncation.nodes())
        gens = {n: (generators or {}).get(n) or instance.generator(n) for n in nodes}
        pts = instance.ground.points
        levels = np.arange(-bound, bound + 1)
        alpha = np.repeat(pts, len(levels))
        level = np.tile(levels, len(pts))
        pairs = list(combinations(nodes, 2)) + [(n, n) for n in nodes]
        if pair_cap is not None and len(pairs) > pair_cap:
            pairs = random.Random(seed).sample(pairs, pair_cap)
            report.counts.update(mode="sampled", seed=seed)
        else:
            report.counts["mode"] = "exhaustive"
        report.counts.update(nodes=len(nodes), pairs=len(pairs), window_points=len(alpha))
        for n in nodes:
            a2, l2 = gens[n](alpha, level)
            if len(set(zip(a2.tolist(), l2.tolist()))) != len(alpha):
                report.fail({"kind": "not_injective", "node": str(n)})
        for a, b in pairs:
            ab = gens[a](*gens[b](alpha, level))
            ba = gens[b](*gens[a](alpha, level))
            if not (np.array_equal(ab[0], ba[0]) and np.array_equal(ab[1], ba[1])):
                bad = int(np.flatnonzero((ab[0] != ba[0]) | (ab[1] != ba[1]))[0])
                report.fail({"a": str(a), "b": str(b), "point": int(alpha[bad]), "level": int(level[bad])})
    return report


def strip_common(p: Iterable[Node], q: Iterable[Node]) -> tuple[Word, Word]:
    """Remove the common sub-multiset of two words."""
    p, q = Word(p), Word(q)
    i = j = 0
    keep_p, keep_q = [], []
    while i < len(p) and j < len(q):
        if p[i] == q[j]:
            i += 1
            j += 1
        elif p[i] < q[j]:
            keep_p.append(p[i])
            i += 1
        else:
            keep_q.append(q[j])
            j += 1
    keep_p.extend(p[i:])
    keep_q.extend(q[j:])
    return Word(keep_p), Word(keep_q)


def proof_witness(p: Word, q: Word) -> tuple[Node, dict[Node, bool], bool] | None:
    """Separating point chosen as in the existence argument.

    After removing common entries, take an entry of ``p`` or ``q`` with no
    proper initial segment among the remaining entries, and find a point in
    its cube outside every cube of the other word.  Returns ``(node,
    assignment, node_in_p)``, or None when both words are empty.
    """
    p, q = strip_common(p, q)
    pool = set(p) | set(q)
    if not pool:
        return None
    if ROOT in pool:
        n = ROOT
    else:
        n = min(n for n in pool if not any(is_proper_initial_segment(m, n) for m in pool))
    in_p = n in p
    other = q if in_p else p
    point = separating_point(n, set(other))
    # any completion of the relevant bits keeps the separation
    for m in pool:
        for s in m.prefixes():
            point.setdefault(s.zero_form(), False)
    return n, point, in_p


def _check_pair(instance: IceInstance, report: CheckReport, p: Word, q: Word, witnesses: bool) -> None:
    report.bump("pairs")
    diff = instance.difference(p, q)
    if diff is None:
        entry = {"p": _word_json(p), "q": _word_json(q)}
        try:
            found = proof_witness(p, q)
            if found is not None:
                entry["expected_point"] = {"node": str(found[0]), "bits": _assignment_json(found[1])}
        except Exception as exc:  # diagnostics only
            entry["expected_point"] = f"unavailable: {exc}"
        report.fail(entry)
        return
    if witnesses:
        n, point, in_p = proof_witness(p, q)
        ps, qs = strip_common(p, q)
        mine, theirs = (ps, qs) if in_p else (qs, ps)
        if not (instance.word_chi(mine).value(point) > 0 and instance.word_chi(theirs).value(point) == 0):
            report.fail({"kind": "witness_invalid", "p": _word_json(p), "q": _word_json(q), "node": str(n)})
        else:
            report.bump("witnesses_verified")


def verify_independence(instance: IceInstance, size_bound: int = 3, mode: str = "exhaustive",
                        seed: int = 0, trials: int = 1000, witnesses: bool | None = None,
                        nodes: Iterable[Node] | None = None) -> CheckReport:
    """Inequivalent reduced words give distinct composites.

    Exhaustive mode enumerates every reduced word of size at most
    ``size_bound`` (the whole-space root included), strips the common entries of every pair and compares
    canonical keys of what is left; any collision is re-examined with the
    Shannon oracle and reported.  Randomized mode draws ``trials`` seeded
    pairs and decides each with the Shannon oracle.  With ``witnesses``
    (default: on for randomized, off for exhaustive) every pair also gets
    the separating point from the existence argument, checked against the
    counting vectors.
    """
    if witnesses is None:
        witnesses = mode == "randomized"
    if mode not in ("exhaustive", "randomized"):
        raise DomainError(f"unknown mode {mode!r}")
    cfg = instance.truncation
    report = CheckReport("ice.independence")
    report.counts.update(mode=mode, size_bound=size_bound, pairs=0, failures=0)
    with timed(report):
        if mode == "exhaustive":
            pool = [ROOT] + list(cfg.nodes()) if nodes is None else list(nodes)
            reduced = [w for w in words_up_to(pool, size_bound) if is_reduced(w)]
            report.counts.update(reduced_words=len(reduced), witnesses_verified=0)
            # sub-multisets of reduced words are reduced, so every stripped word has a key
            keys = {w: canonical_key(instance.word_chi(w)) for w in reduced}
            for i, p in enumerate(reduced):
                for q in reduced[i + 1:]:
                    ps, qs = strip_common(p, q)
                    if witnesses or keys[ps] == keys[qs]:
                        _check_pair(instance, report, p, q, witnesses)
                    else:
                        report.bump("pairs")
        else:
            rng = random.Random(seed)
            report.counts.update(seed=seed, trials=trials, equivalent_draws=0)
            done = 0
            while done < trials:
                p, q = random_pair(rng, cfg, size_bound)
                if p == q:
                    report.bump("equivalent_draws")
                    continue
                done += 1
                _check_pair(instance, report, p, q, witnesses)
    return report


def verify_unique_representation(instance: IceInstance, size_bound: int = 3,
                                 nodes: Iterable[Node] | None = None) -> CheckReport:
    """Among all words up to ``size_bound``, each composite has exactly one reduced representative.

    Words are grouped by their explicit level vectors when the instance has
    an explicit ground; otherwise by canonical form, with every member
    confirmed equal to its canonical form symbolically.
    """
    report = CheckReport("ice.unique_reduced_representation")
    with timed(report):
        pool = [ROOT] + list(instance.truncation.nodes()) if nodes is None else list(nodes)
        words = list(words_up_to(pool, size_bound))
        report.counts.update(words=len(words), size_bound=size_bound)
        groups: dict[Any, list[Word]] = defaultdict(list)
        if instance.ground is not None:
            report.counts["grouping"] = "explicit"
            for w in words:
                groups[instance.explicit_levels(w).tobytes()].append(w)
        else:
            report.counts["grouping"] = "canonical"
            for w in words:
                canon = reduce_canonical(w)
                if not instance.equal_words(w, canon):
                    report.fail({"word": _word_json(w), "canonical": _word_json(canon)})
                groups[canon].append(w)
        report.counts["classes"] = len(groups)
        for ws in groups.values():
            reduced = [w for w in ws if is_reduced(w)]
            if len(reduced) != 1:
                report.fail({"class_size": len(ws), "reduced_members": [_word_json(w) for w in reduced[:4]]})
    return report

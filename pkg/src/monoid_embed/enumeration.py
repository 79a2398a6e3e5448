"""Labelling the index tree with elements of the compact semilattice.

Depth-1 nodes ``(<alpha>, <0>)`` cycle through the carrier and the nodes
``(<alpha>, <1>)`` carry the top element.  Below a node
labelled ``c``, branch index ``alpha`` selects the decomposition pair
``pairs(c)[alpha mod len(pairs(c))]``; the 0-child takes its first
component and the 1-child its second.  With ``kappa`` at least
:func:`required_branching` every decomposition pair of every label shows up
under some branch index, so the labelling satisfies the three enumeration
properties on the whole truncation.

The whole-space root counts as a node labelled top: the depth-1 pair
under ``alpha`` composes to it, and the pair's labels are drawn from
``{c : c <= top}``, so it obeys the ordering property like any other node.
Labelling the 1-roots with their 0-root's label (``one_roots="mirror"``)
breaks this: the whole-space shift would then lie in ``F(I)`` for every
non-empty ideal ``I``, and meets of ideals with an empty intersection
would not be preserved.
"""

from __future__ import annotations

from itertools import product

from .errors import ConfigurationError, DomainError
from .lattice import CompactSemilattice
from .report import CheckReport, timed
from .tree import ROOT, Node, TruncationConfig


def decomposition_pairs(c: CompactSemilattice, x: str) -> list[tuple[str, str]]:
    """All ``(d, d')`` with ``x <= d v d'``: ``(x, x)`` first, then the rest in name order."""
    if x not in c:
        raise DomainError(f"{x!r} is not a non-bottom element")
    rest = sorted((d, e) for d, e in product(c.carrier, repeat=2)
                  if (d, e) != (x, x) and c.leq(x, c.join(d, e)))
    return [(x, x)] + rest


def required_branching(c: CompactSemilattice) -> int:
    if not len(c):
        return 1
    return max(len(c), max(len(decomposition_pairs(c, x)) for x in c))


class Labeling:
    """Deterministic map from tree nodes to carrier elements."""

    def __init__(self, semilattice: CompactSemilattice, truncation: TruncationConfig, strict: bool = True,
                 one_roots: str = "top"):
        if one_roots not in ("top", "mirror"):
            raise ConfigurationError(f"one_roots must be 'top' or 'mirror', got {one_roots!r}")
        if not len(semilattice):
            raise ConfigurationError("the lattice has no non-bottom elements to label with")
        self.semilattice = semilattice
        self.truncation = truncation
        self.required = required_branching(semilattice)
        if strict and truncation.kappa < self.required:
            raise ConfigurationError(
                f"kappa={truncation.kappa} is below the required branching {self.required}")
        self.roots = semilattice.carrier
        self.one_roots = one_roots
        self.top = semilattice.lattice.top
        self.pair_tables = {x: decomposition_pairs(semilattice, x) for x in semilattice}

    @property
    def kappa(self) -> int:
        return self.truncation.kappa

    def root_label(self, alpha: int, bit: int = 0) -> str:
        if bit and self.one_roots == "top":
            return self.top
        return self.roots[alpha % len(self.roots)]

    def child_label(self, parent_label: str, alpha: int, bit: int) -> str:
        table = self.pair_tables[parent_label]
        return table[alpha % len(table)][bit]

    def label(self, n: Node) -> str:
        self.truncation.check(n)
        if n == ROOT:
            return self.top
        lab = self.root_label(n.eta[0], n.phi[0])
        for alpha, bit in zip(n.eta[1:], n.phi[1:]):
            lab = self.child_label(lab, alpha, bit)
        return lab

    __call__ = label

    def walk(self, depth: int | None = None):
        """Yield ``(node, label)`` for every node up to ``depth``, parents before children."""
        depth = self.truncation.depth if depth is None else min(depth, self.truncation.depth)
        if depth < 1:
            return
        stack = [(Node.root(a, b), self.root_label(a, b)) for a in reversed(range(self.kappa)) for b in (1, 0)]
        while stack:
            n, lab = stack.pop()
            yield n, lab
            if n.depth < depth:
                for alpha in reversed(range(self.kappa)):
                    for bit in (1, 0):
                        stack.append((Node(n.eta + (alpha,), n.phi + (bit,)),
                                      self.child_label(lab, alpha, bit)))


def label_histogram(labeling: Labeling, depth: int | None = None) -> list[dict[str, int]]:
    """Number of nodes carrying each label, per depth (index 0 is depth 1); computed without walking."""
    depth = labeling.truncation.depth if depth is None else min(depth, labeling.truncation.depth)
    level: dict[str, int] = {}
    for alpha in range(labeling.kappa):
        for bit in (0, 1):
            lab = labeling.root_label(alpha, bit)
            level[lab] = level.get(lab, 0) + 1
    out = [level]
    for _ in range(depth - 1):
        nxt: dict[str, int] = {}
        for lab, count in level.items():
            for alpha in range(labeling.kappa):
                for bit in (0, 1):
                    child = labeling.child_label(lab, alpha, bit)
                    nxt[child] = nxt.get(child, 0) + count
        level = nxt
        out.append(level)
    return out


def verify_enumeration(labeling: Labeling, depth_bound: int | None = None) -> CheckReport:
    """Exhaustively check the three enumeration properties up to ``depth_bound``.

    (1) every carrier element labels some ``(<alpha>, <0>)``;
    (2) ``label(n) <= label(child0) v label(child1)`` for every interior node and branch index;
    (3) every decomposition pair of ``label(n)`` is realised under some branch index.

    Property (2) is also checked at the whole-space root against the depth-1 pairs.
    """
    c = labeling.semilattice
    cfg = labeling.truncation
    depth = cfg.depth if depth_bound is None else min(depth_bound, cfg.depth)
    report = CheckReport("enumeration.properties")
    report.counts.update(kappa=cfg.kappa, depth=depth, required_branching=labeling.required,
                         carrier=len(c), interior_nodes=0, property1=0, property2=0, property3=0,
                         root_pairs=0)
    with timed(report):
        roots = {labeling.label(Node.root(a, 0)) for a in range(cfg.kappa)}
        missing = sorted(set(c.carrier) - roots)
        if missing:
            report.bump("property1")
            report.fail({"property": 1, "unlabelled": missing})
        top = labeling.label(ROOT)
        for alpha in range(cfg.kappa):
            report.bump("root_pairs")
            d, e = labeling.root_label(alpha, 0), labeling.root_label(alpha, 1)
            if not c.leq(top, c.join(d, e)):
                report.bump("property2")
                report.fail({"property": 2, "node": str(ROOT), "alpha": alpha, "label": top, "children": [d, e]})
        for n, lab in labeling.walk(depth - 1):
            report.bump("interior_nodes")
            realised = set()
            for alpha in range(cfg.kappa):
                d = labeling.child_label(lab, alpha, 0)
                e = labeling.child_label(lab, alpha, 1)
                realised.add((d, e))
                if not c.leq(lab, c.join(d, e)):
                    report.bump("property2")
                    report.fail({"property": 2, "node": str(n), "alpha": alpha, "label": lab, "children": [d, e]})
            need = set(decomposition_pairs(c, lab)) - realised
            if need:
                report.bump("property3")
                report.fail({"property": 3, "node": str(n), "label": lab, "unrealised": sorted(map(list, need))[:5]})
    return report

"""Command line: ``catalog``, ``verify``, ``embed`` and ``oracle-compare``.

Exit codes: 0 all checks pass, 1 a verification failed, 2 bad input
(unreadable or malformed lattice), 3 bad configuration or an instance too
large for the requested exact check.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from collections import defaultdict
from dataclasses import asdict, dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .embedding import (
    Embedding,
    FragmentCache,
    Window,
    default_window,
    member_by_expansion,
    verify_bottom,
    verify_injectivity,
    verify_join_preservation,
    verify_meet_preservation,
    verify_no_inverses,
)
from .enumeration import required_branching, verify_enumeration
from .errors import ConfigurationError, LatticeError, ResourceError
from .ice import (
    IceInstance,
    canonical_key,
    random_node,
    random_pair,
    verify_commutativity,
    verify_composition,
    verify_independence,
    verify_unique_representation,
)
from .lattice import CATALOG, FiniteLattice, catalog_lattice, ideal_lattice_iso_check, ideals_enumerate, load_lattice_file
from .report import FAIL, CheckReport, RunReport, timed
from .tree import (
    IDENTITY,
    TruncationConfig,
    Word,
    multiset_count,
    normal_forms,
    reduce_canonical,
    words_up_to,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2, 3

NODE_BUDGET = 200_000
FRAGMENT_BUDGET = 300_000


@dataclass
class RunConfig:
    lattice: str
    kappa: int | None = None
    depth: int | None = None
    word_bound: int = 4
    seed: int = 0
    trials: int = 1000
    report: str | None = None
    exhaustive_independence: bool = False
    timings: bool = False

    def to_json(self) -> dict:
        out = asdict(self)
        out.pop("report")
        out.pop("timings")
        return out


def resolve_lattice(source: str) -> FiniteLattice:
    if source in CATALOG:
        return catalog_lattice(source)
    path = Path(source)
    if not path.exists():
        raise LatticeError(f"{source!r} is neither a catalog lattice nor an existing file")
    return load_lattice_file(path)


def build_embedding(cfg: RunConfig, lattice: FiniteLattice | None = None) -> Embedding:
    lattice = lattice or resolve_lattice(cfg.lattice)
    c = lattice.compact()
    if not len(c):
        raise ConfigurationError("the lattice has a single element; there is nothing to embed")
    need = required_branching(c)
    if cfg.kappa is not None and cfg.kappa < need:
        raise ConfigurationError(f"--kappa {cfg.kappa} is below the required branching {need}")
    for name in ("depth", "word_bound", "trials"):
        value = getattr(cfg, name)
        if value is not None and value < 1:
            raise ConfigurationError(f"--{name.replace('_', '-')} must be >= 1")
    return Embedding(lattice, kappa=cfg.kappa, depth=cfg.depth, word_bound=cfg.word_bound)


def fit_depth(truncation: TruncationConfig, wanted: int, budget: int = NODE_BUDGET) -> int:
    """Largest depth up to ``wanted`` whose node count stays within ``budget``."""
    d = min(wanted, truncation.depth)
    while d > 1 and truncation.node_count(d) > budget:
        d -= 1
    return d


def fit_size_bound(emb: Embedding, window: Window, wanted: int, budget: int = FRAGMENT_BUDGET) -> int:
    pool = sum(1 for _ in window.nodes(emb.truncation))
    bound = wanted
    while bound > 1 and multiset_count(pool, bound) > budget:
        bound -= 1
    return bound


def families(ideals):
    for k in range(1, len(ideals) + 1):
        yield from combinations(ideals, k)


def _merge(total: CheckReport, part: CheckReport, label) -> None:
    for key, value in part.counts.items():
        if isinstance(value, int) and key not in ("family", "depth_budget", "size_bound", "seed",
                                                   "window_depth", "max_cover"):
            total.bump(key, value)
    if not part.ok:
        total.status = FAIL
        for w in part.witnesses:
            total.note({"family": label, **w} if isinstance(w, dict) else {"family": label, "detail": w})


def check_confluence(truncation: TruncationConfig, size_bound: int, seed: int = 0, trials: int = 1000,
                     pool_budget: int = 50_000) -> CheckReport:
    """Every word reaches one normal form whatever the order of reduction steps."""
    report = CheckReport("tree.confluence")
    with timed(report):
        nodes = list(truncation.nodes()) if truncation.node_count() <= 5000 else None
        if nodes is not None and multiset_count(len(nodes), size_bound) <= pool_budget:
            words = words_up_to(nodes, size_bound)
            report.counts["mode"] = "exhaustive"
        else:
            rng = random.Random(seed)

            def draw():
                for _ in range(trials):
                    # siblings and shared parents make reductions likely
                    base = [random_node(rng, truncation) for _ in range(rng.randint(1, size_bound))]
                    out = []
                    for n in base:
                        out.append(n)
                        if n.depth > 1 and len(out) < size_bound and rng.random() < 0.6:
                            out.append(n.sibling())
                    yield Word(out[:size_bound])

            words = draw()
            report.counts.update(mode="randomized", seed=seed)
        report.counts.update(size_bound=size_bound, words=0, violations=0)
        for w in words:
            report.bump("words")
            forms = normal_forms(w)
            if len(forms) != 1 or reduce_canonical(w) not in forms:
                report.bump("violations")
                report.fail({"word": [str(n) for n in w], "normal_forms": [[str(n) for n in f] for f in forms]})
    return report


def run_verify(cfg: RunConfig) -> RunReport:
    emb = build_embedding(cfg)
    trunc = emb.truncation
    c = emb.semilattice
    run = RunReport({**cfg.to_json(), "kappa_used": trunc.kappa, "depth_used": trunc.depth,
                     "carrier": list(c.carrier), "ideals": [i.to_json() for i in emb.ideals]})

    run.add(ideal_lattice_iso_check(emb.lattice))

    enum_depth = fit_depth(trunc, trunc.depth - 1) + 1 if trunc.depth > 1 else 1
    rep = verify_enumeration(emb.labeling, enum_depth)
    if enum_depth < trunc.depth:
        rep.counts["depth_restricted_from"] = trunc.depth
    run.add(rep)

    run.add(verify_composition(emb.instance, seed=cfg.seed))

    small = TruncationConfig(min(trunc.kappa, 2), min(trunc.depth, 2 if trunc.kappa > 1 else 3))
    rep = verify_commutativity(IceInstance(small, realization="explicit"), seed=cfg.seed)
    rep.counts.update(explicit_kappa=small.kappa, explicit_depth=small.depth)
    run.add(rep)

    if cfg.exhaustive_independence:
        run.add(verify_independence(emb.instance, min(cfg.word_bound, 3), mode="exhaustive"))
        try:
            grouping = IceInstance(trunc, realization="explicit", max_bits=20)
        except ResourceError:
            grouping = emb.instance
        run.add(verify_unique_representation(grouping, min(cfg.word_bound, 3)))
    else:
        run.add(verify_independence(emb.instance, cfg.word_bound, mode="randomized",
                                    seed=cfg.seed, trials=cfg.trials))

    run.add(check_confluence(trunc, cfg.word_bound, seed=cfg.seed, trials=cfg.trials))

    fams = list(families(emb.ideals))
    join_depth = fit_depth(trunc, trunc.depth)
    join = CheckReport("embedding.join_preservation", counts={"families": len(fams), "depth_budget": join_depth})
    if join_depth < trunc.depth:
        join.counts["depth_restricted_from"] = trunc.depth
    with timed(join):
        for fam in fams:
            _merge(join, verify_join_preservation(emb, list(fam), join_depth), [i.to_json() for i in fam])
    run.add(join)

    window = default_window(emb.labeling)
    bound = fit_size_bound(emb, window, cfg.word_bound)
    fragments = FragmentCache(emb, bound, window, FRAGMENT_BUDGET)
    meet = CheckReport("embedding.meet_preservation",
                       counts={"families": len(fams), "size_bound": bound, "window_depth": window.depth,
                               "window_roots": window.root_limit, "window_branches": window.branch_limit,
                               "seed": cfg.seed})
    if bound < cfg.word_bound:
        meet.counts["size_bound_restricted_from"] = cfg.word_bound
    with timed(meet):
        per_family = max(1, cfg.trials // max(1, len(fams)))
        for k, fam in enumerate(fams):
            _merge(meet, verify_meet_preservation(emb, list(fam), seed=cfg.seed + k, trials=per_family,
                                                  fragments=fragments), [i.to_json() for i in fam])
    run.add(meet)

    run.add(verify_injectivity(emb))
    run.add(verify_bottom(emb, bound, window))
    run.add(verify_no_inverses(emb, fragments))
    return run


def run_embed(cfg: RunConfig, listing_budget: int = 5000) -> dict:
    emb = build_embedding(cfg)
    trunc = emb.truncation
    listed = fit_depth(trunc, trunc.depth, listing_budget)
    window = default_window(emb.labeling)
    bound = fit_size_bound(emb, window, cfg.word_bound)
    fragments = FragmentCache(emb, bound, window, FRAGMENT_BUDGET)
    ideals = []
    s_sets = {}
    for ideal in emb.ideals:
        nodes = emb.s_set(ideal, listed)
        s_sets[ideal] = frozenset(n for n, _ in nodes)
        ideals.append({
            "ideal": ideal.to_json(),
            "s_set": [{"node": n.to_json(), "label": lab} for n, lab in nodes],
            "s_set_size": len(nodes),
            "fragment_size": len(fragments(ideal)),
        })
    distinct = len(set(s_sets.values())) == len(s_sets)
    return {
        "config": cfg.to_json(),
        "lattice": emb.lattice.to_description(),
        "carrier": list(emb.semilattice.carrier),
        "truncation": {"kappa": trunc.kappa, "depth": trunc.depth, "word_bound": trunc.word_bound},
        "listed_depth": listed,
        "fragment": {"size_bound": bound, "window": window.to_json()},
        "root_labels": [emb.labeling.root_label(a) for a in range(trunc.kappa)],
        "one_root_labels": [emb.labeling.root_label(a, 1) for a in range(trunc.kappa)],
        "pair_tables": {x: [list(p) for p in t] for x, t in emb.labeling.pair_tables.items()},
        "ideals": ideals,
        "s_sets_pairwise_distinct": distinct,
    }


def run_oracle_compare(cfg: RunConfig, max_bits: int = 20, exhaustive_bound: int = 3) -> RunReport:
    """Cross-check the symbolic equality, explicit evaluation and the membership oracles."""
    emb = build_embedding(cfg)
    trunc = emb.truncation
    inst = IceInstance(trunc, realization="explicit", max_bits=max_bits)
    run = RunReport({**cfg.to_json(), "kappa_used": trunc.kappa, "depth_used": trunc.depth,
                     "explicit_bits": inst.ground.m})
    nodes = list(trunc.nodes())
    bound = min(exhaustive_bound, cfg.word_bound)
    words = list(words_up_to(nodes, bound))

    # 1. per word: the symbolic counting vector evaluated pointwise equals the generator action
    rep = CheckReport("oracle.pointwise", counts={"words": len(words), "points": len(inst.ground)})
    with timed(rep):
        assignments = [inst.ground.assignment(int(x)) for x in inst.ground.points]
        for w in words:
            chi = inst.word_chi(w)
            sym = np.array([chi.value(a) for a in assignments])
            if not np.array_equal(sym, inst.explicit_levels(w)):
                rep.fail({"word": [str(n) for n in w]})
    run.add(rep)

    # 2. exhaustive: the three partitions of words into equal composites coincide
    rep = CheckReport("oracle.partitions", counts={"words": len(words), "size_bound": bound})
    with timed(rep):
        by_explicit, by_key, by_canon = defaultdict(set), defaultdict(set), defaultdict(set)
        for w in words:
            by_explicit[inst.explicit_levels(w).tobytes()].add(w)
            by_key[canonical_key(inst.word_chi(w))].add(w)
            by_canon[reduce_canonical(w)].add(w)
        parts = [sorted(map(frozenset, d.values()), key=sorted) for d in (by_explicit, by_key, by_canon)]
        rep.counts["classes"] = len(parts[0])
        if not (parts[0] == parts[1] == parts[2]):
            rep.fail({"explicit": len(parts[0]), "symbolic_key": len(parts[1]), "canonical": len(parts[2])})
        # Shannon equality against explicit equality, on every pair drawn from a class and its neighbours
        reps = [sorted(cls)[0] for cls in parts[0]]
        checked = 0
        for cls in parts[0]:
            members = sorted(cls)
            for a, b in zip(members, members[1:]):
                checked += 1
                if not inst.equal_words(a, b):
                    rep.fail({"kind": "shannon_false_negative", "p": [str(n) for n in a], "q": [str(n) for n in b]})
        for a, b in zip(reps, reps[1:]):
            checked += 1
            if inst.equal_words(a, b):
                rep.fail({"kind": "shannon_false_positive", "p": [str(n) for n in a], "q": [str(n) for n in b]})
        rep.counts["shannon_pairs"] = checked
    run.add(rep)

    # 3. seeded random pairs: Shannon equality agrees with explicit evaluation
    rep = CheckReport("oracle.random_equality", counts={"seed": cfg.seed, "trials": cfg.trials, "equal": 0})
    with timed(rep):
        rng = random.Random(cfg.seed)
        for _ in range(cfg.trials):
            p, q = random_pair(rng, trunc, cfg.word_bound)
            if rng.random() < 0.3 and p:
                # a non-reduced spelling of the same composite
                n = rng.choice(list(p))
                if n.depth < trunc.depth:
                    rest = list(p)
                    rest.remove(n)
                    q = Word(rest + list(trunc.children(n, rng.randrange(trunc.kappa))))
            sym, exp = inst.equal_words(p, q), inst.explicit_equal(p, q)
            rep.bump("equal", int(exp))
            if sym != exp:
                rep.fail({"p": [str(n) for n in p], "q": [str(n) for n in q], "symbolic": sym, "explicit": exp})
    run.add(rep)

    # 4. membership: canonical-form test, expansion search and semantic lookup in a fragment
    rep = CheckReport("oracle.membership", counts={"queries": 0, "seed": cfg.seed})
    with timed(rep):
        frag_bound = bound + 1
        rng = random.Random(cfg.seed + 1)
        queries = list(words) + [Word(random_node(rng, trunc) for _ in range(rng.randint(0, cfg.word_bound)))
                                 for _ in range(cfg.trials)]
        for ideal in emb.ideals:
            m = emb.monoid(ideal)
            pool = [n for n in nodes if m.in_S(n)]
            if multiset_count(len(pool), frag_bound) > FRAGMENT_BUDGET:
                raise ResourceError("membership fragment too large for the explicit oracle")
            semantic = {inst.explicit_levels(w).tobytes() for w in words_up_to(pool, frag_bound)}
            for w in queries:
                rep.bump("queries")
                a = m.member(w)
                b = member_by_expansion(w, m, size_bound=max(frag_bound, len(w)))
                if len(reduce_canonical(w)) > frag_bound:
                    rep.bump("semantic_out_of_range")
                    sem = b
                else:
                    sem = inst.explicit_levels(w).tobytes() in semantic
                if not (a == b == sem):
                    rep.fail({"ideal": ideal.to_json(), "word": [str(n) for n in w],
                              "canonical": a, "expansion": b, "semantic": sem})
    run.add(rep)
    return run


def cmd_catalog(args) -> int:
    rows = []
    for name, desc in CATALOG.items():
        lat = catalog_lattice(name)
        c = lat.compact()
        rows.append({"name": name, "elements": len(lat), "ideals": len(ideals_enumerate(c)),
                     "carrier": len(c), "required_branching": required_branching(c)})
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        for r in rows:
            print(f"{r['name']:<9} elements={r['elements']:<2} ideals={r['ideals']:<2} "
                  f"carrier={r['carrier']:<2} kappa={r['required_branching']}")
    return EXIT_OK


def _emit(payload: dict, cfg: RunConfig) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if cfg.report:
        Path(cfg.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _summarise(run: RunReport) -> None:
    for check in run.checks:
        print(f"{check.status.upper():<4}  {check.name}", file=sys.stderr)


def cmd_verify(cfg: RunConfig) -> int:
    run = run_verify(cfg)
    _emit(run.to_dict(cfg.timings), cfg)
    _summarise(run)
    return EXIT_OK if run.ok else EXIT_FAIL


def cmd_embed(cfg: RunConfig) -> int:
    _emit(run_embed(cfg), cfg)
    return EXIT_OK


def cmd_oracle_compare(cfg: RunConfig) -> int:
    run = run_oracle_compare(cfg)
    _emit(run.to_dict(cfg.timings), cfg)
    _summarise(run)
    return EXIT_OK if run.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="monoid-embed",
                                     description="Embed finite lattices into lattices of transformation monoids "
                                                 "and verify the construction.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list built-in lattices")
    p.add_argument("--json", action="store_true")

    for name, text in (("verify", "run every check and write a JSON report"),
                       ("embed", "describe the embedding as JSON"),
                       ("oracle-compare", "cross-check the equality and membership oracles")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--lattice", required=True, help="catalog name or path to a lattice JSON file")
        p.add_argument("--kappa", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--word-bound", type=int, default=4)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--report", help="write the JSON here instead of stdout")
        p.add_argument("--exhaustive-independence", action="store_true")
        p.add_argument("--timings", action="store_true", help="record per-check milliseconds")
    return parser


COMMANDS = {"verify": cmd_verify, "embed": cmd_embed, "oracle-compare": cmd_oracle_compare}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "catalog":
        return cmd_catalog(args)
    cfg = RunConfig(lattice=args.lattice, kappa=args.kappa, depth=args.depth, word_bound=args.word_bound,
                    seed=args.seed, trials=args.trials, report=args.report,
                    exhaustive_independence=args.exhaustive_independence, timings=args.timings)
    try:
        return COMMANDS[args.command](cfg)
    except (LatticeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigurationError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or as a script with
``python tests/test_acceptance.py``.
"""

import json
import sys
import time

import pytest

from monoid_embed import cli
from monoid_embed.embedding import (
    Embedding,
    FragmentCache,
    default_window,
    verify_bottom,
    verify_injectivity,
    verify_join_preservation,
    verify_meet_preservation,
    verify_no_inverses,
)
from monoid_embed.enumeration import Labeling, required_branching, verify_enumeration
from monoid_embed.ice import IceInstance, verify_commutativity, verify_composition, verify_independence
from monoid_embed.lattice import CATALOG, catalog_lattice, ideal_lattice_iso_check, ideals_enumerate
from monoid_embed.tree import TruncationConfig

CATALOG_NAMES = list(CATALOG)


class Outcome:
    def __init__(self, number, title, limit=None):
        self.number, self.title, self.limit = number, title, limit
        self.problems = []
        self.start = time.perf_counter()

    def expect(self, ok, detail):
        if not ok:
            self.problems.append(detail)

    def finish(self):
        elapsed = time.perf_counter() - self.start
        if self.limit is not None and elapsed > self.limit:
            self.problems.append(f"took {elapsed:.1f}s, limit {self.limit}s")
        status = "PASS" if not self.problems else "FAIL"
        line = f"[{status}] criterion {self.number}: {self.title} ({elapsed:.1f}s)"
        if self.problems:
            line += " -- " + "; ".join(map(str, self.problems[:5]))
        return line


def _emit(line, capsys=None):
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)


def criterion_1():
    out = Outcome(1, "ideal lattices of every catalog lattice", limit=1.0)
    for name in CATALOG_NAMES:
        lat = catalog_lattice(name)
        ideals = ideals_enumerate(lat.compact())
        out.expect(len(ideals) == len(lat), f"{name}: {len(ideals)} ideals for {len(lat)} elements")
        out.expect(ideal_lattice_iso_check(lat).ok, f"{name}: isomorphism check failed")
    return out


def criterion_2():
    out = Outcome(2, "engine axioms on chain2, depth 3, exhaustive", limit=10.0)
    cfg = TruncationConfig(1, 3)
    inst = IceInstance(cfg, realization="explicit")
    comp = verify_composition(inst, node_cap=None)
    out.expect(comp.ok and comp.counts["mode"] == "exhaustive", f"composition: {comp.witnesses[:2]}")
    comm = verify_commutativity(inst, pair_cap=None)
    out.expect(comm.ok and comm.counts["mode"] == "exhaustive", f"commutativity: {comm.witnesses[:2]}")
    ind = verify_independence(inst, size_bound=3, mode="exhaustive")
    out.expect(ind.ok and ind.counts["pairs"] > 0, f"independence: {ind.witnesses[:2]}")
    return out


def criterion_3():
    out = Outcome(3, "engine axioms on M3, required branching, depth 2", limit=60.0)
    c = catalog_lattice("M3").compact()
    inst = IceInstance(TruncationConfig(required_branching(c), 2))
    comp = verify_composition(inst, node_cap=None)
    out.expect(comp.ok, f"composition: {comp.witnesses[:2]}")
    out.expect(comp.counts["nodes_checked"] == comp.counts["interior_nodes"] == 28, comp.counts)
    ind = verify_independence(inst, size_bound=4, mode="randomized", seed=0, trials=1000)
    out.expect(ind.ok and ind.counts["pairs"] >= 1000, f"independence: {ind.witnesses[:2]}")
    return out


def criterion_4():
    out = Outcome(4, "symbolic, explicit and expansion oracles agree on chain2")
    for depth in (1, 2, 3):
        run = cli.run_oracle_compare(cli.RunConfig("chain2", depth=depth, trials=1000))
        for check in run.checks:
            out.expect(check.ok, f"depth {depth} {check.name}: {check.witnesses[:2]}")
    return out


def criterion_5():
    out = Outcome(5, "unique normal forms on chain2, depth 3, words up to 4")
    rep = cli.check_confluence(TruncationConfig(1, 3), 4)
    out.expect(rep.counts["mode"] == "exhaustive", "not exhaustive")
    out.expect(rep.ok and rep.counts["violations"] == 0, rep.witnesses[:2])
    return out


def criterion_6():
    out = Outcome(6, "enumeration properties on every catalog lattice")
    for name in CATALOG_NAMES:
        start = time.perf_counter()
        c = catalog_lattice(name).compact()
        depth = len(c) if len(c) <= 4 else 2
        lab = Labeling(c, TruncationConfig(required_branching(c), len(c)))
        rep = verify_enumeration(lab, depth)
        if depth < len(c):
            rep.counts["depth_restricted_from"] = len(c)
        out.expect(rep.ok, f"{name}: {rep.witnesses[:2]}")
        out.expect(rep.counts["depth"] == depth, f"{name}: checked depth {rep.counts['depth']}")
        elapsed = time.perf_counter() - start
        out.expect(elapsed < 60, f"{name}: {elapsed:.1f}s")
    return out


def criterion_7():
    out = Outcome(7, "join, meet, injectivity and bottom for all families, |C| <= 4")
    for name in CATALOG_NAMES:
        lat = catalog_lattice(name)
        c = lat.compact()
        if len(c) > 4:
            continue
        start = time.perf_counter()
        emb = Embedding(lat)
        ideals = emb.ideals
        fams = list(cli.families(ideals))
        fragments = FragmentCache(emb, 4, default_window(emb.labeling))
        for k, fam in enumerate(fams):
            fam = list(fam)
            j = verify_join_preservation(emb, fam, len(c))
            out.expect(j.ok, f"{name} join {[i.to_json() for i in fam]}: {j.witnesses[:1]}")
            out.expect(j.counts["nodes_skipped_for_depth"] == 0 or j.counts["max_cover"] > 1,
                       f"{name}: nodes skipped without a long cover")
            m = verify_meet_preservation(emb, fam, 4, fragments=fragments, seed=k, trials=50)
            out.expect(m.ok, f"{name} meet {[i.to_json() for i in fam]}: {m.witnesses[:1]}")
        inj = verify_injectivity(emb)
        out.expect(inj.ok and inj.counts["pairs"] == len(ideals) * (len(ideals) - 1) // 2,
                   f"{name} injectivity: {inj.witnesses[:1]}")
        out.expect(verify_bottom(emb, 4).ok, f"{name} bottom")
        elapsed = time.perf_counter() - start
        out.expect(elapsed < 300, f"{name}: {elapsed:.1f}s")
    return out


def criterion_8():
    out = Outcome(8, "no inverses in bounded fragments of every catalog lattice")
    for name in CATALOG_NAMES:
        emb = Embedding(catalog_lattice(name))
        window = default_window(emb.labeling)
        bound = cli.fit_size_bound(emb, window, 4)
        rep = verify_no_inverses(emb, FragmentCache(emb, bound, window))
        out.expect(rep.ok and rep.counts["elements"] > 0, f"{name}: {rep.witnesses[:1]}")
    return out


def criterion_9(tmp_dir):
    out = Outcome(9, "verify and embed reports are byte-identical across runs")
    for cmd in ("verify", "embed"):
        blobs = []
        for k in range(2):
            path = f"{tmp_dir}/{cmd}-{k}.json"
            code = cli.main([cmd, "--lattice", "M3", "--seed", "0", "--report", path])
            out.expect(code == 0, f"{cmd} exited {code}")
            with open(path, "rb") as fh:
                blobs.append(fh.read())
        out.expect(blobs[0] == blobs[1], f"{cmd} reports differ")
        json.loads(blobs[0])
    return out


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 9)])
def test_criterion(criterion, capsys):
    out = criterion()
    line = out.finish()
    _emit(line, capsys)
    assert not out.problems, line


def test_criterion_9(tmp_path, capsys):
    out = criterion_9(tmp_path)
    line = out.finish()
    _emit(line, capsys)
    assert not out.problems, line


if __name__ == "__main__":
    import tempfile

    failed = 0
    for fn in CRITERIA:
        line = fn().finish()
        failed += line.startswith("[FAIL]")
        _emit(line)
    with tempfile.TemporaryDirectory() as tmp:
        line = criterion_9(tmp).finish()
        failed += line.startswith("[FAIL]")
        _emit(line)
    sys.exit(1 if failed else 0)

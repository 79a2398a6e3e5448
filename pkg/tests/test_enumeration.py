from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from monoid_embed.enumeration import (
    Labeling,
    decomposition_pairs,
    label_histogram,
    required_branching,
    verify_enumeration,
)
from monoid_embed.errors import ConfigurationError, TruncationError
from monoid_embed.lattice import CATALOG, catalog_lattice, ideals_enumerate
from monoid_embed.tree import ROOT, Node, TruncationConfig


def _count_closed_form(name):
    # pairs (d, e) of the carrier whose join lies above the worst element
    if name.startswith("chain"):
        k = int(name[5:]) - 1
        return k * k
    if name.startswith("boolean"):
        m = int(name[7:])
        return (2 ** m - 1) ** 2 - (2 ** (m - 1) - 1) ** 2
    return {"M3": 16 - 2, "N5": 16 - 1}[name]


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_required_branching_matches_closed_form(name):
    assert required_branching(catalog_lattice(name).compact()) == _count_closed_form(name)


def test_chain_values():
    assert required_branching(catalog_lattice("chain2").compact()) == 1
    assert required_branching(catalog_lattice("chain3").compact()) == 4


def test_decomposition_pairs_chain3():
    c = catalog_lattice("chain3").compact()
    assert decomposition_pairs(c, "a") == [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]
    assert decomposition_pairs(c, "b") == [("b", "b"), ("a", "b"), ("b", "a")]


def labeling(name, kappa=None, depth=None, **kw):
    c = catalog_lattice(name).compact()
    kappa = required_branching(c) if kappa is None else kappa
    return Labeling(c, TruncationConfig(kappa, depth or len(c)), **kw)


def test_chain2_kappa1_depth3_passes():
    rep = verify_enumeration(labeling("chain2", 1, 3))
    assert rep.ok
    assert rep.counts["interior_nodes"] == 2 + 4


def test_kappa_too_small_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        labeling("chain3", 2)


def test_kappa_too_small_violates_property_three():
    rep = verify_enumeration(labeling("chain3", 2, 2, strict=False))
    assert not rep.ok
    assert rep.counts["property3"] > 0


def test_m3_depth2_passes():
    rep = verify_enumeration(labeling("M3", depth=2))
    assert rep.ok and rep.counts["kappa"] == 14


def test_root_labels_cycle_and_one_roots_carry_top():
    lab = labeling("M3", depth=2)
    assert [lab(Node.root(a, 0)) for a in range(5)] == ["1", "a", "b", "c", "1"]
    assert {lab(Node.root(a, 1)) for a in range(14)} == {"1"}
    assert lab(ROOT) == "1"


def test_mirror_convention_breaks_the_order_at_the_whole_space_root():
    lab = labeling("M3", depth=2, one_roots="mirror")
    assert lab(Node.root(1, 1)) == lab(Node.root(1, 0)) == "a"
    rep = verify_enumeration(lab)
    assert not rep.ok
    assert all(w["node"] == "(|)" for w in rep.witnesses)


def test_mirror_is_harmless_on_a_one_element_carrier():
    assert verify_enumeration(labeling("chain2", 1, 2, one_roots="mirror")).ok


def test_unknown_one_root_convention():
    with pytest.raises(ConfigurationError):
        labeling("M3", one_roots="other")


def test_label_outside_truncation():
    with pytest.raises(TruncationError):
        labeling("chain2", 1, 1)(Node((0, 0), (0, 0)))


def test_walk_matches_label_and_histogram():
    lab = labeling("chain3", depth=3)
    walked = list(lab.walk())
    assert len(walked) == lab.truncation.node_count()
    assert all(lab(x) == c for x, c in walked)
    hist = label_histogram(lab)
    by_depth = [Counter(c for x, c in walked if x.depth == d) for d in range(1, 4)]
    assert [dict(h) for h in by_depth] == hist
    assert list(lab.walk(0)) == []


@pytest.mark.parametrize("name", ["chain3", "boolean2", "N5"])
def test_labeling_is_deterministic(name):
    a, b = labeling(name, depth=2), labeling(name, depth=2)
    assert list(a.walk()) == list(b.walk())


# -- properties ---------------------------------------------------------------

NAMES = [x for x in sorted(CATALOG) if x != "boolean3"]


@st.composite
def node_with_ideal(draw):
    name = draw(st.sampled_from(NAMES))
    lab = labeling(name, depth=3)
    k = lab.kappa
    d = draw(st.integers(1, 2))
    x = Node(tuple(draw(st.integers(0, k - 1)) for _ in range(d)), tuple(draw(st.integers(0, 1)) for _ in range(d)))
    ideal = draw(st.sampled_from(ideals_enumerate(lab.semilattice)))
    alpha = draw(st.integers(0, k - 1))
    return lab, x, ideal, alpha


@given(node_with_ideal())
def test_children_in_an_ideal_force_the_parent_in(data):
    lab, x, ideal, alpha = data
    c0, c1 = lab.truncation.children(x, alpha)
    if lab(c0) in ideal and lab(c1) in ideal:
        assert lab(x) in ideal


@given(node_with_ideal())
def test_whole_space_root_follows_the_same_rule(data):
    lab, _, ideal, alpha = data
    if lab(Node.root(alpha, 0)) in ideal and lab(Node.root(alpha, 1)) in ideal:
        assert lab(ROOT) in ideal

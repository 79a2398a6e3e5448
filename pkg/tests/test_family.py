import threading
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SMALL, n, nodes_in
from monoid_embed.errors import ConstructionError, DomainError, ResourceError
from monoid_embed.family import (
    BitRegistry,
    Cube,
    ExplicitGround,
    Literal,
    b_cube,
    separating_point,
    sharp_literal,
)
from monoid_embed.tree import ROOT


def test_sharp_literal_examples():
    assert sharp_literal(n("0", "0")) == Literal(n("0", "0"), True)
    assert sharp_literal(n("0", "1")) == Literal(n("0", "0"), False)
    assert sharp_literal(n("00", "01")) == Literal(n("00", "00"), False)


def test_b_cube_examples():
    assert b_cube(n("0", "0")) == Cube([Literal(n("0", "0"), True)])
    assert b_cube(n("00", "01")) == Cube([Literal(n("0", "0"), True), Literal(n("00", "00"), False)])
    assert b_cube(ROOT) == Cube()


def test_cube_rejects_contradictory_literals():
    with pytest.raises(DomainError):
        Cube([Literal(n("0", "0"), True), Literal(n("0", "0"), False)])


def test_cube_contains_needs_every_bit():
    cube = b_cube(n("00", "01"))
    assert cube.contains({n("0", "0"): True, n("00", "00"): False})
    assert not cube.contains({n("0", "0"): False, n("00", "00"): False})
    with pytest.raises(DomainError):
        cube.contains({n("0", "0"): True})


def test_registry_rejects_one_nodes_and_is_stable():
    reg = BitRegistry()
    assert reg.get(n("0", "0")) == 0
    assert reg.get(n("1", "0")) == 1
    assert reg.get(n("0", "0")) == 0
    with pytest.raises(DomainError):
        reg.get(n("0", "1"))


def test_registry_is_atomic_under_threads():
    reg = BitRegistry()
    nodes = list(SMALL.nodes())
    zero = [x for x in nodes if x.last_bit == 0]
    seen = []

    def work():
        seen.append([reg.get(x) for x in zero])

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(s == seen[0] for s in seen)
    assert sorted(seen[0]) == list(range(len(zero)))


def test_ground_with_three_bits():
    bits = [n("0", "0"), n("00", "00"), n("00", "10")]
    g = ExplicitGround(bits)
    assert len(g) == 8
    for signs in product((True, False), repeat=3):
        cube = Cube(Literal(b, s) for b, s in zip(bits, signs))
        assert g.mask(cube).sum() == 1


def test_ground_with_no_bits():
    g = ExplicitGround([])
    assert len(g) == 1
    assert g.contains(0, Cube())


def test_ground_budget():
    with pytest.raises(ResourceError):
        ExplicitGround([n(str(i), "0") for i in range(5)], max_bits=4)


def test_ground_point_round_trip():
    bits = [n("0", "0"), n("1", "0")]
    g = ExplicitGround(bits)
    for x in range(4):
        assert g.point(g.assignment(x)) == x


def test_separating_point_against_the_sibling_root():
    a = separating_point(n("0", "0"), [n("0", "1")])
    assert a[n("0", "0")] is True
    assert b_cube(n("0", "0")).contains(a) and not b_cube(n("0", "1")).contains(a)


def test_separating_point_against_another_root():
    a = separating_point(n("0", "0"), [n("1", "0")])
    assert a == {n("0", "0"): True, n("1", "0"): False}


@pytest.mark.parametrize("node, q", [
    (n("00", "00"), [n("0", "0")]),
    (n("0", "0"), [n("0", "0")]),
    (n("0", "0"), [n("10", "00"), n("10", "01")]),
    (n("0", "0"), [ROOT]),
])
def test_separating_point_preconditions(node, q):
    with pytest.raises(DomainError):
        separating_point(node, q)


def test_depth_one_pair_covers_everything():
    # why depth-1 pairs must count as siblings: nothing escapes both cubes
    q = [n("1", "0"), n("1", "1")]
    with pytest.raises(ConstructionError):
        _raw_solve(n("0", "0"), q)
    with pytest.raises(DomainError):
        separating_point(n("0", "0"), q)


def _raw_solve(node, q):
    # same search without the precondition checks
    fixed = {lit.bit: lit.positive for lit in b_cube(node)}
    cubes = [b_cube(p) for p in q]
    bits = sorted({lit.bit for c in cubes for lit in c} - set(fixed))
    for values in product((False, True), repeat=len(bits)):
        a = {**fixed, **dict(zip(bits, values))}
        if not any(c.contains(a) for c in cubes):
            return a
    raise ConstructionError("no point")


# -- properties ---------------------------------------------------------------

@given(nodes_in(SMALL))
def test_sharp_literal_is_an_involution_in_polarity(x):
    a, b = sharp_literal(x), sharp_literal(x.sibling())
    assert a.bit == b.bit and a.positive != b.positive


@given(nodes_in(SMALL), st.integers(0, SMALL.kappa - 1))
def test_children_partition_the_parent_cube(x, alpha):
    if x.depth >= SMALL.depth:
        return
    c0, c1 = SMALL.children(x, alpha)
    g = ExplicitGround(sorted({s.zero_form() for s in c0.prefixes()}))
    m0, m1, mp = g.mask(b_cube(c0)), g.mask(b_cube(c1)), g.mask(b_cube(x))
    assert not np.any(m0 & m1)
    assert np.array_equal(m0 | m1, mp)


@given(st.lists(st.tuples(st.integers(0, 5), st.booleans()), unique_by=lambda t: t[0], max_size=6))
def test_distinct_bit_cubes_are_never_empty(spec):
    bits = [n(str(i), "0") for i in range(6)]
    g = ExplicitGround(bits)
    cube = Cube(Literal(bits[i], s) for i, s in spec)
    assert g.mask(cube).sum() == 2 ** (6 - len(spec))


@given(nodes_in(SMALL), st.lists(nodes_in(SMALL), max_size=4))
def test_separating_point_agrees_with_brute_force(x, q):
    from monoid_embed.tree import is_proper_initial_segment, is_reduced

    q = sorted(set(q))
    if x in q or not is_reduced(q) or any(is_proper_initial_segment(p, x) for p in q):
        return
    try:
        a = separating_point(x, q)
    except ConstructionError:
        with pytest.raises(ConstructionError):
            _raw_solve(x, q)
        return
    full = {**{s.zero_form(): False for m in [x, *q] for s in m.prefixes()}, **a}
    assert b_cube(x).contains(full)
    assert not any(b_cube(p).contains(full) for p in q)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import assert_pmf_close
from gwcp.dist import ZeroMass, degenerate, from_map, geometric_from_rate
from gwcp.rng import make_rng
from gwcp.tree import TreeMode, UnknownVertex, new_tree

MIXED = from_map({1: 0.2, 2: 0.3, 3: 0.4, 5: 0.1})


def test_regular_agw_root_has_five_children(regular5):
    t = new_tree(regular5, TreeMode.AGW, 1)
    assert len(t.children(0)) == 5
    assert t.degree(0) == 5


def test_regular_gw_root_has_four_children(regular5):
    t = new_tree(regular5, TreeMode.GW, 1)
    assert len(t.children(0)) == 4
    assert t.degree(0) == 4


def test_non_root_children_and_degree(regular5):
    t = new_tree(regular5, TreeMode.AGW, 2)
    for c in t.children(0):
        assert t.child_count(c) == 4
        assert t.degree(c) == 5


def test_children_idempotent():
    t = new_tree(MIXED, seed=9)
    a = t.children(0)
    b = t.children(0)
    assert a == b and len(t) == 1 + len(a)


def test_depths():
    t = new_tree(MIXED, seed=4)
    assert t.depth(0) == 0
    for c in t.children(0):
        assert t.depth(c) == 1
        for g in t.children(c):
            assert t.depth(g) == t.depth(c) + 1


def test_unknown_vertex():
    t = new_tree(MIXED, seed=4)
    with pytest.raises(UnknownVertex):
        t.children(5)
    with pytest.raises(UnknownVertex):
        t.depth(-1)


def test_tree_law_must_not_allow_zero():
    with pytest.raises(ZeroMass):
        new_tree(geometric_from_rate(1.0))


def test_creation_is_lazy():
    t = new_tree(MIXED, seed=0)
    assert len(t) == 1 and t.n_explored == 0
    assert t._parent.size <= 64


def _bfs(t, max_depth):
    frontier = [0]
    for _ in range(max_depth):
        t.explore(frontier)
        frontier = [c for v in frontier for c in t.children(v)]


def _random_walk_explore(t, steps, seed):
    rng = make_rng(seed)
    v = 0
    for _ in range(steps):
        nb = t.neighbors(v)
        v = nb[int(rng.integers(len(nb)))]


@pytest.mark.parametrize("mode", [TreeMode.GW, TreeMode.AGW])
def test_shape_independent_of_exploration_order(mode):
    a = new_tree(MIXED, mode, 123)
    b = new_tree(MIXED, mode, 123)
    c = new_tree(MIXED, mode, 123)
    _bfs(b, 6)
    _random_walk_explore(c, 3000, 5)
    sa = a.canonical_shape(6)
    assert sa == b.canonical_shape(6) == c.canonical_shape(6)
    assert len(sa) > 50


def test_different_seeds_differ():
    assert new_tree(MIXED, seed=1).canonical_shape(5) != new_tree(MIXED, seed=2).canonical_shape(5)


def _root_counts(law, mode, n):
    out = np.empty(n, dtype=np.int64)
    for s in range(n):
        out[s] = new_tree(law, mode, s).child_count(0)
    return out


def test_first_generation_law_gw_and_agw():
    n = 10**5
    law = from_map({2: 0.25, 3: 0.5, 6: 0.25})
    assert_pmf_close(_root_counts(law, TreeMode.GW, n), law.support, law.probs, 4)
    assert_pmf_close(_root_counts(law, TreeMode.AGW, n), law.support + 1, law.probs, 4)


def test_augment_child():
    t = new_tree(MIXED, TreeMode.AGW, 3)
    assert t.augment_child() == t.children(0)[-1]
    assert new_tree(MIXED, TreeMode.GW, 3).augment_child() is None


def test_neighbors_order():
    t = new_tree(MIXED, TreeMode.AGW, 3)
    c = t.children(0)[0]
    assert t.neighbors(c) == [0] + t.children(c)
    assert [t.neighbor(c, j) for j in range(t.degree(c))] == t.neighbors(c)


def test_random_neighbors_matches_scalar():
    t = new_tree(MIXED, TreeMode.AGW, 8)
    _bfs(t, 3)
    vs = np.arange(len(t))
    u = make_rng(0).random(vs.size)
    got = t.random_neighbors(vs, u)
    for v, uu, w in zip(vs, u, got):
        assert w == t.neighbors(int(v))[int(uu * t.degree(int(v)))]


def test_dump_csv(tmp_path):
    t = new_tree(degenerate(2), TreeMode.GW, 0)
    _bfs(t, 2)
    p = tmp_path / "tree.csv"
    t.dump_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "vertex_id,parent_id,depth,child_count"
    assert lines[1] == "0,,0,2"
    assert len(lines) == 1 + 3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**63 - 1), st.integers(50, 400))
def test_paths_to_root_strictly_decrease_in_depth(seed, steps):
    t = new_tree(MIXED, TreeMode.AGW, seed)
    _random_walk_explore(t, steps, seed % 1000)
    for v in range(len(t)):
        d = t.depth(v)
        p = t.parent(v)
        while p is not None:
            assert t.depth(p) == d - 1
            d, p = d - 1, t.parent(p)
        assert d == 0
    for v, _, _, k in t.rows():
        assert k >= MIXED.h_min


def test_scalar_and_vector_exploration_agree():
    a = new_tree(MIXED, TreeMode.AGW, 77)
    b = new_tree(MIXED, TreeMode.AGW, 77)
    frontier = [0]
    for _ in range(5):
        b.explore(np.array(frontier + frontier))  # forces the array path
        frontier = [c for v in frontier for c in b.children(v)]
    assert a.canonical_shape(5) == b.canonical_shape(5)
    keys_a = {p: a.path_key(v) for p, v in _paths(a, 3).items()}
    keys_b = {p: b.path_key(v) for p, v in _paths(b, 3).items()}
    assert keys_a == keys_b


def _paths(t, depth):
    out = {(): 0}
    stack = [((), 0)]
    while stack:
        p, v = stack.pop()
        if len(p) < depth:
            for i, c in enumerate(t.children(v)):
                out[p + (i,)] = c
                stack.append((p + (i,), c))
    return out


def test_root_count_depends_on_seed():
    counts = {new_tree(MIXED, TreeMode.GW, s).child_count(0) for s in range(200)}
    assert counts == {1, 2, 3, 5}

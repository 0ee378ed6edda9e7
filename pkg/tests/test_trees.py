"""String codes, level trees, structural predicates, uniformization.

Frozen counts and codes derived with tests/oracles/trees_oracle.py
(closed-formula pairing, brute-force enumeration over binary strings).
The predicate fixtures are small enough to read off by hand; their
witness strings are frozen so report wording stays stable.
"""

import pytest
from hypothesis import given, strategies as st

from ordtower.tower import MonotoneMap
from ordtower.trees import (
    LevelTree,
    MissingInput,
    extendable_nodes,
    is_prefix,
    phi_column,
    string_code,
    string_decode,
    truncate,
    uniformize,
    verify_structure,
)

# derived: trees_oracle.py, "all-zero string codes" — these are the codes
# the tower's stage arithmetic was originally sized against
ZERO_STRING_CODES = [0, 1, 2, 4, 11, 67, 2279, 2598061, 3374961778892]


def test_all_zero_string_codes():
    for n, expected in enumerate(ZERO_STRING_CODES):
        assert string_code((0,) * n) == expected


@given(st.lists(st.integers(0, 30), max_size=8))
def test_string_code_bijection(sigma):
    sigma = tuple(sigma)
    assert string_decode(string_code(sigma)) == sigma


@given(st.lists(st.integers(0, 20), max_size=6), st.integers(0, 20))
def test_code_grows_under_extension(sigma, k):
    sigma = tuple(sigma)
    assert string_code(sigma + (k,)) > string_code(sigma)
    assert string_code(sigma + (k + 1,)) > string_code(sigma + (k,))


def test_is_prefix():
    assert is_prefix((), (5, 1))
    assert is_prefix((5,), (5, 1))
    assert not is_prefix((5, 1), (5,))
    assert not is_prefix((4,), (5, 1))


def test_full_tree_shape():
    t = LevelTree.full(4, 2)
    assert t.node_count() == 31
    assert t.binary
    assert t.children((0, 1)) == [(0, 1, 0), (0, 1, 1)]
    assert t.mark(()) == "live"
    assert t.mark((0, 0, 0, 0)) == "frontier"


def test_truncate_counts():
    t = truncate(LevelTree.full(4, 2), 2)
    assert t.node_count() == 7
    assert t.depth == 2
    with pytest.raises(ValueError):
        t.truncate(5)


def test_dead_subtree_blocks_extendability():
    # derived: trees_oracle.py, "(0,) marked dead" — 8 frontier paths,
    # 16 extendable nodes out of 31
    t = LevelTree.full(4, 2)
    t.dead.add((0,))
    assert t.mark((0,)) == "dead"
    assert len(t.frontier()) == 8
    ext = extendable_nodes(t)
    assert len(ext) == 16
    assert (0,) not in ext and (0, 1, 1, 1) not in ext
    assert (1,) in ext


def test_constructor_validation():
    with pytest.raises(ValueError, match="prefix-closed"):
        LevelTree(3, [(), (0, 1)])
    with pytest.raises(ValueError, match="deeper"):
        LevelTree(1, [(), (0,), (0, 0)])
    with pytest.raises(ValueError, match="non-binary"):
        LevelTree(2, [(), (4,)], binary=True)


def test_json_round_trip():
    t = LevelTree.full(3, 2)
    t.dead.add((1, 0))
    back = LevelTree.from_json(t.to_json())
    assert back.nodes == t.nodes and back.dead == t.dead
    assert back.depth == t.depth and back.binary


def test_dot_export_marks_states():
    t = LevelTree.full(2, 2)
    t.dead.add((0,))
    dot = t.to_dot()
    assert dot.startswith("digraph tree {")
    assert '"0" [style=filled fillcolor=gray];' in dot
    assert '"1,1" [style=filled fillcolor=lightblue];' in dot
    assert '"1" -> "1,1";' in dot


# --- structural predicates ------------------------------------------------


def test_padded_full_tree():
    # derived: trees_oracle.py, "padded check population" — root plus the
    # four length-2 nodes
    rep = verify_structure(LevelTree.full(4, 2), checks=("padded",))
    assert rep.passed and rep["padded"].checked == 5


def test_padded_respects_copylen():
    rep = verify_structure(LevelTree.full(4, 2), copylen=2, checks=("padded",))
    assert rep.passed and rep["padded"].checked == 4


def test_padded_catches_missing_child():
    # padding is demanded at even lengths only, so the two bare chains
    # first offend at (0, 0), not at the root's children
    chains = [(0,) * j for j in range(5)] + [(1,) * j for j in range(1, 5)]
    t = LevelTree(4, chains)
    rep = verify_structure(t, checks=("padded",))
    assert not rep.passed
    assert rep["padded"].witness == "children of (0, 0) missing"


def test_largeness_accepts_monotone_map():
    t = LevelTree.full(3, 2)
    theta = MonotoneMap(final={(): (), (0,): (2,), (1,): (4,), (0, 1): (2, 3)},
                        copylen=0, target=t)
    rep = verify_structure(t, theta=theta, checks=("largeness",))
    assert rep.passed and rep["largeness"].checked == 4


def test_largeness_witnesses():
    t = LevelTree.full(3, 2)
    dec = MonotoneMap(final={(): (), (3, 1): (5, 2)}, copylen=0, target=t)
    rep = verify_structure(t, theta=dec, checks=("largeness",))
    assert rep["largeness"].witness == "image of (3, 1) decreases: (5, 2)"

    low = MonotoneMap(final={(2,): (0,), (2, 1): (0, 0)}, copylen=0, target=t)
    rep = verify_structure(t, theta=low, checks=("largeness",))
    assert rep["largeness"].witness == "appended block (0,) below branch index 1"


def test_disagreement_passes_when_children_split():
    t = LevelTree.full(3, 2)
    tgt = LevelTree.full(2, 6)
    theta = MonotoneMap(final={(): (), (0,): (1,), (1,): (2,)},
                        copylen=0, target=tgt)
    rep = verify_structure(t, theta=theta, phi_family=phi_column,
                           checks=("disagreement",))
    assert rep.passed and rep["disagreement"].checked == 1


def test_disagreement_catches_hidden_split():
    # children share an image, yet extensions in the target split on the
    # watched column: the map failed to commit to a Phi_0 value
    t = LevelTree.full(3, 2)
    tgt = LevelTree.full(2, 6)
    theta = MonotoneMap(final={(): (), (0,): (3,), (1,): (3,)},
                        copylen=0, target=tgt)
    rep = verify_structure(t, theta=theta, phi_family=phi_column,
                           checks=("disagreement",))
    assert not rep.passed
    assert rep["disagreement"].witness == \
        "extensions of theta(()) split on Phi_0 but children agree"


def test_uniquely_small_on_full_tree_fails():
    rep = verify_structure(LevelTree.full(3, 2), xi_probe=[1, 1, 1],
                           checks=("uniquely_small",))
    assert rep["uniquely_small"].witness == \
        "x=0: prefixes (0,) and (1,) both small but differ"


def test_uniquely_small_passing_probes():
    rep = verify_structure(LevelTree.full(3, 2), xi_probe=[-1, -1, -1],
                           checks=("uniquely_small",))
    assert rep.passed and rep["uniquely_small"].checked == 3

    p0, p1 = (0, 0, 0), (1, 5, 5)
    thin = LevelTree(3, [p0[:j] for j in range(4)] + [p1[:j] for j in range(1, 4)])
    rep = verify_structure(thin, xi_probe=[0, 0, 0], checks=("uniquely_small",))
    assert rep.passed and rep["uniquely_small"].checked == 3


def test_predicates_demand_their_inputs():
    t = LevelTree.full(2, 2)
    with pytest.raises(MissingInput):
        verify_structure(t, checks=("largeness",))
    with pytest.raises(MissingInput):
        verify_structure(t, checks=("uniquely_small",))
    with pytest.raises(MissingInput):
        verify_structure(t, theta=MonotoneMap(final={}, copylen=0, target=t),
                        checks=("disagreement",))
    with pytest.raises(ValueError, match="unknown predicate"):
        verify_structure(t, checks=("sideways",))


# --- uniformization -------------------------------------------------------


def test_uniformize_without_certificates_is_full():
    # derived: trees_oracle.py, "no certificates, depth 3"
    t = uniformize(lambda s: None, None, depth=3)
    assert t.node_count() == 15
    assert t.binary


def test_uniformize_certificate_cuts_at_its_length():
    # derived: trees_oracle.py — a (step, column) = (2, 1) certificate on
    # every length-5 string excludes exactly depth 5 and beyond
    cert = lambda s: (2, 1) if len(s) == 5 else None
    t = uniformize(cert, None, depth=6)
    assert t.node_count() == 31
    assert max(map(len, t.nodes)) == 4


def test_uniformize_late_certificate_keeps_string():
    # step beyond the string's length: not yet refuted there
    cert = lambda s: (9, 0) if len(s) == 2 else None
    t = uniformize(cert, None, depth=3)
    assert t.node_count() == 15


def test_uniformize_copies_below_copylen():
    copied = LevelTree(2, [(), (1,), (1, 0)])
    t = uniformize(lambda s: None, copied, depth=4, copylen=2)
    assert (0,) not in t.nodes and (1, 1) not in t.nodes
    assert (1, 0, 0, 1) in t.nodes
    assert t.node_count() == 1 + 1 + 1 + 2 + 4

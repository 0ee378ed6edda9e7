"""Enumeration tree, nicified segments, copylen/pred tables, niceness checks.

Frozen child lists and enumseq/copylen rows come from
tests/oracles/enum_oracle.py (plain-recursion replay of the child rule over
the independent multiset ordinals); rerun it to regenerate.
"""

import pytest

import support
from ordtower.errors import BudgetExceeded
from ordtower.notation import Kind, ZERO, compare, from_int, parse, render
from ordtower.nicety import (
    EnumTree,
    NiceSegment,
    RawSystem,
    extend_nice,
    is_nice,
    lex_compare,
    nicify,
    path_between,
)

# derived: enum_oracle.py, "child lists"
CHILD_LISTS = [
    ("5", None, ["0", "1", "2", "3", "4"]),
    ("w*2", None, ["w", "w+1", "w+2", "w+3", "w+4", "w+5"]),
    ("w*2", "w", ["0", "1", "2", "3", "4", "5"]),
    ("w^2", None, ["w", "w*2", "w*3", "w*4", "w*5"]),
    ("w^2", "w*2", ["w+1", "w+2", "w+3", "w+4", "w+5"]),
    ("w^3", None, ["w^2", "w^2*2", "w^2*3", "w^2*4", "w^2*5"]),
    ("w^2+w*3+2", None, ["w^2+w*3", "w^2+w*3+1"]),
]

# derived: enum_oracle.py, "enumseq / copylen" tables
ENUMSEQ_ROWS = [
    ("w^2", "0", ["w^2", "w", "0"], 0),
    ("w^2", "3", ["w^2", "w", "3"], 3),
    ("w^2", "w", ["w^2", "w"], 0),
    ("w^2", "w+1", ["w^2", "w*2", "w+1"], 1),
    ("w^2", "w+5", ["w^2", "w*2", "w+5"], 5),
    ("w^2", "w*2", ["w^2", "w*2"], 1),
    ("w^2", "w*2+1", ["w^2", "w*3", "w*2+1"], 2),
    ("w^2", "w*3", ["w^2", "w*3"], 2),
    ("w^2", "w*3+2", ["w^2", "w*4", "w*3+2"], 4),
    ("w^2+w*3+2", "w^2+w*3+1", ["w^2+w*3+2", "w^2+w*3+1"], 0),
    ("w^2+w*3+2", "w^2+w*3", ["w^2+w*3+2", "w^2+w*3"], 0),
    ("w^2+w*3+2", "w^2+w*2+7", ["w^2+w*3+2", "w^2+w*3", "w^2+w*2+7"], 7),
    ("w^2+w*3+2", "w^2+1",
     ["w^2+w*3+2", "w^2+w*3", "w^2+w*2", "w^2+w", "w^2+1"], 1),
    ("w^2+w*3+2", "w^2",
     ["w^2+w*3+2", "w^2+w*3", "w^2+w*2", "w^2+w", "w^2"], 0),
    ("w^2+w*3+2", "w*4",
     ["w^2+w*3+2", "w^2+w*3", "w^2+w*2", "w^2+w", "w^2", "w*4"], 3),
    ("w^2+w*3+2", "3",
     ["w^2+w*3+2", "w^2+w*3", "w^2+w*2", "w^2+w", "w^2", "w", "3"], 3),
    ("w^3", "w^2", ["w^3", "w^2"], 0),
    ("w^3", "w^2+1", ["w^3", "w^2*2", "w^2+w", "w^2+1"], 1),
    ("w^3", "w^2+w", ["w^3", "w^2*2", "w^2+w"], 1),
    ("w^3", "w^2*2+w*5+3", ["w^3", "w^2*3", "w^2*2+w*6", "w^2*2+w*5+3"], 9),
    ("w^3", "w^2*2", ["w^3", "w^2*2"], 1),
]


@pytest.mark.parametrize("alpha,at,expected", CHILD_LISTS)
def test_child_lists(alpha, at, expected):
    seg = nicify(parse(alpha))
    node = seg.top if at is None else seg.lookup(parse(at))
    got = [render(c.base) for c in seg.children(node, len(expected) + 2)]
    if len(got) > len(expected):
        got = got[: len(expected)]
    else:
        # the list was exhausted: nothing beyond the frozen entries
        assert got == expected
    assert got == expected


@pytest.mark.parametrize("alpha,beta,seq,cl", ENUMSEQ_ROWS)
def test_enumseq_and_copylen(alpha, beta, seq, cl):
    seg = nicify(parse(alpha))
    nn = seg.lookup(parse(beta))
    assert [render(x) for x in nn.seq] == seq
    assert seg.copylen(nn) == cl


def test_enumseq_successor_chain():
    assert [render(x) for x in EnumTree(from_int(5)).enumseq(from_int(3))] == ["5", "3"]


def test_lex_compare():
    seg = nicify(parse("w*2"))
    a = seg.lookup(from_int(3)).seq          # <w*2, w, 3>
    b = seg.lookup(parse("w")).seq           # <w*2, w>
    assert lex_compare(a, b) == -1           # proper extension is smaller
    assert lex_compare(b, a) == 1
    s5 = nicify(from_int(5))
    assert lex_compare(s5.lookup(from_int(1)).seq, s5.lookup(from_int(3)).seq) == -1
    assert lex_compare(a, a) == 0


def test_lex_order_is_base_order():
    seg = nicify(parse("w^2+w*3+2"), count=120)
    ms = seg.materialize(120)
    for i, x in enumerate(ms):
        for y in ms[i + 1:]:
            assert lex_compare(x.seq, y.seq) == compare(x.base, y.base)


def test_nicify_finite_segment_trivial():
    seg = nicify(from_int(5), count=10)
    nodes = seg.notations()
    assert len(nodes) == 6
    assert all(seg.copylen(nn) == 0 for nn in nodes)
    assert all(seg.enum_pred(nn) is None for nn in nodes)


def test_nicify_omega_children_are_finite_notations():
    seg = nicify(parse("w"))
    kids = seg.children(seg.top, 10)
    assert [render(c.base) for c in kids] == [str(n) for n in range(10)]


def test_enum_pred_examples():
    seg = nicify(parse("w*2"))
    assert seg.enum_pred(seg.lookup(from_int(3))).base == parse("w")
    assert seg.enum_pred(seg.top) is None
    s5 = nicify(from_int(5))
    assert s5.enum_pred(s5.lookup(from_int(3))) is None


def test_copylen_omega2_examples():
    seg = nicify(parse("w*2"))
    assert seg.copylen(seg.top) == 0
    assert seg.copylen(seg.lookup(parse("w"))) == 0
    assert seg.copylen(seg.lookup(from_int(3))) == 3


def test_copylen_laws_small_segment():
    seg = nicify(parse("w^2"), count=150)
    sweep = support.copylen_sweep(seg)
    assert sweep.ok, sweep.errors
    assert sweep.triples > 100
    assert sweep.discrepancies  # the beta = lam boundary cases exist
    assert support.divergence_check(seg, n_max=64) == []


def test_is_nice_passes_on_nicified():
    for alpha in ("5", "w", "w^2"):
        rep = is_nice(nicify(parse(alpha), count=120))
        assert rep.passed, (alpha, rep)


def test_is_nice_flags_raw_principal_control():
    rep = is_nice(RawSystem(parse("w^2"), sequences="principal"))
    assert not rep.passed
    assert rep.failing_part() == 2
    lam, beta = rep.part2_witness
    assert render(beta) == "w+1"
    assert render(lam) == "w^2"
    assert rep.skipped_limits > 0


def test_raw_full_segment_is_nice_too():
    # with a total sequence assignment the raw segment below w^2 satisfies
    # all three clauses; only the principal-only presentation fails
    rep = is_nice(RawSystem(parse("w^2"), sequences="full"))
    assert rep.passed
    assert rep.skipped_limits == 0


class _Scripted:
    """Hand-built system for negative controls."""

    def __init__(self, elems, seqs):
        self._elems = [parse(e) for e in elems]
        self._seqs = {parse(k): [parse(x) for x in v] for k, v in seqs.items()}

    def elements(self):
        return list(self._elems)

    def seq_members(self, beta, width):
        if beta in self._seqs:
            return self._seqs[beta][:width]
        return None


def test_is_nice_detects_double_path():
    sys = _Scripted(
        ["0", "1", "2", "3", "w", "w*2"],
        {"w*2": ["1", "w"], "w": ["1", "2", "3"]},
    )
    rep = is_nice(sys)
    assert rep.failing_part() == 1
    lam, beta, count = rep.part1_witness
    assert render(lam) == "w*2" and render(beta) == "1" and count == 2


def test_is_nice_detects_nonminimal_path():
    # the only path to 1 steps through w, but the least member >= 1 is 2:
    # a path exists and is not minimal
    sys = _Scripted(
        ["0", "1", "2", "w", "w*2"],
        {"w*2": ["2", "w"], "w": ["1"]},
    )
    rep = is_nice(sys)
    assert rep.failing_part() == 1
    lam, beta, count = rep.part1_witness
    assert render(lam) == "w*2" and render(beta) == "1" and count == 1


def test_is_nice_detects_pred_cycle():
    sys = _Scripted(
        ["0", "w", "w*2"],
        {"w*2": ["0", "w"], "w": ["0", "w*2"]},
    )
    rep = is_nice(sys)
    assert rep.failing_part() in (1, 3)
    assert not rep.part3_ok


def test_path_between_examples():
    raw3 = RawSystem(parse("w^3"), sequences="principal")
    res = path_between(raw3, parse("w^3"), parse("w"))
    assert [render(x) for x in res.path] == ["w^3", "w^2", "w"]
    assert res.minimal and res.all_paths == 1

    raw2 = RawSystem(parse("w^2"), sequences="principal")
    assert path_between(raw2, parse("w^2"), parse("w+1")).path is None

    seg = nicify(parse("w^2"), count=60)
    lam = seg.lookup(parse("w*2"))
    kid = seg.seq_member(lam, 3)
    res = path_between(seg, lam.base, kid.base)
    assert res.path == [lam.base, kid.base] and res.minimal


def test_block_separation_after_sum():
    # members of new-block limits stay above the old top, so no raw path
    # crosses into the old block
    raw = RawSystem(parse("w*2"), sequences="full")
    assert path_between(raw, parse("w*2"), from_int(3)).path is None
    assert path_between(raw, parse("w*2"), parse("w")).path is None


def test_extend_nice():
    a = nicify(parse("w"), count=30)
    ext = extend_nice(a, nicify(parse("w")), count=80)
    assert render(ext.alpha) == "w*2"          # w + 1 + w
    assert is_nice(ext).passed
    # degenerate second block: top = old top + 1
    bump = extend_nice(a, nicify(ZERO))
    assert bump.alpha == parse("w+1")
    # the old block reappears with its copylen table intact
    for k in (0, 3, 7):
        old = a.lookup(from_int(k))
        new = ext.lookup(from_int(k))
        assert ext.copylen(new) == a.copylen(old)


def test_seq_member_requires_limit():
    seg = nicify(parse("w+1"))
    with pytest.raises(ValueError):
        seg.seq_member(seg.top, 0)


def test_child_budget_guard():
    seg = nicify(parse("w"), child_budget=16)
    with pytest.raises(BudgetExceeded):
        seg.children(seg.top, 40)


def test_segment_json_shape():
    seg = nicify(parse("w*2"), count=12)
    doc = seg.to_json()
    assert doc["alpha"] == "w*2"
    by_base = {n["base"]: n for n in doc["nodes"]}
    assert by_base["3"]["copylen"] == 3
    assert by_base["3"]["pred"] == list(seg.lookup(parse("w")).address)
    assert by_base["w*2"]["pred"] is None

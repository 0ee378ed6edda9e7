"""Nicified ordinal segments via an enumeration tree with lower-bound tags.

The enumeration tree for a top notation alpha lists every beta <= alpha
exactly once.  The root holds <alpha> with lower bound 0.  A node whose
last element is kappa, with lower bound lb and previous maximal child mu,
uses bound b = lb (no child yet) or mu+1 and generates its next child as
follows: pick the target t = kappa[n] for the least n with kappa[n] >= b
when kappa is a limit, or t = kappa-1 when kappa is a successor; the
child is then the least gamma >= b with gamma + m = t for finite m, i.e.
the limit part of t when that clears the bound and b itself otherwise.
Generation stops when no such gamma < kappa exists (only successor nodes
run out, after their children sweep b..t).

Reading addresses lexicographically (proper extensions first, then the
first differing element) recovers the order of the underlying notations,
so the tree doubles as a nice system: the fundamental sequence of a
materialized limit is its child list, the enumeration predecessor of a
node is its parent when the parent is a limit, and

    copylen(top) = 0
    copylen(x)   = 0                          if parent is not a limit
    copylen(x)   = copylen(parent) + index    if x is child #index of a limit

`is_nice` replays the three niceness clauses on a materialized fragment:
unique minimal paths, reachability of the window [lam[0], lam), and
finite predecessor chains (with a block-decomposition cross-check on
nicified segments).  `RawSystem` presents a plain CNF segment through the
same interface as a control; its "principal" flavour assigns sequences
only to additively principal limits, the textbook presentation in which
a successor like w+1 sits in no assigned sequence at all and clause 2
genuinely fails.  (With the total "full" assignment the raw segment up
to w^2 is in fact nice; the regression tests pin that down too.)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import BudgetExceeded
from .notation import (
    Kind,
    Notation,
    ZERO,
    classify,
    code_of,
    compare,
    from_int,
    fund_seq,
    limit_part,
    nat_sum,
    predecessor,
    render,
    successor,
    w_power,
)

Address = Tuple[int, ...]

DEFAULT_CHILD_BUDGET = 4096


def lex_compare(a: Sequence[Notation], b: Sequence[Notation]) -> int:
    """Order on enumeration sequences: proper extensions come first, otherwise
    the first differing element decides.  Returns -1/0/1."""
    for x, y in zip(a, b):
        c = compare(x, y)
        if c != 0:
            return c
    if len(a) == len(b):
        return 0
    # the longer sequence is the smaller notation
    return -1 if len(a) > len(b) else 1


class _Node:
    __slots__ = ("seq", "address", "lower", "children", "exhausted")

    def __init__(self, seq: Tuple[Notation, ...], address: Address, lower: Notation):
        self.seq = seq
        self.address = address
        self.lower = lower
        self.children: List["_Node"] = []
        self.exhausted = False

    @property
    def value(self) -> Notation:
        return self.seq[-1]


class EnumTree:
    """Lazy enumeration tree for {beta <= alpha}."""

    def __init__(self, alpha: Notation, child_budget: int = DEFAULT_CHILD_BUDGET):
        self.alpha = alpha
        self.child_budget = child_budget
        self.root = _Node((alpha,), (), ZERO)
        self._by_value: Dict[Notation, _Node] = {alpha: self.root}

    def next_child(self, node: _Node) -> Optional[_Node]:
        """Materialize one more child of node, or None when exhausted."""
        if len(node.children) >= self.child_budget:
            raise BudgetExceeded(
                f"more than {self.child_budget} children requested below {node.value}",
                self.child_budget,
            )
        kappa = node.value
        kind = classify(kappa)
        if kind is Kind.ZERO or node.exhausted:
            node.exhausted = True
            return None
        bound = node.lower if not node.children else successor(node.children[-1].value)
        if kind is Kind.SUCCESSOR:
            target = predecessor(kappa)
            if compare(bound, target) > 0:
                node.exhausted = True
                return None
        else:
            n = 0
            while compare(fund_seq(kappa, n), bound) < 0:
                n += 1
            target = fund_seq(kappa, n)
        mu, _ = limit_part(target)
        gamma = mu if compare(bound, mu) <= 0 else bound
        child = _Node(node.seq + (gamma,), node.address + (len(node.children),), bound)
        node.children.append(child)
        self._by_value[gamma] = child
        return child

    def children(self, node: _Node, count: int) -> List[_Node]:
        while len(node.children) < count and self.next_child(node) is not None:
            pass
        return node.children[:count]

    def find(self, beta: Notation) -> _Node:
        """Locate the unique node enumerating beta (beta <= alpha).

        Descend: among a node's increasing children, the first child
        >= beta roots the subtree whose window covers beta."""
        cached = self._by_value.get(beta)
        if cached is not None:
            return cached
        if compare(beta, self.alpha) > 0:
            raise ValueError(f"{beta} lies above the top {self.alpha}")
        node = self.root
        while compare(node.value, beta) != 0:
            i = 0
            while True:
                if i < len(node.children):
                    child = node.children[i]
                else:
                    child = self.next_child(node)
                    if child is None:
                        raise ValueError(
                            f"{beta} not enumerated below {node.value}"
                        )
                if compare(child.value, beta) >= 0:
                    node = child
                    break
                i += 1
        return node

    def enumseq(self, beta: Notation) -> Tuple[Notation, ...]:
        return self.find(beta).seq


@dataclass(frozen=True)
class NiceNotation:
    """A notation as presented by a nicified segment."""

    base: Notation
    address: Address
    seq: Tuple[Notation, ...]

    @property
    def kind(self) -> Kind:
        return classify(self.base)

    @property
    def code(self) -> int:
        return code_of(self.base)

    def __repr__(self):
        return f"NiceNotation({render(self.base)!r}@{list(self.address)})"


class NiceSegment:
    """Materialized fragment of the nicification of {beta <= alpha}."""

    def __init__(self, alpha: Notation, child_budget: int = DEFAULT_CHILD_BUDGET):
        self.alpha = alpha
        self.tree = EnumTree(alpha, child_budget=child_budget)
        self._materialized: Dict[Address, NiceNotation] = {}
        self._note(self.tree.root)

    # -- materialization ----------------------------------------------------

    def _note(self, node: _Node) -> NiceNotation:
        nn = self._materialized.get(node.address)
        if nn is None:
            nn = NiceNotation(node.value, node.address, node.seq)
            self._materialized[node.address] = nn
        return nn

    @property
    def top(self) -> NiceNotation:
        return self._materialized[()]

    def materialize(self, count: int) -> List[NiceNotation]:
        """Materialize (at least) the first `count` nodes in diagonal order:
        addresses ranked by len + sum of indices, then lexicographically.
        The diagonal sweep mixes depth and width, so limits acquire their
        early children and deep successor chains both show up."""
        weight = 1
        while len(self._materialized) < count:
            before = len(self._materialized)
            self._sweep(self.tree.root, weight)
            if len(self._materialized) == before:
                break  # finite tree fully materialized
            weight += 1
        ordered = sorted(
            self._materialized.values(),
            key=lambda nn: (len(nn.address) + sum(nn.address), nn.address),
        )
        return ordered[:count]

    def _sweep(self, node: _Node, budget: int) -> None:
        self._note(node)
        if budget <= 0:
            return
        for i, child in enumerate(self.tree.children(node, budget)):
            self._sweep(child, budget - 1 - i)

    def notations(self) -> List[NiceNotation]:
        return sorted(self._materialized.values(), key=lambda nn: nn.base)

    def lookup(self, beta: Notation) -> NiceNotation:
        return self._note(self.tree.find(beta))

    # -- nice-system structure ---------------------------------------------

    def children(self, nn: NiceNotation, count: int) -> List[NiceNotation]:
        node = self.tree.find(nn.base)
        return [self._note(c) for c in self.tree.children(node, count)]

    def seq_member(self, nn: NiceNotation, n: int) -> NiceNotation:
        """n-th member of the nicified fundamental sequence of a limit."""
        if nn.kind is not Kind.LIMIT:
            raise ValueError(f"{nn} is not a limit")
        return self.children(nn, n + 1)[n]

    def parent(self, nn: NiceNotation) -> Optional[NiceNotation]:
        if not nn.address:
            return None
        return self.lookup(nn.seq[-2])

    def enum_pred(self, nn: NiceNotation) -> Optional[NiceNotation]:
        """The limit whose nicified sequence contains nn: the tree parent
        when that parent is a limit; None otherwise (a reset point)."""
        p = self.parent(nn)
        if p is not None and p.kind is Kind.LIMIT:
            return p
        return None

    def copylen(self, nn: NiceNotation) -> int:
        total, cur = 0, nn
        while True:
            p = self.enum_pred(cur)
            if p is None:
                return total
            total += cur.address[-1]
            cur = p

    def successor_of(self, nn: NiceNotation) -> NiceNotation:
        return self.lookup(successor(nn.base))

    def order_pred_of(self, nn: NiceNotation) -> NiceNotation:
        return self.lookup(predecessor(nn.base))

    def to_json(self) -> dict:
        nodes = []
        for nn in self.notations():
            pred = self.enum_pred(nn)
            nodes.append(
                {
                    "base": render(nn.base),
                    "address": list(nn.address),
                    "copylen": self.copylen(nn),
                    "pred": list(pred.address) if pred is not None else None,
                }
            )
        return {"alpha": render(self.alpha), "nodes": nodes}

    # -- the abstract system interface used by is_nice ----------------------

    def elements(self) -> List[Notation]:
        return [nn.base for nn in self.notations()]

    def seq_members(self, beta: Notation, width: int) -> Optional[List[Notation]]:
        nn = self.lookup(beta)
        if nn.kind is not Kind.LIMIT:
            return None
        return [c.base for c in self.children(nn, width)]


def nicify(alpha: Notation, count: int = 0, child_budget: int = DEFAULT_CHILD_BUDGET) -> NiceSegment:
    seg = NiceSegment(alpha, child_budget=child_budget)
    if count:
        seg.materialize(count)
    return seg


def extend_nice(seg: NiceSegment, nxt: NiceSegment, count: int = 0) -> NiceSegment:
    """Concatenate two nice segments into one with top old + 1 + next.

    The interposed +1 keeps the blocks apart: every fundamental-sequence
    member of a new-block limit stays strictly above the old top, so no
    raw path crosses into the old block, while the old tree reappears
    verbatim as the subtree enumerating its top (same child sequences,
    same copylen table).
    """
    new_top = nat_sum(nat_sum(seg.alpha, from_int(1)), nxt.alpha)
    return nicify(new_top, count=count, child_budget=seg.tree.child_budget)


def _notations_below(bound: Notation, max_coeff: int, max_terms: int) -> List[Notation]:
    """All CNF notations <= bound whose coefficients stay <= max_coeff, built
    from the exponents <= bound's leading exponent (recursively capped)."""
    if bound.is_zero:
        return [ZERO]
    lead = bound.terms[0][0]
    if lead.is_zero:  # finite bound
        return [from_int(k) for k in range(bound.terms[0][1] + 1)]
    pool = _notations_below(lead, max_coeff, max_terms)
    pool = sorted(pool, reverse=True)
    out = {ZERO}

    def build(prefix: Notation, start: int, terms_left: int) -> None:
        for i in range(start, len(pool)):
            if terms_left == 0:
                return
            for c in range(1, max_coeff + 1):
                cand = nat_sum(prefix, w_power(pool[i], c))
                if compare(cand, bound) <= 0:
                    out.add(cand)
                    build(cand, i + 1, terms_left - 1)

    build(ZERO, 0, max_terms)
    out.add(bound)
    return sorted(out)


class RawSystem:
    """A plain CNF segment {beta <= alpha} for the niceness checker.

    sequences="full" assigns every limit its canonical fundamental sequence;
    sequences="principal" assigns sequences only to additively principal
    limits (bare powers w^e with coefficient 1 and no tail)."""

    def __init__(self, alpha: Notation, sequences: str = "principal",
                 max_coeff: int = 6, max_terms: int = 3):
        if sequences not in ("principal", "full"):
            raise ValueError(f"unknown sequence flavour {sequences!r}")
        self.alpha = alpha
        self.sequences = sequences
        self._elements = _notations_below(alpha, max_coeff, max_terms)

    def elements(self) -> List[Notation]:
        return list(self._elements)

    @property
    def top(self) -> Notation:
        return self.alpha

    def seq_members(self, beta: Notation, width: int) -> Optional[List[Notation]]:
        if classify(beta) is not Kind.LIMIT:
            return None
        if self.sequences == "principal":
            if len(beta.terms) > 1 or beta.terms[0][1] > 1:
                return None  # no sequence assigned
        return [fund_seq(beta, n) for n in range(width)]


@dataclass
class PathResult:
    path: Optional[List[Notation]]
    minimal: Optional[bool]
    all_paths: int = 0


class _PathFinder:
    """Descending sequence-step path search with cached member lists.

    Member lists are grown on demand: sequences increase toward their
    limit, so the candidates for a step toward beta are the first `width`
    members >= beta, wherever in the sequence those sit (growth stops at
    scan_cap, which bounds the honesty of a "no path" verdict)."""

    def __init__(self, system, width: int, node_cap: int = 4096,
                 scan_cap: int = 4096):
        self.system = system
        self.width = width
        self.node_cap = node_cap
        self.scan_cap = scan_cap
        self._members: Dict[Notation, Optional[List[Notation]]] = {}
        self._asked: Dict[Notation, int] = {}

    def members(self, x: Notation, count: int) -> Optional[List[Notation]]:
        count = min(count, self.scan_cap)
        if self._asked.get(x, -1) < count:
            ms = self._members.get(x)
            if x in self._asked and (ms is None or len(ms) < self._asked[x]):
                pass  # source exhausted below count already
            else:
                self._members[x] = self.system.seq_members(x, count)
            self._asked[x] = count
        return self._members[x]

    def window(self, cur: Notation, beta: Notation) -> List[Notation]:
        """Up to `width` members m of cur with beta <= m < cur, in order."""
        n = self.width
        ms = self.members(cur, n)
        if ms is None:
            return []
        while ms and compare(ms[-1], beta) < 0 and len(ms) >= n and n < self.scan_cap:
            n = min(self.scan_cap, n * 2)
            ms = self.members(cur, n)
        i0 = 0
        while i0 < len(ms) and compare(ms[i0], beta) < 0:
            i0 += 1
        return [m for m in ms[i0:i0 + self.width] if compare(m, cur) < 0]

    def paths(self, lam: Notation, beta: Notation, cap: int = 64) -> List[List[Notation]]:
        found: List[List[Notation]] = []
        budget = [self.node_cap]

        def walk(cur: Notation, trail: List[Notation]) -> None:
            if len(found) >= cap or budget[0] <= 0:
                return
            budget[0] -= 1
            if compare(cur, beta) == 0:
                found.append(trail[:])
                return
            for m in self.window(cur, beta):
                trail.append(m)
                walk(m, trail)
                trail.pop()

        if compare(beta, lam) < 0:
            walk(lam, [lam])
        return found

    def minimal(self, path: List[Notation], beta: Notation) -> bool:
        for i in range(len(path) - 1):
            window = self.window(path[i], beta)
            if not window or compare(window[0], path[i + 1]) != 0:
                return False
        return True


def path_between(system, lam: Notation, beta: Notation, width: int = 24) -> PathResult:
    """The (at most one, in a nice system) sequence-step path lam -> beta."""
    finder = _PathFinder(system, width)
    paths = finder.paths(lam, beta)
    if not paths:
        return PathResult(None, None, 0)
    return PathResult(paths[0], finder.minimal(paths[0], beta), len(paths))


@dataclass
class NicenessReport:
    passed: bool
    part1_ok: bool
    part2_ok: bool
    part3_ok: bool
    part1_witness: Optional[Tuple[Notation, Notation, int]] = None  # lam, beta, #paths
    part2_witness: Optional[Tuple[Notation, Notation]] = None  # lam, beta
    part3_witness: Optional[Notation] = None
    skipped_limits: int = 0
    width: int = 0
    pairs_checked: int = 0
    notes: List[str] = field(default_factory=list)

    def failing_part(self) -> Optional[int]:
        if not self.part1_ok:
            return 1
        if not self.part2_ok:
            return 2
        if not self.part3_ok:
            return 3
        return None


def is_nice(system, width: int = 16, max_elements: int = 0,
            pair_budget: int = 4000) -> NicenessReport:
    """Replay the three niceness clauses on the materialized fragment.

    Verdicts are budget-stamped: paths are searched through the first
    `width` members of each assigned sequence, and clause 1 examines at
    most `pair_budget` (limit, beta) pairs (windows for clause 2 are always
    swept in full, least beta first, so the reported clause-2 witness is
    the least failing notation).  Limits without an assigned sequence are
    skipped as path sources and counted in the report.
    """
    elements = system.elements()
    if max_elements:
        elements = elements[:max_elements]
    elems_sorted = sorted(elements)
    elem_set = set(elems_sorted)
    report = NicenessReport(True, True, True, True, width=width)
    finder = _PathFinder(system, width)

    limits = []
    for lam in elems_sorted:
        if classify(lam) is Kind.LIMIT:
            members = system.seq_members(lam, width)
            if members is None:
                report.skipped_limits += 1
            else:
                limits.append((lam, members))

    # clause 1: at most one path, and that path minimal
    pairs = 0
    for lam, _members in limits:
        for beta in elems_sorted:
            if compare(beta, lam) >= 0:
                continue
            if pairs >= pair_budget:
                break
            pairs += 1
            paths = finder.paths(lam, beta)
            if len(paths) > 1:
                report.part1_ok = False
                report.part1_witness = (lam, beta, len(paths))
                break
            if paths and not finder.minimal(paths[0], beta):
                report.part1_ok = False
                report.part1_witness = (lam, beta, 1)
                break
        if not report.part1_ok or pairs >= pair_budget:
            break
    report.pairs_checked = pairs

    # clause 2: every beta in the window [lam[0], lam) is reachable from lam
    done = False
    for beta in elems_sorted:  # least failing beta reported first
        for lam, members in limits:
            if not members:
                continue
            if compare(members[0], beta) <= 0 and compare(beta, lam) < 0:
                if not finder.paths(lam, beta, cap=1):
                    report.part2_ok = False
                    report.part2_witness = (lam, beta)
                    done = True
                    break
        if done:
            break

    # clause 3: predecessor chains terminate (no cycles within the fragment)
    parent_of: Dict[Notation, Notation] = {}
    for lam, members in limits:
        for m in members:
            if m in elem_set:
                if m in parent_of and compare(parent_of[m], lam) != 0:
                    report.notes.append(f"sequence membership not unique at {m}")
                parent_of[m] = lam
    for x in elems_sorted:
        seen = set()
        cur = x
        while cur in parent_of:
            if cur in seen:
                report.part3_ok = False
                report.part3_witness = x
                break
            seen.add(cur)
            cur = parent_of[cur]
        if not report.part3_ok:
            break

    if isinstance(system, NiceSegment):
        _kappa_cross_check(system, report)

    report.passed = report.part1_ok and report.part2_ok and report.part3_ok
    return report


def _kappa_cross_check(seg: NiceSegment, report: NicenessReport) -> None:
    """Reset points (enum_pred undefined) must be exactly the block heads:
    kappa_0 = top; below a successor head the next head is its predecessor;
    below a limit head the next head is the notation just under the least
    element reachable from it (chain stops at 0)."""
    heads: List[Notation] = []
    cur = seg.top.base
    for _ in range(4096):
        heads.append(cur)
        kind = classify(cur)
        if kind is Kind.ZERO:
            break
        if kind is Kind.SUCCESSOR:
            cur = predecessor(cur)
            continue
        least = seg.tree.find(cur)
        while True:
            kids = seg.tree.children(least, 1)
            if not kids:
                break
            least = kids[0]
        if classify(least.value) is Kind.ZERO:
            break
        cur = predecessor(least.value)
    head_set = set(heads)
    stray = {
        nn.base
        for nn in seg.notations()
        if seg.enum_pred(nn) is None and nn.base not in head_set
    }
    if stray:
        report.part3_ok = False
        report.part3_witness = min(stray)
        report.notes.append("reset point outside the block decomposition")


# ---------------------------------------------------------------------------
# copylen law sweeps (used by the CLI and both test tiers)


@dataclass
class CopylenSweep:
    errors: List[str] = field(default_factory=list)
    discrepancies: List[str] = field(default_factory=list)
    triples: int = 0

    @property
    def ok(self) -> bool:
        return not self.errors


def copylen_sweep(seg: NiceSegment) -> CopylenSweep:
    """Exact copylen law on every materialized node, plus the in-between
    laws over every materialized (limit, child, window element) triple:

        lam[n] <= beta < lam   ->   copylen(lam[n]) <= copylen(beta)
        lam[n] <  beta < lam   ->   copylen(lam[n]) <  copylen(beta)

    The boundary reading beta = lam of the strict law fails whenever
    lam is an index-0 child (copylen(lam[0]) == copylen(lam)); those
    cases are reported in `discrepancies`, never as errors.
    """
    from bisect import bisect_left, bisect_right

    out = CopylenSweep()
    nodes = seg.notations()
    cl = {nn.address: seg.copylen(nn) for nn in nodes}

    for nn in nodes:
        pred = seg.enum_pred(nn)
        if pred is None:
            if cl[nn.address] != 0:
                out.errors.append(f"copylen {cl[nn.address]} at reset point {nn}")
        elif cl[nn.address] != cl[pred.address] + nn.address[-1]:
            out.errors.append(
                f"copylen({nn}) != copylen(pred) + {nn.address[-1]}"
            )

    bases = [nn.base for nn in nodes]
    copylens = [cl[nn.address] for nn in nodes]

    for lam in nodes:
        if lam.kind is not Kind.LIMIT:
            continue
        lam_node = seg.tree.find(lam.base)
        kids = [seg._note(c) for c in lam_node.children]
        if not kids:
            continue
        lo = bisect_left(bases, kids[0].base)
        hi = bisect_left(bases, lam.base)
        if lo >= hi:
            continue
        suffix_min = [0] * (hi - lo + 1)
        suffix_min[-1] = 10 ** 9
        for i in range(hi - lo - 1, -1, -1):
            suffix_min[i] = min(copylens[lo + i], suffix_min[i + 1])
        base_cl = cl[lam.address]
        for n, kid in enumerate(kids):
            at = bisect_left(bases, kid.base) - lo
            above = bisect_right(bases, kid.base) - lo
            out.triples += hi - lo - at
            if suffix_min[at] < base_cl + n:
                out.errors.append(
                    f"in-between law fails below {lam} at child {n}"
                )
            if suffix_min[above] <= base_cl + n and above < hi - lo:
                out.errors.append(
                    f"strict in-between law fails below {lam} at child {n}"
                )
        # the beta = lam boundary case of the strict reading
        out.discrepancies.append(
            f"strict law at beta = lam: copylen({render(kids[0].base)})"
            f" == copylen({render(lam.base)}) = {base_cl}"
        )
    return out


def divergence_check(seg: NiceSegment, n_max: int = 64) -> List[str]:
    """copylen(lam[n]) = copylen(lam) + n grows without bound in n."""
    errors = []
    for lam in list(seg.notations()):
        if lam.kind is not Kind.LIMIT:
            continue
        base = seg.copylen(lam)
        kids = seg.children(lam, n_max + 1)
        for n in (0, 1, n_max // 2, n_max):
            if seg.copylen(kids[n]) != base + n:
                errors.append(f"copylen({kids[n]}) != copylen({lam}) + {n}")
    return errors

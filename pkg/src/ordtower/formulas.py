"""Infinitary formulas over tree paths: rank, level translation, forcing.

Formulas are immutable ASTs built from five node shapes:

    Atom          a path fact g(i) = v, or membership of an index in a
                  jump-height oracle set
    Not           negation
    OrStream      a generated disjunction, finitely materialized; the
                  ``exhausted`` flag records whether the generator is done
    ExistsPrefix  "some initial segment of the path satisfies the body";
                  inside the body, path atoms read the bound prefix as a
                  completed finite string
    ForcedAt      "the image of the current prefix at `level` carries the
                  inner formula in the level's forcing sense" — the node
                  shape the level translation introduces; `side` records
                  whether the packaged claim is existential (the image
                  itself witnesses) or universal (no extension defeats it)

Rank is syntactic and kept in jump-normalized form: Rank(side, n, base)
reads "Sigma_n (or Pi_n) relative to the base-th jump", with n = 0 for
facts the base oracle decides outright.  The collapsed level base + n is
what ordering arguments use; ExistsPrefix results are reported with n = 1
and the surplus folded into the base, which is exactly the shape the
translation law promises.

Evaluation is three-valued (True / False / None for undecided) and
monotone in the stage budget: an oracle atom is decided only once its
settle time is visible inside the budget, so decided verdicts never
revert.  Refutation scans quantify over a tree's materialized node set —
``nodes="all"`` for the strong reading, ``nodes="extendable"`` for the
pruned-tree surrogate; both are exposed wherever a scan happens.

Text form: s-expressions.  ``(path i v)``, ``(oracle i h)``,
``(not F)``, ``(or done|open F ...)``, ``(exists F)``, and
``(forced "LEVEL" sigma|pi F)`` with LEVEL in the notation syntax.
``to_sexpr`` / ``parse_sexpr`` are inverse on every well-formed formula.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Tuple

from .errors import OutOfSegment, Undefined
from .machine import OracleApproximation, settle_time
from .notation import (ZERO, Kind, Notation, classify, compare, from_int,
                       nat_sum, parse, predecessor, render, successor)
from .trees import FingerString, LevelTree


class Formula:
    """Base class; subclasses are frozen dataclasses."""


@dataclass(frozen=True)
class Atom(Formula):
    kind: str          # "path" | "oracle"
    index: int
    value: int = 1     # expected symbol (path atoms)
    height: int = 0    # jump height the atom reads (oracle atoms)

    @classmethod
    def path(cls, position: int, value: int) -> "Atom":
        return cls("path", position, value, 0)

    @classmethod
    def oracle(cls, index: int, height: int = 0) -> "Atom":
        return cls("oracle", index, 1, height)


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class OrStream(Formula):
    members: Tuple[Formula, ...]
    exhausted: bool = False


@dataclass(frozen=True)
class ExistsPrefix(Formula):
    body: Formula


@dataclass(frozen=True)
class ForcedAt(Formula):
    level: Notation
    inner: Formula
    side: str = "sigma"   # "sigma": image witnesses inner; "pi": no extension defeats it


class Force(Enum):
    """Verdict of budgeted strong forcing at a node."""

    FORCES = "forces"
    REFUTES_STRONGLY = "refutes-strongly"
    UNDECIDED = "undecided"


# ---------------------------------------------------------------------------
# rank


@dataclass(frozen=True)
class Rank:
    side: str        # "sigma" | "pi"
    n: int           # finite quantifier depth over the base oracle; 0 = decided by it
    base: Notation   # oracle height

    @property
    def level(self) -> Notation:
        """Collapsed rank over the empty oracle: base + n."""
        return nat_sum(self.base, from_int(self.n))

    def dual(self) -> "Rank":
        return Rank("pi" if self.side == "sigma" else "sigma", self.n, self.base)

    def __str__(self):
        return f"{self.side}_{self.n}({render(self.base)})"


def _lift(r: Rank, base: Notation) -> Optional[Rank]:
    """Restate `r` relative to a higher oracle, or None if base is below r's.

    Facts whose collapsed level fits under the new base become outright
    decidable there; otherwise the (necessarily finite) height difference
    is shaved off the quantifier depth.
    """
    c = compare(r.base, base)
    if c == 0:
        return r
    if c > 0:
        return None
    if compare(r.level, base) <= 0:
        return Rank("sigma", 0, base)
    b, d = r.base, 0
    while compare(b, base) < 0:
        b = successor(b)
        d += 1
    return Rank(r.side, r.n - d, base)


def rank(f: Formula) -> Rank:
    """Syntactic rank.  Not dualizes; OrStream is existential at the sup of
    member levels (one more when members sit on the universal side or are
    mere base-oracle facts); ExistsPrefix always reports n = 1 with the
    surplus collapsed into the base."""
    if isinstance(f, Atom):
        base = ZERO if f.kind == "path" else from_int(f.height)
        return Rank("sigma", 0, base)
    if isinstance(f, Not):
        return rank(f.body).dual()
    if isinstance(f, OrStream):
        if not f.members:
            return Rank("sigma", 0, ZERO)
        ranks = [rank(m) for m in f.members]
        base = max(r.base for r in ranks)
        n = 0
        for r in ranks:
            lr = _lift(r, base)
            n = max(n, lr.n if (lr.side == "sigma" and lr.n >= 1) else lr.n + 1)
        return Rank("sigma", n, base)
    if isinstance(f, ExistsPrefix):
        r = rank(f.body)
        if r.n == 0:
            return Rank("sigma", 1, r.base)
        if r.side == "sigma":
            return Rank("sigma", 1, nat_sum(r.base, from_int(r.n - 1)))
        return Rank("sigma", 1, nat_sum(r.base, from_int(r.n)))
    if isinstance(f, ForcedAt):
        # A packaged forcing claim is settled by the named level's oracle
        # over the materialized finite tree — either side is a bounded scan
        # there.  The ideal witness/refutation asymmetry lives in the side
        # marker, not the rank.
        return Rank("sigma", 0, f.level)
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# translation


def translate(f: Formula, beta, tw) -> Formula:
    """Push a formula about the base path down to a claim about the level-beta
    path, one quantifier layer per level.

    At zero the formula is returned unchanged.  At a successor, once the
    inner translation has landed in the existential or universal class of
    depth one over the predecessor's oracle, it is packaged as "some prefix
    of the level path has an image carrying it" — otherwise generated
    disjunctions and negations translate memberwise.  At a limit the
    packaging happens as soon as the formula's own collapsed rank sits
    strictly below the level, with the image taken along the composed map.
    """
    b = beta.base if hasattr(beta, "base") else beta
    if compare(b, tw.top) > 0 or tw.segment.lookup(b) is None:
        raise OutOfSegment(f"level {render(b)} is not in the materialized segment")
    out = _translate(f, b, tw)
    # A universal-side result at the target gets one same-level packaging:
    # "some prefix of the level path strongly excludes the body on this very
    # tree".  Paths of these trees decide every such claim by an initial
    # segment, which is what makes the existential endpoint honest; interior
    # levels keep the literal negation so the next step packages them
    # through the map instead.
    if classify(b) is not Kind.ZERO and isinstance(out, Not):
        r = rank(out)
        if r.side == "pi" and r.n == 1 and compare(r.base, b) <= 0:
            out = ExistsPrefix(ForcedAt(b, out, "pi"))
    return out


def _package(inner: Formula, at: Notation) -> Formula:
    # the side marker comes from the inner formula's own class, before any
    # lift erases the distinction
    r = rank(inner)
    side = "pi" if (r.side == "pi" and r.n >= 1) else "sigma"
    return ExistsPrefix(ForcedAt(at, inner, side))


def _translate(f: Formula, b: Notation, tw) -> Formula:
    kind = classify(b)
    if kind is Kind.ZERO:
        return f
    if kind is Kind.SUCCESSOR:
        below = predecessor(b)
        inner = _translate(f, below, tw)
        r = _lift(rank(inner), below)
        if r is not None and r.n <= 1:
            return _package(inner, below)
    else:
        rf = rank(f)
        landing = nat_sum(rf.base, from_int(max(rf.n, 1)))
        if compare(landing, b) < 0:
            return _package(_translate(f, landing, tw), landing)
    if isinstance(f, OrStream):
        return OrStream(tuple(_translate(m, b, tw) for m in f.members), f.exhausted)
    if isinstance(f, Not):
        return Not(_translate(f.body, b, tw))
    raise OutOfSegment(
        f"rank {rank(f)} admits no translation case at level {render(b)}")


# ---------------------------------------------------------------------------
# evaluation

# The same recursive evaluator backs path satisfaction (`holds`), witness
# checks inside forcing scans, and ForcedAt leaves.  `complete` says whether
# the current string is a finished object (a bound prefix) or a growing
# approximation of a path — out-of-range path atoms are False for the
# former and undecided for the latter.


@dataclass
class _Ctx:
    oracle: object = None
    budget: int = 64
    tower: object = None
    level: Optional[Notation] = None
    nodes: str = "all"       # refutation pool: "all" | "extendable"
    complete: bool = False
    cache: dict = field(default_factory=dict)

    # oracle/budget/tower/nodes are fixed for the lifetime of one top-level
    # call, so sub-contexts share the memo table; level and complete vary
    # and are part of every key.


def _above(t: LevelTree, sigma: FingerString, ctx: _Ctx):
    """Pool nodes extending sigma (sigma itself included when pooled),
    walked in sorted order via a cached child table."""
    pool_key = ("pool", id(t), ctx.nodes)
    pool = ctx.cache.get(pool_key)
    if pool is None:
        pool = set(_pool(t, ctx.nodes))
        kids = {}
        for tau in pool:
            if tau:
                kids.setdefault(tau[:-1], []).append(tau)
        for v in kids.values():
            v.sort(reverse=True)
        ctx.cache[pool_key] = pool
        ctx.cache[("kids",) + pool_key] = kids
    else:
        kids = ctx.cache[("kids",) + pool_key]
    stack = [tuple(sigma)]
    while stack:
        node = stack.pop()
        if node in pool:
            yield node
        stack.extend(kids.get(node, ()))


def _oracle_for(ctx: _Ctx, height: int):
    if callable(ctx.oracle) and not isinstance(ctx.oracle, OracleApproximation):
        return ctx.oracle(height)
    return ctx.oracle


def _pool(t: LevelTree, which: str):
    return t.nodes if which == "all" else t.extendable_nodes()


_MISS = object()


def _eval(f: Formula, sigma: FingerString, ctx: _Ctx):
    key = ("eval", f, sigma, ctx.level, ctx.complete)
    got = ctx.cache.get(key, _MISS)
    if got is _MISS:
        got = _eval_raw(f, sigma, ctx)
        ctx.cache[key] = got
    return got


def _eval_raw(f: Formula, sigma: FingerString, ctx: _Ctx):
    if isinstance(f, Atom):
        if f.kind == "path":
            if f.index < len(sigma):
                return sigma[f.index] == f.value
            return False if ctx.complete else None
        orc = _oracle_for(ctx, f.height)
        if orc is None or settle_time(orc, f.index, ctx.budget) is None:
            return None
        return orc.membership_at(ctx.budget, f.index)
    if isinstance(f, Not):
        v = _eval(f.body, sigma, ctx)
        return None if v is None else (not v)
    if isinstance(f, OrStream):
        pending = not f.exhausted
        for m in f.members:
            v = _eval(m, sigma, ctx)
            if v is True:
                return True
            if v is None:
                pending = True
        return None if pending else False
    if isinstance(f, ExistsPrefix):
        sub = replace(ctx, complete=True)
        pending = False
        for cut in range(len(sigma) + 1):
            v = _eval(f.body, sigma[:cut], sub)
            if v is True:
                return True
            if v is None:
                pending = True
        return None if pending else False
    if isinstance(f, ForcedAt):
        return _eval_forced(f, sigma, ctx)
    raise TypeError(f"not a formula node: {f!r}")


def _eval_forced(f: ForcedAt, sigma: FingerString, ctx: _Ctx):
    if ctx.tower is None or ctx.level is None:
        return None
    c = compare(ctx.level, f.level)
    if c < 0:
        return None          # maps only run downward
    if c == 0:
        image = tuple(sigma)
    else:
        from .tower import treemap
        try:
            image = treemap(ctx.tower, ctx.level, f.level, sigma)
        except Undefined:
            return None
    tree = ctx.tower.level(f.level).tree
    sub = replace(ctx, level=f.level, complete=False)
    if f.side == "pi" and isinstance(f.inner, Not):
        pending = False
        for tau in _above(tree, image, ctx):
            v = _eval(f.inner.body, tau, sub)
            if v is True:
                return False
            if v is None:
                pending = True
        return None if pending else True
    # existential side, strong convention: True when the image itself
    # witnesses, False when nothing above it in the pool can
    v = _eval(f.inner, image, sub)
    if v is True:
        return True
    pending = v is None
    for tau in _above(tree, image, ctx):
        if tau == image:
            continue
        w = _eval(f.inner, tau, sub)
        if w is True:
            return None
        if w is None:
            pending = True
    return None if pending else False


def holds(f: Formula, path, oracle=None, budget: int = 64,
          tower=None, level=None, nodes: str = "all"):
    """Bounded satisfaction along a finite path: True, False, or None.

    The supplied path is treated as the whole world for prefix quantifiers;
    oracle atoms are decided only once their settle time is visible within
    the budget, so decided verdicts are monotone in the budget.  ForcedAt
    leaves need `tower` and the `level` the path lives at.
    """
    ctx = _Ctx(oracle=oracle, budget=budget, tower=tower,
               level=_level_of(level), nodes=nodes)
    return _eval(f, tuple(path), ctx)


def _level_of(level) -> Optional[Notation]:
    if level is None:
        return None
    return level.base if hasattr(level, "base") else level


def super_force(t: LevelTree, sigma, psi: Formula, budget: int = 64,
                oracle=None, nodes: str = "all", tower=None, level=None) -> Force:
    """Strong forcing of an existential-depth-one claim at a node.

    FORCES when the node itself witnesses psi at the budget;
    REFUTES_STRONGLY when every extension in the chosen node pool
    (``"all"`` by default — dead wood counts) decidedly fails to witness;
    UNDECIDED otherwise.
    """
    sigma = tuple(sigma)
    if sigma not in t:
        raise ValueError(f"{sigma} is not a node of the tree")
    ctx = _Ctx(oracle=oracle, budget=budget, tower=tower,
               level=_level_of(level), nodes=nodes)
    if _eval(psi, sigma, ctx) is True:
        return Force.FORCES
    decided = True
    for tau in _above(t, sigma, ctx):
        v = _eval(psi, tau, ctx)
        if v is True:
            return Force.UNDECIDED   # witnessed strictly above, not here
        if v is None:
            decided = False
    return Force.REFUTES_STRONGLY if decided else Force.UNDECIDED


def forces(t: LevelTree, sigma, f: Formula, budget: int = 64, oracle=None,
           nodes: str = "extendable", tower=None, level=None):
    """Three-valued local forcing at a node of a finite tree.

    Positive shapes follow the strong convention — True exactly when the
    node itself witnesses, False when no node in the pool above it can.
    Negations flip via an extension scan; generated disjunctions are forced
    memberwise and refuted only once exhausted.  The default pool is the
    extendable nodes (the pruned-tree surrogate); pass ``nodes="all"`` for
    the eager reading.
    """
    sigma = tuple(sigma)
    if sigma not in t:
        raise ValueError(f"{sigma} is not a node of the tree")
    ctx = _Ctx(oracle=oracle, budget=budget, tower=tower,
               level=_level_of(level), nodes=nodes)
    return _force(f, sigma, t, ctx)


def _force(f: Formula, sigma: FingerString, t: LevelTree, ctx: _Ctx):
    key = ("force", id(t), f, sigma, ctx.level)
    got = ctx.cache.get(key, _MISS)
    if got is _MISS:
        got = _force_raw(f, sigma, t, ctx)
        ctx.cache[key] = got
    return got


def _force_raw(f: Formula, sigma: FingerString, t: LevelTree, ctx: _Ctx):
    if isinstance(f, Not):
        pending = False
        for tau in _above(t, sigma, ctx):
            v = _force(f.body, tau, t, ctx)
            if v is True:
                return False
            if v is None:
                pending = True
        return None if pending else True
    if isinstance(f, OrStream):
        pending = not f.exhausted
        for m in f.members:
            v = _force(m, sigma, t, ctx)
            if v is True:
                return True
            if v is None:
                pending = True
        return None if pending else False
    v = _eval(f, sigma, ctx)
    if v is True:
        return True
    pending = v is None
    for tau in _above(t, sigma, ctx):
        if tau == sigma:
            continue
        w = _eval(f, tau, ctx)
        if w is True:
            return None           # forceable above, but not forced here
        if w is None:
            pending = True
    return None if pending else False


def transfer_conflicts(tw, f: Formula, beta, budget: int = 64, oracle=None,
                       nodes: str = "extendable") -> List[tuple]:
    """Cross-check forcing of the translated formula against the base level.

    For every extendable node of the level-beta tree whose composed image
    is defined, force the translation there and the original at the image;
    returns [(node, upper, lower)] whenever both verdicts are decided and
    disagree.  Empty on towers satisfying the transfer law at budget.
    """
    from .tower import treemap
    b = beta.base if hasattr(beta, "base") else beta
    up = translate(f, b, tw)
    t_up = tw.level(b).tree
    t_zero = tw.level(ZERO).tree
    ctx = _Ctx(oracle=oracle, budget=budget, tower=tw, nodes=nodes)
    out = []
    for sigma in sorted(t_up.extendable_nodes()):
        try:
            image = treemap(tw, b, ZERO, sigma)
        except Undefined:
            continue
        ctx.level = b
        u = _force(up, sigma, t_up, ctx)
        ctx.level = ZERO
        low = _force(f, image, t_zero, ctx)
        if u is not None and low is not None and u != low:
            out.append((sigma, u, low))
    return out


# ---------------------------------------------------------------------------
# text form


def to_sexpr(f: Formula) -> str:
    if isinstance(f, Atom):
        if f.kind == "path":
            return f"(path {f.index} {f.value})"
        return f"(oracle {f.index} {f.height})"
    if isinstance(f, Not):
        return f"(not {to_sexpr(f.body)})"
    if isinstance(f, OrStream):
        parts = ["or", "done" if f.exhausted else "open"]
        parts.extend(to_sexpr(m) for m in f.members)
        return "(" + " ".join(parts) + ")"
    if isinstance(f, ExistsPrefix):
        return f"(exists {to_sexpr(f.body)})"
    if isinstance(f, ForcedAt):
        return f'(forced "{render(f.level)}" {f.side} {to_sexpr(f.inner)})'
    raise TypeError(f"not a formula node: {f!r}")


_TOKEN = re.compile(r'"[^"]*"|[()]|[^\s()"]+')


def parse_sexpr(text: str) -> Formula:
    tokens = _TOKEN.findall(text)
    f, at = _parse_node(tokens, 0)
    if at != len(tokens):
        raise ValueError(f"trailing input after formula: {tokens[at:]}")
    return f


def _expect(tokens: List[str], at: int, what: str) -> int:
    if at >= len(tokens) or tokens[at] != what:
        got = tokens[at] if at < len(tokens) else "<end>"
        raise ValueError(f"expected {what!r}, got {got!r}")
    return at + 1


def _parse_node(tokens: List[str], at: int) -> Tuple[Formula, int]:
    at = _expect(tokens, at, "(")
    if at >= len(tokens):
        raise ValueError("unterminated formula")
    head = tokens[at]
    at += 1
    if head == "path":
        f = Atom.path(int(tokens[at]), int(tokens[at + 1]))
        return f, _expect(tokens, at + 2, ")")
    if head == "oracle":
        f = Atom.oracle(int(tokens[at]), int(tokens[at + 1]))
        return f, _expect(tokens, at + 2, ")")
    if head == "not":
        body, at = _parse_node(tokens, at)
        return Not(body), _expect(tokens, at, ")")
    if head == "or":
        tag = tokens[at]
        if tag not in ("done", "open"):
            raise ValueError(f"or-stream tag must be done or open, got {tag!r}")
        at += 1
        members = []
        while at < len(tokens) and tokens[at] != ")":
            m, at = _parse_node(tokens, at)
            members.append(m)
        return OrStream(tuple(members), tag == "done"), _expect(tokens, at, ")")
    if head == "exists":
        body, at = _parse_node(tokens, at)
        return ExistsPrefix(body), _expect(tokens, at, ")")
    if head == "forced":
        quoted = tokens[at]
        if not (quoted.startswith('"') and quoted.endswith('"')):
            raise ValueError(f"forced level must be quoted, got {quoted!r}")
        level = parse(quoted[1:-1])
        side = tokens[at + 1]
        if side not in ("sigma", "pi"):
            raise ValueError(f"forced side must be sigma or pi, got {side!r}")
        inner, at = _parse_node(tokens, at + 2)
        return ForcedAt(level, inner, side), _expect(tokens, at, ")")
    raise ValueError(f"unknown formula head {head!r}")


# ---------------------------------------------------------------------------
# regression corpus


def regression_corpus() -> Tuple[Formula, ...]:
    """Thirty path-atom formulas, five per side per collapsed level 1..3.

    The higher layers are generated by streams of negations — a prefix
    quantifier over an undecidable matrix would fall outside the
    translation's domain.  Oracle-free on purpose: the same corpus runs
    against any tower with the same verdicts.
    """
    s1 = [ExistsPrefix(Atom.path(0, 2)),
          ExistsPrefix(Atom.path(1, 9)),
          ExistsPrefix(OrStream((Atom.path(0, 2), Atom.path(0, 4)), True)),
          OrStream((ExistsPrefix(Atom.path(0, 2)),
                    ExistsPrefix(Atom.path(2, 7)))),
          ExistsPrefix(Not(Atom.path(0, 4)))]
    p1 = [Not(f) for f in s1]
    s2 = [OrStream((p1[0], p1[1]), True),
          OrStream((p1[2],)),
          OrStream((Not(ExistsPrefix(Atom.path(3, 1))),), True),
          OrStream((p1[4], s1[0]), True),
          OrStream((p1[3], p1[0]))]
    p2 = [Not(f) for f in s2]
    s3 = [OrStream((p2[0], p2[1]), True),
          OrStream((p2[2],)),
          OrStream((Not(OrStream((p1[0], s1[1]), True)),), True),
          OrStream((p2[4], s2[0]), True),
          OrStream((p2[3], p1[0]))]
    p3 = [Not(f) for f in s3]
    return tuple(s1 + p1 + s2 + p2 + s3 + p3)

"""Stagewise finite-injury tree constructions and their assembly into a
notation-indexed tower.

One level is built by `build_level`: a stage loop that watches a stagewise
approximation of the tree one level up and maintains a partial monotone map
from it into the tree being built.  Per stage it (i) pauses while the
approximation disagrees with the copied segment, (ii) drops map entries whose
domain node vanished, (iii) extends the map one symbol at a time with
stage-stamped pair values, (iv) adds every produced string to the new tree
permanently, and (v) services genericity requirements by injuring the map —
redefining an image to a target-meeting extension and resetting everything
above it.  Two variant rule-sets sit on top: `alt1` interleaves literal
padding bits and forces child images whose indexed functionals disagree;
`small` delays extensions until the stamp respects largeness and prunes
duplicate small nodes by domain-code priority.

A Tower materializes levels top-down and on demand.  The level below beta is
built from the level tree of beta+1 and the copied segment of beta's
enum-predecessor (the limit whose sequence contains beta — always above beta,
hence always built first).  Once copylen reaches the working depth a level is
copied verbatim ("cut"), which grounds the recursion.  Composed maps descend
through successor steps and delegate through limits along their sequences.

Stage gating note: a node becomes visible to the level below at the stage
after its creation stamp.  Creation order, not the Cantor string code, is
what bounds the gate — stamped symbols push string codes far beyond any
usable stage budget, while creation order grows linearly with the work done.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import (BudgetExceeded, InsufficientDepth, Undefined,
                     VerificationFailure)
from .hierarchy import FiniteFunction, observed_settle
from .notation import (Kind, Notation, cantor_pair, classify, code_of, compare,
                       from_int, fund_seq, predecessor, render, successor)
from .trees import FingerString, LevelTree, is_prefix, phi_column, string_code

_VARIANTS = {"base": "base", "alt1": "alt1", "small": "small",
             "padded+disagreement": "alt1", "largeness+small": "small"}


class Paused(RuntimeError):
    """The level was still paused on a copy mismatch when the budget ran out."""

    def __init__(self, message: str, stage: int):
        super().__init__(message)
        self.stage = stage


# ---------------------------------------------------------------------------
# stagewise sources and targets


class StagewiseSource:
    """Stage-indexed view of the tree one level up."""

    def nodes_at(self, stage: int) -> Set[FingerString]:
        raise NotImplementedError

    def final_nodes(self) -> Set[FingerString]:
        raise NotImplementedError


class FrozenSource(StagewiseSource):
    """A finished level seen through its creation stamps.

    Only frontier-reaching nodes are served: dead wood of the upper level
    must not acquire images below.
    """

    def __init__(self, tree: LevelTree, born: Optional[Dict[FingerString, int]] = None):
        self.tree = tree
        self.born = dict(born or {})
        self._alive = set(tree.extendable_nodes())

    def nodes_at(self, stage: int) -> Set[FingerString]:
        return {s for s in self._alive if self.born.get(s, 0) < stage}

    def final_nodes(self) -> Set[FingerString]:
        return set(self._alive)


class ScriptedSource(StagewiseSource):
    """Explicit stage schedule for adversarial tests: {stage: nodes}, each
    set holding until the next scheduled stage."""

    def __init__(self, schedule: Dict[int, Iterable[FingerString]]):
        self.schedule = {s: {tuple(n) for n in nodes}
                         for s, nodes in schedule.items()}
        if not self.schedule:
            self.schedule = {0: {()}}

    def nodes_at(self, stage: int) -> Set[FingerString]:
        keys = [s for s in self.schedule if s <= stage]
        if not keys:
            return set()
        return set(self.schedule[max(keys)])

    def final_nodes(self) -> Set[FingerString]:
        return set(self.schedule[max(self.schedule)])


class EnumerableTarget:
    """Monotone stagewise enumeration of strings; stage None = fully enumerated."""

    name = "target"

    def contains(self, tau: FingerString, stage: Optional[int]) -> bool:
        raise NotImplementedError

    def meets(self, sigma: FingerString, stage: Optional[int]) -> bool:
        sigma = tuple(sigma)
        return any(self.contains(sigma[:j], stage)
                   for j in range(len(sigma) + 1))

    def describe(self) -> dict:
        return {"kind": self.name}


class ScheduledTarget(EnumerableTarget):
    name = "scheduled"

    def __init__(self, schedule: Iterable[Tuple[int, Sequence[int]]]):
        self.schedule = tuple((s, tuple(w)) for s, w in schedule)

    def contains(self, tau, stage):
        tau = tuple(tau)
        return any(w == tau for s, w in self.schedule
                   if stage is None or s <= stage)

    def meets(self, sigma, stage):
        sigma = tuple(sigma)
        return any(is_prefix(w, sigma) for s, w in self.schedule
                   if stage is None or s <= stage)

    def describe(self):
        return {"kind": self.name,
                "schedule": [[s, list(w)] for s, w in self.schedule]}


class PrefixTarget(EnumerableTarget):
    """All extensions of one stem, from a wake-up stage onward."""

    name = "prefix"

    def __init__(self, stem: Sequence[int], from_stage: int = 0):
        self.stem = tuple(stem)
        self.from_stage = from_stage

    def _awake(self, stage):
        return stage is None or stage >= self.from_stage

    def contains(self, tau, stage):
        return self._awake(stage) and is_prefix(self.stem, tuple(tau))

    def meets(self, sigma, stage):
        return self._awake(stage) and is_prefix(self.stem, tuple(sigma))

    def describe(self):
        return {"kind": self.name, "stem": list(self.stem),
                "from_stage": self.from_stage}


class ParityTarget(EnumerableTarget):
    """Nonempty strings whose last symbol has the given parity."""

    name = "parity"

    def __init__(self, parity: int, from_stage: int = 0):
        self.parity = parity % 2
        self.from_stage = from_stage

    def contains(self, tau, stage):
        tau = tuple(tau)
        return ((stage is None or stage >= self.from_stage)
                and bool(tau) and tau[-1] % 2 == self.parity)

    def meets(self, sigma, stage):
        if stage is not None and stage < self.from_stage:
            return False
        return any(v % 2 == self.parity for v in sigma)

    def describe(self):
        return {"kind": self.name, "parity": self.parity,
                "from_stage": self.from_stage}


def default_targets(oracle, count: int = 4, probe: int = 32) -> Tuple[EnumerableTarget, ...]:
    """Mixed target battery seasoned by the oracle's observed settling:
    two meetable parity targets and two refutation-side stems whose first
    symbol (3 = pair(2, 0)) no stage stamp ever produces."""
    wake = [1 + observed_settle(oracle, i, probe) for i in range(max(count, 4))]
    pool = [ParityTarget(0, wake[0]),
            ParityTarget(1, wake[1]),
            PrefixTarget((3,), wake[2]),
            PrefixTarget((2, 3), wake[3])]
    return tuple(pool[:count])


# ---------------------------------------------------------------------------
# the monotone map and the per-level build log


@dataclass
class MonotoneMap:
    final: Dict[FingerString, FingerString]
    history: Tuple[Tuple[int, str, FingerString, Optional[FingerString]], ...] = ()
    injury_log: Tuple[Tuple[int, str, FingerString], ...] = ()
    copylen: int = 0
    target: Optional[LevelTree] = None

    def image(self, sigma: Sequence[int]) -> FingerString:
        sigma = tuple(sigma)
        if sigma not in self.final:
            raise Undefined(f"no image for {sigma}")
        return self.final[sigma]

    def defined(self, sigma: Sequence[int]) -> bool:
        return tuple(sigma) in self.final

    def at_stage(self, stage: int) -> Dict[FingerString, FingerString]:
        """Replay the history up to and including `stage`."""
        snap: Dict[FingerString, FingerString] = {}
        for s, action, node, image in self.history:
            if s > stage:
                break
            if action == "define":
                snap[node] = image
            else:
                snap.pop(node, None)
        return snap

    def first_defined(self, sigma: Sequence[int]) -> Optional[int]:
        sigma = tuple(sigma)
        for s, action, node, _ in self.history:
            if action == "define" and node == sigma:
                return s
        return None

    def check(self) -> None:
        """Raise VerificationFailure unless the three map invariants hold."""
        for tau in sorted(self.final, key=lambda t: (len(t), t)):
            img = self.final[tau]
            if self.target is not None and img not in self.target:
                raise VerificationFailure(
                    f"image {img} of {tau} missing from the target tree")
            if len(tau) < self.copylen and img != tau:
                raise VerificationFailure(
                    f"map is not the identity at copied node {tau}")
            for j in range(len(tau) - 1, -1, -1):
                if tau[:j] in self.final:
                    par = self.final[tau[:j]]
                    if not (is_prefix(par, img) and len(par) < len(img)):
                        raise VerificationFailure(
                            f"monotonicity fails: {tau[:j]} -> {par} "
                            f"vs {tau} -> {img}")
                    break

    def to_json(self) -> dict:
        return {
            "copylen": self.copylen,
            "final": sorted([list(k), list(v)] for k, v in self.final.items()),
            "injuries": [[s, cause, list(node)]
                         for s, cause, node in self.injury_log],
        }


@dataclass
class BuildLog:
    stages: int
    variant: str
    pauses: Tuple[int, ...]
    injuries: Tuple[Tuple[int, str, FingerString], ...]
    born: Dict[FingerString, int]
    notes: Tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# single-level construction


def build_level(above: StagewiseSource, pred_tree: Optional[LevelTree] = None,
                targets: Sequence[EnumerableTarget] = (),
                phi_family: Callable = phi_column,
                xi_probe: Optional[Sequence[int]] = None,
                copylen: int = 0, variant: str = "base",
                stage_budget: int = 64, depth: int = 8,
                node_cap: int = 1 << 14) -> Tuple[LevelTree, MonotoneMap, BuildLog]:
    if stage_budget <= 0 or depth <= 0:
        raise ValueError("stage and depth budgets must be positive")
    try:
        variant = _VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}") from None
    if variant == "alt1" and depth % 2:
        raise ValueError("alt1 needs an even depth (bit/stamp alternation)")
    if variant == "small" and xi_probe is None:
        raise ValueError("small variant needs a xi probe")
    if pred_tree is None and copylen:
        raise ValueError("nonzero copylen without a pred tree")

    copied: Set[FingerString] = set()
    if pred_tree is not None:
        copied = {s for s in pred_tree.nodes if len(s) <= copylen}

    theta: Dict[FingerString, FingerString] = (
        {s: s for s in copied} if copied else {(): ()})
    born: Dict[FingerString, int] = {s: 0 for s in theta}
    history: List[Tuple[int, str, FingerString, Optional[FingerString]]] = [
        (0, "define", s, s) for s in sorted(theta, key=lambda t: (len(t), t))]
    injuries: List[Tuple[int, str, FingerString]] = []
    pauses: List[int] = []
    barred: Set[FingerString] = set()  # domain nodes lost to smallness prunes
    created_order: List[FingerString] = sorted(born, key=lambda t: (len(t), t))
    # per-target list of created nodes the target eventually contains
    matched: List[List[FingerString]] = [[] for _ in targets]
    matched_upto = [0] * len(targets)
    disagree_seen: Dict[FingerString, int] = {}

    def create(node: FingerString, stage: int) -> None:
        if node in born:
            return
        if len(created_order) >= node_cap:
            raise BudgetExceeded(f"level exceeded {node_cap} nodes", node_cap)
        born[node] = stage
        created_order.append(node)

    def define(node: FingerString, image: FingerString, stage: int) -> None:
        theta[node] = image
        history.append((stage, "define", node, image))

    def undefine(node: FingerString, stage: int) -> None:
        del theta[node]
        history.append((stage, "undefine", node, None))

    def undefine_above(node: FingerString, stage: int) -> None:
        doomed = [t for t in theta if len(t) > len(node) and t[:len(node)] == node]
        for t in sorted(doomed, key=lambda t: (len(t), t), reverse=True):
            undefine(t, stage)

    def candidates_for(i: int, stage: int) -> List[FingerString]:
        tgt = targets[i]
        rows = matched[i]
        while matched_upto[i] < len(created_order):
            node = created_order[matched_upto[i]]
            matched_upto[i] += 1
            if tgt.contains(node, None):
                rows.append(node)
        live = [t for t in rows if tgt.contains(t, stage)]
        live.sort(key=lambda t: (len(t), t))
        return live

    for s in range(1, stage_budget + 1):
        above_s = above.nodes_at(s)

        # (i) pause while the copied segment is contradicted upstairs
        if copied and {n for n in above_s if len(n) <= copylen} != copied:
            pauses.append(s)
            continue

        # (ii) parent loss: drop bindings whose domain node vanished
        lost = sorted((t for t in theta if t and t not in above_s),
                      key=lambda t: (len(t), t))
        lost_set = set(lost)
        for t in lost:
            if t[:-1] not in lost_set:
                injuries.append((s, "parent-change", t))
            if t in theta:
                undefine_above(t, s)
                undefine(t, s)

        # (iii)+(iv) extension with stage stamps; every image is permanent
        for tau in sorted(above_s, key=lambda t: (len(t), t)):
            if not tau or tau in theta or tau in barred:
                continue
            parent = theta.get(tau[:-1])
            if parent is None:
                continue
            k = tau[-1]
            stamp = cantor_pair(k, s)
            if variant == "alt1":
                if len(parent) + 2 > depth:
                    continue
                mid = parent + (k & 1,)
                img = mid + (stamp,)
                create(mid, s)
                create(img, s)
            else:
                if len(parent) + 1 > depth:
                    continue
                if variant == "small" and parent and stamp < parent[-1]:
                    continue  # largeness: wait for a big enough stamp
                img = parent + (stamp,)
                create(img, s)
            define(tau, img, s)

        domain_sorted = sorted(theta, key=lambda t: (len(t), t))

        # (v) genericity: requirement i serviced at domain length 2i,
        # targets in index order, lex-least unserved node first
        for i, tgt in enumerate(targets):
            want = 2 * i
            if want < copylen:
                continue  # below the copied segment: never injured here
            cand = candidates_for(i, s)
            if not cand:
                continue
            for sigma in domain_sorted:
                if len(sigma) > want:
                    break
                if len(sigma) < want or sigma not in theta:
                    continue
                img = theta[sigma]
                if tgt.meets(img, s):
                    continue
                pick = None
                for t in cand:
                    if len(t) <= len(img) or len(t) > depth:
                        continue
                    if not is_prefix(img, t):
                        continue
                    if variant == "alt1" and len(t) % 2:
                        continue
                    if variant == "small" and sigma:
                        par = theta.get(sigma[:-1], ())
                        if any(v < sigma[-1] for v in t[len(par):]):
                            continue  # would break largeness at sigma
                    pick = t
                    break
                if pick is None:
                    continue  # every extension avoids the target: settled
                undefine_above(sigma, s)
                define(sigma, pick, s)
                injuries.append((s, "genericity", sigma))
                break

        # (vi-a) disagreement servicing: force child images apart under Phi_i
        if variant == "alt1":
            for sigma in domain_sorted:
                if sigma not in theta or len(sigma) % 2 or len(sigma) < copylen:
                    continue
                kid0, kid1 = theta.get(sigma + (0,)), theta.get(sigma + (1,))
                if kid0 is None or kid1 is None:
                    continue
                i = len(sigma) // 2
                a, b = phi_family(i, kid0), phi_family(i, kid1)
                if a is not None and b is not None and a != b:
                    continue
                if disagree_seen.get(sigma) == len(created_order):
                    continue  # nothing new to scan since the last attempt
                disagree_seen[sigma] = len(created_order)
                base = theta[sigma]
                exts = sorted((t for t in created_order
                               if len(t) > len(base) and is_prefix(base, t)
                               and len(t) % 2 == 0 and len(t) <= depth),
                              key=lambda t: (len(t), t))
                tau0 = next((t for t in exts if phi_family(i, t) is not None),
                            None)
                if tau0 is None:
                    continue
                out0 = phi_family(i, tau0)
                tau1 = next((t for t in exts
                             if not is_prefix(tau0, t) and not is_prefix(t, tau0)
                             and phi_family(i, t) is not None
                             and phi_family(i, t) != out0), None)
                if tau1 is None:
                    continue
                undefine_above(sigma, s)
                define(sigma + (0,), tau0, s)
                define(sigma + (1,), tau1, s)
                injuries.append((s, "disagreement", sigma + (0,)))
                injuries.append((s, "disagreement", sigma + (1,)))
                break

        # (vi-b) smallness: at most one prune per stage, by domain-code priority
        if variant == "small":
            alive_now: Set[FingerString] = set(copied)
            for img in theta.values():
                for j in range(len(img) + 1):
                    alive_now.add(img[:j])

            def gen_code(node: FingerString) -> int:
                return min((string_code(d) for d, im in theta.items()
                            if is_prefix(node, im)), default=-1)

            fired = False
            for x in range(min(depth, len(xi_probe))):
                if fired:
                    break
                small = sorted(t for t in alive_now
                               if len(t) == x + 1 and t[x] <= xi_probe[x])
                if len(small) < 2:
                    continue
                ranked = sorted(small, key=lambda t: (gen_code(t), len(t), t))
                for victim in reversed(ranked):
                    if victim in copied or gen_code(victim) < 0:
                        continue  # copied wood is never pruned
                    dom = min((d for d, im in theta.items()
                               if d and len(d) >= copylen
                               and is_prefix(victim, im)),
                              key=string_code, default=None)
                    if dom is None:
                        continue
                    undefine_above(dom, s)
                    undefine(dom, s)
                    barred.add(dom)  # the pruned branch stays pruned
                    injuries.append((s, "smallness", dom))
                    fired = True
                    break

    if pauses and pauses[-1] == stage_budget:
        raise Paused(f"copy mismatch unresolved at final stage {stage_budget}",
                     stage_budget)

    alive: Set[FingerString] = set(copied) | {()}
    for img in theta.values():
        for j in range(len(img) + 1):
            alive.add(img[:j])
    nodes = set(born)
    tree = LevelTree(depth, nodes, dead=nodes - alive)
    mmap = MonotoneMap(final=dict(theta), history=tuple(history),
                       injury_log=tuple(injuries), copylen=copylen, target=tree)
    log = BuildLog(stages=stage_budget, variant=variant, pauses=tuple(pauses),
                   injuries=tuple(injuries), born=dict(born))
    return tree, mmap, log


# ---------------------------------------------------------------------------
# towers


@dataclass
class Level:
    beta: Notation
    tree: LevelTree
    up_link: Optional[MonotoneMap]  # map from the order-successor level into this
    oracle: object = None
    targets: Tuple[EnumerableTarget, ...] = ()
    copylen: int = 0
    log: Optional[BuildLog] = None
    cut: bool = False

    @property
    def born(self) -> Dict[FingerString, int]:
        return self.log.born if self.log else {}


class Tower:
    """Notation-indexed family of trees and downward maps, built lazily."""

    def __init__(self, segment, seed: LevelTree, stage_budget: int = 64,
                 depth: int = 6, variant: str = "base",
                 targets_for: Optional[Callable] = None,
                 oracles_for: Optional[Callable] = None,
                 phi_family: Callable = phi_column,
                 xi_probe: Optional[Sequence[int]] = None,
                 node_cap: int = 1 << 14):
        self.segment = segment
        self.seed = seed
        self.stage_budget = stage_budget
        self.depth = depth
        self.variant = _VARIANTS[variant]
        self.targets_for = targets_for or (lambda beta: ())
        self.oracles_for = oracles_for or (lambda beta: None)
        self.phi_family = phi_family
        self.xi_probe = xi_probe
        self.node_cap = node_cap
        self.top: Notation = segment.top.base
        self.levels: Dict[Notation, Level] = {}

    @classmethod
    def from_levels(cls, segment, levels: Dict[Notation, Level],
                    depth: int = 6) -> "Tower":
        seed = levels[segment.top.base].tree
        tw = cls(segment, seed, depth=depth)
        tw.levels = dict(levels)
        return tw

    def _nice(self, beta: Notation):
        nn = self.segment.lookup(beta)
        if nn is None:
            raise ValueError(
                f"{render(beta)} is not materialized in the segment; "
                f"nicify with a larger count")
        return nn

    def level(self, beta) -> Level:
        beta = beta.base if hasattr(beta, "base") else beta
        if beta in self.levels:
            return self.levels[beta]
        c = compare(beta, self.top)
        if c > 0:
            raise ValueError(f"{render(beta)} lies above the tower top")

        if c == 0:
            lvl = Level(beta, self.seed, None, self.oracles_for(beta),
                        tuple(self.targets_for(beta)), copylen=0, cut=False)
            self.levels[beta] = lvl
            return lvl

        nn = self._nice(beta)
        cl = self.segment.copylen(nn)
        pred_nn = self.segment.enum_pred(nn)

        if pred_nn is not None and cl >= self.depth:
            src = self.level(pred_nn.base)
            tree = LevelTree(self.depth, src.tree.nodes, src.tree.dead)
            link = MonotoneMap(final={n: n for n in tree.nodes},
                               copylen=cl, target=tree)
            lvl = Level(beta, tree, link, self.oracles_for(beta),
                        tuple(self.targets_for(beta)), copylen=cl,
                        log=BuildLog(0, self.variant, (), (),
                                     dict(src.born) or
                                     {n: 0 for n in tree.nodes}),
                        cut=True)
            self.levels[beta] = lvl
            return lvl

        above = self.level(successor(beta))
        copied_tree = None
        if pred_nn is not None and cl > 0:
            copied_tree = self.level(pred_nn.base).tree
        source = FrozenSource(above.tree, above.born)
        try:
            tree, mmap, log = build_level(
                source, copied_tree, self.targets_for(beta), self.phi_family,
                self.xi_probe, copylen=cl, variant=self.variant,
                stage_budget=self.stage_budget, depth=self.depth,
                node_cap=self.node_cap)
        except (Paused, BudgetExceeded) as err:
            err.args = (f"level {render(beta)}: {err.args[0]}",) + err.args[1:]
            raise
        lvl = Level(beta, tree, mmap, self.oracles_for(beta),
                    tuple(self.targets_for(beta)), copylen=cl, log=log)
        self.levels[beta] = lvl
        return lvl

    def materialized(self) -> List[Notation]:
        return sorted(self.levels)


def build_tower(segment, seed: LevelTree, stage_budget: int = 64,
                depth: int = 6, variant: str = "base",
                targets_for: Optional[Callable] = None,
                oracles_for: Optional[Callable] = None,
                phi_family: Callable = phi_column,
                xi_probe: Optional[Sequence[int]] = None,
                node_cap: int = 1 << 14) -> Tower:
    """Materialize a level for every notation of the segment (plus any cut
    levels the recursion touches on the way)."""
    tw = Tower(segment, seed, stage_budget, depth, variant, targets_for,
               oracles_for, phi_family, xi_probe, node_cap)
    for nn in sorted(segment.notations(), key=lambda n: n.base, reverse=True):
        tw.level(nn.base)
    return tw


# ---------------------------------------------------------------------------
# composed maps


def treemap(tw: Tower, from_level, to_level, sigma: Sequence[int]) -> FingerString:
    """Image of sigma under the composition of downward maps from `from_level`
    to `to_level`; limits delegate along their sequences far enough out that
    the copied segment carries sigma identically."""
    f = from_level.base if hasattr(from_level, "base") else from_level
    t = to_level.base if hasattr(to_level, "base") else to_level
    if compare(t, f) > 0:
        raise ValueError("treemap runs downward: need to <= from")
    sigma = tuple(sigma)
    if sigma not in tw.level(f).tree:
        raise Undefined(f"{sigma} is not a node of the level-{render(f)} tree")
    if compare(t, f) == 0:
        return sigma
    if classify(f) is Kind.LIMIT:
        l = len(sigma) + 1
        while compare(fund_seq(f, l), t) < 0:
            l += 1
        return treemap(tw, fund_seq(f, l), t, sigma)
    g = predecessor(f)
    link = tw.level(g).up_link
    if link is None or not link.defined(sigma):
        raise Undefined(f"map below {render(f)} has no image for {sigma}")
    return treemap(tw, g, t, link.image(sigma))


def preimage_bound(tw: Tower, beta, h: Sequence[int], n: int) -> int:
    """Depth bound l(n) for preimages of h-majorized level-zero branches.

    Replays the breadth recursion: admit a branch i at step k only when some
    argument x <= l(k)+1 has h(x) >= i, then push l to the longest composed
    image over the admitted nodes."""
    beta = beta.base if hasattr(beta, "base") else beta
    zero = from_int(0)
    t_beta = tw.level(beta).tree

    def down(sigma: FingerString) -> FingerString:
        return treemap(tw, beta, zero, sigma)

    frontier: List[FingerString] = [()]
    l = len(down(()))
    for _ in range(n):
        if l + 1 >= len(h):
            raise InsufficientDepth(
                f"need h defined up to {l + 1}, have {len(h)} values")
        bound = max(h[x] for x in range(l + 2))
        nxt = [tau for sigma in frontier for tau in t_beta.children(sigma)
               if tau[-1] <= bound]
        if not nxt:
            raise InsufficientDepth("no admissible branches survive the bound")
        images = []
        for tau in nxt:
            try:
                images.append(down(tau))
            except Undefined:
                raise InsufficientDepth(
                    f"composed image of {tau} is not materialized") from None
        l = max(len(img) for img in images)
        frontier = nxt
    return l


# ---------------------------------------------------------------------------
# audits


@dataclass
class AuditEntry:
    path: FingerString
    target: int
    status: str  # met | refuted | undecided
    witness: Optional[FingerString] = None


@dataclass
class AuditReport:
    entries: List[AuditEntry] = field(default_factory=list)

    @property
    def decided(self) -> int:
        return sum(e.status != "undecided" for e in self.entries)

    @property
    def decided_fraction(self) -> float:
        return self.decided / len(self.entries) if self.entries else 1.0

    def undecided(self) -> List[AuditEntry]:
        return [e for e in self.entries if e.status == "undecided"]

    def to_json(self) -> dict:
        return {"decided": self.decided, "total": len(self.entries),
                "entries": [{"path": list(e.path), "target": e.target,
                             "status": e.status,
                             "witness": None if e.witness is None
                             else list(e.witness)}
                            for e in self.entries]}


def audit_eager(t: LevelTree, targets: Sequence[EnumerableTarget],
                depth: Optional[int] = None,
                stage: Optional[int] = None) -> AuditReport:
    """Eager-genericity dichotomy at materialized depth.

    A (path, target) pair is met when some initial segment of the path lands
    in the target, refuted when some initial segment has no meeting extension
    anywhere in the full node set — dead wood included — and undecided
    otherwise."""
    depth = t.depth if depth is None else depth
    paths = sorted({f[:depth] for f in t.frontier()})
    by_len = sorted(t.nodes, key=len, reverse=True)
    report = AuditReport()
    for i, tgt in enumerate(targets):
        meets_below: Dict[FingerString, bool] = {}
        for node in by_len:
            meets_below[node] = (tgt.meets(node, stage) or
                                 any(meets_below.get(c, False)
                                     for c in t.children(node)))
        for f in paths:
            if tgt.meets(f, stage):
                wit = next(f[:j] for j in range(len(f) + 1)
                           if tgt.meets(f[:j], stage))
                report.entries.append(AuditEntry(f, i, "met", wit))
            elif not meets_below.get(f, False):
                wit = next(f[:j] for j in range(len(f) + 1)
                           if not meets_below.get(f[:j], True))
                report.entries.append(AuditEntry(f, i, "refuted", wit))
            else:
                report.entries.append(AuditEntry(f, i, "undecided"))
    return report


# ---------------------------------------------------------------------------
# structural verification


@dataclass
class TowerCheck:
    name: str
    level: str
    ok: bool
    detail: str = ""


def verify_tower(tw: Tower, injury_bound: bool = True) -> List[TowerCheck]:
    """Copying, map invariants, permanence, and the injury bound, level by
    level.  Returns one row per (predicate, level)."""
    rows: List[TowerCheck] = []
    for beta in tw.materialized():
        lvl = tw.levels[beta]
        name = render(beta)
        if lvl.copylen and not lvl.cut:
            pred_nn = tw.segment.enum_pred(tw.segment.lookup(beta))
            if pred_nn is not None and pred_nn.base in tw.levels:
                d = min(lvl.copylen, tw.depth)
                mine = {n for n in lvl.tree.nodes if len(n) <= d}
                theirs = {n for n in tw.levels[pred_nn.base].tree.nodes
                          if len(n) <= d}
                rows.append(TowerCheck(
                    "copying", name, mine == theirs,
                    f"depth {d}: {len(mine)} vs {len(theirs)} nodes"))
        if lvl.up_link is not None:
            try:
                lvl.up_link.check()
                rows.append(TowerCheck("map", name, True))
            except VerificationFailure as err:
                rows.append(TowerCheck("map", name, False, str(err)))
        if lvl.log is not None and not lvl.cut and lvl.up_link is not None:
            extra = set(lvl.log.born) - set(lvl.tree.nodes)
            rows.append(TowerCheck("permanent", name, not extra,
                                   f"{len(extra)} created nodes lost"))
            if injury_bound:
                ok, detail = _injury_bound(lvl.up_link.injury_log)
                rows.append(TowerCheck("injury-bound", name, ok, detail))
    return rows


def _injury_bound(injuries: Sequence[Tuple[int, str, FingerString]]) -> Tuple[bool, str]:
    """At most 2^k construction injuries at a domain node of length <= 2k,
    counted after the last disturbance (any cause) of a proper prefix."""
    worst = (0, 0)
    events: Dict[FingerString, List[int]] = {}
    counted: Dict[FingerString, List[int]] = {}
    for s, cause, node in injuries:
        events.setdefault(node, []).append(s)
        if cause != "parent-change":
            counted.setdefault(node, []).append(s)
    for node, stamps in counted.items():
        settle = max((max(ss) for p, ss in events.items()
                      if len(p) < len(node) and is_prefix(p, node)), default=0)
        late = sum(1 for s in stamps if s > settle)
        k = (len(node) + 1) // 2
        if late > (1 << k):
            return False, f"{late} injuries at {node} against bound {1 << k}"
        worst = max(worst, (late, k))
    return True, f"worst {worst[0]} injuries against bound 2^{worst[1]}"


def homeomorphism_check(tw: Tower, depth: Optional[int] = None,
                        node_cap: int = 1 << 12) -> List[TowerCheck]:
    """Brute-forced surrogate for the depth-bounded homeomorphism claim:
    images of frontier-reaching nodes are frontier-reaching, and every
    frontier-reaching node at or below `depth` sits under some image."""
    depth = tw.depth if depth is None else depth
    rows: List[TowerCheck] = []
    for beta in tw.materialized():
        lvl = tw.levels[beta]
        if lvl.up_link is None or lvl.cut:
            continue
        above = successor(beta)
        if above not in tw.levels:
            continue
        upper = tw.levels[above].tree
        if upper.node_count() > node_cap or lvl.tree.node_count() > node_cap:
            rows.append(TowerCheck("homeomorphism", render(beta), False,
                                   f"level exceeds {node_cap} nodes"))
            continue
        up_alive = set(upper.extendable_nodes())
        down_alive = set(lvl.tree.extendable_nodes())
        link = lvl.up_link.final
        images = {link[s] for s in up_alive if s in link}
        stray = sorted(img for img in images if img not in down_alive)
        shallow = {tau for tau in down_alive if len(tau) <= depth}
        uncovered = sorted(tau for tau in shallow
                           if not any(is_prefix(tau, img) for img in images))
        ok = not stray and not uncovered
        rows.append(TowerCheck(
            "homeomorphism", render(beta), ok,
            f"{len(images)} images cover {len(shallow)} nodes" if ok
            else f"stray={stray[:2]} uncovered={uncovered[:2]}"))
    return rows


# ---------------------------------------------------------------------------
# independent families


@dataclass
class RequirementLog:
    met: Dict[int, dict] = field(default_factory=dict)
    actions: List[dict] = field(default_factory=list)
    injuries: List[Tuple[int, int]] = field(default_factory=list)  # (stage, req)
    stages: int = 0

    def summary(self) -> dict:
        return {"met": sorted(self.met), "actions": len(self.actions),
                "injuries": len(self.injuries), "stages": self.stages}


def _source_path(src: StagewiseSource, stage: int) -> FingerString:
    nodes = src.nodes_at(stage) or {()}
    deepest = max(len(n) for n in nodes)
    return min(n for n in nodes if len(n) == deepest)


def _phi_join(i: int, joined: Sequence[int], x: int) -> Optional[int]:
    """Mock functional with use x+i: defined iff the join reaches that far."""
    return joined[x + i] if x + i < len(joined) else None


def build_independent_family(k: int, tree_specs: Sequence[StagewiseSource],
                             stage_budget: int = 64,
                             requirements: Optional[int] = None,
                             phi: Callable = _phi_join
                             ) -> Tuple[List[FiniteFunction], RequirementLog]:
    """Finite-injury construction of k mutually non-reducible finite
    functions seeded by the specs' frontier paths.

    Requirement n, split as (j, i) = (n mod k, n div k), is met once member j
    provably differs from Phi_i applied to the interleaved join of the other
    members, certified by a recorded computation the later stages re-verify.
    A certificate broken by a spec path change or by a neighbour's
    diagonalization counts as an injury; the requirement is then re-served at
    a fresh column.  With an explicit requirement count, falling short raises
    BudgetExceeded carrying the partial log; otherwise the log simply reports
    what was met.
    """
    if k < 2:
        raise ValueError("independence needs k >= 2")
    if len(tree_specs) != k:
        raise ValueError(f"expected {k} tree specs, got {len(tree_specs)}")
    m = k * 2 if requirements is None else requirements

    base: List[FingerString] = [_source_path(s, 0) for s in tree_specs]
    overrides: List[Dict[int, int]] = [dict() for _ in range(k)]
    log = RequirementLog(stages=stage_budget)
    used_values: Set[int] = set()

    def func(j: int) -> List[int]:
        width = max([len(base[j])] + [c + 1 for c in overrides[j]])
        out = list(base[j]) + [0] * (width - len(base[j]))
        for c, v in overrides[j].items():
            out[c] = v
        return out

    def join_others(j: int, width: int) -> List[int]:
        others = [func(jj) for jj in range(k) if jj != j]
        for o in others:
            o.extend([0] * (width - len(o)))
        return [o[t] for t in range(width) for o in others]

    def verify(n: int) -> bool:
        cert = log.met.get(n)
        if cert is None:
            return False
        j, i, c = cert["j"], cert["i"], cert["column"]
        joined = join_others(j, cert["width"])
        now = phi(i, joined, c)
        mine = func(j)
        return now == cert["computed"] and c < len(mine) and mine[c] != now

    for s in range(1, stage_budget + 1):
        for j, src in enumerate(tree_specs):
            p = _source_path(src, s)
            if p != base[j]:
                base[j] = p
        for n in sorted(log.met):
            if not verify(n):
                del log.met[n]
                log.injuries.append((s, n))
        for n in range(m):
            if n in log.met:
                continue
            j, i = n % k, n // k
            width = max(len(func(jj)) for jj in range(k)) + n + i + 2
            c = width - i - 2
            joined = join_others(j, width)
            computed = phi(i, joined, c)
            if computed is None:
                continue
            value = max([computed + 1] + [u + 1 for u in used_values])
            overrides[j][c] = value
            used_values.add(value)
            cert = {"j": j, "i": i, "column": c, "computed": computed,
                    "value": value, "stage": s, "width": width}
            log.met[n] = cert
            log.actions.append(dict(cert))
            if not verify(n):
                del log.met[n]

    family = [FiniteFunction.of(func(j)) for j in range(k)]
    if requirements is not None and len(log.met) < requirements:
        err = BudgetExceeded(
            f"met {len(log.met)} of {requirements} requirements "
            f"in {stage_budget} stages", stage_budget)
        err.log = log
        raise err
    return family, log


# ---------------------------------------------------------------------------
# root extraction and serialization


def extract_root(tw: Tower, top_path: Sequence[int], depth: int) -> FiniteFunction:
    """Level-zero image of the longest mapped prefix of a top-level path."""
    zero = from_int(0)
    sigma = tuple(top_path)
    for j in range(len(sigma), -1, -1):
        try:
            img = treemap(tw, tw.top, zero, sigma[:j])
        except Undefined:
            continue
        return FiniteFunction.of(img[:depth])
    raise Undefined("not even the empty prefix has a level-zero image")


def tower_dump(tw: Tower, dirpath: str) -> List[str]:
    """Write the per-level JSON schema; returns the filenames written."""
    os.makedirs(dirpath, exist_ok=True)
    written = []
    manifest = {
        "alpha": render(tw.top),
        "depth": tw.depth,
        "stage_budget": tw.stage_budget,
        "variant": tw.variant,
        "levels": [],
    }
    for beta in tw.materialized():
        lvl = tw.levels[beta]
        code = code_of(beta)
        doc = {
            "beta": render(beta),
            "code": code,
            "copylen": lvl.copylen,
            "cut": lvl.cut,
            "tree": lvl.tree.to_json(),
            "map": None if lvl.up_link is None else lvl.up_link.to_json(),
            "injuries": [] if lvl.up_link is None else
                        [[s, c, list(n)] for s, c, n in lvl.up_link.injury_log],
            "targets": [t.describe() for t in lvl.targets],
        }
        fname = f"level_{code:06d}.json"
        with open(os.path.join(dirpath, fname), "w") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")
        manifest["levels"].append({"beta": render(beta), "code": code,
                                   "file": fname})
        written.append(fname)
    with open(os.path.join(dirpath, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return ["manifest.json"] + written


def verify_dump(dirpath: str) -> List[TowerCheck]:
    """Re-run the map and tree checks against a dumped tower directory."""
    with open(os.path.join(dirpath, "manifest.json")) as fh:
        manifest = json.load(fh)
    rows: List[TowerCheck] = []
    for entry in sorted(manifest["levels"], key=lambda e: e["code"]):
        with open(os.path.join(dirpath, entry["file"])) as fh:
            doc = json.load(fh)
        name = doc["beta"]
        tree = LevelTree.from_json(doc["tree"])
        rows.append(TowerCheck("tree", name, True,
                               f"{tree.node_count()} nodes"))
        if doc["map"] is not None:
            final = {tuple(kv[0]): tuple(kv[1]) for kv in doc["map"]["final"]}
            mm = MonotoneMap(final=final, copylen=doc["map"]["copylen"],
                             target=tree)
            try:
                mm.check()
                rows.append(TowerCheck("map", name, True))
            except VerificationFailure as err:
                rows.append(TowerCheck("map", name, False, str(err)))
    return rows

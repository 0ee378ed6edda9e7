"""Finite-depth trees of natural-number strings, and the structural
predicates the tower constructions promise to maintain.

Strings are plain tuples.  Their canonical code is built one symbol at a
time through the Cantor pairing —

    code(empty) = 0,    code(sigma + (k,)) = pair(code(sigma), k) + 1

— a bijection with the naturals under which every proper extension has a
strictly larger code and, for a fixed stem, codes grow with the appended
symbol.  The tower's stage rules lean on both monotonicities.

A LevelTree is a prefix-closed node set up to a fixed depth with
permanent dead marks.  Depth-D frontier reachability stands in for
"extends to an infinite path" everywhere: a node is extendable when some
chain of present, non-dead nodes links it to depth D.  All predicate
checks are stated at this surrogate and never claimed beyond it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .notation import cantor_pair, cantor_unpair

FingerString = Tuple[int, ...]


def string_code(sigma: FingerString) -> int:
    code = 0
    for k in sigma:
        code = cantor_pair(code, k) + 1
    return code


def string_decode(n: int) -> FingerString:
    out: List[int] = []
    while n:
        n, k = cantor_unpair(n - 1)
        out.append(k)
    return tuple(reversed(out))


def is_prefix(sigma: FingerString, tau: FingerString) -> bool:
    return len(sigma) <= len(tau) and tau[: len(sigma)] == sigma


class MissingInput(ValueError):
    """A structural predicate was requested without its required inputs."""


class LevelTree:
    """Prefix-closed string set up to `depth`, with permanent dead marks."""

    def __init__(self, depth: int, nodes: Iterable[FingerString] = ((),),
                 dead: Iterable[FingerString] = (), binary: bool = False):
        self.depth = depth
        self.binary = binary
        self.nodes: Set[FingerString] = set(nodes)
        self.nodes.add(())
        self.dead: Set[FingerString] = set(dead)
        for sigma in self.nodes:
            if len(sigma) > depth:
                raise ValueError(f"node {sigma} deeper than {depth}")
            if sigma and sigma[:-1] not in self.nodes:
                raise ValueError(f"node set not prefix-closed at {sigma}")
            if binary and any(v > 1 for v in sigma):
                raise ValueError(f"non-binary symbol in {sigma}")

    @classmethod
    def full(cls, depth: int, arity: int = 2) -> "LevelTree":
        nodes = [()]
        for d in range(1, depth + 1):
            nodes.extend(itertools.product(range(arity), repeat=d))
        return cls(depth, nodes, binary=(arity == 2))

    def __contains__(self, sigma: FingerString) -> bool:
        return tuple(sigma) in self.nodes

    def mark(self, sigma: FingerString) -> str:
        if sigma in self.dead:
            return "dead"
        if len(sigma) == self.depth:
            return "frontier"
        return "live"

    def children(self, sigma: FingerString) -> List[FingerString]:
        out = [tau for tau in self.nodes
               if len(tau) == len(sigma) + 1 and tau[:-1] == sigma]
        out.sort()
        return out

    def node_count(self) -> int:
        return len(self.nodes)

    def frontier(self) -> List[FingerString]:
        return sorted(sigma for sigma in self.nodes
                      if len(sigma) == self.depth and sigma not in self.dead
                      and not any(sigma[:j] in self.dead for j in range(len(sigma))))

    def extendable_nodes(self) -> Set[FingerString]:
        """Nodes linked to the frontier through present, non-dead nodes —
        the surrogate for membership in the pruned tree."""
        out: Set[FingerString] = set()
        for sigma in self.frontier():
            for j in range(len(sigma) + 1):
                out.add(sigma[:j])
        return out

    def truncate(self, d: int) -> "LevelTree":
        if d > self.depth:
            raise ValueError(f"cannot truncate depth {self.depth} to {d}")
        return LevelTree(d, {s for s in self.nodes if len(s) <= d},
                         {s for s in self.dead if len(s) <= d}, self.binary)

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "binary": self.binary,
            "nodes": sorted(list(s) for s in self.nodes),
            "dead": sorted(list(s) for s in self.dead),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LevelTree":
        return cls(doc["depth"], {tuple(s) for s in doc["nodes"]},
                   {tuple(s) for s in doc["dead"]}, doc.get("binary", False))

    def to_dot(self) -> str:
        lines = ["digraph tree {", '  rankdir=TB;']
        for sigma in sorted(self.nodes):
            name = '"' + ",".join(map(str, sigma)) + '"'
            shade = {"dead": "gray", "frontier": "lightblue", "live": "white"}
            lines.append(f'  {name} [style=filled fillcolor={shade[self.mark(sigma)]}];')
            if sigma:
                parent = '"' + ",".join(map(str, sigma[:-1])) + '"'
                lines.append(f"  {parent} -> {name};")
        lines.append("}")
        return "\n".join(lines)


def truncate(t: LevelTree, d: int) -> LevelTree:
    return t.truncate(d)


def extendable_nodes(t: LevelTree) -> Set[FingerString]:
    return t.extendable_nodes()


@dataclass
class PredicateResult:
    ok: bool
    checked: int = 0
    witness: Optional[str] = None


@dataclass
class StructureReport:
    results: Dict[str, PredicateResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.results.values())

    def __getitem__(self, name: str) -> PredicateResult:
        return self.results[name]


def phi_column(i: int, sigma: FingerString) -> Optional[int]:
    """Mock functional family: Phi_i reads column i of its input."""
    return sigma[i] if i < len(sigma) else None


def verify_structure(t: LevelTree, theta=None, xi_probe: Optional[Sequence[int]] = None,
                     phi_family: Optional[Callable] = None, copylen: int = 0,
                     checks: Sequence[str] = ("padded",)) -> StructureReport:
    """Check the requested structural predicates literally at materialized
    depth.  `theta` must expose .final (string -> string) and .target (the
    tree the images live in) for the map-dependent predicates.
    """
    report = StructureReport()
    extendable = t.extendable_nodes()

    for name in checks:
        if name == "padded":
            report.results[name] = _check_padded(t, extendable, copylen)
        elif name == "largeness":
            if theta is None:
                raise MissingInput("largeness needs the monotone map")
            report.results[name] = _check_largeness(theta)
        elif name == "disagreement":
            if theta is None or phi_family is None:
                raise MissingInput("disagreement needs the map and a Phi family")
            report.results[name] = _check_disagreement(theta, phi_family, copylen)
        elif name == "uniquely_small":
            if xi_probe is None:
                raise MissingInput("uniquely_small needs a xi probe prefix")
            report.results[name] = _check_uniquely_small(t, extendable, xi_probe)
        else:
            raise ValueError(f"unknown predicate {name!r}")
    return report


def _check_padded(t: LevelTree, extendable: Set[FingerString], copylen: int) -> PredicateResult:
    res = PredicateResult(True)
    for sigma in sorted(extendable):
        if len(sigma) >= t.depth or len(sigma) % 2 or len(sigma) < copylen:
            continue
        res.checked += 1
        if sigma + (0,) not in t.nodes or sigma + (1,) not in t.nodes:
            return PredicateResult(False, res.checked, f"children of {sigma} missing")
    return res


def _check_largeness(theta) -> PredicateResult:
    res = PredicateResult(True)
    final = theta.final
    for sigma, image in sorted(final.items()):
        res.checked += 1
        if any(image[j] > image[j + 1] for j in range(len(image) - 1)):
            return PredicateResult(False, res.checked,
                                   f"image of {sigma} decreases: {image}")
        if sigma:
            parent = final.get(sigma[:-1])
            if parent is not None:
                block = image[len(parent):]
                if any(v < sigma[-1] for v in block):
                    return PredicateResult(
                        False, res.checked,
                        f"appended block {block} below branch index {sigma[-1]}")
    return res


def _check_disagreement(theta, phi_family, copylen: int) -> PredicateResult:
    res = PredicateResult(True)
    final = theta.final
    target: LevelTree = theta.target
    for sigma in sorted(final):
        if len(sigma) % 2 or len(sigma) < copylen:
            continue
        kids = [final.get(sigma + (0,)), final.get(sigma + (1,))]
        if kids[0] is None or kids[1] is None:
            continue
        res.checked += 1
        i = len(sigma) // 2
        a, b = phi_family(i, kids[0]), phi_family(i, kids[1])
        if a is not None and b is not None and a != b:
            continue  # children already disagree
        base = final[sigma]
        exts = [tau for tau in target.nodes if is_prefix(base, tau)]
        outs = {phi_family(i, tau) for tau in exts}
        outs.discard(None)
        if len(outs) > 1:
            return PredicateResult(
                False, res.checked,
                f"extensions of theta({sigma}) split on Phi_{i} but children agree")
    return res


def _check_uniquely_small(t: LevelTree, extendable: Set[FingerString],
                          xi_probe: Sequence[int]) -> PredicateResult:
    res = PredicateResult(True)
    for x in range(min(t.depth, len(xi_probe))):
        small = sorted(s for s in extendable
                       if len(s) == x + 1 and s[x] <= xi_probe[x])
        res.checked += 1
        if len(small) > 1:
            return PredicateResult(
                False, res.checked,
                f"x={x}: prefixes {small[0]} and {small[1]} both small but differ")
    return res


def uniformize(certificates: Callable[[FingerString], Optional[Tuple[int, int]]],
               copied: Optional[LevelTree], depth: int, arity: int = 2,
               copylen: int = 0) -> LevelTree:
    """Stagewise-refutation uniformization.

    A string of length l > copylen is excluded exactly when its exclusion
    certificate (step, column) satisfies step <= l and column <= l — a
    late certificate keeps the string and only bites on its longer
    extensions once re-certified there.  Below copylen the copied segment
    is taken verbatim.
    """
    nodes: Set[FingerString] = {()}
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for sigma in frontier:
            for k in range(arity):
                tau = sigma + (k,)
                l = len(tau)
                if l <= copylen:
                    keep = copied is None or tau in copied
                else:
                    cert = certificates(tau)
                    keep = cert is None or cert[0] > l or cert[1] > l
                if keep:
                    nodes.add(tau)
                    nxt.append(tau)
        frontier = nxt
    return LevelTree(depth, nodes, binary=(arity == 2))

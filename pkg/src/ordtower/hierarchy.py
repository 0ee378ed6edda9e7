"""Fast-growing modulus hierarchy over pluggable oracle families.

xi^0 is identically 0.  At a successor level b+1 the value at x is

    xi^{b+1}(x) = max( xihat^{b+1}(x),  sup { xi^g(x) : g <= b materialized } )

where the hat term falls back to the level below while x is smaller than
the code of b+1, and otherwise takes the largest settling stage among the
converging indices i < x of the level-b oracle.  At a materialized limit
the value is the sup over lower levels whose codes are at most x; the
code restriction is what keeps the limit finite and, with the full sup
at successors, makes the hierarchy pointwise monotone along the segment.

The stagewise view xi_approx replaces settle probes by the last membership
flip observed within s stages; it is non-decreasing in s and reaches the
exact value once every relevant probe has stabilized.  (The source
material, read literally, would have the approximation strictly
increasing in s while converging — impossible for naturals; we implement
non-decreasing with eventual stabilization.)

koenig_extract walks the finitely-branching tree {sigma <= h pointwise :
tree_of(sigma)} breadth-first and returns the unique full-depth survivor;
recover_jump_bound replays the two-path recovery argument: given distinct
paths that h majorizes, first disagreement y and any x > y, the preimage
bound l at x+1 turns h(l) into an upper bound for xi^{b+1}(x).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import BudgetExceeded, EmptyTree, InsufficientDepth, NotUnique
from .machine import MockOracle, OracleApproximation, settle_time
from .nicety import NiceSegment
from .notation import Kind, Notation, classify, code_of, compare, predecessor, render


@dataclass(frozen=True)
class FiniteFunction:
    """A finite prefix f restricted to [0, N)."""

    values: Tuple[int, ...]

    @classmethod
    def of(cls, seq: Sequence[int]) -> "FiniteFunction":
        return cls(tuple(int(v) for v in seq))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    def restrict(self, n: int) -> "FiniteFunction":
        return FiniteFunction(self.values[:n])

    def __repr__(self):
        return f"FiniteFunction({list(self.values)})"


def majorizes(f: Sequence[int], g: Sequence[int]) -> bool:
    """f >= g pointwise on the common domain."""
    return all(f[i] >= g[i] for i in range(min(len(f), len(g))))


def dominates(f: Sequence[int], g: Sequence[int], k: int = 0) -> bool:
    """Majorization with up to k exceptions at the front."""
    return all(f[i] >= g[i] for i in range(k, min(len(f), len(g))))


def _base(beta) -> Notation:
    return beta.base if hasattr(beta, "base") else beta


def observed_settle(oracle: OracleApproximation, i: int, s: int) -> int:
    """Stage of the last membership flip of i within [0, s] (0 if none).

    Never exceeds the true settling stage, and non-decreasing in s."""
    if isinstance(oracle, MockOracle):
        t = oracle.spec.lookup(i)
        return t if t is not None and t <= s else 0
    last = 0
    prev = oracle.membership_at(0, i)
    for stage in range(1, s + 1):
        cur = oracle.membership_at(stage, i)
        if cur != prev:
            last = stage
            prev = cur
    return last


class ModulusHierarchy:
    """xi^beta over a nice segment with one oracle object per level."""

    def __init__(self, segment: NiceSegment,
                 oracles: Dict[Notation, OracleApproximation],
                 probe_budget: int = 64):
        self.segment = segment
        self.oracles = dict(oracles)
        self.probe_budget = probe_budget
        self._elements = sorted(nn.base for nn in segment.notations())
        self._exact: Dict[Tuple[Notation, int], int] = {}
        self._staged: Dict[Tuple[Notation, int, int], int] = {}

    def _check(self, beta: Notation) -> None:
        if not any(compare(e, beta) == 0 for e in self._elements):
            raise ValueError(f"{render(beta)} not materialized in the segment")

    def _oracle(self, gamma: Notation) -> OracleApproximation:
        for key, orc in self.oracles.items():
            if compare(key, gamma) == 0:
                return orc
        raise ValueError(f"no oracle at level {render(gamma)}")

    # -- exact values -------------------------------------------------------

    def xi(self, beta, x: int) -> int:
        beta = _base(beta)
        key = (beta, x)
        if key in self._exact:
            return self._exact[key]
        self._check(beta)
        kind = classify(beta)
        if kind is Kind.ZERO:
            value = 0
        elif kind is Kind.SUCCESSOR:
            pred = predecessor(beta)
            if x < code_of(beta):
                hat = self.xi(pred, x)
            else:
                hat = self._hat_exact(pred, x)
            below = [self.xi(e, x) for e in self._elements
                     if compare(e, pred) <= 0]
            value = max([hat] + below)
        else:
            value = max([0] + [self.xi(e, x) for e in self._elements
                               if compare(e, beta) < 0 and code_of(e) <= x])
        self._exact[key] = value
        return value

    def _hat_exact(self, pred: Notation, x: int) -> int:
        orc = self._oracle(pred)
        best = 0
        for i in range(x):
            t = settle_time(orc, i, self.probe_budget)
            if t is None:
                raise BudgetExceeded(
                    f"settle probe for i={i} at level {render(pred)} "
                    f"inconclusive within {self.probe_budget}",
                    self.probe_budget,
                )
            best = max(best, t)
        return best

    # -- stagewise view -----------------------------------------------------

    def xi_approx(self, beta, x: int, s: int) -> int:
        beta = _base(beta)
        key = (beta, x, s)
        if key in self._staged:
            return self._staged[key]
        self._check(beta)
        kind = classify(beta)
        if kind is Kind.ZERO:
            value = 0
        elif kind is Kind.SUCCESSOR:
            pred = predecessor(beta)
            if x < code_of(beta):
                hat = self.xi_approx(pred, x, s)
            else:
                orc = self._oracle(pred)
                hat = max([0] + [observed_settle(orc, i, s) for i in range(x)])
            below = [self.xi_approx(e, x, s) for e in self._elements
                     if compare(e, pred) <= 0]
            value = max([hat] + below)
        else:
            value = max([0] + [self.xi_approx(e, x, s) for e in self._elements
                               if compare(e, beta) < 0 and code_of(e) <= x])
        self._staged[key] = value
        return value

    def xi_ge(self, beta, x: int, y: int, stage_budget: Optional[int] = None) -> bool:
        """Sigma-style decision of xi(beta, x) >= y: search for a stage
        whose approximation already clears y."""
        budget = self.probe_budget if stage_budget is None else stage_budget
        return any(self.xi_approx(beta, x, s) >= y for s in range(budget + 1))

    def table(self, betas, xs) -> List[dict]:
        rows = []
        for beta in betas:
            for x in xs:
                rows.append({"beta": render(_base(beta)), "x": x,
                             "value": self.xi(beta, x)})
        return rows


def koenig_extract(h: Sequence[int], tree_of: Callable[[Tuple[int, ...]], bool],
                   depth: int, node_cap: int = 1 << 14) -> FiniteFunction:
    """Unique full-depth node of {sigma <= h pointwise : tree_of(sigma)}.

    Breadth-first; all competitors of the survivor must die before depth.
    Raises NotUnique / EmptyTree accordingly.
    """
    if len(h) < depth:
        raise InsufficientDepth(f"h has length {len(h)} < depth {depth}")
    level: List[Tuple[int, ...]] = [()]
    seen = 1
    for k in range(depth):
        nxt = []
        for sigma in level:
            for i in range(h[k] + 1):
                child = sigma + (i,)
                if tree_of(child):
                    nxt.append(child)
                    seen += 1
                    if seen > node_cap:
                        raise BudgetExceeded(
                            f"extraction tree exceeded {node_cap} nodes", node_cap)
        level = nxt
        if not level:
            raise EmptyTree(f"no surviving node at depth {k + 1}")
    if len(level) > 1:
        raise NotUnique(
            f"{len(level)} surviving depth-{depth} nodes, e.g. "
            f"{level[0]} and {level[1]}")
    return FiniteFunction.of(level[0])


def recover_jump_bound(tower, beta, h: FiniteFunction, y: int, x: int,
                       paths: Tuple[Sequence[int], Sequence[int]]) -> int:
    """Two-path jump-bound recovery: h(l) with l the preimage bound at x+1.

    `paths` are the two distinct depth-limited level-0 paths the caller
    asserts; their majorization by h and first disagreement at y are
    re-checked here rather than trusted.
    """
    from .tower import preimage_bound

    g, zeta = paths
    if x <= y:
        raise ValueError(f"need x > y, got x={x}, y={y}")
    if not majorizes(h, g) or not majorizes(h, zeta):
        raise InsufficientDepth("h does not majorize both supplied paths")
    disagree = next((j for j in range(min(len(g), len(zeta)))
                     if g[j] != zeta[j]), None)
    if disagree != y:
        raise ValueError(f"first disagreement at {disagree}, caller said {y}")
    l = preimage_bound(tower, beta, h, x + 1)
    if l >= len(h):
        raise InsufficientDepth(
            f"preimage bound {l} beyond h's domain {len(h)}")
    return h[l]

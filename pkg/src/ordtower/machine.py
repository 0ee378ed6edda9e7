"""Budgeted counter machine with an oracle-branch instruction.

The model is deliberately tiny: five opcodes over unbounded registers,
so step counting is trivially exact and the program enumeration is a
bijection with the naturals.

    INC r        bump register r
    DEC r        decrement register r (floor 0)
    JZ  r a      jump to address a when register r is 0
    QRY r a      jump to address a when the oracle holds register r's value
    HLT r        halt, output register r

Input is placed in register 1; all other registers start at 0.  Running
off the end of the program stalls the machine (reported as Exhausted —
it is not a halt).

Encoding (documented so enumeration order is reproducible): an
instruction is op + 5*arg with op in INC=0, DEC=1, JZ=2, QRY=3, HLT=4;
single-register ops take arg = r, branching ops take arg = pair(r, a)
with the Cantor pairing of the notation module.  A program is the
standard list code: [] = 0, ins::rest = pair(ins, rest) + 1.  Every
natural decodes to exactly one program.

Iterated jumps are approximated stagewise: jump_approx(n, s) is the set
of i <= s whose program halts on input i within s steps against the
oracle jump_approx(n-1, s), the finite-level limit-lemma picture.  Limit
levels exist only as mocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import BudgetExceeded
from .notation import cantor_pair, cantor_unpair

INC, DEC, JZ, QRY, HLT = range(5)
_NAMES = ("INC", "DEC", "JZ", "QRY", "HLT")
_BRANCHING = (JZ, QRY)

MAX_JUMP_LEVEL = 3


@dataclass(frozen=True)
class Instruction:
    op: int
    reg: int
    addr: int = 0

    def encode(self) -> int:
        arg = cantor_pair(self.reg, self.addr) if self.op in _BRANCHING else self.reg
        return self.op + 5 * arg

    @classmethod
    def decode(cls, n: int) -> "Instruction":
        op, arg = n % 5, n // 5
        if op in _BRANCHING:
            reg, addr = cantor_unpair(arg)
            return cls(op, reg, addr)
        return cls(op, arg)

    def __str__(self):
        if self.op in _BRANCHING:
            return f"{_NAMES[self.op]} {self.reg} {self.addr}"
        return f"{_NAMES[self.op]} {self.reg}"


@dataclass(frozen=True)
class Program:
    instructions: Tuple[Instruction, ...]

    @property
    def index(self) -> int:
        code = 0
        for ins in reversed(self.instructions):
            code = cantor_pair(ins.encode(), code) + 1
        return code

    @classmethod
    def decode(cls, n: int) -> "Program":
        out: List[Instruction] = []
        while n:
            head, n = cantor_unpair(n - 1)
            out.append(Instruction.decode(head))
        return cls(tuple(out))

    @classmethod
    def parse(cls, text: str) -> "Program":
        out = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            name = parts[0].upper()
            if name not in _NAMES:
                raise ValueError(f"line {lineno}: unknown opcode {parts[0]!r}")
            op = _NAMES.index(name)
            want = 3 if op in _BRANCHING else 2
            if len(parts) != want:
                raise ValueError(f"line {lineno}: {name} takes {want - 1} argument(s)")
            args = [int(p) for p in parts[1:]]
            out.append(Instruction(op, *args))
        return cls(tuple(out))

    def __str__(self):
        return "\n".join(str(i) for i in self.instructions)


def halt_program() -> Program:
    return Program((Instruction(HLT, 0),))


def loop_program() -> Program:
    return Program((Instruction(JZ, 0, 0),))


def echo_program() -> Program:
    """Output 1 when the input is in the oracle, 0 otherwise."""
    return Program((
        Instruction(QRY, 1, 2),
        Instruction(HLT, 0),
        Instruction(INC, 0),
        Instruction(HLT, 0),
    ))


@dataclass(frozen=True)
class Halted:
    output: int
    steps: int
    halted: bool = True


@dataclass(frozen=True)
class Exhausted:
    steps: int
    halted: bool = False


class OracleApproximation:
    """Stagewise membership view of an oracle set."""

    level: int
    kind: str

    def membership_at(self, stage: int, x: int) -> bool:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class SettleSpec:
    """Finite description of a mock oracle: i -> stage at which i enters.

    Indices without an entry never enter (divergent).
    """

    settle: Tuple[Tuple[int, int], ...]

    @classmethod
    def of(cls, mapping: Dict[int, int]) -> "SettleSpec":
        return cls(tuple(sorted(mapping.items())))

    def lookup(self, i: int) -> Optional[int]:
        for k, t in self.settle:
            if k == i:
                return t
        return None

    def to_json(self, level: int = 0) -> dict:
        return {"level": level, "settle": {str(i): t for i, t in self.settle}}

    @classmethod
    def from_json(cls, doc: dict) -> Tuple["SettleSpec", int]:
        spec = cls.of({int(k): int(v) for k, v in doc.get("settle", {}).items()})
        return spec, int(doc.get("level", 0))


class MockOracle(OracleApproximation):
    kind = "mock"

    def __init__(self, spec: SettleSpec, level: int = 0):
        self.spec = spec
        self.level = level

    def membership_at(self, stage: int, x: int) -> bool:
        t = self.spec.lookup(x)
        return t is not None and stage >= t


class SetOracle(OracleApproximation):
    """A frozen finite set, the same at every stage."""

    kind = "set"

    def __init__(self, members: Iterable[int], level: int = 0):
        self.members = frozenset(members)
        self.level = level

    def membership_at(self, stage: int, x: int) -> bool:
        return x in self.members


EMPTY_ORACLE = SetOracle((), level=0)


def run_program(p: Program, oracle: OracleApproximation, x: int,
                step_budget: int, stage: int = 0):
    """Deterministic run at a fixed oracle stage; exact step counts."""
    if step_budget <= 0:
        raise ValueError("step_budget must be positive")
    regs: Dict[int, int] = {1: x}
    pc = 0
    steps = 0
    n = len(p.instructions)
    while steps < step_budget:
        if not 0 <= pc < n:
            return Exhausted(steps)  # stalled off the program
        ins = p.instructions[pc]
        steps += 1
        if ins.op == INC:
            regs[ins.reg] = regs.get(ins.reg, 0) + 1
            pc += 1
        elif ins.op == DEC:
            regs[ins.reg] = max(0, regs.get(ins.reg, 0) - 1)
            pc += 1
        elif ins.op == JZ:
            pc = ins.addr if regs.get(ins.reg, 0) == 0 else pc + 1
        elif ins.op == QRY:
            pc = ins.addr if oracle.membership_at(stage, regs.get(ins.reg, 0)) else pc + 1
        else:  # HLT
            return Halted(regs.get(ins.reg, 0), steps)
    return Exhausted(steps)


@lru_cache(maxsize=4096)
def jump_approx(level: int, stage: int, max_level: int = MAX_JUMP_LEVEL) -> frozenset:
    """Stage-s approximation of the level-th jump: indices i <= stage whose
    program halts on input i within stage steps, against the stage-s view
    of the level below."""
    if level < 0 or level > max_level:
        raise BudgetExceeded(f"jump level {level} outside [0, {max_level}]", max_level)
    if level == 0 or stage == 0:
        return frozenset()
    below = SetOracle(jump_approx(level - 1, stage, max_level), level=level - 1)
    out = set()
    for i in range(stage + 1):
        res = run_program(Program.decode(i), below, i, step_budget=stage, stage=stage)
        if res.halted:
            out.add(i)
    return frozenset(out)


class SimulatedJumpOracle(OracleApproximation):
    """0^(n) through its stagewise approximations."""

    kind = "simulated"

    def __init__(self, level: int, max_level: int = MAX_JUMP_LEVEL):
        if not 0 <= level <= max_level:
            raise BudgetExceeded(f"jump level {level} outside [0, {max_level}]", max_level)
        self.level = level
        self.max_level = max_level

    def membership_at(self, stage: int, x: int) -> bool:
        return x in jump_approx(self.level, stage, self.max_level)


def settle_time(oracle: OracleApproximation, i: int, probe_budget: int) -> Optional[int]:
    """Least stage after which membership of i is constant up to the budget.

    Mocks are read back exactly (None when the spec value exceeds the
    budget); other oracles are probed observationally, and a change at the
    final probe means no stabilization was seen.
    """
    if isinstance(oracle, MockOracle):
        t = oracle.spec.lookup(i)
        if t is None:
            return 0
        return t if t <= probe_budget else None
    history = [oracle.membership_at(s, i) for s in range(probe_budget + 1)]
    t = probe_budget
    while t > 0 and history[t - 1] == history[t]:
        t -= 1
    return None if t == probe_budget and probe_budget > 0 else t

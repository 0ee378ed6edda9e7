"""Cantor-normal-form ordinal notations with effective structure.

A notation is a finite sum  w^e1*c1 + ... + w^ek*ck  with exponents
(recursively notations) strictly decreasing and coefficients positive
naturals.  Zero is the empty sum.  This gives a decidable order, an
effective natural (non-commutative) sum, a zero/successor/limit
classifier, canonical fundamental sequences for limits, and an injective
numeric code.

Fundamental sequences follow the Wainer-style assignment, indexed from 0:

    (d + w^(a+1))[n] = d + w^a * (n+1)
    (d + w^m)[n]     = d + w^(m[n])        for m a limit

Coefficient forms d + w^a*c with c > 1 split off one w^a and reduce to
the rules above.  The sequence is strictly increasing with supremum the
limit it approximates, and (d + w^(a+1))[0] = d + w^a.
"""

from __future__ import annotations

import re
from enum import Enum
from functools import total_ordering
from typing import Iterator, Tuple


class NotationError(ValueError):
    pass


class ParseError(NotationError):
    pass


class KindError(NotationError):
    """Operation applied to a notation of the wrong kind."""


class Kind(Enum):
    ZERO = "zero"
    SUCCESSOR = "successor"
    LIMIT = "limit"


def cantor_pair(x: int, y: int) -> int:
    """Standard Cantor pairing; bijective ℕ² → ℕ, monotone in each slotted argument."""
    return (x + y) * (x + y + 1) // 2 + y


def cantor_unpair(z: int) -> Tuple[int, int]:
    # bisect for the largest diagonal w with w*(w+1)/2 <= z; string codes
    # nest the pairing, so z outgrows any linear scan almost immediately
    lo, hi = 0, 1
    while hi * (hi + 1) // 2 <= z:
        hi *= 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid * (mid + 1) // 2 <= z:
            lo = mid
        else:
            hi = mid - 1
    y = z - lo * (lo + 1) // 2
    return lo - y, y


@total_ordering
class Notation:
    """Immutable CNF term; compare/hash by structure."""

    __slots__ = ("terms", "_code")

    def __init__(self, terms: Tuple[Tuple["Notation", int], ...] = ()):
        prev = None
        for exp, coeff in terms:
            if not isinstance(exp, Notation):
                raise NotationError("exponent must be a Notation")
            if not isinstance(coeff, int) or coeff < 1:
                raise NotationError("coefficient must be a positive int")
            if prev is not None and compare(exp, prev) >= 0:
                raise NotationError("exponents must strictly decrease")
            prev = exp
        self.terms = tuple(terms)
        self._code = None

    def __eq__(self, other):
        if not isinstance(other, Notation):
            return NotImplemented
        return self.terms == other.terms

    def __lt__(self, other):
        if not isinstance(other, Notation):
            return NotImplemented
        return compare(self, other) < 0

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        return f"Notation({render(self)!r})"

    def __str__(self):
        return render(self)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def kind(self) -> Kind:
        return classify(self)


ZERO = Notation()
ONE = Notation(((ZERO, 1),))
OMEGA = Notation(((ONE, 1),))


def from_int(n: int) -> Notation:
    if n < 0:
        raise NotationError("no notations for negative integers")
    return ZERO if n == 0 else Notation(((ZERO, n),))


def as_int(a: Notation) -> int | None:
    """The finite value of a, or None if a >= w."""
    if a.is_zero:
        return 0
    if len(a.terms) == 1 and a.terms[0][0].is_zero:
        return a.terms[0][1]
    return None


def w_power(exp: Notation, coeff: int = 1) -> Notation:
    return Notation(((exp, coeff),))


def compare(a: Notation, b: Notation) -> int:
    """Total order on notations: -1, 0, or 1."""
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = compare(ea, eb)
        if c != 0:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    if len(a.terms) != len(b.terms):
        return -1 if len(a.terms) < len(b.terms) else 1
    return 0


def nat_sum(a: Notation, b: Notation) -> Notation:
    """Ordinal sum a + b (left terms below b's leading exponent are absorbed)."""
    if b.is_zero:
        return a
    if a.is_zero:
        return b
    e = b.terms[0][0]
    keep = [t for t in a.terms if compare(t[0], e) > 0]
    rest = list(b.terms)
    for t in a.terms:
        if compare(t[0], e) == 0:
            rest[0] = (e, t[1] + rest[0][1])
            break
    return Notation(tuple(keep + rest))


def classify(a: Notation) -> Kind:
    if a.is_zero:
        return Kind.ZERO
    if a.terms[-1][0].is_zero:
        return Kind.SUCCESSOR
    return Kind.LIMIT


def predecessor(a: Notation) -> Notation:
    """b with b+1 = a; only successors have one."""
    if classify(a) is not Kind.SUCCESSOR:
        raise KindError(f"predecessor of non-successor {a}")
    exp, coeff = a.terms[-1]
    if coeff == 1:
        return Notation(a.terms[:-1])
    return Notation(a.terms[:-1] + ((exp, coeff - 1),))


def successor(a: Notation) -> Notation:
    return nat_sum(a, ONE)


def fund_seq(lam: Notation, n: int) -> Notation:
    """n-th member of the canonical fundamental sequence of the limit lam."""
    if classify(lam) is not Kind.LIMIT:
        raise KindError(f"fundamental sequence of non-limit {lam}")
    if n < 0:
        raise NotationError("sequence index must be >= 0")
    prefix = list(lam.terms[:-1])
    exp, coeff = lam.terms[-1]
    if coeff > 1:
        prefix.append((exp, coeff - 1))
    if classify(exp) is Kind.SUCCESSOR:
        return Notation(tuple(prefix) + ((predecessor(exp), n + 1),))
    return Notation(tuple(prefix) + ((fund_seq(exp, n), 1),))


def limit_part(a: Notation) -> Tuple[Notation, int]:
    """Split a as (b, k) with a = b + k, k finite and b zero or a limit."""
    if classify(a) is Kind.SUCCESSOR and a.terms[-1][0].is_zero:
        return Notation(a.terms[:-1]), a.terms[-1][1]
    return a, 0


def code_of(a: Notation) -> int:
    """Injective code; code_of(zero) = 0, and every proper subterm (each
    exponent, recursively, and each proper trailing sum) has a strictly
    smaller code.

    Encoding: the empty sum is 0; a sum (e,c)::rest is
    pair(pair(code(e), c-1), code(rest)) + 1 with Cantor pairing.
    """
    if a._code is None:
        code = 0
        for exp, coeff in reversed(a.terms):
            code = cantor_pair(cantor_pair(code_of(exp), coeff - 1), code) + 1
        a._code = code
    return a._code


# ---------------------------------------------------------------------------
# text form:  0 | nat | w | w^E | w^E*c | T+T   with parens around exponents
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*([0-9]+|[w^*+()])")


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"bad character at {pos}: {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        if expect is not None and tok != expect:
            raise ParseError(f"expected {expect!r}, got {tok!r}")
        self.pos += 1
        return tok

    def term(self) -> Notation:
        acc = self.atom()
        while self.peek() == "+":
            self.take("+")
            acc = nat_sum(acc, self.atom())
        return acc

    def atom(self) -> Notation:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        if tok.isdigit():
            self.take()
            return from_int(int(tok))
        if tok == "w":
            self.take()
            exp = ONE
            if self.peek() == "^":
                self.take("^")
                exp = self.exponent()
            coeff = 1
            if self.peek() == "*":
                self.take("*")
                c = self.take()
                if not c.isdigit() or int(c) < 1:
                    raise ParseError(f"coefficient must be a positive nat, got {c!r}")
                coeff = int(c)
            return w_power(exp, coeff)
        raise ParseError(f"unexpected token {tok!r}")

    def exponent(self) -> Notation:
        tok = self.peek()
        if tok == "(":
            self.take("(")
            inner = self.term()
            self.take(")")
            return inner
        if tok is not None and tok.isdigit():
            self.take()
            return from_int(int(tok))
        if tok == "w":
            self.take()
            return OMEGA
        raise ParseError(f"bad exponent start {tok!r}")


def parse(text: str) -> Notation:
    """Parse the text form; sums are normalized via nat_sum, so non-canonical
    input like "1+w" is accepted and collapses."""
    parser = _Parser(_tokenize(text))
    if parser.peek() is None:
        raise ParseError("empty input")
    result = parser.term()
    if parser.peek() is not None:
        raise ParseError(f"trailing input at token {parser.pos}: {parser.peek()!r}")
    return result


def render(a: Notation) -> str:
    if a.is_zero:
        return "0"
    parts = []
    for exp, coeff in a.terms:
        if exp.is_zero:
            parts.append(str(coeff))
            continue
        if exp == ONE:
            base = "w"
        elif as_int(exp) is not None:
            base = f"w^{as_int(exp)}"
        else:
            base = f"w^({render(exp)})"
        parts.append(base if coeff == 1 else f"{base}*{coeff}")
    return "+".join(parts)


def iter_below_finite(bound: int) -> Iterator[Notation]:
    for k in range(bound):
        yield from_int(k)

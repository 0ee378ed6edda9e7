#!/usr/bin/env python3
"""Independent oracle for formula ranks, path evaluation, and forcing.

Ranks are recomputed with textbook collapse arithmetic on (side, level,
base) triples — contributions to a disjunction are taken at collapsed
levels, with no lifting pass — and evaluation replays the documented
three-valued semantics by brute force over prefixes and node pools.  The
corpus is re-parsed from its s-expression text so the two sides do not
even share constructors.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))
from ordtower.formulas import regression_corpus, to_sexpr  # noqa: E402

# --- tiny s-expression reader (own tokenizer) ------------------------------


def tokenize(text):
    out, i = [], 0
    while i < len(text):
        c = text[i]
        if c in "()":
            out.append(c)
            i += 1
        elif c == '"':
            j = text.index('"', i + 1)
            out.append(text[i:j + 1])
            i = j + 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(text) and text[j] not in '() "':
                j += 1
            out.append(text[i:j])
            i = j
    return out


def read(tokens):
    tok = tokens.pop(0)
    if tok == "(":
        node = []
        while tokens[0] != ")":
            node.append(read(tokens))
        tokens.pop(0)
        return node
    return tok


# --- rank by collapse arithmetic -------------------------------------------
# A class is (side, l, b): side "S"/"P", l the collapsed level over the
# empty oracle, b the oracle height it is quantifier-counted against
# (l == b means decided outright by that oracle).  Rules:
#   * disjunctions are existential at the sup of member contributions,
#     taken against the largest member base B: a member already decided
#     there (l <= B) contributes B+1, an existential member its own level,
#     a universal member one more;
#   * a prefix quantifier absorbs an existential matrix, adds a layer over
#     a universal or decided one.


def rank_of(node):
    head = node[0]
    if head == "path":
        return ("S", 0, 0)
    if head == "oracle":
        h = int(node[2])
        return ("S", h, h)
    if head == "not":
        s, l, b = rank_of(node[1])
        return ("P" if s == "S" else "S", l, b)
    if head == "or":
        members = [rank_of(m) for m in node[2:]]
        if not members:
            return ("S", 0, 0)
        big = max(b for _, _, b in members)
        out = big
        for s, l, b in members:
            if l <= big:
                out = max(out, big + 1)
            elif s == "S":
                out = max(out, l)
            else:
                out = max(out, l + 1)
        return ("S", out, big)
    if head == "exists":
        s, l, b = rank_of(node[1])
        if l == b:
            return ("S", b + 1, b)
        if s == "S":
            return ("S", l, l - 1)
        return ("S", l + 1, l)
    raise ValueError(head)


# --- three-valued satisfaction by brute force ------------------------------


def eval_path(node, path, complete):
    head = node[0]
    if head == "path":
        i, v = int(node[1]), int(node[2])
        if i < len(path):
            return path[i] == v
        return False if complete else None
    if head == "oracle":
        return None              # no oracle supplied anywhere below
    if head == "not":
        v = eval_path(node[1], path, complete)
        return None if v is None else (not v)
    if head == "or":
        done = node[1] == "done"
        verdicts = [eval_path(m, path, complete) for m in node[2:]]
        if True in verdicts:
            return True
        if None in verdicts or not done:
            return None
        return False
    if head == "exists":
        verdicts = [eval_path(node[1], path[:j], True)
                    for j in range(len(path) + 1)]
        if True in verdicts:
            return True
        return None if None in verdicts else False
    raise ValueError(head)


def force_not(body, pool):
    """Strong forcing of (not body) at the root over a node pool: refuted
    when some pool node forces the body, forced only once none ever could."""
    def force_pos(sigma):
        v = eval_path(body, sigma, False)
        if v is True:
            return True
        strict = [eval_path(body, tau, False) for tau in pool
                  if tau != sigma and tau[:len(sigma)] == sigma]
        if True in strict:
            return None          # witnessed above, not here
        if v is None or None in strict:
            return None
        return False
    verdicts = {sigma: force_pos(sigma) for sigma in sorted(pool)}
    print("    member verdicts:", verdicts)
    if True in verdicts.values():
        return False
    return None if None in verdicts.values() else True


def main():
    corpus = [read(tokenize(to_sexpr(f))) for f in regression_corpus()]

    print("== rank span of the corpus ==")
    span = {}
    for node in corpus:
        s, l, _ = rank_of(node)
        span[(s, l)] = span.get((s, l), 0) + 1
    for key in sorted(span):
        print(f"   {key}: {span[key]}")

    print("== per-formula ranks ==")
    print("  ", [f"{s}{l}" for s, l, _ in map(rank_of, corpus)])

    print("== verdicts along the path (2, 9, 7) ==")
    print("  ", [eval_path(node, (2, 9, 7), False) for node in corpus])

    print("== verdicts along the narrower path (4,) ==")
    print("  ", [eval_path(node, (4,), False) for node in corpus])

    print("== forcing (not (path 0 1)) at the root, dead (1,) branch ==")
    body = ["path", "0", "1"]
    print("   all nodes:",
          force_not(body, [(), (0,), (1,), (0, 0)]))
    print("   extendable only:",
          force_not(body, [(), (0,), (0, 0)]))


if __name__ == "__main__":
    main()

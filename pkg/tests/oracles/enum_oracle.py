#!/usr/bin/env python3
"""Straight-line replay of the enumeration-tree child rule, independent of
the package: plain recursion over the multiset ordinals of cnf_oracle, no
classes, no caching, no laziness.  Derives the frozen enumseq / copylen /
child-list values in test_nicety.py.  Run directly to regenerate.
"""

from cnf_oracle import (Z, ONE, add, cmp_o, fund, limit_and_tail, nat,
                        render, succ, wpow)


def child_stream(kappa, lb):
    """Yield (child value, child's own lower bound) per the child rule."""
    bound = lb
    while True:
        if kappa[-1] == Z:  # successor: single fixed target
            target = kappa[:-1]
            if cmp_o(bound, target) > 0:
                return
        else:
            n = 0
            while cmp_o(fund(kappa, n), bound) < 0:
                n += 1
            target = fund(kappa, n)
        mu, _ = limit_and_tail(target)
        gamma = mu if cmp_o(bound, mu) <= 0 else bound
        yield gamma, bound
        bound = succ(gamma)


def first_children(kappa, lb, k):
    out = []
    for gamma, _ in child_stream(kappa, lb):
        out.append(gamma)
        if len(out) == k:
            break
    return out


def descend(alpha, beta):
    """Each step: the first child >= beta.  Returns (seq, child indices,
    parent kinds) down to beta."""
    seq, idxs, kinds = [alpha], [], []
    lb = Z
    while cmp_o(seq[-1], beta) != 0:
        kinds.append("lim" if seq[-1][-1] != Z else "succ")
        for i, (gamma, b) in enumerate(child_stream(seq[-1], lb)):
            if cmp_o(gamma, beta) >= 0:
                seq.append(gamma)
                idxs.append(i)
                lb = b
                break
    return seq, idxs, kinds


def enumseq(alpha, beta):
    return descend(alpha, beta)[0]


def copylen(alpha, beta):
    """Sum of child indices over the maximal trailing run of limit parents."""
    _, idxs, kinds = descend(alpha, beta)
    total = 0
    for idx, kind in zip(idxs, kinds):
        total = total + idx if kind == "lim" else 0
    return total


W = wpow(ONE)
W2 = wpow(nat(2))
W3 = wpow(nat(3))
TOP_MIXED = add(add(W2, wpow(ONE, 3)), nat(2))  # w^2+w*3+2


def show_children(label, kappa, lb, k):
    print(f"children({label}) = {[render(c) for c in first_children(kappa, lb, k)]}")


def show_seq(alpha, beta):
    seq = enumseq(alpha, beta)
    print(f"enumseq({render(alpha)} -> {render(beta)}) = {[render(x) for x in seq]}"
          f"   copylen = {copylen(alpha, beta)}")


def main():
    print("== child lists ==")
    show_children("<5>", nat(5), Z, 10)
    show_children("<w*2>", wpow(ONE, 2), Z, 6)
    show_children("<w*2, w>", W, Z, 6)
    show_children("<w^2>", W2, Z, 5)
    show_children("<w^2, w*2>", wpow(ONE, 2), succ(W), 5)
    show_children("<w^3>", W3, Z, 5)
    show_children("<w^2+w*3+2>", TOP_MIXED, Z, 5)

    print("== enumseq / copylen in alpha = w^2 ==")
    for beta in [Z, nat(3), W, succ(W), add(W, nat(5)),
                 wpow(ONE, 2), succ(wpow(ONE, 2)), wpow(ONE, 3), add(wpow(ONE, 3), nat(2))]:
        show_seq(W2, beta)

    print("== enumseq / copylen in alpha = w^2+w*3+2 ==")
    for beta in [add(add(W2, wpow(ONE, 3)), nat(1)), add(W2, wpow(ONE, 3)),
                 add(add(W2, wpow(ONE, 2)), nat(7)), add(W2, nat(1)), W2,
                 wpow(ONE, 4), nat(3)]:
        show_seq(TOP_MIXED, beta)

    print("== enumseq / copylen in alpha = w^3 ==")
    for beta in [W2, succ(W2), add(W2, W), add(wpow(nat(2), 2), add(wpow(ONE, 5), nat(3))),
                 wpow(nat(2), 2)]:
        show_seq(W3, beta)


if __name__ == "__main__":
    main()

"""Tree decompositions of runs and the branch score.

These are proof devices: they never feed the decision procedure, but they
give an independent check that a run with many c's has a high-scoring
branch, which is what the order reduction relies on.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import UnmatchedPush
from .machine import RunTree


@dataclass(frozen=True)
class DTree:
    label: object = None  # None is ε
    children: tuple = ()

    def count(self, c) -> int:
        return (self.label == c) + sum(t.count(c) for t in self.children)

    def size(self) -> int:
        return 1 + sum(t.size() for t in self.children)

    def max_degree(self) -> int:
        return max([len(self.children)] + [t.max_degree() for t in self.children])

    def well_labelled(self) -> bool:
        if self.label is not None and len(self.children) != 1:
            return False
        return all(t.well_labelled() for t in self.children)


def treedecomp(run: RunTree, order: int) -> DTree:
    """Decompose an accepting run of a normalized order-`order` machine.

    At each push_n the run below it is cut at the matching pop_n on every
    branch; the continuations after those pops become siblings of the cut
    push branch under a fresh ε node.
    """

    def is_n(t, kind):
        return t.rule is not None and t.rule.ops[0].kind == kind and t.rule.ops[0].arg == order

    def D(t):
        # returns (tree, cut pop nodes, whether a genuine leaf was reached)
        if t.rule is None:
            return DTree(), [], True
        if is_n(t, "pop"):
            return DTree(), [t], False
        if is_n(t, "push"):
            inner, cuts, leaf = D(t.children[0])
            if leaf or not cuts:
                raise UnmatchedPush(f"push({order}) at control {t.control} has no matching pop on some branch")
            parts, allcuts, anyleaf = [inner], [], False
            for p in cuts:
                sub, c2, l2 = D(p.children[0])
                parts.append(sub)
                allcuts += c2
                anyleaf |= l2
            return DTree(None, tuple(parts)), allcuts, anyleaf
        subs = [D(c) for c in t.children]
        cuts = [p for _, c, _ in subs for p in c]
        leaf = any(l for _, _, l in subs)
        if len(subs) == 1:
            lab = t.output[0] if t.output else None
            return DTree(lab, (subs[0][0],)), cuts, leaf
        return DTree(None, tuple(s for s, _, _ in subs)), cuts, leaf

    tree, _, _ = D(run)
    return tree


def treescore(t: DTree, c) -> int:
    if not t.children:
        return 0
    if len(t.children) == 1:
        return treescore(t.children[0], c) + (t.label == c)
    s = [treescore(x, c) for x in t.children]
    total = sum(s)
    return max(si + (total - si > 0) for si in s)


def score_bound_holds(t: DTree, c, degree: int) -> bool:
    """degree^score >= count, compared exactly."""
    return degree ** treescore(t, c) >= t.count(c)


def all_trees(max_nodes: int, max_degree: int, labels=(None, "c")):
    """Every ordered tree with at most `max_nodes` nodes, out-degree at most
    `max_degree`, where only unary nodes carry labels from `labels`."""
    memo = {}

    def forests(n, k):
        # sequences of exactly k trees with n nodes in total
        key = (n, k)
        if key in memo:
            return memo[key]
        if k == 0:
            res = [()] if n == 0 else []
        else:
            res = []
            for m in range(1, n - k + 2):
                for t in trees(m):
                    for rest in forests(n - m, k - 1):
                        res.append((t,) + rest)
        memo[key] = res
        return res

    tmemo = {}

    def trees(n):
        if n in tmemo:
            return tmemo[n]
        res = []
        if n == 1:
            res.append(DTree())
        else:
            for (kid,) in forests(n - 1, 1):
                for lab in labels:
                    res.append(DTree(lab, (kid,)))
            for k in range(2, max_degree + 1):
                for f in forests(n - 1, k):
                    res.append(DTree(None, f))
        tmemo[n] = res
        return res

    return itertools.chain.from_iterable(trees(n) for n in range(1, max_nodes + 1))

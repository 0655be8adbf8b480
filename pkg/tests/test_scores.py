import itertools

import pytest

from hopda.errors import UnmatchedPush
from hopda.machine import RunTree, enumerate_runs
from hopda.scores import DTree, all_trees, score_bound_holds, treedecomp, treescore
from hopda.textio import parse_machine_text
from conftest import load

L = DTree()


def U(t, label=None):
    return DTree(label, (t,))


def B(*ts):
    return DTree(None, ts)


def chain(n, label="c"):
    t = L
    for _ in range(n):
        t = U(t, label)
    return t


FIG = """order 1; branches 1; controls q1 q2 q3 q4 q5 q6 q7 q8 q9 f; initial q1 a; final f;
outputs c; stackalpha a; accept empty;
rule q1, a -> eps, rew(a), q2;
rule q2, a -> eps, push(1), q3;
rule q3, a -> eps, rew(a), q4;
rule q4, a -> eps, push(1), q5;
rule q5, a -> eps, rew(a), q6;
rule q6, a -> eps, pop(1), q7;
rule q7, a -> eps, pop(1), q8;
rule q8, a -> eps, rew(a), q9;
rule q9, a -> eps, pop(1), f;
"""

TWO_POPS = """order 1; branches 2; controls q p x y x2 y2 f; initial q a; final f;
rank q=2 p=2 x=1 y=1 x2=1 y2=1 f=1; outputs c; stackalpha a; accept empty;
rule q, a -> eps, push(1), p;
rule p, a -> eps, rew(a), x y;
rule x, a -> eps, pop(1), x2;
rule y, a -> eps, pop(1), y2;
rule x2, a -> eps, pop(1), f;
rule y2, a -> eps, pop(1), f;
"""


def only_run(text):
    M = parse_machine_text(text, normalize=False)
    (run,) = enumerate_runs(M, 30)
    return M, run


def test_scores_of_small_trees():
    assert treescore(L, "c") == 0
    assert treescore(chain(3), "c") == 3
    assert treescore(B(chain(3), chain(2)), "c") == 4
    assert treescore(B(chain(3), L), "c") == 3


def test_chain_decomposition():
    M = parse_machine_text("""order 1; branches 1; controls q f; initial q a; final f; outputs c;
        stackalpha a; accept empty; rule q, a -> c, rew(a), q; rule q, a -> eps, pop(1), f;""",
                           normalize=False)
    run = next(r for r in enumerate_runs(M, 5) if r.parikh(("c",)) == (3,))
    assert treedecomp(run, 1) == chain(3, "c")


def test_figure_shape():
    _, run = only_run(FIG)
    assert treedecomp(run, 1) == U(B(U(B(U(L), L)), U(L)))


def test_two_pops_give_three_children():
    _, run = only_run(TWO_POPS)
    t = treedecomp(run, 1)
    assert len(t.children) == 3
    assert t == B(B(L, L), L, L)


def test_unmatched_push():
    run = RunTree("q", None, rule=None)
    M = parse_machine_text(TWO_POPS, normalize=False)
    push_rule = M.rules_from["q"][0]
    bad = RunTree("q", None, push_rule, (), (run,))
    with pytest.raises(UnmatchedPush):
        treedecomp(bad, 1)


@pytest.mark.parametrize("name", ["anbn", "fork", "exp2", "motivating", "mixed"])
def test_decomposition_of_corpus_runs(name):
    M = load(name)
    k = M.branches
    for run in enumerate_runs(M, 14, limit=100):
        t = treedecomp(run, M.order)
        assert t.well_labelled()
        assert t.max_degree() <= k + 1
        for i, c in enumerate(M.outputs):
            assert t.count(c) == run.parikh(M.outputs)[i]
            assert score_bound_holds(t, c, k + 1)


def subtrees(t):
    yield t
    for x in t.children:
        yield from subtrees(x)


def test_subtree_monotonicity():
    for t in all_trees(7, 3):
        s = treescore(t, "c")
        assert all(treescore(x, "c") <= s for x in subtrees(t))


def test_all_trees_counts():
    # unlabelled ordered trees with out-degree <= 2: Motzkin numbers
    sizes = [sum(1 for t in all_trees(n, 2, labels=(None,)) if t.size() == n) for n in range(1, 8)]
    assert sizes == [1, 1, 2, 4, 9, 21, 51]
    assert all(t.well_labelled() for t in all_trees(6, 3))


def test_score_lemma_small():
    for t in itertools.islice(all_trees(7, 3), 5000):
        assert score_bound_holds(t, "c", 3)

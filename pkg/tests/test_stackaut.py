import random

import pytest
from hypothesis import given

from hopda.errors import AlphabetMismatch, OrderMismatch
from hopda.hostack import Bracket, Stack, linearize_stack, parse_stack
from hopda.randgen import random_automaton, random_stack
from hopda.stackaut import (ConfigSet, combine, complement, format_automaton, from_table, parse_automaton_block,
                            run, single_outer_filter, stack_alphabet, strip_order, trivial)
from strategies import stacks

CH = ("a", "b")


def parity_b(order):
    alpha = stack_alphabet(order, CH)
    trans = {}
    for s in ("even", "odd"):
        for x in alpha:
            trans[(s, x)] = ({"even": "odd", "odd": "even"}[s] if x == "b" else s)
    return from_table(order, alpha, ["even", "odd"], "even", ["odd"], trans)


def count_b(s):
    if isinstance(s, Stack):
        return sum(count_b(e) for e in s.items)
    return s == "b"


def fold_oracle(A, s):
    # reversed-word fold, written independently of Body.read
    state = A.body.init
    for x in list(linearize_stack(s))[::-1]:
        state = A.body.delta[x][state]
    return state in A.finals


def test_trivial_automata():
    rng = random.Random(0)
    yes, no = trivial(2, CH), trivial(2, CH, accept=False)
    for _ in range(50):
        s = random_stack(rng, 2, CH)
        assert run(yes, s) and not run(no, s)


def test_parity_example_and_oracle():
    A = parity_b(2)
    assert run(A, parse_stack("[2 [1 a b] [1 b]]")) is False
    assert run(A, parse_stack("[2 [1 a b] [1 a]]")) is True
    rng = random.Random(1)
    for _ in range(200):
        s = random_stack(rng, 2, CH)
        assert run(A, s) == (count_b(s) % 2 == 1) == fold_oracle(A, s)


def test_order_mismatch():
    with pytest.raises(OrderMismatch):
        run(parity_b(2), parse_stack("[1 a]"))


def test_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        combine("and", parity_b(1), trivial(1, ("a",)))


@pytest.mark.parametrize("order", [1, 2, 3])
def test_boolean_laws(order):
    rng = random.Random(order)
    A = random_automaton(rng, order, CH, 3)
    B = random_automaton(rng, order, CH, 3)
    both, either = combine("and", A, B), combine("or", A, B)
    for _ in range(200):
        s = random_stack(rng, order, CH)
        assert not run(combine("and", A, complement(A)), s)
        assert run(combine("or", A, complement(A)), s)
        assert run(both, s) == (run(A, s) and run(B, s))
        assert run(either, s) == (run(A, s) or run(B, s))
        assert run(complement(both), s) == run(combine("or", complement(A), complement(B)), s)


@given(stacks(2, CH))
def test_complement_flips(s):
    A = random_automaton(random.Random(7), 2, CH, 4)
    assert run(complement(A), s) != run(A, s)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_single_outer_filter(m):
    F = single_outer_filter(m, CH)
    rng = random.Random(m)
    for _ in range(300):
        s = random_stack(rng, m, CH, 3)
        assert run(F, s) == (len(s.items) == 1)


def test_single_outer_examples():
    F = single_outer_filter(2, CH)
    assert run(F, parse_stack("[2 [1 a]]"))
    assert not run(F, parse_stack("[2 [1 a] [1 b]]"))
    assert not run(F, parse_stack("[2]"))


def test_strip_order_all():
    B = strip_order(combine("and", single_outer_filter(2, CH), trivial(2, CH)))
    rng = random.Random(3)
    for _ in range(100):
        assert run(B, random_stack(rng, 1, CH))


def test_strip_order_exact_stack():
    # accepts exactly [2 [1 a]]: reading right to left: ]1 a [1
    alpha = stack_alphabet(2, CH)
    path = {("s0", Bracket(False, 1)): "s1", ("s1", "a"): "s2", ("s2", Bracket(True, 1)): "s3"}
    A = from_table(2, alpha, ["s0", "s1", "s2", "s3"], "s0", ["s3"], path, default="sink")
    B = strip_order(A)
    assert run(B, parse_stack("[1 a]"))
    for t in ["[1]", "[1 a a]", "[1 b]", "[1 a b]"]:
        assert not run(B, parse_stack(t))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_strip_order_definitional(m):
    rng = random.Random(10 + m)
    A = random_automaton(rng, m, CH, 4)
    B = strip_order(A)
    for _ in range(500):
        u = random_stack(rng, m - 1, CH)
        assert run(B, u) == run(A, Stack(m, (u,)))


def test_configset_membership():
    A = parity_b(1)
    C = ConfigSet(A.body, {"p": A.finals, "q": set()})
    assert C.accepts("p", parse_stack("[1 b]"))
    assert not C.accepts("q", parse_stack("[1 b]"))
    assert not C.accepts("r", parse_stack("[1 b]"))


def test_text_block_roundtrip():
    A = parity_b(2)
    B = parse_automaton_block(format_automaton(A), 2, CH)
    rng = random.Random(5)
    for _ in range(100):
        s = random_stack(rng, 2, CH)
        assert run(A, s) == run(B, s)


def test_text_block_default():
    A = parse_automaton_block("states s0 s1 sink; init s0; finals s1; delta s0 a -> s1; default -> sink;", 1, CH)
    assert run(A, parse_stack("[1 a]"))
    assert not run(A, parse_stack("[1 a a]"))

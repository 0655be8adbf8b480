import pytest
from hypothesis import given
from hypothesis import strategies as st

from hopda.errors import EmptyAlongSpine, OrderMismatch, ParseError
from hopda.hostack import (CLOSE, OPEN, Stack, apply_op, delinearize, format_stack, initial_stack,
                           linearize_stack, op_defined, order_of, parse_stack, pop, push, rew, top,
                           top_char, toptest)
from strategies import live_stacks, stacks

S = parse_stack


def test_top_examples():
    assert top(0, S("[2 [1 a b] [1 b]]")) == "a"
    s1, s2 = S("[1 a]"), S("[1 b b]")
    assert top(1, Stack(2, (s1, s2))) == s1
    with pytest.raises(EmptyAlongSpine):
        top(0, S("[2 [1] [1 b]]"))


def test_top_order_bounds():
    with pytest.raises(OrderMismatch):
        top(2, S("[2 [1 a]]"))


def test_apply_op_examples():
    assert apply_op(push(2), S("[2 [1 a b]]")) == S("[2 [1 a b] [1 a b]]")
    assert apply_op(rew("b"), S("[2 [1 a b] [1 a b]]")) == S("[2 [1 b b] [1 a b]]")
    with pytest.raises(EmptyAlongSpine):
        apply_op(pop(1), S("[2 [1] [1 b]]"))


def test_pop_outermost_gives_empty():
    assert apply_op(pop(2), S("[2 [1 a]]")) == S("[2]")


def test_push1_duplicates_character():
    assert apply_op(push(1), S("[2 [1 a b] [1 c]]")) == S("[2 [1 a a b] [1 c]]")


def test_order0_rew():
    assert apply_op(rew("b"), "a") == "b"


def test_toptest():
    s = S("[1 a b]")
    assert apply_op(toptest("a"), s) is s
    assert not op_defined(toptest("b"), s)


def test_linearize_examples():
    s = S("[3 [2 [1 a b] [1 b]] [2 [1 b]]]")
    want = [OPEN(2), OPEN(1), "a", "b", CLOSE(1), OPEN(1), "b", CLOSE(1), CLOSE(2),
            OPEN(2), OPEN(1), "b", CLOSE(1), CLOSE(2)]
    assert linearize_stack(s) == want
    assert " ".join(map(str, want)) == "[2 [1 a b ]1 [1 b ]1 ]2 [2 [1 b ]1 ]2"
    assert linearize_stack(S("[1 a]")) == ["a"]
    assert linearize_stack(S("[2]")) == []


def test_parse_format_roundtrip_text():
    for t in ["[1]", "[2 [1 a] [1]]", "[3 [2] [2 [1 x y]]]", "a"]:
        assert format_stack(parse_stack(t)) == t


@pytest.mark.parametrize("bad", ["[2 a]", "[1 [1 a]]", "[1 a", "]", "[2 [1 a]] b", ""])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_stack(bad)


def test_initial_stack():
    assert initial_stack(3, "z") == S("[3 [2 [1 z]]]")
    assert initial_stack(0, "z") == "z"


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), live_stacks(n), st.integers(1, n))))
def test_push_pop_inverse(args):
    n, s, l = args
    assert apply_op(pop(l), apply_op(push(l), s)) == s


@given(st.integers(1, 3).flatmap(lambda n: live_stacks(n)), st.sampled_from("abc"))
def test_rew_top(s, a):
    assert top_char(apply_op(rew(a), s)) == a


@given(st.integers(1, 3).flatmap(lambda n: live_stacks(n)), st.sampled_from("abc"))
def test_rew_changes_only_top_letter(s, a):
    ls, lt = linearize_stack(s), linearize_stack(apply_op(rew(a), s))
    i = next(i for i, x in enumerate(ls) if isinstance(x, str))
    assert lt[:i] == ls[:i] and lt[i + 1:] == ls[i + 1:] and lt[i] == a


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), stacks(n))))
def test_linearization_roundtrip(args):
    n, s = args
    assert delinearize(n, linearize_stack(s)) == s
    assert parse_stack(format_stack(s)) == s


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(stacks(n), st.integers(1, n))))
def test_ops_preserve_order(args):
    s, l = args
    for op in (push(l), pop(l), rew("a")):
        if op_defined(op, s):
            assert order_of(apply_op(op, s)) == order_of(s)

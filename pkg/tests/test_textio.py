import pytest

from hopda.errors import ParseError, RankViolation, UnknownSymbol
from hopda.machine import enumerate_parikh
from hopda.textio import (format_machine, format_nfa, format_tree, parse_machine_text, parse_nfa_text,
                          parse_tree)
from conftest import load

HEADER = "order 1; branches 1; controls q f; initial q a; final f; outputs c1; stackalpha a b;\n"


@pytest.mark.parametrize("name,order,controls,rules", [
    ("exp2", 2, 3, 7), ("motivating", 2, 4, 8), ("mixed", 2, 4, 8), ("fork", 1, 5, 8)])
def test_corpus_golden_counts(name, order, controls, rules):
    M = load(name, normalize=False)
    assert (M.order, len(M.controls), len(M.rules)) == (order, controls, rules)


@pytest.mark.parametrize("name", ["exp2", "motivating", "fork", "loop0"])
def test_machine_roundtrip(name):
    M = load(name)
    M2 = parse_machine_text(format_machine(M))
    assert enumerate_parikh(M2, 10, 4) == enumerate_parikh(M, 10, 4)
    assert format_machine(M2) == format_machine(parse_machine_text(format_machine(M2)))


def test_machine_with_test_block():
    text = HEADER + """
    rule q, a, test T -> c1, pop(1), f;
    test T = { states s0 s1 sink; init s0; finals s1; delta s0 a -> s1; default -> sink; };
    """
    M = parse_machine_text(text, normalize=False)
    assert M.rules[0].tests == ("T",)
    assert enumerate_parikh(M, 3, 3) == [(1,)]
    M2 = parse_machine_text(format_machine(M), normalize=False)
    assert enumerate_parikh(M2, 3, 3) == [(1,)]


def test_output_sets_and_eps():
    M = parse_machine_text(HEADER + "rule q, a -> {c1 eps c1}, pop(1), f;", normalize=False)
    assert M.rules[0].output == ("c1", "c1")
    M = parse_machine_text(HEADER + "rule q, a -> eps, pop(1), f;", normalize=False)
    assert M.rules[0].output == ()


def test_rank_violation():
    text = ("order 1; branches 2; controls q x y f; initial q a; final f; rank q=1 x=1 y=1; "
            "stackalpha a; rule q, a -> eps, rew(a), x y;")
    with pytest.raises(RankViolation, match="rule q, a"):
        parse_machine_text(text)


def test_dangling_test():
    with pytest.raises(UnknownSymbol, match="NOPE"):
        parse_machine_text(HEADER + "rule q, a, test NOPE -> eps, pop(1), f;")


@pytest.mark.parametrize("text,line", [
    (HEADER + "rule q, a -> eps, jump(1), f;", 2),
    (HEADER + "\n\nrule q a -> eps;", 4),
    (HEADER + "bogus 3;", 2),
    (HEADER + "rule q, a -> eps, pop(1), f", 2),
])
def test_parse_errors_have_positions(text, line):
    with pytest.raises(ParseError) as e:
        parse_machine_text(text)
    assert e.value.line == line


def test_comments_ignored():
    M = parse_machine_text(HEADER + "# a comment; with a semicolon\nrule q, a -> c1, pop(1), f; # trailing")
    assert enumerate_parikh(M, 3, 3) == [(1,)]


def test_nfa_roundtrip():
    text = "initial p; final q; trans p c1 p; trans p eps q; trans q c2 q;"
    N = parse_nfa_text(text)
    assert set(N.alphabet) == {"c1", "c2"}
    N2 = parse_nfa_text(format_nfa(N))
    assert set(N2.transitions) == set(N.transitions)


def test_tree_roundtrip():
    t = parse_tree("(eps (c (c (eps))) (eps))")
    assert format_tree(t) == "(eps (c (c (eps))) (eps))"
    with pytest.raises(ParseError):
        parse_tree("(eps (c)")

import random

import pytest

from hopda.errors import SaturationBudgetExceeded
from hopda.hostack import EmptyAlongSpine, apply_op, parse_stack, pop, top_char
from hopda.machine import enumerate_parikh
from hopda.randgen import random_alternating, random_automaton, random_live_stack, random_stack
from hopda.saturate import (AlternatingSystem, build_alternating, canpop_family, empty_configset, member_oracle,
                            multisets, prestar, target_set)
from hopda.stackaut import ConfigSet
from hopda.textio import parse_machine_text
from conftest import load

CHAIN = """order 2; branches 1; controls q r f; initial q a; final f; outputs c1; stackalpha a;
rule q, a -> c1, rew(a), r;
rule r, a -> eps, pop(2), f;
"""


def random_case(seed):
    rng = random.Random(seed)
    order = rng.choice([1, 2])
    S = random_alternating(rng, order, n_controls=3, n_rules=rng.randint(4, 9), n_alt=rng.randint(0, 2))
    aut = random_automaton(rng, order, S.alphabet, n_states=rng.randint(2, 3))
    A = ConfigSet(aut.body, {q: (aut.finals if rng.random() < 0.4 else frozenset()) for q in S.controls})
    return rng, S, A


def test_no_rules_is_identity():
    rng = random.Random(1)
    for order in (1, 2):
        S = AlternatingSystem(order, ("p", "q"), ("a", "b"), ())
        aut = random_automaton(rng, order, S.alphabet)
        A = ConfigSet(aut.body, {"p": aut.finals, "q": frozenset()})
        P = prestar(S, A)
        for _ in range(250):
            q, s = rng.choice(S.controls), random_stack(rng, order, S.alphabet, 3)
            assert P.accepts(q, s) == A.accepts(q, s)


def test_single_pop_rule():
    S = AlternatingSystem(1, ("q", "q2"), ("a",), (("q", "a", pop(1), "q2"),))
    A = empty_configset(1, ("a",), ["q2"])
    P = prestar(S, A)
    assert P.accepts("q", parse_stack("[1 a]"))
    assert P.accepts("q2", parse_stack("[1]"))
    assert not P.accepts("q", parse_stack("[1 a a]"))
    assert not P.accepts("q2", parse_stack("[1 a]"))


def test_alternating_rule_needs_all_children():
    S = AlternatingSystem(1, ("q", "x", "y"), ("a",), (("x", "a", pop(1), "x"),),
                          (("q", "a", frozenset({"x", "y"})),))
    A = empty_configset(1, ("a",), ["x"])
    assert not prestar(S, A).accepts("q", parse_stack("[1 a]"))
    A = empty_configset(1, ("a",), ["x", "y"])
    S2 = AlternatingSystem(1, S.controls, S.alphabet, S.rules + (("y", "a", pop(1), "y"),), S.alt_rules)
    assert prestar(S2, A).accepts("q", parse_stack("[1 a]"))


@pytest.mark.parametrize("seed", range(25))
def test_random_against_oracle(seed):
    rng, S, A = random_case(seed)
    P = prestar(S, A)
    for _ in range(40):
        q = rng.choice(S.controls)
        s = random_stack(rng, S.order, S.alphabet, 2)
        yes = member_oracle(S, A, (q, s), 12) == "yes"
        if yes:
            assert P.accepts(q, s)
        elif P.accepts(q, s) and sum(1 for _ in str(s)) < 30:
            assert member_oracle(S, A, (q, s), 20) == "yes"


@pytest.mark.parametrize("seed", range(10))
def test_prestar_is_fixpoint_and_contains_base(seed):
    rng, S, A = random_case(seed)
    P = prestar(S, A)
    ordinary, alt = S.index()
    for _ in range(60):
        q = rng.choice(S.controls)
        s = random_stack(rng, S.order, S.alphabet, 3)
        if A.accepts(q, s):
            assert P.accepts(q, s)
        try:
            a = top_char(s)
        except EmptyAlongSpine:
            continue
        for op, t in ordinary.get((q, a), ()):
            try:
                s2 = apply_op(op, s)
            except EmptyAlongSpine:
                continue
            if P.accepts(t, s2):
                assert P.accepts(q, s)
        for ts in alt.get((q, a), ()):
            if all(P.accepts(t, s) for t in ts):
                assert P.accepts(q, s)


def test_member_oracle_basics():
    A = empty_configset(1, ("a",), ["q"])
    S = AlternatingSystem(1, ("q", "r"), ("a",), ())
    assert member_oracle(S, A, ("q", parse_stack("[1]")), 0) == "yes"
    for b in (0, 5, 20):
        assert member_oracle(S, A, ("r", parse_stack("[1 a]")), b) == "unknown"


def test_saturation_budget():
    with pytest.raises(SaturationBudgetExceeded):
        canpop_family(load("exp2"), budget=5)


def test_multisets():
    assert list(multisets(("x", "y"), 2)) == [("x",), ("y",), ("x", "x"), ("x", "y"), ("y", "y")]


def test_canpop_chain():
    M = parse_machine_text(CHAIN)
    fam = canpop_family(M)
    u = parse_stack("[1 a]")
    assert fam.exact("q", ("f",), ("c1",)).accepts(u)
    assert not fam.exact("q", ("f",), ()).accepts(u)
    assert fam.atleast("q", ("f",), ()).accepts(u)
    assert fam.exact("r", ("f",), ()).accepts(u)
    assert not fam.exact("r", ("f",), ("c1",)).accepts(u)
    # the positive is confirmed by the bounded oracle
    S = build_alternating(M)
    key = ("q", ("c1",), ("f",))
    assert member_oracle(S, target_set(M, key), (key, parse_stack("[2 [1 a]]")), 5) == "yes"


def test_canpop_never_emptied():
    M = parse_machine_text("""order 2; branches 1; controls q r f; initial q a; final f; outputs c1;
        stackalpha a; rule q, a -> c1, push(2), q; rule r, a -> eps, pop(2), f;""", normalize=False)
    fam = canpop_family(M)
    assert all(fam.atleast("q", ts, O).is_empty() for ts in [("f",)] for O in [(), ("c1",)])


def test_canpop_rank_violation_absent():
    M = load("fork")
    fam = canpop_family(M)
    assert fam.final_set("x", ("f", "f"), ()) is None
    assert fam.atleast("x", ("f", "f"), ()) is None
    assert fam.atleast("q0", ("f", "f"), ()) is not None


@pytest.mark.parametrize("name", ["anbn", "fork", "star_union", "exp2", "mixed"])
def test_canpop_exact_sets_disjoint(name):
    M = load(name)
    fam = canpop_family(M)
    rng = random.Random(0)
    subsets = [(), ("c1",), ("c2",), ("c1", "c2")]
    subsets = [O for O in subsets if set(O) <= set(M.outputs)]
    for q, _, ts in fam.keys():
        auts = {O: fam.exact(q, ts, O) for O in subsets}
        for _ in range(30):
            u = random_stack(rng, M.order - 1, M.stack_alphabet, 4)
            for O in subsets:
                for O2 in subsets:
                    if set(O) < set(O2):
                        assert not (auts[O].accepts(u) and auts[O2].accepts(u))


def test_canpop_sound_on_corpus():
    # positives checked against a direct run search
    for name in ("anbn", "fork", "exp2"):
        M = load(name)
        fam = canpop_family(M)
        S = build_alternating(M)
        rng = random.Random(2)
        found = 0
        for key in fam.keys():
            q, O, ts = key
            A = fam.atleast(q, ts, O)
            for _ in range(15):
                u = random_live_stack(rng, M.order - 1, M.stack_alphabet, 3)
                if A.accepts(u):
                    from hopda.hostack import Stack
                    s = Stack(M.order, (u,))
                    assert member_oracle(S, target_set(M, key), (key, s), 40) == "yes"
                    found += 1
        assert found > 0


def test_exp2_canpop_matches_enumeration():
    M = load("exp2")
    assert enumerate_parikh(M, 20, 5)
    assert canpop_family(M).keys()

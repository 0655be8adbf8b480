"""Random instances for property tests and experiment scripts.

Every generator takes an explicit `random.Random` so runs are reproducible.
"""
from __future__ import annotations

import random

from .base0 import Nfa
from .hostack import Stack, pop, push, rew
from .machine import Machine, Rule, validate_and_normalize
from .stackaut import Body, StackAutomaton, stack_alphabet


def random_stack(rng: random.Random, order: int, chars, max_len: int = 3, min_len: int = 0):
    if order == 0:
        return rng.choice(list(chars))
    k = rng.randint(min_len, max_len)
    return Stack(order, tuple(random_stack(rng, order - 1, chars, max_len, min_len) for _ in range(k)))


def random_live_stack(rng, order, chars, max_len=3):
    """A stack whose spine is non-empty down to the top character."""
    return random_stack(rng, order, chars, max_len, min_len=1)


def random_automaton(rng: random.Random, order: int, chars, n_states: int = 3, p_final=0.5) -> StackAutomaton:
    alpha = stack_alphabet(order, chars)
    delta = {x: tuple(rng.randrange(n_states) for _ in range(n_states)) for x in alpha}
    body = Body(order, alpha, n_states, 0, delta)
    fin = {s for s in range(n_states) if rng.random() < p_final}
    return StackAutomaton(body, fin)


def random_nfa(rng: random.Random, n_states=None, n_chars=None, density=0.3) -> Nfa:
    n = n_states or rng.randint(1, 6)
    k = n_chars or rng.randint(1, 3)
    chars = tuple(f"c{i + 1}" for i in range(k))
    states = tuple(range(n))
    trans = set()
    for p in states:
        for q in states:
            for c in chars + (None,):
                if rng.random() < density / (2 if c is None else 1):
                    trans.add((p, c, q))
    finals = frozenset(s for s in states if rng.random() < 0.4) or frozenset({n - 1})
    return Nfa(states, chars, tuple(sorted(trans, key=lambda t: (t[0], str(t[1]), t[2]))), 0, finals)


def _ops_for(order):
    ops = []
    for l in range(1, order + 1):
        ops += [push(l), pop(l)]
    return ops


def random_machine(rng: random.Random, order: int, n_controls=3, gamma=("a", "b"), chars=("c1", "c2"),
                   n_rules=7, branches=1, with_test=False, normalize=True, acceptance=None) -> Machine:
    """A random machine with control acceptance (normalized on request)."""
    controls = tuple(f"q{i}" for i in range(n_controls))
    rank = {q: rng.randint(1, branches) for q in controls}
    rank[controls[0]] = branches
    rules = set()
    tests = {}
    if with_test:
        tests["T"] = random_automaton(rng, order, gamma, n_states=rng.randint(2, 3))
    ops = _ops_for(order)
    for _ in range(n_rules):
        q = rng.choice(controls)
        a = rng.choice(gamma)
        o = rng.choice(chars + ((),) * 2)
        o = (o,) if o else ()
        if rank[q] >= 2 and rng.random() < 0.25:
            t1 = rng.choice([t for t in controls if rank[t] < rank[q]] or [controls[-1]])
            rest = [t for t in controls if rank[t] <= rank[q] - rank[t1]]
            if not rest:
                continue
            t2 = rng.choice(rest)
            rules.add(Rule(q, a, (), (rew(a),), (t1, t2)))
            continue
        op = rew(rng.choice(gamma)) if rng.random() < 0.4 or not ops else rng.choice(ops)
        if op.kind in ("push", "pop") and op.arg == order:
            o = ()
        tgt = rng.choice([t for t in controls if rank[t] <= rank[q]])
        tst = ("T",) if with_test and rng.random() < 0.5 else ()
        rules.add(Rule(q, a, o, (op,), (tgt,), tst))
    if with_test and not any(r.tests for r in rules):
        r = rng.choice(sorted(rules, key=lambda r: r.sort_key()))
        rules.discard(r)
        rules.add(Rule(r.source, r.guard, r.output, r.ops, r.targets, ("T",)))
    finals = frozenset({controls[-1]})
    M = Machine(order=order, branches=branches, controls=controls, outputs=tuple(chars),
                stack_alphabet=tuple(gamma), initial=controls[0], initial_char=gamma[0],
                finals=finals, rank=rank, rules=tuple(sorted(rules, key=lambda r: r.sort_key())),
                tests=tests,
                acceptance=acceptance or ("control" if order == 0 else rng.choice(["control", "empty"])))
    return validate_and_normalize(M) if normalize else M


def random_order0_machine(rng: random.Random, branches=2, n_controls=3, gamma=("a", "b"), chars=("c1", "c2"),
                          n_rules=6) -> Machine:
    return random_machine(rng, 0, n_controls=n_controls, gamma=gamma, chars=chars, n_rules=n_rules,
                          branches=branches)


def random_alternating(rng: random.Random, order: int, n_controls=3, gamma=("a", "b"), n_rules=5, n_alt=1):
    from .saturate import AlternatingSystem
    controls = tuple(f"p{i}" for i in range(n_controls))
    ops = [rew(a) for a in gamma] + _ops_for(order)
    rules = set()
    for _ in range(n_rules):
        rules.add((rng.choice(controls), rng.choice(gamma), rng.choice(ops), rng.choice(controls)))
    alts = set()
    for _ in range(n_alt):
        k = rng.randint(2, min(3, n_controls))
        alts.add((rng.choice(controls), rng.choice(gamma), frozenset(rng.sample(controls, k))))
    return AlternatingSystem(order, controls, tuple(gamma), tuple(rules), tuple(alts))

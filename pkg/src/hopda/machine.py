"""Order-n, k-branch pushdown automata with optional regular tests.

A `Machine` is the single model behind plain HOPDA (k = 1, no tests),
branching HOPDA, and branching HOPDA with tests. Controls, characters and
test names are opaque hashables. A rule's output is a tuple of characters
(empty for the silent symbol) and its operation part is a tuple of `Op`;
after `validate_and_normalize` both have length at most one.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property

from .canon import skey
from .errors import BudgetExceeded, EmptyAlongSpine, RankViolation, UnknownSymbol
from .hostack import Op, apply_op, initial_stack, rew, top_char

EPS = "eps"


@dataclass(frozen=True)
class Rule:
    source: object
    guard: object
    output: tuple = ()
    ops: tuple = ()
    targets: tuple = ()
    tests: tuple = ()

    @property
    def op(self) -> Op:
        if len(self.ops) != 1:
            raise ValueError(f"rule has {len(self.ops)} operations, expected one")
        return self.ops[0]

    @property
    def out(self):
        return self.output[0] if self.output else None

    def sort_key(self):
        return (skey(self.source), skey(self.guard), skey(self.tests), skey(self.output),
                tuple(o.sort_key() for o in self.ops), skey(self.targets))

    def __str__(self):
        from .stackaut import key_text
        t = f", test {' & '.join(map(str, self.tests))}" if self.tests else ""
        o = EPS if not self.output else (str(self.output[0]) if len(self.output) == 1
                                          else "{" + " ".join(map(str, self.output)) + "}")
        ops = "+".join(str(op) for op in self.ops) or "rew(" + str(self.guard) + ")"
        tg = " ".join(key_text(q) for q in self.targets)
        return f"rule {key_text(self.source)}, {self.guard}{t} -> {o}, {ops}, {tg};"


@dataclass
class Machine:
    order: int
    branches: int
    controls: tuple
    outputs: tuple
    stack_alphabet: tuple
    initial: object
    initial_char: object
    finals: frozenset
    rank: dict
    rules: tuple
    tests: dict = field(default_factory=dict)
    acceptance: str = "control"

    @cached_property
    def rules_from(self) -> dict:
        idx = {q: [] for q in self.controls}
        for r in self.rules:
            idx.setdefault(r.source, []).append(r)
        return idx

    @cached_property
    def rules_at(self) -> dict:
        idx = {}
        for r in self.rules:
            idx.setdefault((r.source, r.guard), []).append(r)
        return idx

    def initial_config(self):
        return (self.initial, initial_stack(self.order, self.initial_char))

    def size(self) -> dict:
        return {"order": self.order, "controls": len(self.controls), "rules": len(self.rules)}

    def with_(self, **kw) -> "Machine":
        return replace(self, **kw)

    def is_normal(self) -> bool:
        return (self.acceptance == ("control" if self.order == 0 else "empty")
                and len(self.finals) == 1 and all(_rule_normal(r, self.order) for r in self.rules))


def _rule_normal(r: Rule, n: int) -> bool:
    if len(r.output) > 1 or len(r.ops) != 1:
        return False
    op = r.ops[0]
    if op.kind == "toptest":
        return False
    if len(r.targets) > 1 and (op != rew(r.guard) or r.output):
        return False
    if op.kind in ("push", "pop") and op.arg == n and r.output:
        return False
    return True


# validation

def validate(M: Machine) -> None:
    ctl = set(M.controls)
    gam = set(M.stack_alphabet)
    if M.order < 0 or M.branches < 1:
        raise ValueError("order must be >= 0 and branches >= 1")
    for q, s in [(M.initial, "initial control")]:
        if q not in ctl:
            raise UnknownSymbol(f"{s} {q!r} is not a declared control")
    if M.initial_char not in gam:
        raise UnknownSymbol(f"initial character {M.initial_char!r} not in the stack alphabet")
    for f in M.finals:
        if f not in ctl:
            raise UnknownSymbol(f"final {f!r} is not a declared control")
    for q in M.controls:
        r = M.rank.get(q, 1)
        if not 1 <= r <= M.branches:
            raise RankViolation(f"rank({q}) = {r} outside 1..{M.branches}")
    outs = set(M.outputs)
    for r in M.rules:
        if r.source not in ctl:
            raise UnknownSymbol(f"{r}: unknown control {r.source!r}")
        for q in r.targets:
            if q not in ctl:
                raise UnknownSymbol(f"{r}: unknown control {q!r}")
        if r.guard not in gam:
            raise UnknownSymbol(f"{r}: unknown stack character {r.guard!r}")
        for o in r.output:
            if o not in outs:
                raise UnknownSymbol(f"{r}: unknown output {o!r}")
        for t in r.tests:
            if t not in M.tests:
                raise UnknownSymbol(f"{r}: unknown test {t!r}")
            if M.tests[t].order != M.order:
                raise UnknownSymbol(f"{r}: test {t!r} has order {M.tests[t].order}, machine has {M.order}")
        for op in r.ops:
            if op.kind in ("rew", "toptest") and op.arg not in gam:
                raise UnknownSymbol(f"{r}: unknown stack character {op.arg!r}")
            if op.kind in ("push", "pop") and not 1 <= op.arg <= M.order:
                raise UnknownSymbol(f"{r}: {op} outside orders 1..{M.order}")
        if not 1 <= len(r.targets) <= M.branches:
            raise RankViolation(f"{r}: {len(r.targets)} targets, branch bound is {M.branches}")
        if M.rank.get(r.source, 1) < sum(M.rank.get(q, 1) for q in r.targets):
            raise RankViolation(f"{r}: rank({r.source}) < sum of target ranks")


# normalization

class _Fresh:
    def __init__(self, taken):
        self.taken = set(taken)
        self.n = 0

    def __call__(self, tag):
        while True:
            self.n += 1
            c = (f"~{tag}", self.n)
            if c not in self.taken:
                self.taken.add(c)
                return c


def validate_and_normalize(M: Machine) -> Machine:
    """Equivalent machine with unique final control, silent push_n/pop_n
    rules, silent stack-preserving branching rules and one output/op per rule.

    Orders >= 1 accept by empty stack at the final control; order 0 accepts
    by control.
    """
    validate(M)
    if M.is_normal():
        return M
    fresh = _Fresh(M.controls)
    rank = dict((q, M.rank.get(q, 1)) for q in M.controls)
    controls = list(M.controls)
    rules = []
    for r in M.rules:
        rules.extend(_expand(r, M, fresh, rank, controls))
    finals = set(M.finals)
    initial = M.initial
    gam = M.stack_alphabet
    n = M.order

    def retarget(rs, pred, new):
        out = []
        for r in rs:
            pos = [i for i, q in enumerate(r.targets) if pred(r, q)]
            for k in range(1, len(pos) + 1):
                for sub in itertools.combinations(pos, k):
                    tg = tuple(new if i in sub else q for i, q in enumerate(r.targets))
                    out.append(replace(r, targets=tg))
        return out

    if n == 0 or M.acceptance == "control":
        extra = []
        if n == 0 and len(finals) == 1:
            final = next(iter(finals))
        else:
            final = fresh("drain" if n else "final")
            controls.append(final)
            rank[final] = 1
            extra = retarget(rules, lambda r, q: q in finals, final)
            if n:
                extra += [Rule(final, a, (), (Op("pop", n),), (final,)) for a in gam]
            if initial in finals:
                # the zero-step run: restart through a fresh initial control
                init = fresh("init")
                controls.append(init)
                rank[init] = rank[initial]
                extra += [replace(r, source=init) for r in rules + extra if r.source == initial]
                extra.append(Rule(init, M.initial_char, (), (rew(M.initial_char),), (final,)))
                initial = init
        rules += extra
        finals = {final}
    elif len(finals) > 1:
        final = fresh("final")
        controls.append(final)
        rank[final] = 1
        rules += retarget([r for r in rules if r.ops[0] == Op("pop", n) and len(r.targets) == 1],
                          lambda r, q: q in finals, final)
        finals = {final}
    out = Machine(order=n, branches=M.branches, controls=tuple(controls), outputs=M.outputs,
                  stack_alphabet=gam, initial=initial, initial_char=M.initial_char,
                  finals=frozenset(finals), rank=rank, rules=tuple(_dedup(rules)),
                  tests=dict(M.tests), acceptance="control" if n == 0 else "empty")
    validate(out)
    return out


def _dedup(rules):
    seen, out = set(), []
    for r in rules:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


def _expand(r: Rule, M: Machine, fresh, rank, controls):
    ops = r.ops or (rew(r.guard),)
    r = replace(r, ops=ops)
    if _rule_normal(r, M.order):
        return [r]
    items = [("out", c) for c in r.output]
    items += [("test", op.arg) if op.kind == "toptest" else ("op", op) for op in ops]
    merged = []
    for it in items:
        # an output may ride along with the following operation unless it changes order n
        if (merged and merged[-1][0] == "out" and it[0] == "op"
                and not (it[1].kind in ("push", "pop") and it[1].arg == M.order)):
            merged[-1] = ("outop", (merged[-1][1], it[1]))
        else:
            merged.append(it)
    items = merged
    branching = len(r.targets) > 1
    count = sum(1 for k, _ in items if k != "test") + branching
    if count == 0:
        items.append(("op", None))  # only toptests: keep the stack as is
        count = 1

    def new_mid():
        m = fresh("mid")
        controls.append(m)
        rank[m] = rank.get(r.source, 1)
        return m

    out = []
    src, guard, made = r.source, r.guard, 0
    for kind, x in items:
        if kind == "test":
            if guard is not None and guard != x:
                return []
            guard = x
            continue
        made += 1
        tgt = r.targets if made == count else (new_mid(),)
        for g in ([guard] if guard is not None else list(M.stack_alphabet)):
            if kind == "out":
                op, o = rew(g), (x,)
            elif kind == "outop":
                op, o = x[1], (x[0],)
            else:
                op, o = (x or rew(g)), ()
            out.append(Rule(src, g, o, (op,), tgt, r.tests if made == 1 else ()))
        if kind == "outop":
            x = x[1]
        if kind in ("op", "outop") and x is not None:
            if x.kind == "rew":
                guard = x.arg
            elif x.kind == "pop":
                guard = None
        src = tgt[0]
    if branching:
        made += 1
        for g in ([guard] if guard is not None else list(M.stack_alphabet)):
            out.append(Rule(src, g, (), (rew(g),), r.targets, r.tests if made == 1 else ()))
    return out


def trim(M: Machine) -> Machine:
    """Drop controls that are unreachable from the initial control or from
    which no accepting leaf is reachable (ignoring the stack)."""
    reach = {M.initial}
    todo = [M.initial]
    while todo:
        q = todo.pop()
        for r in M.rules_from.get(q, ()):
            for t in r.targets:
                if t not in reach:
                    reach.add(t)
                    todo.append(t)
    prod = set(M.finals)
    changed = True
    while changed:
        changed = False
        for r in M.rules:
            if r.source not in prod and all(t in prod for t in r.targets):
                prod.add(r.source)
                changed = True
    keep = (reach & prod) | {M.initial} | set(M.finals)
    rules = tuple(r for r in M.rules if r.source in keep and all(t in keep for t in r.targets))
    controls = tuple(q for q in M.controls if q in keep)
    used = {t for r in rules for t in r.tests}
    return M.with_(controls=controls, rules=rules, rank={q: M.rank.get(q, 1) for q in controls},
                   finals=M.finals,
                   tests={t: A for t, A in M.tests.items() if t in used})


# semantics

def accepting(M: Machine, q, s) -> bool:
    if q not in M.finals:
        return False
    if M.acceptance == "control" or M.order == 0:
        return True
    return not s.items


def tests_pass(M: Machine, r: Rule, s) -> bool:
    return all(M.tests[t].accepts(s) for t in r.tests)


def apply_ops(ops, s):
    for op in ops:
        s = apply_op(op, s)
    return s


def step(M: Machine, config):
    """All enabled transitions at `config` as (rule, outputs, children)."""
    q, s = config
    try:
        a = top_char(s)
    except EmptyAlongSpine:
        return []
    res = []
    for r in M.rules_at.get((q, a), ()):
        if r.tests and not tests_pass(M, r, s):
            continue
        try:
            s2 = apply_ops(r.ops, s)
        except EmptyAlongSpine:
            continue
        res.append((r, r.output, tuple((t, s2) for t in r.targets)))
    return res


def _vec_adder(cap):
    def add(u, v):
        return tuple(min(x + y, cap) for x, y in zip(u, v))
    return add


def enumerate_parikh(M: Machine, depth_bound: int, count_cap: int, budget: int = 2_000_000,
                     chars=None, free=None) -> list:
    """Capped Parikh vectors of accepting run trees of depth <= depth_bound.

    Vectors are indexed by `chars` (default: the machine's outputs) and
    returned sorted. Steps taken from controls in `free` do not count
    towards the depth; use it for intermediate controls of a construction
    (they must not lie on a cycle of free controls).
    """
    free = frozenset(free or ())
    chars = tuple(M.outputs if chars is None else chars)
    ix = {c: i for i, c in enumerate(chars)}
    zero = (0,) * len(chars)
    add = _vec_adder(count_cap)
    unit = {}
    for c, i in ix.items():
        v = [0] * len(chars)
        v[i] = 1
        unit[c] = tuple(v)
    memo = {}
    stepmemo = {}

    def outvec(outs):
        v = zero
        for o in outs:
            if o in unit:
                v = add(v, unit[o])
        return v

    def V(q, s, d):
        key = (q, s, d)
        got = memo.get(key)
        if got is not None:
            return got
        if len(memo) >= budget:
            raise BudgetExceeded(f"enumeration budget of {budget} nodes exhausted")
        res = set()
        if accepting(M, q, s):
            res.add(zero)
        if d > 0 or q in free:
            sk = (q, s)
            steps = stepmemo.get(sk)
            if steps is None:
                steps = stepmemo[sk] = step(M, (q, s))
            for r, outs, children in steps:
                acc = {outvec(outs)}
                dd = d if q in free else d - 1
                for cq, cs in children:
                    sub = V(cq, cs, dd)
                    if not sub:
                        acc = set()
                        break
                    acc = {add(u, v) for u in acc for v in sub}
                res |= acc
        res = frozenset(res)
        memo[key] = res
        return res

    q0, s0 = M.initial_config()
    return sorted(V(q0, s0, depth_bound))


@dataclass(frozen=True)
class RunTree:
    """An accepting run tree: node config, the rule fired (None at a leaf),
    its outputs, and the child subtrees."""

    control: object
    stack: object
    rule: Rule = None
    output: tuple = ()
    children: tuple = ()

    def parikh(self, chars) -> tuple:
        v = [0] * len(chars)
        ix = {c: i for i, c in enumerate(chars)}
        todo = [self]
        while todo:
            t = todo.pop()
            for o in t.output:
                if o in ix:
                    v[ix[o]] += 1
            todo.extend(t.children)
        return tuple(v)

    def leaves(self) -> int:
        return 1 if not self.children else sum(c.leaves() for c in self.children)

    def depth(self) -> int:
        return 0 if not self.children else 1 + max(c.depth() for c in self.children)


def enumerate_runs(M: Machine, depth_bound: int, limit: int = 1000):
    """Up to `limit` accepting run trees of depth <= depth_bound, in a
    canonical order."""

    def gen(q, s, d):
        if accepting(M, q, s):
            yield RunTree(q, s)
        if d == 0:
            return
        for r, outs, children in sorted(step(M, (q, s)), key=lambda e: e[0].sort_key()):
            subs = [gen(cq, cs, d - 1) for cq, cs in children]
            for combo in itertools.product(*[list(itertools.islice(g, limit)) for g in subs]):
                yield RunTree(q, s, r, outs, tuple(combo))

    q0, s0 = M.initial_config()
    return list(itertools.islice(gen(q0, s0, depth_bound), limit))


def restrict_outputs(M: Machine, chars) -> Machine:
    """Keep only `chars` as tracked outputs; others become silent."""
    keep = tuple(c for c in M.outputs if c in set(chars))
    rules = tuple(replace(r, output=tuple(o for o in r.output if o in keep)) for r in M.rules)
    return M.with_(outputs=keep, rules=tuple(_dedup(rules)))


def machine_stats(M: Machine) -> dict:
    return {"order": M.order, "controls": len(M.controls), "rules": len(M.rules),
            "stack_alphabet": len(M.stack_alphabet), "tests": len(M.tests)}


def intermediate_controls(M: Machine) -> frozenset:
    """Controls introduced by normalization or test removal."""
    return frozenset(q for q in M.controls if isinstance(q, tuple) and q and q[0] in ("~mid", "~ann", "~drain"))

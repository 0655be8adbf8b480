"""Order reduction: from an order-n machine to an order-(n-1) one that
preserves simultaneous unboundedness, and the decision pipeline built on it.

The simulator walks one branch of the tree decomposition of a run. At a
push_n it either follows the pushed branch or one of the continuations
after the matching pop_n, and checks the branches it skips with canpop
tests. A simulator control is (q, ts, O, B): the simulated control, the
controls expected after the matching pops (a multiset), the characters
still owed by this branch, and the characters this branch is responsible
for emitting.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from .base0 import linearize0, nfa_diagonal
from .canon import csorted, skey
from .errors import AnnotationBudgetExceeded, BudgetExceeded, HopdaError, MissingCanpopKey
from .hostack import Bracket, Op, rew
from .machine import Machine, Rule, machine_stats, restrict_outputs, trim, validate, validate_and_normalize
from .saturate import CanpopFamily, _assignments, _distributions, _subsets, canpop_family, key_ok, multisets, pop_targets
from .stackaut import StackAutomaton, combine

INIT = ("~sim", "init")
BOT = ("~sim", "fin")


def sim(q, ts, O, B):
    return ("~sim", q, tuple(ts), tuple(O), tuple(B))


def _ordered_partitions(B, k):
    """Ways to split tuple B into k nonempty labelled blocks."""
    if k == 1:
        yield (tuple(B),)
        return
    for assign in itertools.product(range(k), repeat=len(B)):
        if len(set(assign)) == k:
            yield tuple(tuple(c for c, i in zip(B, assign) if i == j) for j in range(k))


class _Builder:
    def __init__(self, M: Machine, fam: CanpopFamily):
        self.M, self.fam = M, fam
        self.C = tuple(csorted(M.outputs))
        self.pts = pop_targets(M)
        self.tests = {}
        self.test_ix = {}
        self.rules = []
        self.n = M.order

    def test_for(self, finals):
        finals = frozenset(finals)
        name = self.test_ix.get(finals)
        if name is None:
            name = self.test_ix[finals] = f"B{len(self.test_ix)}"
            self.tests[name] = StackAutomaton(self.fam.body, finals)
        return name

    def tested(self, kids):
        """Conjunction of at-least canpop tests, or None if unsatisfiable."""
        f = None
        for q, ts, O in kids:
            if any(t not in self.pts for t in ts):
                raise MissingCanpopKey(f"no canpop automaton for {q} with leaves {ts}")
            g = self.fam.final_set(q, ts, O)
            if g is None:
                return None
            f = g if f is None else f & g
            if not self.fam.nonempty(f):
                return None
        return f

    def branch(self, src, a, O, B, children, first=None):
        """Rules splitting into `children` = [(control, ts)]. Each child is
        explored (becomes a target) or tested; the owed set O and the
        extra outputs O2 are distributed over all children. `first` forces
        child 0 to be explored (True) or tested (False)."""
        m = len(children)
        allowed_sets = []
        for X in _subsets(range(m)):
            if not X or len(X) > max(len(B), 1):
                continue
            if first is not None and (0 in X) != first:
                continue
            allowed_sets.append(X)
        out = []
        for X in allowed_sets:
            Y = [i for i in range(m) if i not in X]
            for blocks in _ordered_partitions(B, len(X)):
                bx = dict(zip(X, blocks))
                for O2 in _subsets(B):
                    owed = tuple(csorted(set(O) | set(O2)))
                    for parts in _assignments(owed, m):
                        if any(set(parts[i]) & set(bx[i]) for i in X):
                            continue
                        f = self.tested([(children[i][0], children[i][1], parts[i]) for i in Y])
                        if Y and f is None:
                            continue
                        tests = (self.test_for(f),) if Y else ()
                        tg = tuple(sim(children[i][0], children[i][1], parts[i], bx[i]) for i in X)
                        ops = (rew(a),)
                        out.append(Rule(src, a, tuple(O2), ops, tg, tests))
        return out

    def rules_for(self, c):
        M, n = self.M, self.n
        if c == INIT:
            f = next(iter(M.finals))
            return [Rule(INIT, M.initial_char, (), (rew(M.initial_char),), (sim(M.initial, (f,) * m, (), self.C),))
                    for m in range(1, M.branches + 1) if key_ok(M, M.initial, (f,) * m)]
        if c == BOT:
            return []
        _, q, ts, O, B = c
        out = []
        for r in M.rules_from.get(q, ()):
            a, op = r.guard, r.op
            if len(r.targets) > 1:
                for parts in _distributions(ts, len(r.targets)):
                    kids = list(zip(r.targets, parts))
                    if all(key_ok(M, t, p) for t, p in kids):
                        out += self.branch(c, a, O, B, kids)
            elif op == Op("pop", n):
                if ts == (r.targets[0],) and not O:
                    out.append(Rule(c, a, (), (rew(a),), (BOT,)))
            elif op == Op("push", n):
                qp = r.targets[0]
                for ps in multisets(self.pts, M.branches):
                    if not key_ok(M, qp, ps):
                        continue
                    for parts in _distributions(ts, len(ps)):
                        conts = list(zip(ps, parts))
                        if not all(key_ok(M, t, p) for t, p in conts):
                            continue
                        kids = [(qp, ps)] + conts
                        out += self.branch(c, a, O, B, kids, first=True)
                        out += self.branch(c, a, O, B, kids, first=False)
            else:
                o = r.out
                emit = (o,) if o in B else ()
                out.append(Rule(c, a, emit, (op,), (sim(r.targets[0], ts, tuple(x for x in O if x != o), B),)))
        return out


def build_simulator(M: Machine, fam: CanpopFamily) -> Machine:
    """Order-(n-1) machine with canpop tests, accepting by control at BOT."""
    if M.order < 1 or not M.is_normal():
        raise HopdaError("build_simulator needs a normalized machine of order >= 1")
    if any(r.tests for r in M.rules):
        raise HopdaError("build_simulator needs a test-free machine")
    b = _Builder(M, fam)
    seen = {INIT, BOT}
    order = [INIT, BOT]
    todo = [INIT]
    rules = []
    while todo:
        c = todo.pop(0)
        for r in b.rules_for(c):
            rules.append(r)
            for t in r.targets:
                if t not in seen:
                    seen.add(t)
                    order.append(t)
                    todo.append(t)
    k = max(1, len(b.C))
    rank = {c: max(len(c[4]), 1) if c[0] == "~sim" and len(c) == 5 else 1 for c in order}
    rank[INIT] = k
    rules = list(dict.fromkeys(rules))
    S = Machine(order=M.order - 1, branches=k, controls=tuple(order), outputs=M.outputs,
                stack_alphabet=M.stack_alphabet, initial=INIT, initial_char=M.initial_char,
                finals=frozenset({BOT}), rank=rank, rules=tuple(rules), tests=b.tests,
                acceptance="control")
    validate(S)
    return S


# test removal

class AnnotatedChar:
    """A stack character paired with, for each test body, the functions
    h_1..h_m summarizing how that body reads the stack below this
    character. Interned: equal annotations are the same object."""

    __slots__ = ("base", "annots", "idx", "_hash")

    def __init__(self, base, annots, idx):
        self.base, self.annots, self.idx = base, annots, idx
        self._hash = hash((base, idx))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        return f"{self.base}#{self.idx}"

    def sort_key(self):
        return (skey(self.base), self.idx)


def _compose(f, g):
    # (f after g)
    return tuple(f[x] for x in g)


def remove_tests(M: Machine, budget: int = 1_000_000) -> Machine:
    """Equivalent machine without tests, over annotated characters."""
    if not any(r.tests for r in M.rules):
        return M
    m = M.order
    # fold conjunctions into single automata, then group by body
    conj = {}
    rules = []
    for r in M.rules:
        if len(r.tests) > 1:
            key = tuple(sorted(r.tests))
            if key not in conj:
                A = M.tests[key[0]]
                for t in key[1:]:
                    A = combine("and", A, M.tests[t])
                conj[key] = A
            rules.append((r, conj[key]))
        else:
            rules.append((r, M.tests[r.tests[0]] if r.tests else None))
    if m == 0:
        kept = [r for r, A in rules if A is None or A.accepts(r.guard)]
        kept = [Rule(r.source, r.guard, r.output, r.ops, r.targets) for r in kept]
        return M.with_(rules=tuple(kept), tests={})
    bodies = []
    for _, A in rules:
        if A is not None and all(A.body is not b for b in bodies):
            bodies.append(A.body)
    bix = {id(b): i for i, b in enumerate(bodies)}

    table = {}
    chars = []

    def intern(base, annots):
        key = (base, annots)
        c = table.get(key)
        if c is None:
            if len(chars) >= budget:
                raise AnnotationBudgetExceeded(f"more than {budget} annotated characters")
            c = table[key] = AnnotatedChar(base, annots, len(chars))
            chars.append(c)
        return c

    ident = {id(b): tuple(range(b.size)) for b in bodies}

    def initial_annot(body):
        hs = [body.delta[Bracket(False, l)] for l in range(1, m)] + [ident[id(body)]]
        return tuple(hs)

    top_state = {}

    def final_state(c, bi):
        key = (c, bi)
        s = top_state.get(key)
        if s is None:
            body = bodies[bi]
            hs = c.annots[bi]
            x = body.init
            for l in range(m, 0, -1):
                x = hs[l - 1][x]
            x = body.delta[c.base][x]
            for l in range(1, m):
                x = body.delta[Bracket(True, l)][x]
            s = top_state[key] = x
        return s

    def passes(c, A):
        return A is None or final_state(c, bix[id(A.body)]) in A.finals

    def pushed(c, l):
        new = []
        for bi, body in enumerate(bodies):
            hs = c.annots[bi]
            f = hs[l - 1]
            for j in range(l - 1, 0, -1):
                f = _compose(hs[j - 1], f)
            f = _compose(body.delta[c.base], f)
            for j in range(1, l):
                f = _compose(body.delta[Bracket(True, j)], f)
            new.append(hs[:l - 1] + (f,) + hs[l:])
        return intern(c.base, tuple(new))

    def exposed(b, c, l):
        # b's components up to level l, c's above
        return intern(b.base, tuple(hb[:l] + hc[l:] for hb, hc in zip(b.annots, c.annots)))

    start = intern(M.initial_char, tuple(initial_annot(b) for b in bodies))
    by_guard = {}
    for r, A in rules:
        by_guard.setdefault(r.guard, []).append((r, A))
    pops_low = sorted({r.op.arg for r, _ in rules if r.op.kind == "pop" and r.op.arg < m})
    out_rules = []
    mids = {}
    new_controls = list(M.controls)
    rank = dict(M.rank)
    done = 0
    pop_sources = {l: [] for l in pops_low}  # chars that fire a low pop
    while done < len(chars):
        c = chars[done]
        done += 1
        for r, A in by_guard.get(c.base, ()):
            if not passes(c, A):
                continue
            op = r.op
            if op.kind == "rew":
                out_rules.append(Rule(r.source, c, r.output, (rew(intern(op.arg, c.annots)),), r.targets))
            elif op.kind == "push":
                out_rules.append(Rule(r.source, c, r.output, (op, rew(pushed(c, op.arg))), r.targets))
            elif op.arg == m:
                out_rules.append(Rule(r.source, c, r.output, (op,), r.targets))
            else:
                l = op.arg
                high = tuple(h[l:] for h in c.annots)
                key = (r, high)
                mid = mids.get(key)
                if mid is None:
                    mid = mids[key] = ("~ann", len(mids))
                    new_controls.append(mid)
                    rank[mid] = M.rank.get(r.source, 1)
                    pop_sources[l].append((mid, c, r))
                out_rules.append(Rule(r.source, c, r.output, (op,), (mid,)))
        # exposures after low pops, for every character seen so far
        if done == len(chars):
            before = len(chars)
            for l in pops_low:
                for mid, c2, r in pop_sources[l]:
                    for b in list(chars):
                        exposed(b, c2, l)
            if len(chars) == before:
                break
    for l in pops_low:
        for mid, c2, r in pop_sources[l]:
            for b in chars:
                out_rules.append(Rule(mid, b, (), (rew(exposed(b, c2, l)),), r.targets))
    return Machine(order=m, branches=M.branches, controls=tuple(new_controls), outputs=M.outputs,
                   stack_alphabet=tuple(chars), initial=M.initial, initial_char=start,
                   finals=M.finals, rank=rank, rules=tuple(dict.fromkeys(out_rules)), tests={},
                   acceptance=M.acceptance)


# the pipeline

def rename(M: Machine) -> Machine:
    """Replace structured controls and characters by short strings."""
    cmap = {q: f"p{i}" for i, q in enumerate(M.controls)}
    gmap = {a: f"g{i}" for i, a in enumerate(M.stack_alphabet)}
    if all(isinstance(a, str) for a in M.stack_alphabet):
        gmap = {a: a for a in M.stack_alphabet}

    def op(o):
        return Op(o.kind, gmap[o.arg]) if o.kind in ("rew", "toptest") else o

    rules = tuple(Rule(cmap[r.source], gmap[r.guard], r.output, tuple(op(o) for o in r.ops),
                       tuple(cmap[t] for t in r.targets)) for r in M.rules)
    return Machine(order=M.order, branches=M.branches, controls=tuple(cmap[q] for q in M.controls),
                   outputs=M.outputs, stack_alphabet=tuple(gmap[a] for a in M.stack_alphabet),
                   initial=cmap[M.initial], initial_char=gmap[M.initial_char],
                   finals=frozenset(cmap[q] for q in M.finals),
                   rank={cmap[q]: M.rank.get(q, 1) for q in M.controls}, rules=rules, tests={},
                   acceptance=M.acceptance)


def prune_alphabet(M: Machine) -> Machine:
    used = {M.initial_char} | {r.guard for r in M.rules}
    used |= {o.arg for r in M.rules for o in r.ops if o.kind in ("rew", "toptest")}
    return M.with_(stack_alphabet=tuple(a for a in M.stack_alphabet if a in used))


@dataclass
class Budgets:
    saturation: int = 200_000
    annotation: int = 1_000_000
    enumeration: int = 2_000_000


def reduce_once(M: Machine, budgets: Budgets = None, stats: dict = None) -> Machine:
    """Order-n machine (normalized, test-free) to an order-(n-1) one."""
    budgets = budgets or Budgets()
    fam = canpop_family(M, budget=budgets.saturation)
    S = build_simulator(M, fam)
    if stats is not None:
        stats["canpop_keys"] = len(fam.keys())
        stats["canpop_states"] = fam.body.size
        stats["simulator"] = machine_stats(S)
    T = remove_tests(trim(S), budget=budgets.annotation)
    N = validate_and_normalize(prune_alphabet(T))
    return rename(prune_alphabet(trim(N)))


@dataclass
class Verdict:
    verdict: str
    chars: list
    levels: list = field(default_factory=list)
    witness: dict = field(default_factory=dict)

    def to_json(self, timing=False):
        levels = self.levels if timing else [{k: v for k, v in l.items() if k != "seconds"} for l in self.levels]
        return {"verdict": self.verdict, "chars": list(self.chars), "levels": levels, "witness": self.witness}


def prepare(M: Machine, chars) -> Machine:
    """Restrict outputs to `chars` and normalize."""
    chars = list(chars)
    missing = [c for c in chars if c not in M.outputs]
    if missing:
        from .errors import UnknownSymbol
        raise UnknownSymbol(f"characters not among the machine outputs: {', '.join(map(str, missing))}")
    R = restrict_outputs(M, chars)
    R = R.with_(branches=max(R.branches, len(chars), 1))
    return trim(validate_and_normalize(R))


class LevelBudgetExceeded(BudgetExceeded):
    def __init__(self, level, err):
        super().__init__(f"order-{level} reduction: {err}")
        self.level = level


def decide_diagonal(M: Machine, chars, budgets: Budgets = None, log=None) -> Verdict:
    budgets = budgets or Budgets()
    chars = list(dict.fromkeys(chars))
    if not chars:
        raise HopdaError("at least one character is needed")
    cur = prepare(M, chars)
    levels = []
    while True:
        t0 = time.perf_counter()
        info = machine_stats(cur)
        levels.append(info)
        if cur.order == 0:
            break
        extra = {}
        try:
            cur = reduce_once(cur, budgets, extra)
        except BudgetExceeded as e:
            raise LevelBudgetExceeded(cur.order, e) from e
        info.update({k: v for k, v in extra.items() if k == "canpop_keys"})
        info["seconds"] = round(time.perf_counter() - t0, 3)
        if log:
            log(f"order {info['order']}: {info['controls']} controls, {info['rules']} rules -> order {cur.order}")
    t0 = time.perf_counter()
    N = linearize0(cur)
    res = nfa_diagonal(N, chars)
    levels[-1]["nfa_states"] = len(N.states)
    levels[-1]["nfa_transitions"] = len(N.transitions)
    levels[-1]["seconds"] = round(time.perf_counter() - t0, 3)
    witness = res.to_json() if res.holds else {"holds": False, "reason": "no accepting path covers all characters"}
    return Verdict("unbounded" if res.holds else "bounded", chars, levels, witness)

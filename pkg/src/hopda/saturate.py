"""Alternating higher-order pushdown systems and backward reachability.

pre* is computed by saturation of a nested top-down automaton: a level-l
state reads an order-l stack; a level-l transition `q --L--> T` (l >= 2)
says the top order-(l-1) element is accepted by every state of L and the
remaining order-l stack by every state of T. Level-1 transitions read a
character. Controls are the level-n states.

The saturated automaton is then determinized into the bottom-up
`ConfigSet` representation by tracking, while reading a linearization from
the right, the set of states at each open level that accept what has been
read so far.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .canon import csorted, skey
from .errors import EmptyAlongSpine, SaturationBudgetExceeded
from .hostack import Bracket, Op, apply_op, top_char
from .machine import Machine
from .stackaut import Body, ConfigSet, StackAutomaton, stack_alphabet

EMPTY = frozenset()


@dataclass(frozen=True)
class AlternatingSystem:
    order: int
    controls: tuple
    alphabet: tuple
    rules: tuple  # (q, a, op, q')
    alt_rules: tuple = ()  # (q, a, frozenset of controls)

    def index(self):
        ordinary, alt = {}, {}
        for q, a, op, t in self.rules:
            ordinary.setdefault((q, a), []).append((op, t))
        for q, a, ts in self.alt_rules:
            alt.setdefault((q, a), []).append(ts)
        return ordinary, alt


# nested top-down automaton

class Nested:
    def __init__(self, order, budget):
        self.n = order
        self.level = []  # state -> level
        self.names = []
        self.final = set()
        self.trans = {l: {} for l in range(1, order + 1)}  # level -> state -> set of (L, T)
        self.count = 0
        self.budget = budget
        self.fresh_ix = {}
        self.version = 0

    def new_state(self, level, name, final=False):
        s = len(self.level)
        self.level.append(level)
        self.names.append(name)
        self.trans[level][s] = set()
        if final:
            self.final.add(s)
        return s

    def fresh(self, level, key):
        s = self.fresh_ix.get((level, key))
        if s is None:
            s = self.fresh_ix[(level, key)] = self.new_state(level, ("fresh", level, len(self.fresh_ix)))
        return s

    def add(self, l, q, L, T) -> bool:
        """Add q --L--> T unless an existing transition with smaller
        requirements subsumes it; drop the ones it subsumes."""
        ts = self.trans[l][q]
        e = (L, T)
        if e in ts:
            return False
        if l == 1:
            if any(L0 == L and T0 <= T for L0, T0 in ts):
                return False
            ts -= {(L0, T0) for L0, T0 in ts if L0 == L and T <= T0}
        else:
            if any(L0 <= L and T0 <= T for L0, T0 in ts):
                return False
            ts -= {(L0, T0) for L0, T0 in ts if L <= L0 and T <= T0}
        ts.add(e)
        self.count += 1
        self.version += 1
        if self.count > self.budget:
            raise SaturationBudgetExceeded(f"saturation exceeded {self.budget} transitions")
        return True

    def add_long(self, p, a, Ts) -> bool:
        """Add a long-form transition p --(.., a)--> (T_n, .., T_1)."""
        n = self.n
        if n == 1:
            return self.add(1, p, a, Ts[0])
        changed = False
        r = p
        for i, l in enumerate(range(n, 1, -1)):
            nxt = self.fresh(l - 1, (r, Ts[i]))
            changed |= self.add(l, r, frozenset({nxt}), Ts[i])
            r = nxt
        changed |= self.add(1, r, a, Ts[-1])
        return changed


class _Forms:
    """Long forms and partial long forms of a `Nested`, cached per version."""

    def __init__(self, N: Nested):
        self.N = N
        self.ver = -1
        self.lf = {}
        self.plf = {}

    def _check(self):
        if self.ver != self.N.version:
            self.lf.clear()
            self.plf.clear()
            self.ver = self.N.version

    def long(self, l, q):
        """Set of (label, (T_l, ..., T_1)); label None is a wildcard."""
        self._check()
        key = (l, q)
        got = self.lf.get(key)
        if got is not None:
            return got
        res = set()
        for L, T in self.N.trans[l][q]:
            if l == 1:
                res.add((L, (T,)))
            elif not L:
                res.add((None, (T,) + (EMPTY,) * (l - 1)))
            else:
                for lab, Ts in _product([self.long(l - 1, r) for r in sorted(L)]):
                    res.add((lab, (T,) + Ts))
        self.lf[key] = res
        return res

    def partial(self, j, q, l):
        """Set of ((T_j, ..., T_{l+1}), Q_l) for state q at level j > l."""
        self._check()
        key = (j, q, l)
        got = self.plf.get(key)
        if got is not None:
            return got
        res = set()
        for L, T in self.N.trans[j][q]:
            if j - 1 == l:
                res.add(((T,), L))
            elif not L:
                res.add(((T,) + (EMPTY,) * (j - l - 1), EMPTY))
            else:
                for combo in itertools.product(*[sorted(self.partial(j - 1, r, l), key=skey) for r in sorted(L)]):
                    Ts = tuple(frozenset().union(*(c[0][i] for c in combo)) for i in range(j - l - 1))
                    Q = frozenset().union(*(c[1] for c in combo))
                    res.add(((T,) + Ts, Q))
        self.plf[key] = res
        return res

    def long_with(self, l, q, a):
        return [Ts for lab, Ts in self.long(l, q) if lab is None or lab == a]


def _product(parts):
    """Combine long forms of several states: labels must agree (None is a
    wildcard) and target sets are unioned level by level."""
    out = {(None, None)}
    for part in parts:
        nxt = set()
        for lab, Ts in out:
            for lab2, Ts2 in part:
                if lab is not None and lab2 is not None and lab != lab2:
                    continue
                U = Ts2 if Ts is None else tuple(x | y for x, y in zip(Ts, Ts2))
                nxt.add((lab if lab is not None else lab2, U))
        out = nxt
        if not out:
            break
    return out


def _union_forms(formlists):
    """All unions choosing one long form from each list."""
    out = {None}
    for forms in formlists:
        nxt = set()
        for U in out:
            for Ts in forms:
                nxt.add(Ts if U is None else tuple(x | y for x, y in zip(U, Ts)))
        out = nxt
        if not out:
            break
    return out


def saturate(S: AlternatingSystem, N: Nested, ctl: dict) -> None:
    """Saturate N (in place) under the backward rules of S. `ctl` maps
    controls of S to their level-n states."""
    n = S.order
    F = _Forms(N)
    ordinary, alt = S.index()
    rule_list = sorted(ordinary.items(), key=lambda kv: skey(kv[0]))
    alt_list = sorted(alt.items(), key=lambda kv: skey(kv[0]))
    while True:
        # one round against a fixed snapshot, so cached forms stay valid
        pending = []
        for (q, a), entries in rule_list:
            p = ctl[q]
            for op, t in entries:
                pt = ctl[t]
                new = []
                if op.kind == "rew":
                    new = F.long_with(n, pt, op.arg)
                elif op.kind == "pop":
                    l = op.arg
                    if l == n:
                        new = [(frozenset({pt}),) + (EMPTY,) * (n - 1)]
                    else:
                        new = [Ts + (Q,) + (EMPTY,) * (l - 1) for Ts, Q in F.partial(n, pt, l)]
                elif op.kind == "push":
                    l = op.arg
                    for Ts in F.long_with(n, pt, a):
                        i = n - l  # index of T_l
                        if not Ts[i]:
                            new.append(Ts)
                            continue
                        for U in _union_forms([F.long_with(l, r, a) for r in sorted(Ts[i])]):
                            new.append(Ts[:i] + (U[0],) + tuple(x | y for x, y in zip(Ts[i + 1:], U[1:])))
                pending.extend((p, a, Ts) for Ts in new)
        for (q, a), entries in alt_list:
            p = ctl[q]
            for ts in entries:
                U = _union_forms([F.long_with(n, ctl[t], a) for t in sorted(ts, key=skey)])
                pending.extend((p, a, Ts) for Ts in U)
        changed = False
        for p, a, Ts in sorted(set(pending), key=skey):
            changed |= N.add_long(p, a, Ts)
        if not changed:
            return


# bottom-up <-> top-down

def _from_configset(A: ConfigSet, controls, budget) -> tuple:
    """Top-down automaton equivalent to A, with one level-n state per control.

    State (l, so, si) accepts an order-l stack whose items, read from the
    right starting in si, lead to so.
    """
    body = A.body
    n = body.order
    N = Nested(n, budget)
    size = body.size
    pre_open = {l: {} for l in range(1, n)}
    for l in range(1, n):
        row = body.delta[Bracket(True, l)]
        for t, s in enumerate(row):
            pre_open[l].setdefault(s, []).append(t)
    pre_char = {}
    chars = [x for x in body.alphabet if not isinstance(x, Bracket)]
    for a in chars:
        for t, s in enumerate(body.delta[a]):
            pre_char.setdefault((a, s), []).append(t)
    ids = {}
    todo = deque()

    def get(l, so, si):
        key = (l, so, si)
        s = ids.get(key)
        if s is None:
            s = ids[key] = N.new_state(l, key, final=(so == si))
            todo.append(key)
        return s

    def transitions_of(l, so, si):
        out = []
        if l == 1:
            for a in chars:
                for sp in pre_char.get((a, so), ()):
                    out.append((a, frozenset({get(1, sp, si)})))
        else:
            close = body.delta[Bracket(False, l - 1)]
            for to in pre_open[l - 1].get(so, ()):
                for sp in range(size):
                    out.append((frozenset({get(l - 1, to, close[sp])}), frozenset({get(l, sp, si)})))
        return out

    ctl = {}
    for q in controls:
        F = A.finals.get(q, EMPTY)
        ctl[q] = N.new_state(n, ("ctl", q), final=body.init in F)
    for q in controls:
        for sf in sorted(A.finals.get(q, EMPTY)):
            for L, T in transitions_of(n, sf, body.init):
                N.add(n, ctl[q], L, T)
    while todo:
        l, so, si = todo.popleft()
        s = ids[(l, so, si)]
        for L, T in transitions_of(l, so, si):
            N.add(l, s, L, T)
    return N, ctl


class _Det:
    """Bottom-up view of a `Nested`: states are tuples of per-level
    accepting sets, outermost first."""

    def __init__(self, N: Nested):
        self.N = N
        n = N.n
        self.fin = {l: frozenset(s for s in N.final if N.level[s] == l) for l in range(1, n + 1)}
        self.by_char = {}
        self.by_level = {l: [] for l in range(2, n + 1)}
        for l in range(1, n + 1):
            for q, es in N.trans[l].items():
                for L, T in es:
                    if l == 1:
                        self.by_char.setdefault(L, []).append((q, T))
                    else:
                        self.by_level[l].append((q, L, T))

    def close(self, l, inner, outer):
        """Level-l states q with q --L--> T, L within inner, T within outer."""
        return frozenset(q for q, L, T in self.by_level[l] if L <= inner and T <= outer)

    def step(self, st, x):
        """Successor of `st` (a tuple, top level first is st[0]) on letter x,
        or None for the sink."""
        n = self.N.n
        cur = n - len(st) + 1  # level of the innermost open stack
        if isinstance(x, Bracket):
            if not x.opening:
                if x.level != cur - 1:
                    return None
                return st + (self.fin[x.level],)
            if x.level != cur or len(st) < 2:
                return None
            return st[:-2] + (self.close(cur + 1, st[-1], st[-2]),)
        if cur != 1:
            return None
        acc = st[-1]
        return st[:-1] + (frozenset(q for q, T in self.by_char.get(x, ()) if T <= acc),)


def _materialize(det: _Det, start, alphabet, order, budget):
    ix = {None: 0, start: 1}
    states = [None, start]
    todo = deque([start])
    rows = {x: [0, None] for x in alphabet}
    while todo:
        st = todo.popleft()
        i = ix[st]
        for x in alphabet:
            t = det.step(st, x)
            j = ix.get(t)
            if j is None:
                j = ix[t] = len(states)
                states.append(t)
                todo.append(t)
                if len(states) > budget:
                    raise SaturationBudgetExceeded(f"determinization exceeded {budget} states")
                for y in alphabet:
                    rows[y].append(None)
            rows[x][i] = j
    for x in alphabet:
        rows[x][0] = 0
    delta = {x: tuple(r) for x, r in rows.items()}
    body = Body(order, tuple(alphabet), len(states), 1, delta, tuple(states))
    return body, states


def prestar(S: AlternatingSystem, A: ConfigSet, budget: int = 200_000) -> ConfigSet:
    """Configurations from which some alternating run reaches A on every branch."""
    if S.order != A.order:
        from .errors import OrderMismatch
        raise OrderMismatch(f"system order {S.order}, target order {A.order}")
    if S.order < 1:
        raise ValueError("prestar needs order >= 1")
    N, ctl = _from_configset(A, csorted(S.controls), budget)
    saturate(S, N, ctl)
    det = _Det(N)
    n = S.order
    alpha = stack_alphabet(n, [x for x in A.body.alphabet if not isinstance(x, Bracket)])
    body, states = _materialize(det, (det.fin[n],), alpha, n, budget)
    finals = {}
    for q in S.controls:
        s = ctl[q]
        finals[q] = frozenset(i for i, st in enumerate(states) if st is not None and len(st) == 1 and s in st[0])
    return ConfigSet(body, finals)


def member_oracle(S: AlternatingSystem, A: ConfigSet, config, bound: int) -> str:
    """'yes' if an alternating run of depth <= bound reaches A on every branch."""
    ordinary, alt = S.index()
    memo = {}

    def mem(q, s, d):
        key = (q, s, d)
        if key in memo:
            return memo[key]
        res = A.accepts(q, s)
        if not res and d > 0:
            try:
                a = top_char(s)
            except EmptyAlongSpine:
                a = None
            if a is not None:
                for op, t in ordinary.get((q, a), ()):
                    try:
                        s2 = apply_op(op, s)
                    except EmptyAlongSpine:
                        continue
                    if mem(t, s2, d - 1):
                        res = True
                        break
                if not res:
                    for ts in alt.get((q, a), ()):
                        if all(mem(t, s, d - 1) for t in sorted(ts, key=skey)):
                            res = True
                            break
        memo[key] = res
        return res

    q, s = config
    return "yes" if mem(q, s, bound) else "unknown"


# canpop family

def pop_targets(M: Machine) -> tuple:
    n = M.order
    return tuple(csorted({t for r in M.rules if r.ops[0] == Op("pop", n) for t in r.targets}))


def multisets(items, max_size, min_size=1):
    for k in range(min_size, max_size + 1):
        yield from itertools.combinations_with_replacement(items, k)


def _subsets(xs):
    xs = list(xs)
    for k in range(len(xs) + 1):
        yield from itertools.combinations(xs, k)


def _distributions(ts, m):
    """Ways to split multiset ts (sorted tuple) into m nonempty sorted
    sub-multisets, one per child, without duplicates."""
    seen = set()
    for assign in itertools.product(range(m), repeat=len(ts)):
        if len(set(assign)) != m:
            continue
        parts = tuple(tuple(sorted((t for t, i in zip(ts, assign) if i == j), key=skey)) for j in range(m))
        if parts not in seen:
            seen.add(parts)
            yield parts


def _assignments(chars, m):
    """Each char in `chars` to exactly one of m children."""
    chars = tuple(chars)
    for assign in itertools.product(range(m), repeat=len(chars)):
        yield tuple(tuple(c for c, i in zip(chars, assign) if i == j) for j in range(m))


def key_ok(M: Machine, q, ts) -> bool:
    rk = M.rank
    return 1 <= len(ts) <= M.branches and rk.get(q, 1) >= sum(rk.get(t, 1) for t in ts)


def build_alternating(M: Machine, roots=None) -> AlternatingSystem:
    """The alternating system over controls (q, O, ts): q simulates M, O
    holds tracked characters still owed, ts the controls expected at the
    leaves (a sorted tuple used as a multiset).

    Only controls reachable from `roots` (default: every valid key over
    the pop_n targets) are generated.
    """
    n = M.order
    C = tuple(csorted(M.outputs))
    pts = pop_targets(M)
    if roots is None:
        roots = [(q, O, ts) for q in M.controls for ts in multisets(pts, M.branches)
                 if key_ok(M, q, ts) for O in _subsets(C)]
    seen = set(roots)
    todo = deque(csorted(seen))
    rules, alts = [], []
    while todo:
        c = todo.popleft()
        q, O, ts = c
        targets = []
        for r in M.rules_from.get(q, ()):
            if r.tests:
                raise ValueError("build_alternating needs a test-free machine")
            if len(r.targets) == 1:
                t = r.targets[0]
                if not key_ok(M, t, ts):
                    continue
                o = r.out
                tc = (t, tuple(x for x in O if x != o), ts)
                rules.append((c, r.guard, r.op, tc))
                targets.append(tc)
            else:
                m = len(r.targets)
                if len(ts) < m:
                    continue
                for parts in _distributions(ts, m):
                    if not all(key_ok(M, t, p) for t, p in zip(r.targets, parts)):
                        continue
                    for Os in _assignments(O, m):
                        kids = frozenset((t, o, p) for t, o, p in zip(r.targets, Os, parts))
                        alts.append((c, r.guard, kids))
                        targets.extend(kids)
        for t in targets:
            if t not in seen:
                seen.add(t)
                todo.append(t)
    ctl = tuple(csorted(seen))
    return AlternatingSystem(n, ctl, tuple(M.stack_alphabet), tuple(dict.fromkeys(rules)),
                             tuple(dict.fromkeys(alts)))


def empty_configset(order, chars, controls) -> ConfigSet:
    """Per-control set containing only the empty order-n stack."""
    alpha = stack_alphabet(order, chars)
    body = Body(order, alpha, 2, 0, {x: (1, 1) for x in alpha}, ("empty", "sink"))
    return ConfigSet(body, {q: {0} for q in controls})


def target_set(M: Machine, key) -> ConfigSet:
    """((t, (), (t,)), [n]) for each t in the key's target tuple."""
    q, O, ts = key
    return empty_configset(M.order, M.stack_alphabet, [(t, (), (t,)) for t in ts])


class CanpopFamily:
    """At-least-O canpop automata (order n-1) sharing one body.

    `atleast(q, ts, O)` accepts u iff M has a run tree from (q, [n u]) whose
    leaves are (t, [n]) for t in ts (as a multiset) and which outputs every
    character of O at least once.
    """

    def __init__(self, M: Machine, body: Body, finals: dict, system: AlternatingSystem):
        self.machine = M
        self.body = body
        self.finals = finals
        self.system = system
        self._reach = None

    @staticmethod
    def norm(q, ts, O):
        return (q, tuple(csorted(set(O))), tuple(sorted(ts, key=skey)))

    def final_set(self, q, ts, O):
        k = self.norm(q, ts, O)
        if not key_ok(self.machine, q, k[2]):
            return None
        return self.finals.get(k, EMPTY)

    def atleast(self, q, ts, O):
        f = self.final_set(q, ts, O)
        return None if f is None else StackAutomaton(self.body, f)

    def exact(self, q, ts, O):
        """Differencing of at-least automata: O is achievable and no strict
        superset of O is."""
        f = self.final_set(q, ts, O)
        if f is None:
            return None
        for c in self.machine.outputs:
            if c not in O:
                g = self.final_set(q, ts, tuple(O) + (c,))
                f = f - g
        return StackAutomaton(self.body, f)

    def keys(self):
        return csorted(k for k, f in self.finals.items() if f)

    def reachable(self):
        if self._reach is None:
            from .stackaut import reachable_states
            self._reach = reachable_states(self.body)
        return self._reach

    def nonempty(self, finals) -> bool:
        return bool(finals & self.reachable())


def canpop_family(M: Machine, budget: int = 200_000) -> CanpopFamily:
    """One saturation for all keys over the pop_n targets of M."""
    n = M.order
    if n < 1:
        raise ValueError("canpop_family needs order >= 1")
    S = build_alternating(M)
    pts = pop_targets(M)
    leaves = [(t, (), (t,)) for t in pts if (t, (), (t,)) in set(S.controls)]
    A = empty_configset(n, M.stack_alphabet, leaves)
    N, ctl = _from_configset(A, csorted(S.controls), budget)
    saturate(S, N, ctl)
    det = _Det(N)
    alpha = stack_alphabet(n - 1, M.stack_alphabet)
    if n == 1:
        # order-0 body: one character is read from the start state
        start = (det.fin[1],)
        states = [None, None]
        ix = {}
        row = {}
        for a in alpha:
            st = det.step(start, a)
            if st not in ix:
                ix[st] = len(states)
                states.append(st)
            row[a] = ix[st]
        delta = {a: (0, row[a]) + (0,) * (len(states) - 2) for a in alpha}
        body = Body(0, alpha, len(states), 1, delta, tuple(states))
        tops = [st[0] if st is not None else EMPTY for st in states]
    else:
        start = (det.fin[n], det.fin[n - 1])
        body, states = _materialize(det, start, alpha, n - 1, budget)
        tops = [det.close(n, st[1], st[0]) if st is not None and len(st) == 2 else EMPTY
                for st in states]
    finals = {}
    for c in S.controls:
        s = ctl[c]
        f = frozenset(i for i, T in enumerate(tops) if s in T)
        if f:
            finals[c] = f
    return CanpopFamily(M, body, finals, S)

"""Order-0 machines as NFAs, and the diagonal problem for NFAs."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .canon import csorted, skey
from .machine import Machine, tests_pass


@dataclass(frozen=True)
class Nfa:
    states: tuple
    alphabet: tuple
    transitions: tuple  # (p, c, q) with c None for ε
    initial: object
    finals: frozenset

    def out_edges(self):
        adj = {s: [] for s in self.states}
        for p, c, q in sorted(self.transitions, key=skey):
            adj.setdefault(p, []).append((c, q))
        return adj


def linearize0(M: Machine) -> Nfa:
    """Serialize the run trees of an order-0 machine into words.

    A state is (control, character, pending) where pending is a queue of
    (control, character) pairs for branches still to be run. Reaching a
    final control either accepts (nothing pending) or starts the next
    pending branch on an ε-move.
    """
    if M.order != 0:
        raise ValueError("linearize0 needs an order-0 machine")
    start = (M.initial, M.initial_char, ())
    seen = {start}
    order = [start]
    todo = deque([start])
    trans = []
    while todo:
        st = todo.popleft()
        q, a, pend = st
        succ = []
        for r in M.rules_at.get((q, a), ()):
            if r.tests and not tests_pass(M, r, a):
                continue
            b = r.op.arg
            rest = tuple((t, b) for t in r.targets[1:])
            if len(pend) + len(rest) > M.branches:
                continue
            o = r.out
            succ.append((o, (r.targets[0], b, pend + rest)))
        if q in M.finals and pend:
            (q2, b2), *rest = pend
            succ.append((None, (q2, b2, tuple(rest))))
        for o, t in succ:
            trans.append((st, o, t))
            if t not in seen:
                seen.add(t)
                order.append(t)
                todo.append(t)
    finals = frozenset(s for s in order if s[0] in M.finals and not s[2])
    return Nfa(tuple(order), tuple(M.outputs), tuple(trans), start, finals)


def eps_closure(N: Nfa, states) -> frozenset:
    adj = N.out_edges()
    seen = set(states)
    todo = list(states)
    while todo:
        p = todo.pop()
        for c, q in adj.get(p, ()):
            if c is None and q not in seen:
                seen.add(q)
                todo.append(q)
    return frozenset(seen)


def nfa_accepts(N: Nfa, word) -> bool:
    adj = N.out_edges()
    cur = eps_closure(N, {N.initial})
    for x in word:
        nxt = {q for p in cur for c, q in adj.get(p, ()) if c == x}
        cur = eps_closure(N, nxt)
    return bool(cur & N.finals)


def sccs(nodes, adj) -> list:
    """Tarjan's algorithm, iterative. `adj` maps node -> successor list."""
    index, low, onstk = {}, {}, set()
    stk, out = [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(adj.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stk.append(root)
        onstk.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stk.append(w)
                    onstk.add(w)
                    work.append((w, iter(adj.get(w, ()))))
                    advanced = True
                    break
                if w in onstk:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stk.pop()
                    onstk.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


@dataclass
class DiagonalResult:
    holds: bool
    path: list = field(default_factory=list)  # transitions (p, c, q) of the skeleton
    cycles: dict = field(default_factory=dict)  # char -> (anchor index on path, cycle transitions)

    def to_json(self):
        from .stackaut import key_text
        def tr(t):
            p, c, q = t
            return [key_text(p), c, key_text(q)]
        return {"holds": self.holds, "path": [tr(t) for t in self.path],
                "cycles": {c: {"anchor": i, "cycle": [tr(t) for t in cyc]}
                           for c, (i, cyc) in sorted(self.cycles.items())}}


def _pumpable(N: Nfa, chars):
    adj = {s: [q for _, q in es] for s, es in N.out_edges().items()}
    comp_of = {}
    for i, comp in enumerate(sccs(csorted(N.states), adj)):
        for s in comp:
            comp_of[s] = i
    inner = {}
    for p, c, q in N.transitions:
        if c in chars and comp_of[p] == comp_of[q]:
            inner.setdefault(comp_of[p], set()).add(c)
    pump = {s: frozenset(inner.get(comp_of[s], ())) for s in N.states}
    return pump, comp_of


def _bfs_path(N, src, allowed):
    adj = N.out_edges()
    prev = {src: None}
    todo = deque([src])
    while todo:
        p = todo.popleft()
        for c, q in adj.get(p, ()):
            if q in allowed and q not in prev:
                prev[q] = (p, c)
                todo.append(q)
    return prev


def _trace(prev, node):
    path = []
    while prev[node] is not None:
        p, c = prev[node]
        path.append((p, c, node))
        node = p
    return path[::-1]


def _cycle(N, s, c, comp_of):
    """A cycle through s, inside s's SCC, using at least one c-transition."""
    comp = {x for x in N.states if comp_of[x] == comp_of[s]}
    prev = _bfs_path(N, s, comp)
    for p, cc, q in sorted(N.transitions, key=skey):
        if cc == c and p in comp and q in comp:
            back = _bfs_path(N, q, comp)
            if p in prev and s in back:
                return _trace(prev, p) + [(p, c, q)] + _trace(back, s)
    raise AssertionError("pumpable state without a cycle")


def nfa_diagonal(N: Nfa, chars) -> DiagonalResult:
    """Is there an accepting path visiting, for each c in chars, a state on
    a cycle that reads c? BFS over (state, covered chars)."""
    chars = frozenset(chars)
    pump, comp_of = _pumpable(N, chars)
    adj = N.out_edges()
    start = (N.initial, pump[N.initial] & chars)
    prev = {start: None}
    todo = deque([start])
    goal = None
    while todo:
        node = todo.popleft()
        s, cov = node
        if s in N.finals and cov == chars:
            goal = node
            break
        for c, q in adj.get(s, ()):
            nxt = (q, cov | (pump[q] & chars))
            if nxt not in prev:
                prev[nxt] = (node, c)
                todo.append(nxt)
    if goal is None:
        return DiagonalResult(False)
    steps = []
    node = goal
    while prev[node] is not None:
        p, c = prev[node]
        steps.append((p[0], c, node[0]))
        node = p
    steps.reverse()
    visited = [N.initial] + [q for _, _, q in steps]
    cycles = {}
    for c in csorted(chars):
        i = next(i for i, s in enumerate(visited) if c in pump[s])
        cycles[c] = (i, _cycle(N, visited[i], c, comp_of))
    return DiagonalResult(True, steps, cycles)


def pump_word(res: DiagonalResult, t: int, initial) -> list:
    """The word of the witness path with every cycle repeated t times."""
    visited = [initial] + [q for _, _, q in res.path]
    word = []
    for i in range(len(visited)):
        for c, (j, cyc) in sorted(res.cycles.items()):
            if j == i:
                for _ in range(t):
                    word.extend(x for _, x, _ in cyc if x is not None)
        if i < len(res.path):
            x = res.path[i][1]
            if x is not None:
                word.append(x)
    return word


def nfa_diagonal_oracle(N: Nfa, chars) -> bool:
    """Accepting word with each c in chars at least |states|+1 times?"""
    chars = csorted(set(chars))
    ix = {c: i for i, c in enumerate(chars)}
    cap = len(N.states) + 1
    adj = N.out_edges()
    start = (N.initial, (0,) * len(chars))
    seen = {start}
    todo = [start]
    full = (cap,) * len(chars)
    while todo:
        s, v = todo.pop()
        if s in N.finals and v == full:
            return True
        for c, q in adj.get(s, ()):
            if c in ix:
                w = list(v)
                w[ix[c]] = min(cap, w[ix[c]] + 1)
                w = tuple(w)
            else:
                w = v
            if (q, w) not in seen:
                seen.add((q, w))
                todo.append((q, w))
    return False


def nfa_parikh(N: Nfa, cap: int, chars=None, max_len=None) -> list:
    """Capped Parikh vectors of accepted words (optionally of bounded length)."""
    chars = tuple(N.alphabet if chars is None else chars)
    ix = {c: i for i, c in enumerate(chars)}
    adj = N.out_edges()
    start = (N.initial, (0,) * len(chars))
    seen = {start}
    frontier = [start]
    steps = 0
    while frontier and (max_len is None or steps < max_len):
        steps += 1
        nxt = []
        for s, v in frontier:
            for c, q in adj.get(s, ()):
                w = v
                if c in ix:
                    w = list(v)
                    w[ix[c]] = min(cap, w[ix[c]] + 1)
                    w = tuple(w)
                if (q, w) not in seen:
                    seen.add((q, w))
                    nxt.append((q, w))
        frontier = nxt
    return sorted({v for s, v in seen if s in N.finals})


def parikh_fixpoint0(M: Machine, cap: int) -> list:
    """Exact capped Parikh set of an order-0 machine (finite configuration
    space, so a least fixpoint replaces depth bounds)."""
    chars = tuple(M.outputs)
    ix = {c: i for i, c in enumerate(chars)}
    zero = (0,) * len(chars)
    configs = {(q, a) for q in M.controls for a in M.stack_alphabet}
    V = {c: set() for c in configs}

    def add(u, v):
        return tuple(min(cap, x + y) for x, y in zip(u, v))
    changed = True
    while changed:
        changed = False
        for (q, a) in configs:
            new = set()
            if q in M.finals:
                new.add(zero)
            for r in M.rules_at.get((q, a), ()):
                if r.tests and not tests_pass(M, r, a):
                    continue
                b = r.op.arg
                acc = {zero}
                for o in r.output:
                    if o in ix:
                        acc = {add(u, tuple(int(i == ix[o]) for i in range(len(chars)))) for u in acc}
                for t in r.targets:
                    acc = {add(u, v) for u in acc for v in V[(t, b)]}
                new |= acc
            if not new <= V[(q, a)]:
                V[(q, a)] |= new
                changed = True
    return sorted(V[(M.initial, M.initial_char)])

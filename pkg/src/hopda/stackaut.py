"""Deterministic bottom-up stack automata.

A run reads the linearization of a stack from right to left, starting in
the initial state; the stack is accepted if the state reached after the
leftmost letter is final. Transition tables are total: each letter maps to
a tuple indexed by state.

Automata that differ only in their final states share a `Body`, which is
what lets the canpop family and `ConfigSet` stay cheap.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .canon import csorted
from .errors import AlphabetMismatch, OrderMismatch
from .hostack import Bracket, linearize_stack, order_of


def stack_alphabet(order: int, chars) -> tuple:
    """Input letters for order-`order` stacks over `chars`."""
    letters = list(csorted(set(chars)))
    for l in range(1, order):
        letters += [Bracket(True, l), Bracket(False, l)]
    return tuple(letters)


@dataclass(eq=False)
class Body:
    order: int
    alphabet: tuple
    size: int
    init: int
    delta: dict  # letter -> tuple of successor states
    names: tuple = None
    _index: dict = field(default=None, repr=False)

    def step(self, s: int, x) -> int:
        try:
            return self.delta[x][s]
        except KeyError:
            raise AlphabetMismatch(f"letter {x} not in automaton alphabet") from None

    def read(self, letters, s=None) -> int:
        """Fold letters right to left from `s` (default: initial state)."""
        s = self.init if s is None else s
        d = self.delta
        try:
            for x in reversed(letters):
                s = d[x][s]
        except KeyError as e:
            raise AlphabetMismatch(f"letter {e.args[0]} not in automaton alphabet") from None
        return s

    def eval_stack(self, st) -> int:
        if order_of(st) != self.order:
            raise OrderMismatch(f"order-{order_of(st)} stack given to order-{self.order} automaton")
        if self.order == 0:
            return self.step(self.init, st)
        return self.read(linearize_stack(st))

    def name(self, s):
        return self.names[s] if self.names else f"s{s}"


class StackAutomaton:
    __slots__ = ("body", "finals")

    def __init__(self, body: Body, finals):
        self.body = body
        self.finals = frozenset(finals)

    @property
    def order(self):
        return self.body.order

    @property
    def alphabet(self):
        return self.body.alphabet

    def accepts(self, s) -> bool:
        return self.body.eval_stack(s) in self.finals

    def is_empty(self) -> bool:
        return not (self.finals & reachable_states(self.body))

    def __repr__(self):
        return f"<StackAutomaton order={self.order} states={self.body.size} finals={len(self.finals)}>"


def run(A: StackAutomaton, s) -> bool:
    return A.accepts(s)


def reachable_states(body: Body) -> frozenset:
    seen = {body.init}
    todo = [body.init]
    while todo:
        s = todo.pop()
        for x in body.alphabet:
            t = body.delta[x][s]
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return frozenset(seen)


def from_table(order, alphabet, states, init, finals, trans, default=None) -> StackAutomaton:
    """Build from named states. `trans` maps (state, letter) -> state."""
    states = list(states)
    idx = {s: i for i, s in enumerate(states)}
    if default is not None and default not in idx:
        idx[default] = len(states)
        states.append(default)
    delta = {}
    for x in alphabet:
        row = []
        for s in states:
            t = trans.get((s, x), default)
            if t is None:
                raise AlphabetMismatch(f"no transition for ({s}, {x}) and no default")
            row.append(idx[t])
        delta[x] = tuple(row)
    body = Body(order, tuple(alphabet), len(states), idx[init], delta, tuple(states))
    return StackAutomaton(body, {idx[f] for f in finals})


def trivial(order, chars, accept=True) -> StackAutomaton:
    """One-state automaton accepting all (or no) stacks."""
    alpha = stack_alphabet(order, chars)
    body = Body(order, alpha, 1, 0, {x: (0,) for x in alpha}, ("all",))
    return StackAutomaton(body, {0} if accept else ())


def _check_compatible(A: Body, B: Body):
    if A.order != B.order:
        raise OrderMismatch(f"orders {A.order} and {B.order}")
    if set(A.alphabet) != set(B.alphabet):
        raise AlphabetMismatch("automata over different alphabets")


def product_body(A: Body, B: Body):
    """Reachable product body and the map (a, b) -> product state."""
    _check_compatible(A, B)
    start = (A.init, B.init)
    index = {start: 0}
    order = [start]
    q = deque([start])
    rows = {x: [] for x in A.alphabet}
    while q:
        a, b = q.popleft()
        for x in A.alphabet:
            t = (A.delta[x][a], B.delta[x][b])
            if t not in index:
                index[t] = len(order)
                order.append(t)
                q.append(t)
    for x in A.alphabet:
        dA, dB = A.delta[x], B.delta[x]
        rows[x] = tuple(index[(dA[a], dB[b])] for a, b in order)
    body = Body(A.order, A.alphabet, len(order), 0, rows, tuple(order))
    return body, index


def combine(mode: str, A: StackAutomaton, B: StackAutomaton) -> StackAutomaton:
    if mode not in ("and", "or"):
        raise ValueError(f"mode must be 'and' or 'or', not {mode!r}")
    if A.body is B.body:
        f = A.finals & B.finals if mode == "and" else A.finals | B.finals
        return StackAutomaton(A.body, f)
    body, index = product_body(A.body, B.body)
    if mode == "and":
        fin = {i for (a, b), i in index.items() if a in A.finals and b in B.finals}
    else:
        fin = {i for (a, b), i in index.items() if a in A.finals or b in B.finals}
    return StackAutomaton(body, fin)


def complement(A: StackAutomaton) -> StackAutomaton:
    return StackAutomaton(A.body, frozenset(range(A.body.size)) - A.finals)


def conjunction(autos, order, chars) -> StackAutomaton:
    autos = list(autos)
    if not autos:
        return trivial(order, chars)
    out = autos[0]
    for B in autos[1:]:
        out = combine("and", out, B)
    return out


def single_outer_filter(m: int, chars) -> StackAutomaton:
    """Order-m stacks whose outermost sequence has exactly one element.

    States track the bracket depth below the top level and how many
    top-level elements have been completed (0, 1, or more).
    """
    if m < 1:
        raise OrderMismatch("single_outer_filter needs m >= 1")
    alpha = stack_alphabet(m, chars)
    # state (depth, count) with depth 0 = top level; plus a sink
    states = [(d, c) for d in range(m) for c in range(3)] + ["sink"]
    trans = {}
    for d in range(m):
        for c in range(3):
            s = (d, c)
            for x in alpha:
                if isinstance(x, Bracket):
                    lv = m - 1 - d
                    if not x.opening and x.level == lv:
                        t = (d + 1, c)
                    elif x.opening and x.level == m - d:
                        t = (d - 1, min(c + 1, 2) if d == 1 else c)
                    else:
                        t = "sink"
                else:
                    t = (d, min(c + 1, 2) if m == 1 else c) if d == m - 1 else "sink"
                trans[(s, x)] = t
    for x in alpha:
        trans[("sink", x)] = "sink"
    return from_table(m, alpha, states, (0, 0), [(0, 1)], trans)


def strip_order(A: StackAutomaton) -> StackAutomaton:
    """B with B(u) = A([m u]) for order-(m-1) stacks u.

    For m >= 2 the outer element of [m u] is read as `[_{m-1} lin(u) ]_{m-1}`,
    so B starts after `]_{m-1}` and accepts states that `[_{m-1}` maps into
    A's finals. For m = 1, [1 u] linearizes to the single character u.
    """
    body = A.body
    m = body.order
    if m < 1:
        raise OrderMismatch("strip_order needs order >= 1")
    chars = [x for x in body.alphabet if not isinstance(x, Bracket)]
    alpha = stack_alphabet(m - 1, chars)
    if m == 1:
        nb = Body(0, alpha, body.size, body.init, {x: body.delta[x] for x in alpha}, body.names)
        return StackAutomaton(nb, A.finals)
    init = body.delta[Bracket(False, m - 1)][body.init]
    opn = body.delta[Bracket(True, m - 1)]
    fin = {s for s in range(body.size) if opn[s] in A.finals}
    nb = Body(m - 1, alpha, body.size, init, {x: body.delta[x] for x in alpha}, body.names)
    return StackAutomaton(nb, fin)



class ConfigSet:
    """A regular set of configurations: per-control final sets over one body."""

    def __init__(self, body: Body, finals: dict):
        self.body = body
        self.finals = {q: frozenset(f) for q, f in finals.items()}

    @property
    def order(self):
        return self.body.order

    def accepts(self, q, s) -> bool:
        f = self.finals.get(q)
        return bool(f) and self.body.eval_stack(s) in f

    def restrict(self, q) -> StackAutomaton:
        return StackAutomaton(self.body, self.finals.get(q, ()))

    def controls(self):
        return csorted(q for q, f in self.finals.items() if f)


# text format

def format_automaton(A: StackAutomaton, name_state=None) -> str:
    return _format_body(A.body, {"finals": A.finals})


def format_configset(C: ConfigSet) -> str:
    return _format_body(C.body, C.finals)


def _format_body(body: Body, finals: dict) -> str:
    from .canon import skey

    def nm(s):
        return f"s{s}"
    lines = ["states " + " ".join(nm(s) for s in range(body.size)) + ";", f"init {nm(body.init)};"]
    for key in sorted(finals, key=skey):
        f = " ".join(nm(s) for s in sorted(finals[key]))
        head = "finals" if key == "finals" else f"finals {key_text(key)}:"
        lines.append(f"{head} {f};")
    # the most common successor becomes the default
    counts = {}
    for row in body.delta.values():
        for t in row:
            counts[t] = counts.get(t, 0) + 1
    default = max(sorted(counts), key=lambda t: counts[t]) if counts else None
    for s in range(body.size):
        for x in body.alphabet:
            t = body.delta[x][s]
            if t != default:
                lines.append(f"delta {nm(s)} {x} -> {nm(t)};")
    if default is not None:
        lines.append(f"default -> {nm(default)};")
    return "\n".join(lines)


def key_text(q) -> str:
    if isinstance(q, tuple):
        return "<" + "|".join(key_text(x) for x in q) + ">"
    return str(q)


def parse_automaton_block(text: str, order: int, chars, line_offset: int = 0) -> StackAutomaton:
    """Parse `states ..; init ..; finals ..; delta s x -> t; default -> t;`."""
    from .errors import ParseError
    from .hostack import parse_letter
    states, init, finals, trans, default = None, None, [], {}, None
    alpha = stack_alphabet(order, chars)
    for stmt, line in _statements(text, line_offset):
        words = stmt.split()
        head = words[0]
        if head == "states":
            states = words[1:]
        elif head == "init":
            init = words[1]
        elif head == "finals":
            finals = words[1:]
        elif head == "delta":
            if len(words) != 5 or words[3] != "->":
                raise ParseError(f"bad delta statement {stmt!r}", line)
            x = parse_letter(words[2])
            if x not in alpha:
                raise ParseError(f"letter {words[2]} not valid for an order-{order} test", line)
            trans[(words[1], x)] = words[4]
        elif head == "default":
            if len(words) != 3 or words[1] != "->":
                raise ParseError(f"bad default statement {stmt!r}", line)
            default = words[2]
        else:
            raise ParseError(f"unknown automaton statement {head!r}", line)
    if states is None or init is None:
        raise ParseError("automaton block needs 'states' and 'init'", line_offset)
    known = set(states) | ({default} if default else set())
    for s in [init, *finals, *(t for t in trans.values()), *(s for s, _ in trans)]:
        if s not in known:
            from .errors import UnknownSymbol
            raise UnknownSymbol(f"unknown automaton state {s!r}")
    try:
        return from_table(order, alpha, states, init, finals, trans, default)
    except AlphabetMismatch as e:
        raise ParseError(str(e), line_offset) from None


def _statements(text, line_offset):
    line = line_offset
    buf, start = [], None
    for ch in text:
        if ch == "\n":
            line += 1
        if ch == ";":
            s = "".join(buf).strip()
            if s:
                yield s, start
            buf, start = [], None
        else:
            if start is None and not ch.isspace():
                start = line
            buf.append(ch)
    if "".join(buf).strip():
        from .errors import ParseError
        raise ParseError("missing ';'", line)

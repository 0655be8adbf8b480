"""Higher-order stacks.

An order-0 stack is a bare character (any hashable that is not a `Stack`).
An order-l stack (l >= 1) is a `Stack` holding a tuple of order-(l-1)
stacks, topmost first. Values are immutable and hash-consed lazily through
a cached hash, so sharing substructure between configurations is free.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import EmptyAlongSpine, OrderMismatch, ParseError


class Stack:
    __slots__ = ("order", "items", "_hash")

    def __init__(self, order: int, items=()):
        if order < 1:
            raise OrderMismatch("Stack objects have order >= 1; order 0 is a bare character")
        self.order = order
        self.items = tuple(items)
        self._hash = None

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Stack):
            return NotImplemented
        return self.order == other.order and hash(self) == hash(other) and self.items == other.items

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((self.order, self.items))
        return h

    def __len__(self):
        return len(self.items)

    def __repr__(self):
        return format_stack(self)

    def sort_key(self):
        return ("stack", format_stack(self))


def order_of(s) -> int:
    return s.order if isinstance(s, Stack) else 0


def empty_stack(order: int) -> Stack:
    return Stack(order, ())


def initial_stack(order: int, a):
    """The stack [n [n-1 ... [1 a]...]] holding the single character `a`."""
    s = a
    for l in range(1, order + 1):
        s = Stack(l, (s,))
    return s


def top(l: int, s):
    """Topmost order-l constituent of `s` (for l = 0 the top character)."""
    n = order_of(s)
    if not 0 <= l < n:
        raise OrderMismatch(f"top({l}) on an order-{n} stack")
    while order_of(s) > l:
        if not s.items:
            raise EmptyAlongSpine(f"empty order-{s.order} stack on the spine")
        s = s.items[0]
    return s


def top_char(s):
    return s if not isinstance(s, Stack) else top(0, s)


def _update(s, level, fn):
    # rebuild the spine down to the order-`level` stack and apply fn there
    if s.order == level:
        return fn(s)
    if not s.items:
        raise EmptyAlongSpine(f"empty order-{s.order} stack on the spine")
    return Stack(s.order, (_update(s.items[0], level, fn),) + s.items[1:])


@dataclass(frozen=True)
class Op:
    """A stack operation: rew(a), push(l), pop(l), or toptest(a).

    toptest only appears in operation sequences before normalization.
    """

    kind: str
    arg: object

    def __str__(self):
        return f"{self.kind}({self.arg})"

    def sort_key(self):
        from .canon import skey
        return (self.kind, skey(self.arg))


def rew(a) -> Op:
    return Op("rew", a)


def push(l: int) -> Op:
    return Op("push", l)


def pop(l: int) -> Op:
    return Op("pop", l)


def toptest(a) -> Op:
    return Op("toptest", a)


def apply_op(op: Op, s):
    k = op.kind
    if k == "rew":
        if not isinstance(s, Stack):
            return op.arg
        b = op.arg
        return _update(s, 1, lambda t: _rew1(t, b))
    if k == "toptest":
        if top_char(s) != op.arg:
            raise EmptyAlongSpine(f"toptest({op.arg}) failed")
        return s
    l = op.arg
    n = order_of(s)
    if not 1 <= l <= n:
        raise OrderMismatch(f"{op} on an order-{n} stack")
    if k == "push":
        return _update(s, l, _push)
    if k == "pop":
        return _update(s, l, _pop)
    raise ValueError(f"unknown operation {op!r}")


def _rew1(t, b):
    if not t.items:
        raise EmptyAlongSpine("empty order-1 stack")
    return Stack(1, (b,) + t.items[1:])


def _push(t):
    if not t.items:
        raise EmptyAlongSpine(f"push on empty order-{t.order} stack")
    return Stack(t.order, (t.items[0],) + t.items)


def _pop(t):
    if not t.items:
        raise EmptyAlongSpine(f"pop on empty order-{t.order} stack")
    return Stack(t.order, t.items[1:])


def op_defined(op: Op, s) -> bool:
    try:
        apply_op(op, s)
    except EmptyAlongSpine:
        return False
    return True


# linearization

@dataclass(frozen=True)
class Bracket:
    """Letter `[_l` (opening=True) or `]_l` of a linearized stack."""

    opening: bool
    level: int

    def __str__(self):
        return ("[" if self.opening else "]") + str(self.level)

    __repr__ = __str__

    def sort_key(self):
        return (0 if self.opening else 1, self.level)


def OPEN(l):
    return Bracket(True, l)


def CLOSE(l):
    return Bracket(False, l)


def linearize_stack(s) -> list:
    if not isinstance(s, Stack):
        raise OrderMismatch("linearize_stack needs order >= 1")
    out: list = []
    _lin_items(s, out)
    return out


def _lin_items(s, out):
    if s.order == 1:
        out.extend(s.items)
        return
    lv = s.order - 1
    for e in s.items:
        out.append(Bracket(True, lv))
        _lin_items(e, out)
        out.append(Bracket(False, lv))


def delinearize(order: int, letters) -> Stack:
    """Inverse of linearize_stack."""
    stack = [[]]
    for x in letters:
        if isinstance(x, Bracket):
            if x.opening:
                stack.append([])
            else:
                items = stack.pop()
                stack[-1].append(Stack(x.level, items))
        else:
            stack[-1].append(x)
    if len(stack) != 1:
        raise ParseError("unbalanced linearization")
    return Stack(order, stack[0])


def stack_size(s) -> int:
    """Number of characters in the stack."""
    if not isinstance(s, Stack):
        return 1
    return sum(stack_size(e) for e in s.items)


# text syntax

def format_stack(s) -> str:
    if not isinstance(s, Stack):
        return str(s)
    inner = " ".join(format_stack(e) for e in s.items)
    return f"[{s.order} {inner}]" if inner else f"[{s.order}]"


_TOK = re.compile(r"\s*(?:(\[)(\d+)|(\])|([^\s\[\]]+))")


def parse_stack(text: str):
    pos, toks = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m:
            raise ParseError(f"bad stack syntax at offset {pos}: {text!r}")
        toks.append(m.groups())
        pos = m.end()
    if not toks:
        raise ParseError("empty stack text")
    i = 0

    def parse():
        nonlocal i
        opn, lvl, cls, word = toks[i]
        i += 1
        if word is not None:
            return word
        if cls is not None:
            raise ParseError("unexpected ']'")
        order, items = int(lvl), []
        while True:
            if i >= len(toks):
                raise ParseError("unterminated stack")
            if toks[i][2] is not None:
                i += 1
                break
            items.append(parse())
        for e in items:
            if order_of(e) != order - 1:
                raise ParseError(f"order-{order_of(e)} element inside an order-{order} stack")
        return Stack(order, items)

    s = parse()
    if i != len(toks):
        raise ParseError("trailing input after stack")
    return s


def parse_letter(w: str):
    """`[2` / `]2` become brackets, anything else is a character."""
    if len(w) >= 2 and w[0] in "[]" and w[1:].isdigit():
        return Bracket(w[0] == "[", int(w[1:]))
    return w

"""Readers and writers for machine files, NFA files and decomposition trees.

Machine files are `;`-terminated statements; `#` starts a comment. Test
automata are given as braced blocks, `test T = { states ...; ... };`.
"""
from __future__ import annotations

import re

from .canon import csorted
from .errors import ParseError, UnknownSymbol
from .hostack import Op
from .machine import EPS, Machine, Rule, validate, validate_and_normalize
from .stackaut import format_automaton, key_text, parse_automaton_block


def _strip_comments(text):
    return "\n".join(line.split("#", 1)[0] for line in text.splitlines())


def split_statements(text):
    """Yield (statement, line, col) splitting on `;` outside braces."""
    text = _strip_comments(text)
    depth, buf, start = 0, [], None
    line, col = 1, 0
    for ch in text:
        col += 1
        if ch == "\n":
            line, col = line + 1, 0
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced '}'", line, col)
        if ch == ";" and depth == 0:
            s = "".join(buf).strip()
            if s:
                yield s, start[0], start[1]
            buf, start = [], None
            continue
        if start is None and not ch.isspace():
            start = (line, col)
        buf.append(ch)
    if "".join(buf).strip():
        raise ParseError("missing ';' at end of input", *(start or (line, col)))
    if depth:
        raise ParseError("unclosed '{'", line, col)


_OP = re.compile(r"^(rew|push|pop|toptest)\(([^()\s]+)\)$")


def parse_op(w, line=None, col=None) -> Op:
    m = _OP.match(w)
    if not m:
        raise ParseError(f"bad operation {w!r}", line, col)
    kind, arg = m.groups()
    if kind in ("push", "pop"):
        if not arg.isdigit() or int(arg) < 1:
            raise ParseError(f"bad order in {w!r}", line, col)
        return Op(kind, int(arg))
    return Op(kind, arg)


def parse_machine_text(text: str, normalize: bool = True) -> Machine:
    fields = {}
    rules, test_src = [], {}
    for stmt, line, col in split_statements(text):
        head, _, rest = stmt.partition(" ")
        rest = rest.strip()
        if head in ("order", "branches"):
            try:
                fields[head] = int(rest)
            except ValueError:
                raise ParseError(f"{head} expects an integer", line, col) from None
        elif head == "controls":
            fields["controls"] = tuple(rest.split())
        elif head == "initial":
            w = rest.split()
            if len(w) != 2:
                raise ParseError("initial expects a control and a character", line, col)
            fields["initial"], fields["initial_char"] = w
        elif head == "final":
            fields["finals"] = frozenset(rest.split())
        elif head == "rank":
            rk = {}
            for w in rest.split():
                q, eq, v = w.partition("=")
                if not eq or not v.isdigit():
                    raise ParseError(f"bad rank entry {w!r}", line, col)
                rk[q] = int(v)
            fields["rank"] = rk
        elif head == "outputs":
            outs = tuple(rest.split())
            if EPS in outs:
                raise ParseError("eps cannot be a tracked output", line, col)
            fields["outputs"] = outs
        elif head == "stackalpha":
            fields["stack_alphabet"] = tuple(rest.split())
        elif head == "accept":
            if rest not in ("control", "empty"):
                raise ParseError("accept must be 'control' or 'empty'", line, col)
            fields["acceptance"] = rest
        elif head == "rule":
            rules.append(_parse_rule(rest, line, col))
        elif head == "test":
            name, eq, body = rest.partition("=")
            body = body.strip()
            if not eq or not (body.startswith("{") and body.endswith("}")):
                raise ParseError("test expects 'test NAME = { ... }'", line, col)
            test_src[name.strip()] = (body[1:-1], line)
        else:
            raise ParseError(f"unknown statement {head!r}", line, col)
    for req in ("order", "controls", "initial", "finals", "stack_alphabet"):
        if req not in fields:
            raise ParseError(f"missing '{req}' statement")
    order = fields["order"]
    gam = fields["stack_alphabet"]
    tests = {}
    for name, (body, line) in test_src.items():
        tests[name] = parse_automaton_block(body, order, gam, line)
    for r, line, col in rules:
        for t in r.tests:
            if t not in tests:
                raise UnknownSymbol(f"line {line}: rule {r.source},{r.guard} references unknown test {t!r}")
    M = Machine(order=order, branches=fields.get("branches", 1), controls=fields["controls"],
                outputs=fields.get("outputs", ()), stack_alphabet=gam, initial=fields["initial"],
                initial_char=fields["initial_char"], finals=fields["finals"],
                rank=fields.get("rank", {}), rules=tuple(r for r, _, _ in rules), tests=tests,
                acceptance=fields.get("acceptance", "control"))
    M.rank = {q: M.rank.get(q, 1) for q in M.controls} | {q: v for q, v in M.rank.items()}
    validate(M)
    return validate_and_normalize(M) if normalize else M


def _parse_rule(text, line, col):
    lhs, arrow, rhs = text.partition("->")
    if not arrow:
        raise ParseError("rule needs '->'", line, col)
    left = [w.strip() for w in lhs.split(",")]
    if len(left) not in (2, 3) or not all(left):
        raise ParseError("rule left side is 'q, a [, test T1 & T2]'", line, col)
    tests = ()
    if len(left) == 3:
        if not left[2].startswith("test "):
            raise ParseError("third rule field must start with 'test'", line, col)
        tests = tuple(t.strip() for t in left[2][5:].split("&"))
        if not all(tests):
            raise ParseError("empty test name", line, col)
    right = [w.strip() for w in rhs.split(",")]
    if len(right) != 3:
        raise ParseError("rule right side is 'o, OP, q1 [q2 ...]'", line, col)
    o, ops, tg = right
    if o.startswith("{"):
        if not o.endswith("}"):
            raise ParseError("unterminated output set", line, col)
        output = tuple(w for w in o[1:-1].split() if w != EPS)
    else:
        output = () if o == EPS else (o,)
    op_list = tuple(parse_op(w, line, col) for w in ops.split("+"))
    targets = tuple(tg.split())
    if not targets:
        raise ParseError("rule needs at least one target", line, col)
    return Rule(left[0], left[1], output, op_list, targets, tests), line, col


def load_machine(path, normalize=True) -> Machine:
    with open(path) as f:
        return parse_machine_text(f.read(), normalize=normalize)


def format_machine(M: Machine) -> str:
    kt = key_text
    out = [f"order {M.order}; branches {M.branches};",
           "controls " + " ".join(kt(q) for q in M.controls) + ";",
           f"initial {kt(M.initial)} {M.initial_char};",
           "final " + " ".join(kt(q) for q in csorted(M.finals)) + ";",
           "rank " + " ".join(f"{kt(q)}={M.rank.get(q, 1)}" for q in M.controls) + ";"]
    if M.outputs:
        out.append("outputs " + " ".join(map(str, M.outputs)) + ";")
    out.append("stackalpha " + " ".join(map(str, M.stack_alphabet)) + ";")
    out.append(f"accept {M.acceptance};")
    for r in sorted(M.rules, key=lambda r: r.sort_key()):
        out.append(str(r))
    for name in csorted(M.tests):
        block = format_automaton(M.tests[name]).replace("\n", "\n  ")
        out.append(f"test {name} = {{\n  {block}\n}};")
    return "\n".join(out) + "\n"


# NFA files: `initial p; final p q; trans p c q; states ...; alphabet ...;`

def parse_nfa_text(text: str):
    from .base0 import Nfa
    states, alphabet, trans = [], [], []
    initial, finals = None, []
    for stmt, line, col in split_statements(text):
        w = stmt.split()
        head = w[0]
        if head == "states":
            states = w[1:]
        elif head == "alphabet":
            alphabet = w[1:]
        elif head == "initial":
            if len(w) != 2:
                raise ParseError("initial expects one state", line, col)
            initial = w[1]
        elif head == "final":
            finals = w[1:]
        elif head == "trans":
            if len(w) != 4:
                raise ParseError("trans expects 'trans p c q'", line, col)
            trans.append((w[1], None if w[2] == EPS else w[2], w[3]))
        else:
            raise ParseError(f"unknown NFA statement {head!r}", line, col)
    if initial is None:
        raise ParseError("NFA needs an initial state")
    allst = list(dict.fromkeys(states + [initial] + finals + [p for p, _, _ in trans] + [q for _, _, q in trans]))
    chars = list(dict.fromkeys(alphabet + [c for _, c, _ in trans if c is not None]))
    return Nfa(tuple(allst), tuple(chars), tuple(trans), initial, frozenset(finals))


def format_nfa(N) -> str:
    from .canon import skey
    kt = key_text
    lines = ["states " + " ".join(kt(s) for s in N.states) + ";",
             "alphabet " + " ".join(map(str, N.alphabet)) + ";",
             f"initial {kt(N.initial)};",
             "final " + " ".join(kt(s) for s in csorted(N.finals)) + ";"]
    for p, c, q in sorted(N.transitions, key=skey):
        lines.append(f"trans {kt(p)} {EPS if c is None else c} {kt(q)};")
    return "\n".join(lines) + "\n"


# decomposition trees as s-expressions: (label child ...), label eps for ε

def parse_tree(text: str):
    from .scores import DTree
    toks = re.findall(r"\(|\)|[^\s()]+", _strip_comments(text))
    i = 0

    def node():
        nonlocal i
        if i >= len(toks) or toks[i] != "(":
            raise ParseError("expected '('")
        i += 1
        if i >= len(toks) or toks[i] in "()":
            raise ParseError("expected a label")
        label = None if toks[i] == EPS else toks[i]
        i += 1
        kids = []
        while i < len(toks) and toks[i] == "(":
            kids.append(node())
        if i >= len(toks) or toks[i] != ")":
            raise ParseError("expected ')'")
        i += 1
        return DTree(label, tuple(kids))

    t = node()
    if i != len(toks):
        raise ParseError("trailing input after tree")
    return t


def format_tree(t) -> str:
    lab = EPS if t.label is None else t.label
    if not t.children:
        return f"({lab})"
    return f"({lab} " + " ".join(format_tree(c) for c in t.children) + ")"
